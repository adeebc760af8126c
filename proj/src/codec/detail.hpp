#pragma once

// Decoding helpers shared by the server-message and command codecs.

#include <string>
#include <string_view>

#include "cls/codec/error.hpp"
#include "cls/codec/sexpr.hpp"
#include "cls/common/wire_number.hpp"

namespace cls::codec::detail {

inline const SExpr::List& as_list(const SExpr& e, std::string_view what) {
    if (!e.is_list()) throw CodecError(ErrorKind::FieldCountMismatch, std::string(what) + ": expected a list");
    return e.as_list();
}

inline const std::string& as_text(const SExpr& e, std::string_view what) {
    if (!e.is_atom()) throw CodecError(ErrorKind::FieldCountMismatch, std::string(what) + ": expected an atom");
    return e.as_atom().text;
}

/// Head symbol of a list, or empty if the list is empty or starts with a list.
inline std::string_view head_of(const SExpr::List& l) {
    if (l.empty() || !l.front().is_atom() || l.front().as_atom().quoted) return {};
    return l.front().as_atom().text;
}

inline double as_number(const SExpr& e, std::string_view what) {
    if (!e.is_atom() || e.as_atom().quoted)
        throw CodecError(ErrorKind::NumericParseFailure, std::string(what) + ": expected a number");
    auto v = parse_number(e.as_atom().text);
    if (!v) throw CodecError(ErrorKind::NumericParseFailure, std::string(what) + ": '" + e.as_atom().text + "'");
    return *v;
}

inline int as_int(const SExpr& e, std::string_view what) {
    if (!e.is_atom() || e.as_atom().quoted)
        throw CodecError(ErrorKind::NumericParseFailure, std::string(what) + ": expected an integer");
    auto v = parse_integer(e.as_atom().text);
    if (!v || *v < -2147483647LL || *v > 2147483647LL)
        throw CodecError(ErrorKind::NumericParseFailure, std::string(what) + ": '" + e.as_atom().text + "'");
    return static_cast<int>(*v);
}

inline void expect_size(const SExpr::List& l, std::size_t n, std::string_view what) {
    if (l.size() != n)
        throw CodecError(ErrorKind::FieldCountMismatch, std::string(what) + ": expected " + std::to_string(n) +
                                                            " fields, got " + std::to_string(l.size()));
}

inline SExpr num_atom(std::string s) { return SExpr::atom(std::move(s)); }

}  // namespace cls::codec::detail
