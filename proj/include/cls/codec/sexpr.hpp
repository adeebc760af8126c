#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cls::codec {

/// S-expression node. Atoms keep their lexical form; numeric interpretation
/// happens during typed decoding.
struct SExpr {
    struct Atom {
        std::string text;
        bool quoted = false;  ///< written as a double-quoted string on the wire
        bool operator==(const Atom&) const = default;
    };
    using List = std::vector<SExpr>;

    std::variant<Atom, List> node{Atom{}};

    static SExpr atom(std::string text, bool quoted = false) { return SExpr{Atom{std::move(text), quoted}}; }
    static SExpr list(List children = {}) { return SExpr{std::move(children)}; }

    bool is_atom() const { return std::holds_alternative<Atom>(node); }
    bool is_list() const { return std::holds_alternative<List>(node); }
    const Atom& as_atom() const { return std::get<Atom>(node); }
    const List& as_list() const { return std::get<List>(node); }
    List& as_list() { return std::get<List>(node); }

    bool operator==(const SExpr&) const = default;
};

/// Deepest list nesting the parser accepts; server messages use five.
inline constexpr std::size_t kMaxNestingDepth = 256;

/// Parses exactly one expression. A trailing NUL terminator and surrounding
/// whitespace are accepted. Throws CodecError.
SExpr parse_sexpr(std::string_view text);

/// Parses a datagram holding one or more consecutive expressions, e.g.
/// "(dash 100 0)(turn_neck 30)". Throws CodecError.
std::vector<SExpr> parse_sexpr_sequence(std::string_view text);

/// Canonical text: single spaces between children, no outer whitespace.
/// Atoms that are quoted, empty, or contain delimiters are written quoted with
/// backslash escapes for '"' and '\\'.
std::string serialize_sexpr(const SExpr& expr);

/// True if an unquoted atom with this text survives a serialize/parse cycle
/// unchanged.
bool is_bare_atom_text(std::string_view text);

}  // namespace cls::codec
