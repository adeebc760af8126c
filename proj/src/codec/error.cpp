#include "cls/codec/error.hpp"

namespace cls::codec {

std::string_view error_kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::EmptyInput: return "EmptyInput";
        case ErrorKind::UnbalancedParens: return "UnbalancedParens";
        case ErrorKind::IllegalCharacter: return "IllegalCharacter";
        case ErrorKind::UnterminatedString: return "UnterminatedString";
        case ErrorKind::TrailingInput: return "TrailingInput";
        case ErrorKind::NestingTooDeep: return "NestingTooDeep";
        case ErrorKind::UnknownMessageHead: return "UnknownMessageHead";
        case ErrorKind::UnknownCommandHead: return "UnknownCommandHead";
        case ErrorKind::FieldCountMismatch: return "FieldCountMismatch";
        case ErrorKind::NumericParseFailure: return "NumericParseFailure";
        case ErrorKind::UnknownObject: return "UnknownObject";
        case ErrorKind::OutOfRangeField: return "OutOfRangeField";
    }
    return "Unknown";
}

namespace {

std::string describe(ErrorKind kind, const std::string& detail, std::size_t position) {
    std::string s(error_kind_name(kind));
    if (position != CodecError::kNoPosition) s += " at " + std::to_string(position);
    if (!detail.empty()) s += ": " + detail;
    return s;
}

}  // namespace

CodecError::CodecError(ErrorKind kind, std::string detail, std::size_t position)
    : std::runtime_error(describe(kind, detail, position)), kind_(kind), position_(position),
      detail_(std::move(detail)) {}

}  // namespace cls::codec
