#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cls::codec {

enum class ErrorKind {
    // lexical / structural
    EmptyInput,
    UnbalancedParens,
    IllegalCharacter,
    UnterminatedString,
    TrailingInput,
    NestingTooDeep,
    // typed decoding
    UnknownMessageHead,
    UnknownCommandHead,
    FieldCountMismatch,
    NumericParseFailure,
    UnknownObject,
    OutOfRangeField,
};

std::string_view error_kind_name(ErrorKind k);

/// Every failure of the wire codec surfaces as this type; no other exception
/// escapes parse/decode/encode.
class CodecError : public std::runtime_error {
public:
    CodecError(ErrorKind kind, std::string detail, std::size_t position = kNoPosition);

    ErrorKind kind() const { return kind_; }
    /// Byte offset into the input for lexical errors, kNoPosition otherwise.
    std::size_t position() const { return position_; }
    const std::string& detail() const { return detail_; }

    static constexpr std::size_t kNoPosition = static_cast<std::size_t>(-1);

private:
    ErrorKind kind_;
    std::size_t position_;
    std::string detail_;
};

}  // namespace cls::codec
