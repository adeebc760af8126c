#include "cls/codec/sexpr.hpp"

#include "cls/codec/error.hpp"

namespace cls::codec {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

bool is_printable(char c) {
    const auto u = static_cast<unsigned char>(c);
    return u >= 0x20 && u < 0x7f;
}

bool is_bare_char(char c) { return is_printable(c) && c != ' ' && c != '(' && c != ')' && c != '"'; }

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {
        while (!text_.empty() && text_.back() == '\0') text_.remove_suffix(1);
    }

    bool at_end() {
        skip_space();
        return pos_ >= text_.size();
    }

    SExpr parse_one() {
        skip_space();
        if (pos_ >= text_.size()) throw CodecError(ErrorKind::EmptyInput, "no expression", pos_);
        // Explicit stack so hostile nesting depth cannot exhaust the call stack.
        std::vector<SExpr::List> stack;
        std::vector<std::size_t> open_at;
        for (;;) {
            skip_space();
            if (pos_ >= text_.size()) {
                throw CodecError(ErrorKind::UnbalancedParens, "missing ')' for '(' at " + std::to_string(open_at.back()),
                                 pos_);
            }
            const char c = text_[pos_];
            SExpr done;
            if (c == '(') {
                if (stack.size() == kMaxNestingDepth)
                    throw CodecError(ErrorKind::NestingTooDeep, "more than " + std::to_string(kMaxNestingDepth) + " levels", pos_);
                open_at.push_back(pos_);
                stack.emplace_back();
                ++pos_;
                continue;
            }
            if (c == ')') {
                if (stack.empty()) throw CodecError(ErrorKind::UnbalancedParens, "unexpected ')'", pos_);
                ++pos_;
                done = SExpr::list(std::move(stack.back()));
                stack.pop_back();
                open_at.pop_back();
            } else if (c == '"') {
                done = quoted_atom();
            } else if (is_bare_char(c)) {
                done = bare_atom();
            } else {
                throw CodecError(ErrorKind::IllegalCharacter, "illegal byte", pos_);
            }
            if (stack.empty()) return done;
            stack.back().push_back(std::move(done));
        }
    }

private:
    void skip_space() {
        while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
    }

    SExpr bare_atom() {
        const std::size_t start = pos_;
        while (pos_ < text_.size() && is_bare_char(text_[pos_])) ++pos_;
        if (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (!is_space(c) && c != '(' && c != ')' && c != '"')
                throw CodecError(ErrorKind::IllegalCharacter, "illegal byte in atom", pos_);
        }
        return SExpr::atom(std::string(text_.substr(start, pos_ - start)));
    }

    SExpr quoted_atom() {
        const std::size_t start = pos_;
        ++pos_;
        std::string out;
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            if (c == '"') {
                ++pos_;
                return SExpr::atom(std::move(out), true);
            }
            if (c == '\\') {
                ++pos_;
                if (pos_ >= text_.size()) break;
                const char e = text_[pos_];
                if (!is_printable(e)) throw CodecError(ErrorKind::IllegalCharacter, "illegal escaped byte", pos_);
                out.push_back(e);
                ++pos_;
                continue;
            }
            if (!is_printable(c) && !is_space(c))
                throw CodecError(ErrorKind::IllegalCharacter, "illegal byte in string", pos_);
            out.push_back(c);
            ++pos_;
        }
        throw CodecError(ErrorKind::UnterminatedString, "missing closing quote", start);
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

void write(const SExpr& e, std::string& out) {
    if (e.is_atom()) {
        const auto& a = e.as_atom();
        if (!a.quoted && is_bare_atom_text(a.text)) {
            out += a.text;
            return;
        }
        out.push_back('"');
        for (char c : a.text) {
            if (c == '"' || c == '\\') out.push_back('\\');
            out.push_back(c);
        }
        out.push_back('"');
        return;
    }
    out.push_back('(');
    bool first = true;
    for (const auto& child : e.as_list()) {
        if (!first) out.push_back(' ');
        first = false;
        write(child, out);
    }
    out.push_back(')');
}

}  // namespace

bool is_bare_atom_text(std::string_view text) {
    if (text.empty()) return false;
    for (char c : text)
        if (!is_bare_char(c)) return false;
    return true;
}

SExpr parse_sexpr(std::string_view text) {
    Parser p(text);
    SExpr e = p.parse_one();
    if (!p.at_end()) throw CodecError(ErrorKind::TrailingInput, "data after the expression");
    return e;
}

std::vector<SExpr> parse_sexpr_sequence(std::string_view text) {
    Parser p(text);
    std::vector<SExpr> out;
    out.push_back(p.parse_one());
    while (!p.at_end()) out.push_back(p.parse_one());
    return out;
}

std::string serialize_sexpr(const SExpr& expr) {
    std::string out;
    write(expr, out);
    return out;
}

}  // namespace cls::codec
