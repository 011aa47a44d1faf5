#pragma once

#include <cctype>
#include <cstdlib>
#include <string>
#include <string_view>
#include <vector>

#include "stochrob/model.hpp"

namespace stochrob {

struct Token {
    enum Kind { Ident, Number, Punct, End };
    Kind kind = End;
    std::string text;
    double number = 0.0;
    int line = 0;
    int column = 0;

    bool is(std::string_view p) const { return kind == Punct && text == p; }
    bool is_word(std::string_view w) const { return kind == Ident && text == w; }
};

// Splits one chunk of source.  `#` starts a comment running to end of line.
inline std::vector<Token> tokenize(std::string_view src, int line, int column0 = 1) {
    std::vector<Token> out;
    std::size_t i = 0;
    int col_base = column0;
    auto column = [&](std::size_t at) { return col_base + static_cast<int>(at); };
    while (i < src.size()) {
        char c = src[i];
        if (c == '\n') {
            ++line;
            col_base = -static_cast<int>(i);
            ++i;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '#') {
            while (i < src.size() && src[i] != '\n') ++i;
            continue;
        }
        Token t;
        t.line = line;
        t.column = column(i);
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            t.kind = Token::Ident;
            t.text = std::string(src.substr(i, j - i));
            i = j;
        } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                   (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            std::string buf(src.substr(i));
            char* end = nullptr;
            t.number = std::strtod(buf.c_str(), &end);
            std::size_t len = static_cast<std::size_t>(end - buf.c_str());
            t.kind = Token::Number;
            t.text = buf.substr(0, len);
            i += len;
        } else {
            static const char* two[] = {"->", "<=", ">=", "==", "!=", "=?", "&&", "||"};
            t.kind = Token::Punct;
            bool matched = false;
            for (const char* p : two) {
                if (src.substr(i, 2) == p) {
                    t.text = p;
                    i += 2;
                    matched = true;
                    break;
                }
            }
            if (!matched) {
                static const std::string_view single = ":@()[],;+-*=<>!&|{}?/";
                if (single.find(c) == std::string_view::npos)
                    throw ParseError(line, t.column, std::string("unexpected character '") + c + "'");
                t.text = std::string(1, c);
                ++i;
            }
        }
        out.push_back(std::move(t));
    }
    Token end;
    end.kind = Token::End;
    end.line = line;
    end.column = column(src.size());
    out.push_back(end);
    return out;
}

class TokenStream {
public:
    explicit TokenStream(const std::vector<Token>& toks) : toks_(toks) {}

    const Token& peek(std::size_t k = 0) const {
        std::size_t at = pos_ + k;
        return at < toks_.size() ? toks_[at] : toks_.back();
    }
    const Token& next() {
        const Token& t = peek();
        if (pos_ + 1 < toks_.size()) ++pos_;
        return t;
    }
    bool at_end() const { return peek().kind == Token::End; }
    std::size_t position() const { return pos_; }
    void rewind(std::size_t p) { pos_ = p; }

    bool accept(std::string_view p) {
        if (!peek().is(p)) return false;
        next();
        return true;
    }
    bool accept_word(std::string_view w) {
        if (!peek().is_word(w)) return false;
        next();
        return true;
    }
    const Token& expect(std::string_view p) {
        if (!peek().is(p)) throw error(peek(), "expected '" + std::string(p) + "'");
        return next();
    }
    const Token& expect_word(std::string_view w) {
        if (!peek().is_word(w)) throw error(peek(), "expected '" + std::string(w) + "'");
        return next();
    }
    const Token& expect_ident() {
        if (peek().kind != Token::Ident) throw error(peek(), "expected an identifier");
        return next();
    }
    const Token& expect_number() {
        if (peek().kind != Token::Number) throw error(peek(), "expected a number");
        return next();
    }
    void expect_end() {
        if (!at_end()) throw error(peek(), "unexpected '" + peek().text + "'");
    }

    ParseError error(const Token& at, const std::string& msg) const {
        return ParseError(at.line, at.column, msg);
    }

private:
    const std::vector<Token>& toks_;
    std::size_t pos_ = 0;
};

}  // namespace stochrob
