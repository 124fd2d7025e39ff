#pragma once

#include <orcline/diagnostics.hpp>

#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace orcline {

enum class TokenKind { Ident, Int, String, Punct, End };

struct Token {
    TokenKind kind = TokenKind::End;
    std::string text;  // identifier, decoded string contents, digits, or the punctuation char
    SourceSpan span;

    bool is_punct(char c) const { return kind == TokenKind::Punct && text.size() == 1 && text[0] == c; }
    bool is_ident(std::string_view word) const { return kind == TokenKind::Ident && text == word; }
};

/// Shared tokenizer for the .orc, .fm, .mts and .lts formats.
///
/// Identifiers start with a letter and continue with letters, digits or
/// underscores. `--` starts a comment running to end of line. Integer literals
/// may carry a leading minus sign. Any other printable character is a single
/// punctuation token.
inline std::vector<Token> tokenize(std::string_view src, std::vector<ParseDiagnostic>& diags)
{
    std::vector<Token> tokens;
    std::size_t i = 0;
    std::size_t line = 1;
    std::size_t col = 1;

    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };

    while (i < src.size()) {
        const char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (c == '-' && i + 1 < src.size() && src[i + 1] == '-') {
            while (i < src.size() && src[i] != '\n') {
                advance(1);
            }
            continue;
        }

        Token tok;
        tok.span = SourceSpan{line, col, 0};
        const std::size_t start = i;

        if (std::isalpha(static_cast<unsigned char>(c))) {
            while (i < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) {
                advance(1);
            }
            tok.kind = TokenKind::Ident;
            tok.text = std::string(src.substr(start, i - start));
        } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                   (c == '-' && i + 1 < src.size() &&
                    std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            advance(1);
            while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) {
                advance(1);
            }
            tok.kind = TokenKind::Int;
            tok.text = std::string(src.substr(start, i - start));
        } else if (c == '"') {
            advance(1);
            bool closed = false;
            while (i < src.size()) {
                const char d = src[i];
                if (d == '"') {
                    advance(1);
                    closed = true;
                    break;
                }
                if (d == '\n') {
                    break;
                }
                if (d == '\\' && i + 1 < src.size()) {
                    const char e = src[i + 1];
                    tok.text += (e == 'n') ? '\n' : (e == 't') ? '\t' : e;
                    advance(2);
                    continue;
                }
                tok.text += d;
                advance(1);
            }
            if (!closed) {
                diags.push_back({tok.span, "unterminated string literal", Severity::Error});
            }
            tok.kind = TokenKind::String;
        } else {
            advance(1);
            tok.kind = TokenKind::Punct;
            tok.text = std::string(1, c);
        }
        tok.span.length = i - start;
        tokens.push_back(std::move(tok));
    }

    Token end;
    end.kind = TokenKind::End;
    end.span = SourceSpan{line, col, 0};
    tokens.push_back(end);
    return tokens;
}

/// Cursor over a token vector with diagnostic helpers.
class TokenStream
{
   public:
    TokenStream(std::vector<Token> tokens, std::vector<ParseDiagnostic>& diags)
        : tokens_(std::move(tokens))
        , diags_(diags)
    {
    }

    const Token& peek(std::size_t ahead = 0) const
    {
        const std::size_t k = pos_ + ahead;
        return k < tokens_.size() ? tokens_[k] : tokens_.back();
    }

    const Token& next()
    {
        const Token& t = peek();
        if (pos_ + 1 < tokens_.size()) {
            ++pos_;
        }
        return t;
    }

    bool at_end() const { return peek().kind == TokenKind::End; }

    bool accept_punct(char c)
    {
        if (peek().is_punct(c)) {
            next();
            return true;
        }
        return false;
    }

    bool accept_ident(std::string_view word)
    {
        if (peek().is_ident(word)) {
            next();
            return true;
        }
        return false;
    }

    bool expect_punct(char c)
    {
        if (accept_punct(c)) {
            return true;
        }
        error(peek(), std::string("expected '") + c + "', found " + describe(peek()));
        return false;
    }

    bool expect_ident(std::string& out, std::string_view what)
    {
        if (peek().kind == TokenKind::Ident) {
            out = next().text;
            return true;
        }
        error(peek(), "expected " + std::string(what) + ", found " + describe(peek()));
        return false;
    }

    void error(const Token& at, std::string message)
    {
        diags_.push_back({at.span, std::move(message), Severity::Error});
    }

    void warning(const Token& at, std::string message)
    {
        diags_.push_back({at.span, std::move(message), Severity::Warning});
    }

    static std::string describe(const Token& t)
    {
        switch (t.kind) {
            case TokenKind::End:
                return "end of input";
            case TokenKind::String:
                return "string \"" + t.text + "\"";
            default:
                return "'" + t.text + "'";
        }
    }

   private:
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    std::vector<ParseDiagnostic>& diags_;
};

}  // namespace orcline
