#include "ipdb/parser.hpp"

#include <cctype>
#include <charconv>
#include <optional>

#include "ipdb/errors.hpp"

namespace ipdb {

namespace {

enum class Tok { name, integer, string, lparen, rparen, comma, dot, bang, amp, bar, arrow, equals, end };

struct Token {
    Tok kind;
    std::size_t pos;
    std::string text;
};

std::string describe(const Token& t)
{
    switch (t.kind) {
    case Tok::end: return "end of input";
    case Tok::string: return "string '" + t.text + "'";
    default: return "'" + t.text + "'";
    }
}

std::vector<Token> tokenize(std::string_view s)
{
    std::vector<Token> out;
    std::size_t i = 0;
    auto is_name_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; };
    while (i < s.size()) {
        const char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (i < s.size() && is_name_char(s[i]))
                ++i;
            out.push_back({Tok::name, start, std::string(s.substr(start, i - start))});
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])))
                ++i;
            out.push_back({Tok::integer, start, std::string(s.substr(start, i - start))});
        } else if (c == '\'') {
            std::string text;
            ++i;
            for (;;) {
                if (i >= s.size())
                    throw ParseError(start, "unterminated string");
                if (s[i] == '\\' && i + 1 < s.size()) {
                    text += s[i + 1];
                    i += 2;
                } else if (s[i] == '\'') {
                    ++i;
                    break;
                } else {
                    text += s[i++];
                }
            }
            out.push_back({Tok::string, start, std::move(text)});
        } else if (c == '-' && i + 1 < s.size() && s[i + 1] == '>') {
            i += 2;
            out.push_back({Tok::arrow, start, "->"});
        } else {
            Tok k;
            switch (c) {
            case '(': k = Tok::lparen; break;
            case ')': k = Tok::rparen; break;
            case ',': k = Tok::comma; break;
            case '.': k = Tok::dot; break;
            case '!': k = Tok::bang; break;
            case '&': k = Tok::amp; break;
            case '|': k = Tok::bar; break;
            case '=': k = Tok::equals; break;
            default: throw ParseError(start, std::string("unexpected character '") + c + "'");
            }
            ++i;
            out.push_back({k, start, std::string(1, c)});
        }
    }
    out.push_back({Tok::end, s.size(), ""});
    return out;
}

bool is_variable_name(const std::string& s)
{
    return !s.empty() && std::islower(static_cast<unsigned char>(s[0]));
}

class Parser {
  public:
    Parser(std::vector<Token> tokens, const Schema& schema) : toks_(std::move(tokens)), schema_(schema) {}

    Formula parse_all()
    {
        Formula f = formula();
        if (peek().kind != Tok::end)
            fail("expected end of input");
        return f;
    }

  private:
    const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(at_ + ahead, toks_.size() - 1)]; }
    const Token& take() { return toks_[at_ < toks_.size() - 1 ? at_++ : at_]; }

    [[noreturn]] void fail(const std::string& what) const
    {
        throw ParseError(peek().pos, what + ", found " + describe(peek()));
    }

    void expect(Tok k, const char* what)
    {
        if (peek().kind != k)
            fail(std::string("expected ") + what);
        take();
    }

    Formula formula()
    {
        Formula lhs = disjunction();
        if (peek().kind == Tok::arrow) {
            take();
            return Formula::implication(std::move(lhs), formula());
        }
        return lhs;
    }

    Formula disjunction()
    {
        Formula f = conjunction();
        while (peek().kind == Tok::bar) {
            take();
            f = Formula::disjunction(std::move(f), conjunction());
        }
        return f;
    }

    Formula conjunction()
    {
        Formula f = unary();
        while (peek().kind == Tok::amp) {
            take();
            f = Formula::conjunction(std::move(f), unary());
        }
        return f;
    }

    Formula unary()
    {
        const Token& t = peek();
        if (t.kind == Tok::bang) {
            take();
            return Formula::negation(unary());
        }
        if (t.kind == Tok::name && (t.text == "exists" || t.text == "forall") && peek(1).kind == Tok::name) {
            const bool ex = t.text == "exists";
            take();
            if (!is_variable_name(peek().text))
                fail("expected a variable");
            std::string var = take().text;
            expect(Tok::dot, "'.' after quantified variable");
            Formula body = formula();
            return ex ? Formula::exists(std::move(var), std::move(body))
                      : Formula::forall(std::move(var), std::move(body));
        }
        return primary();
    }

    Formula primary()
    {
        const Token& t = peek();
        if (t.kind == Tok::lparen) {
            take();
            Formula f = formula();
            expect(Tok::rparen, "')'");
            return f;
        }
        if (t.kind == Tok::name && peek(1).kind == Tok::lparen)
            return atom();
        Term lhs = term();
        expect(Tok::equals, "'=' or a relation atom");
        Term rhs = term();
        return Formula::equality(std::move(lhs), std::move(rhs));
    }

    Formula atom()
    {
        const Token name = take();
        const auto arity = schema_.arity(name.text);
        if (!arity)
            throw ParseError(name.pos, "unknown relation " + name.text);
        take(); // '('
        std::vector<Term> args;
        if (peek().kind != Tok::rparen) {
            args.push_back(term());
            while (peek().kind == Tok::comma) {
                const std::size_t comma = take().pos;
                if (peek().kind == Tok::rparen || peek().kind == Tok::end)
                    throw ParseError(comma, "dangling ',' in argument list of " + name.text);
                args.push_back(term());
            }
        }
        expect(Tok::rparen, "',' or ')'");
        if (args.size() != *arity)
            throw ParseError(name.pos, "relation " + name.text + " has arity " + std::to_string(*arity) +
                                           ", got " + std::to_string(args.size()) + " arguments");
        return Formula::atom(name.text, std::move(args));
    }

    Term term()
    {
        const Token& t = peek();
        switch (t.kind) {
        case Tok::name:
            if (!is_variable_name(t.text) || t.text == "exists" || t.text == "forall")
                fail("expected a term");
            return Variable{take().text};
        case Tok::integer: {
            std::uint64_t v = 0;
            const auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
            if (ec != std::errc{} || p != t.text.data() + t.text.size())
                fail("integer constant out of range");
            take();
            return Element{v};
        }
        case Tok::string: return Element{take().text};
        default: fail("expected a term");
        }
    }

    std::vector<Token> toks_;
    std::size_t at_ = 0;
    const Schema& schema_;
};

} // namespace

Formula parse_formula(std::string_view text, const Schema& schema)
{
    return Parser(tokenize(text), schema).parse_all();
}

} // namespace ipdb
