#include "cfgs/asp/parser.hpp"

#include "cfgs/errors.hpp"

#include <cctype>
#include <charconv>
#include <limits>
#include <optional>
#include <string>

namespace cfgs::asp {

namespace {

constexpr const char* kDecimalFunctor = "$decimal";

enum class Tok {
    End, Ident, Var, Int, Decimal, Quoted, LParen, RParen, Comma, Dot, If, Not,
    Eq, Neq, Ge, Le, Gt, Lt, ArithEq, ArithNeq, Plus, Minus, Star
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    std::size_t line = 1;
    std::size_t col = 1;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        skip_space();
        Token t;
        t.line = line_;
        t.col = col_;
        if (pos_ >= src_.size()) return t;
        const char c = src_[pos_];
        auto single = [&](Tok k) {
            t.kind = k;
            t.text = std::string(1, c);
            advance(1);
            return t;
        };
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t end = pos_;
            while (end < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_'))
                ++end;
            t.text = std::string(src_.substr(pos_, end - pos_));
            advance(end - pos_);
            if (std::isupper(static_cast<unsigned char>(c)) || c == '_')
                t.kind = Tok::Var;
            else
                t.kind = t.text == "not" ? Tok::Not : Tok::Ident;
            return t;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t end = pos_;
            while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) ++end;
            t.kind = Tok::Int;
            if (end + 1 < src_.size() && src_[end] == '.' &&
                std::isdigit(static_cast<unsigned char>(src_[end + 1]))) {
                ++end;
                while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) ++end;
                t.kind = Tok::Decimal;
            }
            t.text = std::string(src_.substr(pos_, end - pos_));
            advance(end - pos_);
            return t;
        }
        if (c == '\'') {
            std::string s;
            std::size_t i = pos_ + 1;
            while (true) {
                if (i >= src_.size() || src_[i] == '\n')
                    throw SyntaxError(t.line, t.col, "unterminated quoted atom");
                if (src_[i] == '\\' && i + 1 < src_.size()) {
                    s += src_[i + 1];
                    i += 2;
                    continue;
                }
                if (src_[i] == '\'') break;
                s += src_[i++];
            }
            advance(i + 1 - pos_);
            t.kind = Tok::Quoted;
            t.text = std::move(s);
            return t;
        }
        auto starts = [&](std::string_view s) { return src_.substr(pos_, s.size()) == s; };
        struct Op {
            std::string_view text;
            Tok kind;
        };
        // Longest spellings first.
        static constexpr Op ops[] = {
            {"#>=", Tok::Ge}, {"#=<", Tok::Le}, {"#\\=", Tok::ArithNeq}, {"#=", Tok::ArithEq},
            {"#>", Tok::Gt},  {"#<", Tok::Lt},  {":-", Tok::If},         {"\\=", Tok::Neq},
            {"=", Tok::Eq},
        };
        for (const auto& op : ops) {
            if (starts(op.text)) {
                t.kind = op.kind;
                t.text = std::string(op.text);
                advance(op.text.size());
                return t;
            }
        }
        switch (c) {
        case '(': return single(Tok::LParen);
        case ')': return single(Tok::RParen);
        case ',': return single(Tok::Comma);
        case '.': return single(Tok::Dot);
        case '+': return single(Tok::Plus);
        case '-': return single(Tok::Minus);
        case '*': return single(Tok::Star);
        default: break;
        }
        throw SyntaxError(t.line, t.col, std::string("unexpected character '") + c + "'");
    }

private:
    void advance(std::size_t n) {
        for (std::size_t i = 0; i < n && pos_ < src_.size(); ++i, ++pos_) {
            if (src_[pos_] == '\n') {
                ++line_;
                col_ = 1;
            } else {
                ++col_;
            }
        }
    }

    void skip_space() {
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (c == '%') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance(1);
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance(1);
            } else {
                break;
            }
        }
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
};

std::optional<CmpOp> cmp_op(Tok k) {
    switch (k) {
    case Tok::Eq: return CmpOp::Eq;
    case Tok::Neq: return CmpOp::Neq;
    case Tok::Ge: return CmpOp::Ge;
    case Tok::Le: return CmpOp::Le;
    case Tok::Gt: return CmpOp::Gt;
    case Tok::Lt: return CmpOp::Lt;
    case Tok::ArithEq: return CmpOp::ArithEq;
    case Tok::ArithNeq: return CmpOp::ArithNeq;
    default: return std::nullopt;
    }
}

CmpOp mirror(CmpOp op) {
    switch (op) {
    case CmpOp::Ge: return CmpOp::Le;
    case CmpOp::Le: return CmpOp::Ge;
    case CmpOp::Gt: return CmpOp::Lt;
    case CmpOp::Lt: return CmpOp::Gt;
    default: return op;
    }
}

bool is_decimal(const Term& t) { return t.is_compound() && t.name() == kDecimalFunctor; }

bool contains_decimal(const Term& t) {
    if (is_decimal(t)) return true;
    if (t.is_compound())
        for (const auto& a : t.args())
            if (contains_decimal(a)) return true;
    return false;
}

class Parser {
public:
    explicit Parser(std::string_view src) : lex_(src) { tok_ = lex_.next(); }

    std::vector<Rule> rules() {
        std::vector<Rule> out;
        while (tok_.kind != Tok::End) out.push_back(rule());
        return out;
    }

    std::vector<Literal> query() {
        std::vector<Literal> body;
        if (tok_.kind == Tok::End) return body;
        body.push_back(literal());
        while (tok_.kind == Tok::Comma) {
            shift();
            body.push_back(literal());
        }
        if (tok_.kind == Tok::Dot) shift();
        expect_end();
        return body;
    }

private:
    [[noreturn]] void fail(const Token& t, const std::string& msg) { throw SyntaxError(t.line, t.col, msg); }

    Token shift() {
        Token t = tok_;
        tok_ = lex_.next();
        return t;
    }

    void expect(Tok k, const char* what) {
        if (tok_.kind != k) fail(tok_, std::string("expected ") + what + describe());
        shift();
    }

    void expect_end() {
        if (tok_.kind != Tok::End) fail(tok_, "unexpected trailing input" + describe());
    }

    std::string describe() const {
        if (tok_.kind == Tok::End) return " but reached end of input";
        return " near '" + tok_.text + "'";
    }

    Rule rule() {
        Token start = tok_;
        Rule r;
        Term head = expr();
        r.head = as_atom(head, start);
        if (tok_.kind == Tok::If) {
            shift();
            r.body.push_back(literal());
            while (tok_.kind == Tok::Comma) {
                shift();
                r.body.push_back(literal());
            }
        }
        expect(Tok::Dot, "'.'");
        return r;
    }

    Atom as_atom(const Term& t, const Token& at) {
        if (t.is_sym()) return Atom{t.name(), {}, false};
        if (t.is_compound() && !t.is_arithmetic() && !is_decimal(t)) {
            for (const auto& a : t.args())
                if (contains_decimal(a)) fail(at, "decimal values are only allowed in comparisons");
            return Atom{t.name(), t.args(), false};
        }
        fail(at, "expected an atom");
    }

    Literal literal() {
        Token start = tok_;
        if (tok_.kind == Tok::Not) {
            shift();
            Token at = tok_;
            return NafLit{as_atom(expr(), at)};
        }
        Term lhs = expr();
        if (auto op = cmp_op(tok_.kind)) {
            shift();
            Term rhs = expr();
            return comparison(*op, std::move(lhs), std::move(rhs), start);
        }
        return PosLit{as_atom(lhs, start)};
    }

    Literal comparison(CmpOp op, Term lhs, Term rhs, const Token& at) {
        const bool ld = is_decimal(lhs), rd = is_decimal(rhs);
        if ((ld && !rd && !contains_decimal(rhs)) || (rd && !ld && !contains_decimal(lhs))) {
            if (!is_ordered(op)) fail(at, "decimal values are only allowed in ordered comparisons");
            const bool flip = ld;
            const Term& dec = flip ? lhs : rhs;
            try {
                auto [nop, v] = normalize_threshold(flip ? mirror(op) : op, dec.args()[0].name());
                Term other = flip ? rhs : lhs;
                return CmpLit{nop, std::move(other), Term::integer(v)};
            } catch (const SyntaxError& e) {
                fail(at, e.message());
            }
        }
        if (contains_decimal(lhs) || contains_decimal(rhs)) fail(at, "non-integer arithmetic is not supported");
        return CmpLit{op, std::move(lhs), std::move(rhs)};
    }

    Term expr() {
        Term t = product();
        while (tok_.kind == Tok::Plus || tok_.kind == Tok::Minus) {
            std::string op = shift().text;
            t = Term::compound(op, {std::move(t), product()});
        }
        return t;
    }

    Term product() {
        Term t = primary();
        while (tok_.kind == Tok::Star) {
            shift();
            t = Term::compound("*", {std::move(t), primary()});
        }
        return t;
    }

    Term primary() {
        Token t = tok_;
        switch (t.kind) {
        case Tok::Var: shift(); return Term::var(t.text);
        case Tok::Int: shift(); return Term::integer(to_int(t, t.text));
        case Tok::Decimal: shift(); return Term::compound(kDecimalFunctor, {Term::sym(t.text)});
        case Tok::Minus: {
            shift();
            Token n = tok_;
            if (n.kind == Tok::Int) {
                shift();
                return Term::integer(to_int(n, "-" + n.text));
            }
            if (n.kind == Tok::Decimal) {
                shift();
                return Term::compound(kDecimalFunctor, {Term::sym("-" + n.text)});
            }
            fail(n, "expected a number after '-'");
        }
        case Tok::LParen: {
            shift();
            Term inner = expr();
            expect(Tok::RParen, "')'");
            return inner;
        }
        case Tok::Ident:
        case Tok::Quoted: {
            shift();
            if (tok_.kind != Tok::LParen) return Term::sym(t.text);
            shift();
            std::vector<Term> args;
            args.push_back(expr());
            while (tok_.kind == Tok::Comma) {
                shift();
                args.push_back(expr());
            }
            expect(Tok::RParen, "')'");
            return Term::compound(t.text, std::move(args));
        }
        default: fail(t, "expected a term" + describe());
        }
    }

    std::int64_t to_int(const Token& at, const std::string& text) {
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc() || p != text.data() + text.size()) fail(at, "integer out of range: " + text);
        return v;
    }

    Lexer lex_;
    Token tok_;
};

}  // namespace

std::pair<CmpOp, std::int64_t> normalize_threshold(CmpOp op, std::string_view decimal) {
    bool negative = false;
    if (!decimal.empty() && (decimal[0] == '-' || decimal[0] == '+')) {
        negative = decimal[0] == '-';
        decimal.remove_prefix(1);
    }
    const auto dot = decimal.find('.');
    std::string_view ipart = decimal.substr(0, dot);
    std::string_view fpart = dot == std::string_view::npos ? std::string_view{} : decimal.substr(dot + 1);
    if (ipart.empty() && fpart.empty()) throw SyntaxError(0, 0, "malformed number");
    std::int64_t whole = 0;
    if (!ipart.empty()) {
        auto [p, ec] = std::from_chars(ipart.data(), ipart.data() + ipart.size(), whole);
        if (ec != std::errc() || p != ipart.data() + ipart.size())
            throw SyntaxError(0, 0, "malformed number: " + std::string(decimal));
    }
    for (char c : fpart)
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw SyntaxError(0, 0, "malformed number: " + std::string(decimal));
    const bool fractional = fpart.find_first_not_of('0') != std::string_view::npos;
    if (!fractional) return {op, negative ? -whole : whole};
    // floor and ceil of the signed value
    const std::int64_t floor_v = negative ? -whole - 1 : whole;
    const std::int64_t ceil_v = floor_v + 1;
    switch (op) {
    case CmpOp::Le:
    case CmpOp::Lt: return {CmpOp::Le, floor_v};
    case CmpOp::Ge:
    case CmpOp::Gt: return {CmpOp::Ge, ceil_v};
    default: throw SyntaxError(0, 0, "fractional value in an equality comparison");
    }
}

std::vector<Rule> parse_rules(std::string_view text) { return Parser(text).rules(); }

Program parse_program(std::string_view text) { return Program(parse_rules(text)); }

std::vector<Literal> parse_query(std::string_view text) { return Parser(text).query(); }

}  // namespace cfgs::asp
