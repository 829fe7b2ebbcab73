#include "cfgs/asp/serialize.hpp"

#include <algorithm>
#include <cctype>

namespace cfgs::asp {

namespace {

bool is_plain_symbol(const std::string& s) {
    if (s.empty() || !std::islower(static_cast<unsigned char>(s[0]))) return false;
    if (s == "not") return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    });
}

std::string quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'' || c == '\\') out += '\\';
        out += c;
    }
    return out + "'";
}

int precedence(const Term& t) {
    if (!t.is_arithmetic()) return 3;
    return t.name() == "*" ? 2 : 1;
}

std::string arith(const Term& t) {
    const int p = precedence(t);
    const auto& l = t.args()[0];
    const auto& r = t.args()[1];
    std::string ls = to_string(l);
    std::string rs = to_string(r);
    // Left-associative: the right operand needs parentheses at equal
    // precedence, the left one only at lower precedence.
    if (precedence(l) < p) ls = "(" + ls + ")";
    if (precedence(r) <= p && r.is_arithmetic()) rs = "(" + rs + ")";
    if (r.is_int() && r.value() < 0) rs = "(" + rs + ")";
    return ls + t.name() + rs;
}

}  // namespace

std::string to_string(const Term& term) {
    switch (term.kind()) {
    case Term::Kind::Variable: return term.name();
    case Term::Kind::Int: return std::to_string(term.value());
    case Term::Kind::Symbol: return is_plain_symbol(term.name()) ? term.name() : quote(term.name());
    case Term::Kind::Compound: {
        if (term.is_arithmetic()) return arith(term);
        std::string out = is_plain_symbol(term.name()) ? term.name() : quote(term.name());
        out += '(';
        for (std::size_t i = 0; i < term.args().size(); ++i) {
            if (i) out += ',';
            out += to_string(term.args()[i]);
        }
        return out + ')';
    }
    }
    return {};
}

std::string dual_display_name(const std::string& pred) {
    std::string name = pred;
    std::replace(name.begin(), name.end(), '#', '_');
    return "not_" + name;
}

std::string to_string(const Atom& atom) {
    std::string out = atom.dual ? dual_display_name(atom.pred) : atom.pred;
    if (atom.args.empty()) return out;
    out += '(';
    for (std::size_t i = 0; i < atom.args.size(); ++i) {
        if (i) out += ',';
        out += to_string(atom.args[i]);
    }
    return out + ')';
}

std::string to_string(const Literal& literal) {
    return std::visit(
        [](const auto& l) -> std::string {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, PosLit>) {
                return to_string(l.atom);
            } else if constexpr (std::is_same_v<T, NafLit>) {
                return "not " + to_string(l.atom);
            } else if constexpr (std::is_same_v<T, CmpLit>) {
                return to_string(l.lhs) + " " + spelling(l.op) + " " + to_string(l.rhs);
            } else {
                return "forall(" + l.var + ", " + to_string(l.goal) + ")";
            }
        },
        literal);
}

std::string to_string(const Rule& rule) {
    std::string out = to_string(rule.head);
    for (std::size_t i = 0; i < rule.body.size(); ++i) {
        out += i ? ", " : " :- ";
        out += to_string(rule.body[i]);
    }
    return out + ".";
}

std::string serialize(const std::vector<Rule>& rules) {
    std::string out;
    for (const auto& r : rules) {
        out += to_string(r);
        out += '\n';
    }
    return out;
}

std::string serialize(const Program& program) { return serialize(program.rules()); }

}  // namespace cfgs::asp
