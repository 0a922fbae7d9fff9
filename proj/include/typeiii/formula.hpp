#pragma once

// Model formulas: a minimal Wilkinson-style grammar and the containment order on terms.
//
//   formula := name '~' expr
//   expr    := ['-'] product (('+' | '-') product)*
//   product := inter ('*' inter)*
//   inter   := primary (':' primary)*
//   primary := name | '1' | '0' | '(' expr ')'
//
// `A*B` expands to `A + B + A:B`. The intercept is implied unless removed with `-1` or `+0`.

#include "typeiii/error.hpp"

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace typeiii {

// A model effect, identified by the set of factors it crosses. The empty set is the intercept.
class Term {
public:
    Term() = default;

    explicit Term(std::vector<std::string> factors) : factors_(std::move(factors)) {
        for (std::size_t i = 0; i < factors_.size(); ++i) {
            if (factors_[i].empty()) throw std::invalid_argument("empty factor name in term");
            for (std::size_t j = 0; j < i; ++j) {
                if (factors_[j] == factors_[i])
                    throw std::invalid_argument("duplicate factor '" + factors_[i] + "' within term");
            }
        }
    }

    const std::vector<std::string>& factors() const noexcept { return factors_; }
    std::size_t arity() const noexcept { return factors_.size(); }
    bool is_intercept() const noexcept { return factors_.empty(); }

    bool has_factor(std::string_view name) const {
        return std::find(factors_.begin(), factors_.end(), name) != factors_.end();
    }

    std::string label() const {
        if (factors_.empty()) return "(1)";
        std::string out = factors_.front();
        for (std::size_t i = 1; i < factors_.size(); ++i) out += ":" + factors_[i];
        return out;
    }

    // Order-insensitive: A:B == B:A.
    friend bool operator==(const Term& lhs, const Term& rhs) {
        if (lhs.arity() != rhs.arity()) return false;
        return std::all_of(lhs.factors_.begin(), lhs.factors_.end(),
                           [&](const std::string& f) { return rhs.has_factor(f); });
    }

private:
    std::vector<std::string> factors_;
};

// true iff inner's factor set is a strict subset of outer's.
inline bool contains(const Term& inner, const Term& outer) {
    if (inner.arity() >= outer.arity()) return false;
    return std::all_of(inner.factors().begin(), inner.factors().end(),
                       [&](const std::string& f) { return outer.has_factor(f); });
}

struct TermList {
    std::string response;
    std::vector<Term> terms;

    bool has_intercept() const {
        return std::any_of(terms.begin(), terms.end(), [](const Term& t) { return t.is_intercept(); });
    }

    std::optional<std::size_t> index_of(const Term& t) const {
        auto it = std::find(terms.begin(), terms.end(), t);
        if (it == terms.end()) return std::nullopt;
        return static_cast<std::size_t>(it - terms.begin());
    }

    // Distinct factor names in order of first appearance.
    std::vector<std::string> factor_names() const {
        std::vector<std::string> names;
        for (const auto& t : terms)
            for (const auto& f : t.factors())
                if (std::find(names.begin(), names.end(), f) == names.end()) names.push_back(f);
        return names;
    }

    // Every term's marginal terms (all sub-crossings, intercept included) are in the model.
    // Non-hierarchical models are accepted; this is only a warning flag.
    bool hierarchical() const {
        for (const auto& t : terms) {
            const auto& f = t.factors();
            const std::size_t k = f.size();
            for (std::size_t mask = 0; mask + 1 < (std::size_t{1} << k); ++mask) {
                std::vector<std::string> sub;
                for (std::size_t i = 0; i < k; ++i)
                    if (mask & (std::size_t{1} << i)) sub.push_back(f[i]);
                if (!index_of(Term(sub))) return false;
            }
        }
        return true;
    }
};

struct TermPartition {
    std::vector<Term> not_containing;
    Term target;
    std::vector<Term> containing;
};

// Splits the model around `target`: terms that contain it versus everything else.
inline TermPartition partition_for_target(const TermList& model, const Term& target) {
    if (!model.index_of(target))
        throw std::invalid_argument("term " + target.label() + " is not in the model");
    TermPartition part{{}, target, {}};
    for (const auto& t : model.terms) {
        if (t == target) continue;
        (contains(target, t) ? part.containing : part.not_containing).push_back(t);
    }
    return part;
}

namespace detail {

enum class Tok { name, one, zero, plus, minus, star, colon, tilde, lparen, rparen, end };

struct Token {
    Tok kind;
    std::string text;
    std::size_t offset;
};

inline bool is_name_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}
inline bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

inline std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (is_name_start(c)) {
            std::size_t j = i + 1;
            while (j < text.size() && is_name_char(text[j])) ++j;
            out.push_back({Tok::name, std::string(text.substr(i, j - i)), i});
            i = j;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i + 1;
            while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
            const auto digits = text.substr(i, j - i);
            if (digits == "1")
                out.push_back({Tok::one, "1", i});
            else if (digits == "0")
                out.push_back({Tok::zero, "0", i});
            else
                throw formula_error("unexpected number '" + std::string(digits) + "'", i);
            i = j;
            continue;
        }
        Tok kind;
        switch (c) {
        case '+': kind = Tok::plus; break;
        case '-': kind = Tok::minus; break;
        case '*': kind = Tok::star; break;
        case ':': kind = Tok::colon; break;
        case '~': kind = Tok::tilde; break;
        case '(': kind = Tok::lparen; break;
        case ')': kind = Tok::rparen; break;
        default: throw formula_error(std::string("unexpected character '") + c + "'", i);
        }
        out.push_back({kind, std::string(1, c), i});
        ++i;
    }
    out.push_back({Tok::end, "", text.size()});
    return out;
}

// Intermediate value of a sub-expression: non-intercept terms in expansion order plus
// whatever it says about the intercept (unset when silent).
struct Value {
    std::vector<Term> terms;
    std::optional<bool> intercept;
};

inline void append_unique(std::vector<Term>& into, const Term& t) {
    if (std::find(into.begin(), into.end(), t) == into.end()) into.push_back(t);
}

class Parser {
public:
    explicit Parser(std::string_view text) : toks_(tokenize(text)) {}

    TermList parse() {
        const Token& lhs = next();
        if (lhs.kind != Tok::name) throw formula_error("expected response name", lhs.offset);
        if (peek().kind != Tok::tilde) throw formula_error("expected '~'", peek().offset);
        next();
        if (peek().kind == Tok::end) throw formula_error("empty right-hand side", peek().offset);
        const std::size_t rhs_offset = peek().offset;
        Value v = expr();
        if (peek().kind != Tok::end) throw formula_error("unexpected '" + peek().text + "'", peek().offset);

        TermList out;
        out.response = lhs.text;
        if (v.intercept.value_or(true)) out.terms.emplace_back();
        for (auto& t : v.terms) out.terms.push_back(std::move(t));
        if (out.terms.empty()) throw formula_error("model has no terms", rhs_offset);
        std::stable_sort(out.terms.begin(), out.terms.end(),
                         [](const Term& a, const Term& b) { return a.arity() < b.arity(); });
        return out;
    }

private:
    const Token& peek() const { return toks_[pos_]; }
    const Token& next() { return toks_[pos_++]; }

    Value expr() {
        Value acc;
        if (peek().kind == Tok::minus) {
            next();
            subtract(acc, product());
        } else {
            acc = product();
        }
        while (peek().kind == Tok::plus || peek().kind == Tok::minus) {
            const bool minus = next().kind == Tok::minus;
            Value rhs = product();
            if (minus)
                subtract(acc, rhs);
            else
                add(acc, rhs);
        }
        return acc;
    }

    Value product() {
        Value acc = inter();
        while (peek().kind == Tok::star) {
            const std::size_t at = next().offset;
            Value rhs = inter();
            Value crossed = interact(acc, rhs, at);
            add(acc, rhs);
            add(acc, crossed);
        }
        return acc;
    }

    Value inter() {
        Value acc = primary();
        while (peek().kind == Tok::colon) {
            const std::size_t at = next().offset;
            acc = interact(acc, primary(), at);
        }
        return acc;
    }

    Value primary() {
        const Token& t = next();
        switch (t.kind) {
        case Tok::name: return Value{{Term({t.text})}, std::nullopt};
        case Tok::one: return Value{{}, true};
        case Tok::zero: return Value{{}, false};
        case Tok::lparen: {
            Value v = expr();
            if (peek().kind != Tok::rparen) throw formula_error("expected ')'", peek().offset);
            next();
            return v;
        }
        case Tok::end: throw formula_error("unexpected end of formula", t.offset);
        default: throw formula_error("unexpected '" + t.text + "'", t.offset);
        }
    }

    static void add(Value& acc, const Value& rhs) {
        for (const auto& t : rhs.terms) append_unique(acc.terms, t);
        if (rhs.intercept) acc.intercept = rhs.intercept;
    }

    static void subtract(Value& acc, const Value& rhs) {
        for (const auto& t : rhs.terms) std::erase(acc.terms, t);
        if (rhs.intercept) acc.intercept = !*rhs.intercept;
    }

    static Value interact(const Value& lhs, const Value& rhs, std::size_t at) {
        if (lhs.intercept || rhs.intercept)
            throw formula_error("intercept cannot be crossed with other terms", at);
        Value out;
        for (const auto& a : lhs.terms) {
            for (const auto& b : rhs.terms) {
                std::vector<std::string> f = a.factors();
                for (const auto& name : b.factors()) {
                    if (a.has_factor(name)) throw formula_error("duplicate factor '" + name + "' within term", at);
                    f.push_back(name);
                }
                append_unique(out.terms, Term(std::move(f)));
            }
        }
        return out;
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

} // namespace detail

// Parses "y ~ A*B" style text into a canonical term list: intercept (if any) first,
// then terms by arity, ties broken by first appearance in the expansion.
inline TermList parse_formula(std::string_view text) {
    return detail::Parser(text).parse();
}

// Parses a single term label such as "A", "A:B" or "(1)".
inline Term parse_term(std::string_view text) {
    if (text == "(1)" || text == "1") return Term{};
    const auto toks = detail::tokenize(text);
    std::vector<std::string> f;
    std::size_t i = 0;
    for (;;) {
        if (toks[i].kind != detail::Tok::name) throw formula_error("expected factor name", toks[i].offset);
        if (std::find(f.begin(), f.end(), toks[i].text) != f.end())
            throw formula_error("duplicate factor '" + toks[i].text + "' within term", toks[i].offset);
        f.push_back(toks[i].text);
        ++i;
        if (toks[i].kind == detail::Tok::end) break;
        if (toks[i].kind != detail::Tok::colon) throw formula_error("expected ':'", toks[i].offset);
        ++i;
    }
    return Term(std::move(f));
}

// Canonical text: interactions joined with ':', terms in list order, intercept implicit.
inline std::string render(const TermList& model) {
    std::string out = model.response + " ~ ";
    bool first = true;
    for (const auto& t : model.terms) {
        if (t.is_intercept()) continue;
        if (!first) out += " + ";
        out += t.label();
        first = false;
    }
    if (first) return out + "1";
    if (!model.has_intercept()) out += " - 1";
    return out;
}

} // namespace typeiii
