#include "typeiii/formula.hpp"
#include "typeiii/simulate.hpp"

#include <gtest/gtest.h>

#include <string>
#include <vector>

using typeiii::contains;
using typeiii::parse_formula;
using typeiii::parse_term;
using typeiii::Term;

namespace {

std::vector<std::string> labels(const typeiii::TermList& m) {
    std::vector<std::string> out;
    for (const auto& t : m.terms) out.push_back(t.label());
    return out;
}

std::vector<std::string> labels(const std::vector<Term>& ts) {
    std::vector<std::string> out;
    for (const auto& t : ts) out.push_back(t.label());
    return out;
}

using L = std::vector<std::string>;

} // namespace

TEST(Formula, ExplicitTerms) {
    const auto m = parse_formula("y ~ A + B + A:B");
    EXPECT_EQ(m.response, "y");
    EXPECT_EQ(labels(m), (L{"(1)", "A", "B", "A:B"}));
    EXPECT_TRUE(m.hierarchical());
}

TEST(Formula, CrossingExpands) {
    EXPECT_EQ(labels(parse_formula("y ~ A*B")), (L{"(1)", "A", "B", "A:B"}));
    EXPECT_EQ(labels(parse_formula("y ~ A*B*C")),
              (L{"(1)", "A", "B", "C", "A:B", "A:C", "B:C", "A:B:C"}));
    EXPECT_EQ(labels(parse_formula("y ~ (A + B)*C")), (L{"(1)", "A", "B", "C", "A:C", "B:C"}));
}

TEST(Formula, InteractionWithoutIntercept) {
    const auto m = parse_formula("y ~ A:B - 1");
    EXPECT_EQ(labels(m), (L{"A:B"}));
    EXPECT_FALSE(m.has_intercept());
    EXPECT_FALSE(m.hierarchical());
}

TEST(Formula, InterceptControls) {
    EXPECT_FALSE(parse_formula("y ~ 0 + A").has_intercept());
    EXPECT_FALSE(parse_formula("y ~ -1 + A").has_intercept());
    EXPECT_TRUE(parse_formula("y ~ A - 0").has_intercept());
    EXPECT_EQ(labels(parse_formula("y ~ 1")), (L{"(1)"}));
    EXPECT_EQ(labels(parse_formula("y ~ A + 1")), (L{"(1)", "A"}));
}

TEST(Formula, DeduplicatesAndOrdersByArity) {
    EXPECT_EQ(labels(parse_formula("y ~ B:A + A + B + A:B + A")), (L{"(1)", "A", "B", "B:A"}));
    EXPECT_EQ(labels(parse_formula("y ~ A*B - A:B")), (L{"(1)", "A", "B"}));
}

TEST(Formula, Errors) {
    auto offset_of = [](const char* text) -> long {
        try {
            parse_formula(text);
        } catch (const typeiii::formula_error& e) {
            return static_cast<long>(e.offset());
        }
        return -1;
    };
    EXPECT_EQ(offset_of("y ~ A:A"), 5);
    EXPECT_EQ(offset_of("y ~ "), 4);
    EXPECT_EQ(offset_of("y ~ A + "), 8);
    EXPECT_EQ(offset_of("y ~ A $ B"), 6);
    EXPECT_EQ(offset_of("y A"), 2);
    EXPECT_EQ(offset_of("y ~ (A + B"), 10);
    EXPECT_EQ(offset_of("y ~ A + 2"), 8);
    EXPECT_EQ(offset_of("y ~ -1"), 4);
    EXPECT_EQ(offset_of("y ~ 1:A"), 5);
    try {
        parse_formula("y ~ A:A");
        FAIL();
    } catch (const typeiii::formula_error& e) {
        EXPECT_NE(std::string(e.what()).find("offset 5"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("duplicate factor"), std::string::npos);
    }
}

TEST(Term, EqualityIsOrderInsensitive) {
    EXPECT_EQ(Term({"A", "B"}), Term({"B", "A"}));
    EXPECT_FALSE(Term({"A"}) == Term({"A", "B"}));
    EXPECT_EQ(Term(), parse_term("(1)"));
    EXPECT_EQ(parse_term("B:A"), Term({"A", "B"}));
    EXPECT_THROW(Term({"A", "A"}), std::invalid_argument);
    EXPECT_THROW(parse_term("A:A"), typeiii::formula_error);
}

TEST(Containment, Examples) {
    EXPECT_TRUE(contains(Term({"A"}), Term({"A", "B"})));
    EXPECT_FALSE(contains(Term({"A"}), Term({"A"})));
    EXPECT_FALSE(contains(Term({"A", "B"}), Term({"A"})));
    EXPECT_TRUE(contains(Term(), Term({"A"})));
    EXPECT_TRUE(contains(Term(), Term({"A", "B"})));
    EXPECT_FALSE(contains(Term(), Term()));
    EXPECT_FALSE(contains(Term({"A"}), Term({"B", "C"})));
}

// Strict partial order over random terms drawn from 4 factors.
TEST(Containment, IsStrictPartialOrder) {
    const std::vector<std::string> names{"A", "B", "C", "D"};
    std::vector<Term> all;
    for (unsigned mask = 0; mask < 16; ++mask) {
        std::vector<std::string> f;
        for (unsigned i = 0; i < 4; ++i)
            if (mask & (1u << i)) f.push_back(names[i]);
        all.emplace_back(f);
    }
    for (const auto& x : all) {
        EXPECT_FALSE(contains(x, x));
        for (const auto& y : all) {
            if (contains(x, y)) EXPECT_FALSE(contains(y, x));
            for (const auto& z : all)
                if (contains(x, y) && contains(y, z)) EXPECT_TRUE(contains(x, z));
        }
    }
}

TEST(Partition, TwoFactorTargets) {
    const auto m = parse_formula("y ~ A*B");
    auto p = typeiii::partition_for_target(m, Term({"A"}));
    EXPECT_EQ(labels(p.not_containing), (L{"(1)", "B"}));
    EXPECT_EQ(labels(p.containing), (L{"A:B"}));

    p = typeiii::partition_for_target(m, Term({"A", "B"}));
    EXPECT_EQ(labels(p.not_containing), (L{"(1)", "A", "B"}));
    EXPECT_TRUE(p.containing.empty());

    p = typeiii::partition_for_target(parse_formula("y ~ A"), Term({"A"}));
    EXPECT_EQ(labels(p.not_containing), (L{"(1)"}));
    EXPECT_TRUE(p.containing.empty());

    EXPECT_THROW(typeiii::partition_for_target(m, Term({"C"})), std::invalid_argument);
}

TEST(Partition, IsAPartitionOfTheModel) {
    const auto m = parse_formula("y ~ A*B*C + D");
    for (const auto& target : m.terms) {
        const auto p = typeiii::partition_for_target(m, target);
        EXPECT_EQ(p.not_containing.size() + p.containing.size() + 1, m.terms.size());
        for (const auto& t : m.terms) {
            const int hits = static_cast<int>(t == target) +
                             static_cast<int>(std::count(p.not_containing.begin(), p.not_containing.end(), t)) +
                             static_cast<int>(std::count(p.containing.begin(), p.containing.end(), t));
            EXPECT_EQ(hits, 1) << t.label();
        }
        for (const auto& t : p.containing) EXPECT_TRUE(contains(target, t));
        for (const auto& t : p.not_containing) EXPECT_FALSE(contains(target, t));
    }
}

// render(parse(render(m))) == render(m) over randomly assembled formulas.
TEST(Formula, RenderIsIdempotent) {
    const std::vector<std::string> atoms{"A", "B", "C", "A:B", "B:C", "A*C", "(A + B)*C", "1", "0", "-1"};
    typeiii::Rng rng(7);
    for (int trial = 0; trial < 300; ++trial) {
        std::string rhs = atoms[static_cast<std::size_t>(rng.uniform_int(0, 5))];
        const long extra = rng.uniform_int(0, 4);
        for (long k = 0; k < extra; ++k) {
            const auto& atom = atoms[static_cast<std::size_t>(rng.uniform_int(0, 9))];
            if (atom == "-1")
                rhs += " - 1";
            else
                rhs += (rng.uniform() < 0.8 ? " + " : " - ") + atom;
        }
        typeiii::TermList m;
        try {
            m = parse_formula("y ~ " + rhs);
        } catch (const typeiii::formula_error&) {
            continue;
        }
        const std::string canon = typeiii::render(m);
        const auto again = parse_formula(canon);
        EXPECT_EQ(typeiii::render(again), canon) << rhs;
        EXPECT_EQ(labels(again), labels(m)) << rhs;
        EXPECT_EQ(again.has_intercept(), m.has_intercept()) << rhs;
    }
}

TEST(Formula, RenderForms) {
    EXPECT_EQ(typeiii::render(parse_formula("y~A*B")), "y ~ A + B + A:B");
    EXPECT_EQ(typeiii::render(parse_formula("y ~ A:B - 1")), "y ~ A:B - 1");
    EXPECT_EQ(typeiii::render(parse_formula("y ~ 1")), "y ~ 1");
}
