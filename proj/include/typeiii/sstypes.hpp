#pragma once

// Sums of squares of Types I, II and III for factorial linear models.
//
// For a target term the model columns are split as X = (X0, X1, X2): terms that do not
// contain the target, the target, and terms that contain it. The Type III subspace is
//
//     S3 = sp(X0, X2*)^perp  intersected with  sp(X),    X2* = X2 X2' N01,
//
// where sp(N01) = sp(X0, X1)^perp within sp(X). Both N01 and an orthonormal basis Q3 of S3
// come out of Gram-Schmidt as "the columns contributed by X after the leading blocks".

#include "typeiii/design.hpp"
#include "typeiii/error.hpp"
#include "typeiii/fdist.hpp"
#include "typeiii/formula.hpp"
#include "typeiii/projector.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace typeiii {

enum class SsType { I, II, III };

inline std::string to_string(SsType t) {
    switch (t) {
    case SsType::I: return "I";
    case SsType::II: return "II";
    case SsType::III: return "III";
    }
    return "?";
}

inline SsType parse_ss_type(std::string_view s) {
    if (s == "I" || s == "1") return SsType::I;
    if (s == "II" || s == "2") return SsType::II;
    if (s == "III" || s == "3") return SsType::III;
    throw std::invalid_argument("unknown SS type '" + std::string(s) + "' (expected I, II or III)");
}

struct SSResult {
    Term term;
    double ss = 0.0;
    Index df = 0;
    std::optional<double> f;
    std::optional<double> p;
    // Coefficient matrix of the tested null. Types II/III: X_{1|0} = (I - P_X0) X1,
    // with the null X_{1|0} beta_1 = 0.
    MatrixXd hypothesis;
};

struct AnovaTable {
    SsType type = SsType::III;
    std::vector<SSResult> rows;
    double sse = 0.0;
    Index dfe = 0;
    std::optional<double> mse;
    Index rank = 0;

    const SSResult& row(const Term& t) const {
        for (const auto& r : rows)
            if (r.term == t) return r;
        throw std::invalid_argument("no row for term " + t.label());
    }
};

struct TypePartitionMatrices {
    TermPartition partition;
    MatrixXd X, X0, X1, X2;
    MatrixXd X1_given_0; // (I - P_X0) X1
    MatrixXd N01;        // orthonormal basis of sp(X0, X1)^perp within sp(X)
    MatrixXd X2star;     // X2 X2' N01
    MatrixXd Q3;         // orthonormal basis of S3

    const Term& target() const noexcept { return partition.target; }
    Projector p3() const { return Projector(Q3); }
};

// Negative SS beyond rounding noise signals a real defect; tiny negatives are clamped.
inline double checked_ss(double raw, double scale) {
    if (raw < -1e-10 * std::max(1.0, scale)) throw numeric_error("negative sum of squares " + std::to_string(raw));
    return std::max(0.0, raw);
}

inline TypePartitionMatrices type3_components(const DesignMatrix& design, const Term& target,
                                              double tol = default_rank_tol) {
    TypePartitionMatrices c;
    c.partition = partition_for_target(design.model, target);
    c.X = design.X;
    c.X0 = design.columns_of(c.partition.not_containing);
    c.X1 = design.block(target).columns;
    c.X2 = design.columns_of(c.partition.containing);

    const std::vector<MatrixXd> step1{c.X0, c.X1, c.X};
    const OrthoBasis gs1 = gram_schmidt(std::span<const MatrixXd>(step1), tol);
    const MatrixXd Q0 = gs1.contributed_by(0);
    c.X1_given_0 = c.X1 - Q0 * (Q0.transpose() * c.X1);
    c.N01 = gs1.contributed_by(2);

    c.X2star = c.X2 * (c.X2.transpose() * c.N01);

    const std::vector<MatrixXd> step2{c.X0, c.X2star, c.X};
    c.Q3 = gram_schmidt(std::span<const MatrixXd>(step2), tol).contributed_by(2);
    return c;
}

// y'P3y with df = dim S3.
inline SSResult type3_ss(const VectorXd& y, const TypePartitionMatrices& comp) {
    if (y.size() != comp.X.rows()) throw std::invalid_argument("type3_ss: response length mismatch");
    SSResult r;
    r.term = comp.target();
    r.ss = (comp.Q3.transpose() * y).squaredNorm();
    r.df = comp.Q3.cols();
    r.hypothesis = comp.X1_given_0;
    return r;
}

// y'(P_(X0,X1) - P_X0)y: the target adjusted for non-containing terms, ignoring containing ones.
inline SSResult type2_ss(const DesignMatrix& design, const Term& target, const VectorXd& y,
                         double tol = default_rank_tol) {
    if (y.size() != design.n_obs()) throw std::invalid_argument("type2_ss: response length mismatch");
    const auto part = partition_for_target(design.model, target);
    const std::vector<MatrixXd> blocks{design.columns_of(part.not_containing), design.block(target).columns};
    const OrthoBasis gs = gram_schmidt(std::span<const MatrixXd>(blocks), tol);
    const MatrixXd Q1 = gs.contributed_by(1);
    const MatrixXd Q0 = gs.contributed_by(0);

    SSResult r;
    r.term = target;
    r.ss = (Q1.transpose() * y).squaredNorm();
    r.df = Q1.cols();
    r.hypothesis = blocks[1] - Q0 * (Q0.transpose() * blocks[1]);
    return r;
}

// delta_3 = P3 mu; the noncentrality is |delta_3|^2 / sigma^2.
inline VectorXd ncp_delta(const TypePartitionMatrices& comp, const VectorXd& mu) {
    return comp.Q3 * (comp.Q3.transpose() * mu);
}

struct FTest {
    double f;
    double p;
};

inline FTest f_statistic(const SSResult& num, double sse, Index dfe) {
    if (num.df <= 0 || dfe <= 0) throw std::invalid_argument("f_statistic: degrees of freedom must be positive");
    const double mse = sse / static_cast<double>(dfe);
    const double ms = num.ss / static_cast<double>(num.df);
    const double f = mse > 0.0 ? ms / mse : (ms > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    return {f, f_upper_tail(f, static_cast<double>(num.df), static_cast<double>(dfe))};
}

namespace detail {

struct FullFit {
    double sse;
    Index rank;
};

inline FullFit full_fit(const MatrixXd& X, const VectorXd& y, double tol) {
    const std::vector<MatrixXd> blocks{X};
    const OrthoBasis gs = gram_schmidt(std::span<const MatrixXd>(blocks), tol);
    const VectorXd resid = y - gs.Q * (gs.Q.transpose() * y);
    return {resid.squaredNorm(), gs.rank()};
}

inline void attach_tests(AnovaTable& t) {
    if (t.dfe > 0) t.mse = t.sse / static_cast<double>(t.dfe);
    for (auto& r : t.rows) {
        if (r.df > 0 && t.dfe > 0) {
            const auto ft = f_statistic(r, t.sse, t.dfe);
            r.f = ft.f;
            r.p = ft.p;
        }
    }
}

} // namespace detail

// Sequential SS in model order. Includes the intercept row, so that
// sum of row SS + SSE = y'y.
inline AnovaTable type1_table(const DesignMatrix& design, const VectorXd& y, double tol = default_rank_tol) {
    if (y.size() != design.n_obs()) throw std::invalid_argument("type1_table: response length mismatch");
    std::vector<MatrixXd> blocks;
    for (const auto& b : design.blocks) blocks.push_back(b.columns);
    const OrthoBasis gs = gram_schmidt(std::span<const MatrixXd>(blocks), tol);

    AnovaTable t;
    t.type = SsType::I;
    for (std::size_t i = 0; i < design.blocks.size(); ++i) {
        const MatrixXd Qi = gs.contributed_by(i);
        const MatrixXd Qprev = gs.contributed_by(0, i);
        SSResult r;
        r.term = design.blocks[i].term;
        r.ss = (Qi.transpose() * y).squaredNorm();
        r.df = Qi.cols();
        r.hypothesis = blocks[i] - Qprev * (Qprev.transpose() * blocks[i]);
        t.rows.push_back(std::move(r));
    }
    t.sse = (y - gs.Q * (gs.Q.transpose() * y)).squaredNorm();
    t.rank = gs.rank();
    t.dfe = design.n_obs() - t.rank;
    detail::attach_tests(t);
    return t;
}

// One row per non-intercept term for Types II/III; Type I also reports the intercept.
inline AnovaTable anova(const DesignMatrix& design, const VectorXd& y, SsType type,
                        double tol = default_rank_tol) {
    if (type == SsType::I) return type1_table(design, y, tol);
    if (y.size() != design.n_obs()) throw std::invalid_argument("anova: response length mismatch");
    AnovaTable t;
    t.type = type;
    for (const auto& term : design.model.terms) {
        if (term.is_intercept()) continue;
        t.rows.push_back(type == SsType::II ? type2_ss(design, term, y, tol)
                                            : type3_ss(y, type3_components(design, term, tol)));
    }
    const auto fit = detail::full_fit(design.X, y, tol);
    t.sse = fit.sse;
    t.rank = fit.rank;
    t.dfe = design.n_obs() - fit.rank;
    detail::attach_tests(t);
    return t;
}

} // namespace typeiii
