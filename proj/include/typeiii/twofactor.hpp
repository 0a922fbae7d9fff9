#pragma once

// Classical two-factor machinery, kept independent of the Type III engine so it can serve
// as an oracle: ANOVA hypothesis matrices H, restricted-minus-full-model SSs, Yates's
// weighted squares of means, and the contrast form (W'ybar)'(W'D W)^-(W'ybar).
//
// Cells are ordered lexicographically (A slowest), matching I_a (x) 1_b. Only the A-effect
// path is written out; B results come from transpose(layout).

#include "typeiii/dataset.hpp"
#include "typeiii/design.hpp"
#include "typeiii/error.hpp"
#include "typeiii/linalg.hpp"
#include "typeiii/projector.hpp"
#include "typeiii/sstypes.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace typeiii {

struct TwoFactorLayout {
    std::string a_name, b_name;
    Index a = 0, b = 0;
    Eigen::MatrixXi counts; // a x b
    MatrixXd K;             // n x ab incidence, empty cells are zero columns
    VectorXd y;
    std::vector<std::optional<double>> cell_means; // undefined for empty cells

    Index cell(Index i, Index j) const noexcept { return i * b + j; }
    Index n_obs() const noexcept { return K.rows(); }

    Index n_empty() const { return static_cast<Index>((counts.array() == 0).count()); }
    bool all_filled() const { return n_empty() == 0; }
    bool balanced() const { return counts.minCoeff() == counts.maxCoeff(); }

    // Diag(1/n_ij) as a vector; empty cells hold 0.
    VectorXd d_ab() const {
        VectorXd d(a * b);
        for (Index i = 0; i < a; ++i)
            for (Index j = 0; j < b; ++j) d(cell(i, j)) = counts(i, j) > 0 ? 1.0 / counts(i, j) : 0.0;
        return d;
    }

    // Cell sample means; requires every cell to be filled.
    VectorXd ybar() const {
        require_filled("cell means");
        VectorXd m(a * b);
        for (Index c = 0; c < a * b; ++c) m(c) = *cell_means[static_cast<std::size_t>(c)];
        return m;
    }

    // u = (I_a (x) 1_b') ybar: row sums of the cell-means grid.
    VectorXd u() const { return kron(MatrixXd::Identity(a, a), ones(1, b)) * ybar(); }

    // D_a = Diag(sum_j 1/n_ij), returned as its diagonal.
    VectorXd d_a() const {
        require_filled("D_a");
        VectorXd d(a);
        for (Index i = 0; i < a; ++i) d(i) = (1.0 / counts.row(i).cast<double>().array()).sum();
        return d;
    }

    void require_filled(const char* what) const {
        if (!all_filled())
            throw undefined_statistic(std::string(what) + " undefined: layout has " + std::to_string(n_empty()) +
                                      " empty cell(s)");
    }
};

inline TwoFactorLayout make_layout(const VectorXd& y, const MatrixXd& K, Index a, Index b,
                                   std::string a_name = "A", std::string b_name = "B") {
    if (K.cols() != a * b || K.rows() != y.size()) throw std::invalid_argument("make_layout: dimension mismatch");
    TwoFactorLayout L;
    L.a_name = std::move(a_name);
    L.b_name = std::move(b_name);
    L.a = a;
    L.b = b;
    L.K = K;
    L.y = y;
    L.counts.resize(a, b);
    const VectorXd n = K.colwise().sum().transpose();
    const VectorXd sums = K.transpose() * y;
    L.cell_means.resize(static_cast<std::size_t>(a * b));
    for (Index i = 0; i < a; ++i) {
        for (Index j = 0; j < b; ++j) {
            const Index c = L.cell(i, j);
            L.counts(i, j) = static_cast<int>(std::lround(n(c)));
            if (L.counts(i, j) > 0) L.cell_means[static_cast<std::size_t>(c)] = sums(c) / n(c);
        }
    }
    return L;
}

inline TwoFactorLayout make_layout(const Dataset& data, const std::string& a_name, const std::string& b_name) {
    const auto inc = build_incidence(data, {a_name, b_name});
    return make_layout(data.response(), inc.K, static_cast<Index>(inc.level_counts[0]),
                       static_cast<Index>(inc.level_counts[1]), a_name, b_name);
}

// Swap the roles of the two factors: cell (i, j) becomes (j, i).
inline TwoFactorLayout transpose(const TwoFactorLayout& L) {
    MatrixXd K(L.K.rows(), L.K.cols());
    for (Index i = 0; i < L.a; ++i)
        for (Index j = 0; j < L.b; ++j) K.col(j * L.a + i) = L.K.col(L.cell(i, j));
    return make_layout(L.y, K, L.b, L.a, L.b_name, L.a_name);
}

struct HypothesisMatrices {
    MatrixXd U_a, S_a, U_b, S_b;
    MatrixXd H00, H10, H01, H11;
};

inline HypothesisMatrices h_matrices(Index a, Index b) {
    if (a < 2 || b < 2) throw std::invalid_argument("h_matrices: both factors need at least 2 levels");
    HypothesisMatrices h;
    h.U_a = averaging(a);
    h.S_a = centering(a);
    h.U_b = averaging(b);
    h.S_b = centering(b);
    h.H00 = kron(h.U_a, h.U_b);
    h.H10 = kron(h.S_a, h.U_b);
    h.H01 = kron(h.U_a, h.S_b);
    h.H11 = kron(h.S_a, h.S_b);
    return h;
}

// Projector for y'[P_K - P_K(I-H)]y.
inline Projector rmfm_projector(const TwoFactorLayout& L, const MatrixXd& H, double tol = default_rank_tol) {
    const Index c = L.a * L.b;
    if (H.rows() != c || H.cols() != c) throw std::invalid_argument("rmfm: H must be ab x ab");
    const std::vector<MatrixXd> blocks{L.K * (MatrixXd::Identity(c, c) - H), L.K};
    return Projector(gram_schmidt(std::span<const MatrixXd>(blocks), tol).contributed_by(1));
}

// Restricted-model-minus-full-model SS for H0: H eta = 0 in the cell-means model.
inline SSResult rmfm_ss(const VectorXd& y, const TwoFactorLayout& L, const MatrixXd& H, Term label = {},
                        double tol = default_rank_tol) {
    const Projector P = rmfm_projector(L, H, tol);
    SSResult r;
    r.term = std::move(label);
    r.ss = P.quadratic(y);
    r.df = P.df();
    r.hypothesis = H;
    return r;
}

// Yates's weighted squares of means for A:
//   u'(W - W 1 (1'W 1)^{-1} 1'W)u,  W = D_a^{-1}.
inline SSResult mwsm_ss(const VectorXd& y, const TwoFactorLayout& L) {
    L.require_filled("MWSM");
    const TwoFactorLayout fitted = make_layout(y, L.K, L.a, L.b, L.a_name, L.b_name);
    const VectorXd u = fitted.u();
    const VectorXd w = fitted.d_a().cwiseInverse();
    const double wu = w.dot(u);
    SSResult r;
    r.term = Term({L.a_name});
    r.ss = checked_ss(u.dot(w.cwiseProduct(u)) - wu * wu / w.sum(), y.squaredNorm());
    r.df = L.a - 1;
    return r;
}

struct MwsmProjectors {
    MatrixXd bracketed;  // K D_ab (I_a (x) 1_b)[W - W1(1'W1)^{-1}1'W](I_a (x) 1_b')D_ab K'
    Projector span_form; // onto sp(K D_ab (S_a (x) 1_b))
    double discrepancy;  // max-norm distance between the two
};

inline MwsmProjectors mwsm_projector(const TwoFactorLayout& L, double tol = default_rank_tol) {
    L.require_filled("MWSM projector");
    const MatrixXd Dab = L.d_ab().asDiagonal();
    const VectorXd w = L.d_a().cwiseInverse();
    const MatrixXd middle = MatrixXd(w.asDiagonal()) - (w * w.transpose()) / w.sum();
    const MatrixXd rowsum = kron(MatrixXd::Identity(L.a, L.a), ones(L.b, 1)); // I_a (x) 1_b
    const MatrixXd left = L.K * Dab * rowsum;

    MwsmProjectors out;
    out.bracketed = left * middle * left.transpose();
    out.span_form = projector_onto(L.K * Dab * kron(centering(L.a), ones(L.b, 1)), tol);
    out.discrepancy = max_abs_diff(out.bracketed, out.span_form.dense());
    return out;
}

// S_a (x) 1_b: a dependent spanning set of A contrasts on the cell means.
inline MatrixXd a_contrasts(Index a, Index b) { return kron(centering(a), ones(b, 1)); }

// Helmert contrasts, m x (m-1).
inline MatrixXd helmert(Index m) {
    MatrixXd h = MatrixXd::Zero(m, m - 1);
    for (Index k = 0; k < m - 1; ++k) {
        h.col(k).head(k + 1).setConstant(-1.0);
        h(k + 1, k) = static_cast<double>(k + 1);
    }
    return h;
}

// (W'ybar)'(W'D_ab W)^-(W'ybar). With B = D_ab^{1/2} W and z = D_ab^{-1/2} ybar this is
// z'P_B z, which does not depend on the choice of generalized inverse.
inline SSResult contrast_ss(const VectorXd& y, const TwoFactorLayout& L, const MatrixXd& W,
                            double tol = default_rank_tol) {
    L.require_filled("contrast SS");
    if (W.rows() != L.a * L.b) throw std::invalid_argument("contrast_ss: W must have ab rows");
    const TwoFactorLayout fitted = make_layout(y, L.K, L.a, L.b, L.a_name, L.b_name);
    const VectorXd root = L.d_ab().cwiseSqrt();
    const VectorXd z = fitted.ybar().cwiseQuotient(root);
    const Projector P = projector_onto(root.asDiagonal() * W, tol);
    SSResult r;
    r.term = Term({L.a_name});
    r.ss = P.quadratic(z);
    r.df = P.df();
    r.hypothesis = W;
    return r;
}

struct EffectReport {
    Term term;
    Index levels = 0;
    SSResult type3, type2, rmfm;
    std::optional<SSResult> type1; // balanced layouts only
    std::optional<SSResult> mwsm, contrast;
    double max_rel_discrepancy = 0.0; // among the SSs that are claimed equal
    bool pass = false;
    std::vector<std::string> notes;
};

struct EquivalenceReport {
    std::string response, a_name, b_name;
    Index a = 0, b = 0, n_obs = 0, n_empty = 0;
    bool balanced = false;
    double tol = 1e-8;
    EffectReport effect_a, effect_b;
    bool pass = false;
    double max_rel_discrepancy = 0.0;
};

// |x - y| relative to the larger magnitude; pairs that are both at rounding level of
// `scale` count as equal.
inline double rel_discrepancy(double x, double y, double scale) {
    const double m = std::max(std::fabs(x), std::fabs(y));
    if (m <= 1e-13 * std::max(1.0, scale)) return 0.0;
    return std::fabs(x - y) / m;
}

namespace detail {

inline EffectReport compare_effect(const TwoFactorLayout& L, const DesignMatrix& design, const VectorXd& y,
                                   const std::optional<AnovaTable>& type1, double tol) {
    EffectReport e;
    e.term = Term({L.a_name});
    e.levels = L.a;
    e.type3 = type3_ss(y, type3_components(design, e.term));
    e.type2 = type2_ss(design, e.term, y);
    e.rmfm = rmfm_ss(y, L, h_matrices(L.a, L.b).H10, e.term);
    const double scale = y.squaredNorm();

    std::vector<double> claimed{e.type3.ss};
    bool df_ok = e.type3.df == e.type2.df;
    if (!df_ok) e.notes.push_back("Type III df differs from Type II df");

    if (L.all_filled()) {
        e.mwsm = mwsm_ss(y, L);
        e.contrast = contrast_ss(y, L, a_contrasts(L.a, L.b));
        claimed.insert(claimed.end(), {e.rmfm.ss, e.mwsm->ss, e.contrast->ss});
        for (Index df : {e.type3.df, e.rmfm.df, e.mwsm->df, e.contrast->df}) df_ok = df_ok && df == L.a - 1;
        if (type1) {
            e.type1 = type1->row(e.term);
            claimed.push_back(e.type1->ss);
            df_ok = df_ok && e.type1->df == L.a - 1;
        }
    } else {
        e.notes.push_back("MWSM undefined; Type III df " + std::to_string(e.type3.df) + ", RMFM df " +
                          std::to_string(e.rmfm.df));
        if (L.n_empty() == 1) {
            const bool split = e.type3.df == L.a - 1 && e.rmfm.df == L.a - 2;
            if (!split) e.notes.push_back("single empty cell: expected Type III df a-1 and RMFM df a-2");
            df_ok = df_ok && split;
        }
    }
    for (std::size_t i = 0; i < claimed.size(); ++i)
        for (std::size_t j = i + 1; j < claimed.size(); ++j)
            e.max_rel_discrepancy = std::max(e.max_rel_discrepancy, rel_discrepancy(claimed[i], claimed[j], scale));
    e.pass = df_ok && e.max_rel_discrepancy <= tol;
    return e;
}

} // namespace detail

// Runs every SS variant for both main effects of a two-factor dataset and checks the
// equalities and df relations that hold for its layout.
inline EquivalenceReport equivalence_report(const Dataset& data, const std::string& a_name,
                                            const std::string& b_name, double tol = 1e-8) {
    TermList model{data.response_name(), {Term{}, Term({a_name}), Term({b_name}), Term({a_name, b_name})}};
    const DesignMatrix design = build_design(data, model);
    const TwoFactorLayout L = make_layout(data, a_name, b_name);
    const VectorXd& y = data.response();
    if (L.a < 2 || L.b < 2) throw data_error("each factor needs at least 2 observed levels");

    EquivalenceReport rep;
    rep.response = data.response_name();
    rep.a_name = a_name;
    rep.b_name = b_name;
    rep.a = L.a;
    rep.b = L.b;
    rep.n_obs = L.n_obs();
    rep.n_empty = L.n_empty();
    rep.balanced = L.balanced();
    rep.tol = tol;

    std::optional<AnovaTable> type1;
    if (rep.balanced) type1 = type1_table(design, y);
    rep.effect_a = detail::compare_effect(L, design, y, type1, tol);
    rep.effect_b = detail::compare_effect(transpose(L), design, y, type1, tol);
    rep.max_rel_discrepancy = std::max(rep.effect_a.max_rel_discrepancy, rep.effect_b.max_rel_discrepancy);
    rep.pass = rep.effect_a.pass && rep.effect_b.pass;
    return rep;
}

} // namespace typeiii
