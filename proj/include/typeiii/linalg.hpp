#pragma once

// Small dense helpers shared by the projector kernel and the two-factor algebra.

#include <Eigen/Dense>

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace typeiii {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Column-wise concatenation (A, B, ...). All inputs must share a row count.
inline MatrixXd hcat(std::initializer_list<const MatrixXd*> parts, Index rows) {
    Index cols = 0;
    for (const auto* p : parts) cols += p->cols();
    MatrixXd out(rows, cols);
    Index at = 0;
    for (const auto* p : parts) {
        out.middleCols(at, p->cols()) = *p;
        at += p->cols();
    }
    return out;
}

inline MatrixXd hcat(const std::vector<MatrixXd>& parts, Index rows) {
    Index cols = 0;
    for (const auto& p : parts) cols += p.cols();
    MatrixXd out(rows, cols);
    Index at = 0;
    for (const auto& p : parts) {
        out.middleCols(at, p.cols()) = p;
        at += p.cols();
    }
    return out;
}

inline MatrixXd kron(const MatrixXd& a, const MatrixXd& b) {
    MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline MatrixXd ones(Index rows, Index cols = 1) { return MatrixXd::Ones(rows, cols); }

// U_m = (1/m) 1 1'
inline MatrixXd averaging(Index m) { return MatrixXd::Constant(m, m, 1.0 / static_cast<double>(m)); }

// S_m = I - U_m
inline MatrixXd centering(Index m) { return MatrixXd::Identity(m, m) - averaging(m); }

inline double max_abs(const MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline double max_abs_diff(const MatrixXd& a, const MatrixXd& b) { return max_abs(a - b); }

} // namespace typeiii
