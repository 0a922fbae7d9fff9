#pragma once

// Orthogonalization kernel. Every span computation in the library goes through
// gram_schmidt(): the orthonormal columns it produces are tagged with the input block
// that contributed them, so "the part of sp(X) contributed after sp(A)" is simply the
// columns whose source is X.

#include "typeiii/error.hpp"
#include "typeiii/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace typeiii {

inline constexpr double default_rank_tol = 1e-9;

struct DroppedColumn {
    std::size_t block;
    Index column;
};

struct OrthoBasis {
    MatrixXd Q;                       // orthonormal columns
    std::vector<std::size_t> source;  // contributing block per column of Q
    std::vector<DroppedColumn> drop_log;

    Index rank() const noexcept { return Q.cols(); }

    // Columns contributed by block `b`, in acceptance order.
    MatrixXd contributed_by(std::size_t b) const {
        std::vector<Index> idx;
        for (std::size_t k = 0; k < source.size(); ++k)
            if (source[k] == b) idx.push_back(static_cast<Index>(k));
        MatrixXd out(Q.rows(), static_cast<Index>(idx.size()));
        for (std::size_t k = 0; k < idx.size(); ++k) out.col(static_cast<Index>(k)) = Q.col(idx[k]);
        return out;
    }

    // Columns contributed by blocks [first, last).
    MatrixXd contributed_by(std::size_t first, std::size_t last) const {
        std::vector<Index> idx;
        for (std::size_t k = 0; k < source.size(); ++k)
            if (source[k] >= first && source[k] < last) idx.push_back(static_cast<Index>(k));
        MatrixXd out(Q.rows(), static_cast<Index>(idx.size()));
        for (std::size_t k = 0; k < idx.size(); ++k) out.col(static_cast<Index>(k)) = Q.col(idx[k]);
        return out;
    }
};

// Modified Gram-Schmidt with one full re-orthogonalization pass. Columns are visited
// left to right across blocks; a column is kept iff its residual norm exceeds
// tol * (its original norm). Zero columns are always dropped.
inline OrthoBasis gram_schmidt(std::span<const MatrixXd> blocks, double tol = default_rank_tol) {
    if (blocks.empty()) throw std::invalid_argument("gram_schmidt: no input blocks");
    const Index n = blocks.front().rows();
    Index total = 0;
    for (const auto& b : blocks) {
        if (b.rows() != n) throw std::invalid_argument("gram_schmidt: blocks differ in row count");
        total += b.cols();
    }

    OrthoBasis out;
    out.Q.resize(n, std::min(n, total));
    Index r = 0;
    VectorXd v(n);
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        const MatrixXd& block = blocks[bi];
        for (Index c = 0; c < block.cols(); ++c) {
            v = block.col(c);
            const double norm0 = v.norm();
            if (norm0 == 0.0 || r == n) {
                out.drop_log.push_back({bi, c});
                continue;
            }
            for (int pass = 0; pass < 2; ++pass)
                for (Index k = 0; k < r; ++k) v -= out.Q.col(k).dot(v) * out.Q.col(k);
            const double norm1 = v.norm();
            if (norm1 > tol * norm0) {
                out.Q.col(r++) = v / norm1;
                out.source.push_back(bi);
            } else {
                out.drop_log.push_back({bi, c});
            }
        }
    }
    out.Q.conservativeResize(n, r);
    return out;
}

inline OrthoBasis gram_schmidt(std::initializer_list<MatrixXd> blocks, double tol = default_rank_tol) {
    std::vector<MatrixXd> v(blocks);
    return gram_schmidt(std::span<const MatrixXd>(v), tol);
}

// Orthonormal basis N with sp(A) (+) sp(N) = sp(X) and A'N = 0. Assumes sp(A) within sp(X).
inline MatrixXd complement_within(const MatrixXd& A, const MatrixXd& X, double tol = default_rank_tol) {
    const std::vector<MatrixXd> blocks{A, X};
    return gram_schmidt(std::span<const MatrixXd>(blocks), tol).contributed_by(1);
}

// Orthogonal projector held in factored form P = QQ'.
class Projector {
public:
    Projector() = default;
    explicit Projector(MatrixXd q) : q_(std::move(q)) {}

    const MatrixXd& basis() const noexcept { return q_; }
    Index dim() const noexcept { return q_.rows(); }
    Index df() const noexcept { return q_.cols(); }

    VectorXd apply(const VectorXd& y) const { return q_ * (q_.transpose() * y); }

    // y'Py
    double quadratic(const VectorXd& y) const { return (q_.transpose() * y).squaredNorm(); }

    MatrixXd dense() const { return q_ * q_.transpose(); }

private:
    MatrixXd q_;
};

inline Projector projector_from(const OrthoBasis& basis) { return Projector(basis.Q); }

// Projector onto sp(M).
inline Projector projector_onto(const MatrixXd& m, double tol = default_rank_tol) {
    const std::vector<MatrixXd> blocks{m};
    return Projector(gram_schmidt(std::span<const MatrixXd>(blocks), tol).Q);
}

struct Prop1Sides {
    MatrixXd left;  // P_{D^{1/2} R}
    MatrixXd right; // I - P_{D^{-1/2} M}
};

// Both sides of P_{D^{1/2}R} = I - P_{D^{-1/2}M} for sp(M) = sp(R)^perp and D symmetric pd.
// Meant as a check on the two-factor algebra, not for production use.
inline Prop1Sides prop1_projector(const MatrixXd& R, const MatrixXd& M, const MatrixXd& D) {
    if (D.rows() != D.cols() || D.rows() != R.rows() || M.rows() != R.rows())
        throw std::invalid_argument("prop1_projector: dimension mismatch");
    if (max_abs_diff(D, D.transpose()) > 1e-12 * std::max(1.0, max_abs(D)))
        throw numeric_error("prop1_projector: D is not symmetric");
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(D);
    const VectorXd& lambda = eig.eigenvalues();
    if (lambda.minCoeff() <= 1e-12 * lambda.maxCoeff())
        throw numeric_error("prop1_projector: D is not positive definite");
    const MatrixXd& V = eig.eigenvectors();
    const MatrixXd root = V * lambda.cwiseSqrt().asDiagonal() * V.transpose();
    const MatrixXd inv_root = V * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * V.transpose();

    const Index r = R.rows();
    return {projector_onto(root * R).dense(),
            MatrixXd::Identity(r, r) - projector_onto(inv_root * M).dense()};
}

} // namespace typeiii
