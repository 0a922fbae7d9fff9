#pragma once

// Reproducible random two-factor layouts.
//
// PRNG: std::mt19937_64 (its output sequence is fixed by the C++ standard). Run k of a
// simulation with seed s uses the engine seeded with splitmix64(s + 0x9E3779B97F4A7C15 * (k + 1)),
// so results do not depend on thread scheduling. Uniform reals take the top 53 bits;
// normals use Box-Muller; integers use modulo reduction. None of these go through
// <random> distributions, whose algorithms are implementation-defined.

#include "typeiii/dataset.hpp"
#include "typeiii/linalg.hpp"
#include "typeiii/twofactor.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace typeiii {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    static Rng for_run(std::uint64_t seed, std::uint64_t run) {
        return Rng(splitmix64(seed + 0x9E3779B97F4A7C15ULL * (run + 1)));
    }

    // [0, 1)
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // [lo, hi]
    long uniform_int(long lo, long hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<long>(eng_() % span);
    }

    double normal() {
        if (spare_) {
            const double v = *spare_;
            spare_.reset();
            return v;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(t);
        return r * std::cos(t);
    }

    VectorXd normal_vector(Index n) {
        VectorXd v(n);
        for (Index i = 0; i < n; ++i) v(i) = normal();
        return v;
    }

private:
    std::mt19937_64 eng_;
    std::optional<double> spare_;
};

struct LayoutSpec {
    Index a_min = 2, a_max = 5;
    Index b_min = 2, b_max = 5;
    int n_min = 1, n_max = 6;
    double empty_prob = 0.0; // per-cell chance of being emptied
    Index empty_cells = 0;   // additionally, empty exactly this many cells
    bool balanced = false;   // one common n per layout
};

// Cell counts for a random a x b layout. Cells are only emptied when their row and
// column keep at least one filled cell, so every level stays observed.
inline Eigen::MatrixXi random_counts(Rng& rng, const LayoutSpec& spec) {
    const auto a = static_cast<Index>(rng.uniform_int(spec.a_min, spec.a_max));
    const auto b = static_cast<Index>(rng.uniform_int(spec.b_min, spec.b_max));
    Eigen::MatrixXi n(a, b);
    if (spec.balanced) {
        n.setConstant(static_cast<int>(rng.uniform_int(spec.n_min, spec.n_max)));
        return n;
    }
    for (Index i = 0; i < a; ++i)
        for (Index j = 0; j < b; ++j) n(i, j) = static_cast<int>(rng.uniform_int(spec.n_min, spec.n_max));

    auto can_empty = [&](Index i, Index j) {
        return n(i, j) > 0 && (n.row(i).array() > 0).count() > 1 && (n.col(j).array() > 0).count() > 1;
    };
    if (spec.empty_prob > 0.0)
        for (Index i = 0; i < a; ++i)
            for (Index j = 0; j < b; ++j)
                if (rng.uniform() < spec.empty_prob && can_empty(i, j)) n(i, j) = 0;
    for (Index k = 0; k < spec.empty_cells; ++k) {
        std::vector<Index> candidates;
        for (Index c = 0; c < a * b; ++c)
            if (can_empty(c / b, c % b)) candidates.push_back(c);
        if (candidates.empty()) break;
        const Index c = candidates[static_cast<std::size_t>(rng.uniform_int(0, static_cast<long>(candidates.size()) - 1))];
        n(c / b, c % b) = 0;
    }
    return n;
}

// Observations listed cell by cell (A slowest); levels are labelled a1.., b1...
inline Dataset dataset_from_counts(const Eigen::MatrixXi& n, const VectorXd& y) {
    std::vector<std::string> fa, fb;
    for (Index i = 0; i < n.rows(); ++i)
        for (Index j = 0; j < n.cols(); ++j)
            for (int s = 0; s < n(i, j); ++s) {
                fa.push_back("a" + std::to_string(i + 1));
                fb.push_back("b" + std::to_string(j + 1));
            }
    if (static_cast<Index>(fa.size()) != y.size()) throw std::invalid_argument("dataset_from_counts: length mismatch");
    return Dataset("y", y, {{"A", fa}, {"B", fb}});
}

// Incidence matrix for counts n with observations in cell order.
inline MatrixXd incidence_from_counts(const Eigen::MatrixXi& n) {
    const Index cells = n.size();
    MatrixXd K = MatrixXd::Zero(n.sum(), cells);
    Index row = 0;
    for (Index i = 0; i < n.rows(); ++i)
        for (Index j = 0; j < n.cols(); ++j)
            for (int s = 0; s < n(i, j); ++s) K(row++, i * n.cols() + j) = 1.0;
    return K;
}

struct SimulationConfig {
    std::size_t runs = 200;
    std::uint64_t seed = 42;
    LayoutSpec layout;
    double tol = 1e-8;
    unsigned threads = 1;
};

struct RunResult {
    std::size_t index = 0;
    Index a = 0, b = 0, n_obs = 0, n_empty = 0;
    bool pass = false;
    double max_rel_discrepancy = 0.0;
    std::string error;
};

struct SimulationSummary {
    SimulationConfig config;
    std::vector<RunResult> runs; // ordered by index
    std::size_t passed = 0;
    double worst = 0.0;

    bool all_passed() const { return passed == runs.size(); }
};

inline RunResult simulate_run(const SimulationConfig& cfg, std::size_t index) {
    Rng rng = Rng::for_run(cfg.seed, index);
    const Eigen::MatrixXi n = random_counts(rng, cfg.layout);
    const VectorXd y = rng.normal_vector(n.sum());
    RunResult r;
    r.index = index;
    r.a = n.rows();
    r.b = n.cols();
    r.n_obs = n.sum();
    r.n_empty = (n.array() == 0).count();
    try {
        const auto rep = equivalence_report(dataset_from_counts(n, y), "A", "B", cfg.tol);
        r.pass = rep.pass;
        r.max_rel_discrepancy = rep.max_rel_discrepancy;
    } catch (const std::exception& e) {
        r.pass = false;
        r.error = e.what();
    }
    return r;
}

inline SimulationSummary simulate(const SimulationConfig& cfg) {
    SimulationSummary s;
    s.config = cfg;
    s.runs.resize(cfg.runs);
    const unsigned workers = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(cfg.runs)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < cfg.runs; ++i) s.runs[i] = simulate_run(cfg, i);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < cfg.runs; i += workers) s.runs[i] = simulate_run(cfg, i);
            });
    }
    for (const auto& r : s.runs) {
        if (r.pass) ++s.passed;
        s.worst = std::max(s.worst, r.max_rel_discrepancy);
    }
    return s;
}

} // namespace typeiii
