#pragma once

// Full (overparameterized) dummy coding of a term list over a dataset, and the cell
// incidence matrix K of the cross-classification.

#include "typeiii/dataset.hpp"
#include "typeiii/error.hpp"
#include "typeiii/formula.hpp"
#include "typeiii/linalg.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace typeiii {

struct DesignBlock {
    Term term;
    MatrixXd columns;                // n_obs x (product of level counts), 0/1 entries
    std::vector<std::string> labels; // one per column, e.g. "A[a1]:B[b2]"
};

struct DesignMatrix {
    TermList model;
    std::vector<DesignBlock> blocks; // model order
    MatrixXd X;                      // concatenation of the blocks
    // Per observation: index into the lexicographic cross of the model factors' levels.
    std::vector<std::size_t> cell_index;
    std::size_t n_cells = 0;
    Index rows = 0;

    Index n_obs() const noexcept { return rows; }

    const DesignBlock& block(const Term& t) const {
        for (const auto& b : blocks)
            if (b.term == t) return b;
        throw std::invalid_argument("term " + t.label() + " is not in the design");
    }

    // (X_t1, X_t2, ...) for the given terms; zero columns if the list is empty.
    MatrixXd columns_of(const std::vector<Term>& terms) const {
        std::vector<MatrixXd> parts;
        for (const auto& t : terms) parts.push_back(block(t).columns);
        return hcat(parts, n_obs());
    }
};

struct IncidenceMatrix {
    MatrixXd K;                           // n_obs x n_cells, one 1 per row
    Eigen::VectorXi counts;               // observations per cell, zeros allowed
    std::vector<std::string> factor_names;
    std::vector<std::size_t> level_counts;

    Index n_cells() const noexcept { return K.cols(); }
    bool all_filled() const { return counts.size() > 0 && counts.minCoeff() > 0; }
};

namespace detail {

inline std::vector<const Factor*> lookup_factors(const Dataset& data, const std::vector<std::string>& names) {
    std::vector<const Factor*> out;
    for (const auto& n : names) out.push_back(&data.factor(n));
    return out;
}

// Lexicographic cell index, first factor varying slowest (matches I_a (x) 1_b ordering).
inline std::size_t cell_of(const std::vector<const Factor*>& fs, std::size_t obs) {
    std::size_t idx = 0;
    for (const auto* f : fs) idx = idx * f->n_levels() + static_cast<std::size_t>(f->codes[obs]);
    return idx;
}

inline std::size_t cross_size(const std::vector<const Factor*>& fs) {
    std::size_t c = 1;
    for (const auto* f : fs) c *= f->n_levels();
    return c;
}

inline std::string cell_label(const std::vector<const Factor*>& fs, std::size_t cell) {
    std::vector<std::string> parts(fs.size());
    for (std::size_t k = fs.size(); k-- > 0;) {
        const std::size_t m = fs[k]->n_levels();
        parts[k] = fs[k]->name + "[" + fs[k]->levels[cell % m] + "]";
        cell /= m;
    }
    std::string out;
    for (std::size_t k = 0; k < parts.size(); ++k) out += (k ? ":" : "") + parts[k];
    return out;
}

} // namespace detail

inline IncidenceMatrix build_incidence(const Dataset& data, const std::vector<std::string>& factor_names) {
    const auto fs = detail::lookup_factors(data, factor_names);
    const std::size_t cells = detail::cross_size(fs);
    const auto n = static_cast<Index>(data.n_obs());
    IncidenceMatrix inc;
    inc.K = MatrixXd::Zero(n, static_cast<Index>(cells));
    inc.counts = Eigen::VectorXi::Zero(static_cast<Index>(cells));
    inc.factor_names = factor_names;
    for (const auto* f : fs) inc.level_counts.push_back(f->n_levels());
    for (Index i = 0; i < n; ++i) {
        const auto c = static_cast<Index>(detail::cell_of(fs, static_cast<std::size_t>(i)));
        inc.K(i, c) = 1.0;
        ++inc.counts(c);
    }
    return inc;
}

inline DesignMatrix build_design(const Dataset& data, const TermList& model) {
    for (const auto& name : model.factor_names())
        if (!data.has_factor(name)) throw data_error("unknown factor '" + name + "' in model");

    DesignMatrix d;
    d.model = model;
    const auto n = static_cast<Index>(data.n_obs());
    d.rows = n;
    for (const auto& t : model.terms) {
        const auto fs = detail::lookup_factors(data, t.factors());
        const std::size_t cols = detail::cross_size(fs);
        DesignBlock b{t, MatrixXd::Zero(n, static_cast<Index>(cols)), {}};
        for (Index i = 0; i < n; ++i)
            b.columns(i, static_cast<Index>(detail::cell_of(fs, static_cast<std::size_t>(i)))) = 1.0;
        if (t.is_intercept())
            b.labels.push_back("(1)");
        else
            for (std::size_t c = 0; c < cols; ++c) b.labels.push_back(detail::cell_label(fs, c));
        d.blocks.push_back(std::move(b));
    }
    d.X = d.columns_of(model.terms);

    const auto all = detail::lookup_factors(data, model.factor_names());
    d.n_cells = detail::cross_size(all);
    d.cell_index.resize(data.n_obs());
    for (std::size_t i = 0; i < data.n_obs(); ++i) d.cell_index[i] = detail::cell_of(all, i);
    return d;
}

} // namespace typeiii
