#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "gibbsgate/grid.hpp"

namespace gibbsgate {

// Regular conditional distribution: one probability row per conditioning
// point. Rows with zero marginal are flagged undefined, never silently zero.
struct Conditional {
    RealGrid rows;
    std::vector<std::uint8_t> defined;

    bool is_defined(std::size_t i) const { return defined[i] != 0; }
};

// Joint distribution on a finite product space. `weights` keeps the raw
// input; `prob` is the normalization; `support` records strict positivity of
// the raw weights (no thresholding, so null-set logic stays combinatorial).
struct FiniteJoint {
    std::size_t x_size = 0;
    std::size_t y_size = 0;
    std::vector<std::string> x_labels;
    std::vector<std::string> y_labels;
    RealGrid weights;
    RealGrid prob;
    std::vector<double> mu;
    std::vector<double> nu;
    BoolGrid support;

    bool on_support(std::size_t i, std::size_t j) const { return support(i, j) != 0; }
};

inline std::vector<std::string> default_labels(char prefix, std::size_t n) {
    std::vector<std::string> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

inline FiniteJoint build_joint(const RealGrid& weights,
                               std::vector<std::string> x_labels = {},
                               std::vector<std::string> y_labels = {},
                               std::vector<double> mu = {},
                               std::vector<double> nu = {}) {
    const std::size_t nx = weights.rows();
    const std::size_t ny = weights.cols();
    if (nx == 0 || ny == 0) throw std::invalid_argument("empty distribution");

    for (std::size_t k = 0; k < weights.size(); ++k) {
        double w = weights.at_flat(k);
        if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("invalid weight");
    }

    if (x_labels.empty()) x_labels = default_labels('x', nx);
    if (y_labels.empty()) y_labels = default_labels('y', ny);
    if (mu.empty()) mu.assign(nx, 1.0);
    if (nu.empty()) nu.assign(ny, 1.0);
    if (x_labels.size() != nx || y_labels.size() != ny || mu.size() != nx || nu.size() != ny)
        throw std::invalid_argument("shape error");
    for (double m : mu)
        if (!std::isfinite(m) || m <= 0.0) throw std::invalid_argument("invalid weight");
    for (double n : nu)
        if (!std::isfinite(n) || n <= 0.0) throw std::invalid_argument("invalid weight");

    double total = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) total += weights.at_flat(k);
    if (total <= 0.0) throw std::invalid_argument("empty distribution");

    FiniteJoint j;
    j.x_size = nx;
    j.y_size = ny;
    j.x_labels = std::move(x_labels);
    j.y_labels = std::move(y_labels);
    j.weights = weights;
    j.mu = std::move(mu);
    j.nu = std::move(nu);
    j.prob = RealGrid(nx, ny, 0.0);
    j.support = BoolGrid(nx, ny, 0);
    for (std::size_t k = 0; k < weights.size(); ++k) {
        double w = weights.at_flat(k);
        j.prob.at_flat(k) = w / total;
        j.support.at_flat(k) = w > 0.0 ? 1 : 0;
    }
    return j;
}

inline std::vector<double> marginal_x(const FiniteJoint& j) {
    std::vector<double> out(j.x_size, 0.0);
    for (std::size_t i = 0; i < j.x_size; ++i)
        for (std::size_t k = 0; k < j.y_size; ++k)
            out[i] += j.prob(i, k);
    return out;
}

// Accumulation runs row-major (i outer) so each out[k] receives terms in
// ascending i order; the k-coordinate kernel relies on reproducing this sum
// bit for bit.
inline std::vector<double> marginal_y(const FiniteJoint& j) {
    std::vector<double> out(j.y_size, 0.0);
    for (std::size_t i = 0; i < j.x_size; ++i)
        for (std::size_t k = 0; k < j.y_size; ++k)
            out[k] += j.prob(i, k);
    return out;
}

// alpha(x): distribution of Y given X = x.
inline Conditional conditional_alpha(const FiniteJoint& j) {
    Conditional c;
    c.rows = RealGrid(j.x_size, j.y_size, 0.0);
    c.defined.assign(j.x_size, 0);
    const std::vector<double> mx = marginal_x(j);
    for (std::size_t i = 0; i < j.x_size; ++i) {
        if (mx[i] > 0.0) {
            c.defined[i] = 1;
            for (std::size_t k = 0; k < j.y_size; ++k)
                c.rows(i, k) = j.prob(i, k) / mx[i];
        }
    }
    return c;
}

// beta(y): distribution of X given Y = y; rows indexed by y.
inline Conditional conditional_beta(const FiniteJoint& j) {
    Conditional c;
    c.rows = RealGrid(j.y_size, j.x_size, 0.0);
    c.defined.assign(j.y_size, 0);
    const std::vector<double> my = marginal_y(j);
    for (std::size_t k = 0; k < j.y_size; ++k) {
        if (my[k] > 0.0) {
            c.defined[k] = 1;
            for (std::size_t i = 0; i < j.x_size; ++i)
                c.rows(k, i) = j.prob(i, k) / my[k];
        }
    }
    return c;
}

inline RealGrid density(const FiniteJoint& j) {
    RealGrid f(j.x_size, j.y_size, 0.0);
    for (std::size_t i = 0; i < j.x_size; ++i)
        for (std::size_t k = 0; k < j.y_size; ++k)
            f(i, k) = j.prob(i, k) / (j.mu[i] * j.nu[k]);
    return f;
}

inline double event_prob(const FiniteJoint& j, const Event& e) {
    if (e.rows() != j.x_size || e.cols() != j.y_size)
        throw std::invalid_argument("shape error");
    double total = 0.0;
    for (std::size_t k = 0; k < j.prob.size(); ++k)
        if (e.member.at_flat(k)) total += j.prob.at_flat(k);
    return total;
}

// Support cells in row-major order. This ordering is the canonical cell list
// for completed sigma-fields, atoms, and witness selection.
inline std::vector<Cell> support_cells(const FiniteJoint& j) {
    std::vector<Cell> out;
    for (std::size_t i = 0; i < j.x_size; ++i)
        for (std::size_t k = 0; k < j.y_size; ++k)
            if (j.on_support(i, k)) out.push_back(Cell{i, k});
    return out;
}

inline double rectangle_prob(const FiniteJoint& j, const Rectangle& r) {
    if (r.u.size() != j.x_size || r.v.size() != j.y_size)
        throw std::invalid_argument("shape error");
    double total = 0.0;
    for (std::size_t i = 0; i < j.x_size; ++i) {
        if (!r.u[i]) continue;
        for (std::size_t k = 0; k < j.y_size; ++k)
            if (r.v[k]) total += j.prob(i, k);
    }
    return total;
}

} // namespace gibbsgate
