#pragma once

#include <cstddef>
#include <vector>

#include "gibbsgate/grid.hpp"
#include "gibbsgate/sigma.hpp"
#include "gibbsgate/space.hpp"

namespace gibbsgate {

// Transition operator of the two-component sampler: from (x, y), draw
// y' from alpha(x), then x' from beta(y'). States are the cells whose
// x-marginal is positive (alpha defined there); off-support cells among them
// are legal start states whose rows follow the same x-only formula.
struct GibbsKernel {
    std::vector<Cell> states;
    Grid<int> state_index;   // -1 for cells outside the state space
    RealGrid matrix;         // row-stochastic
    std::vector<double> stationary; // the joint law evaluated at the states
};

inline GibbsKernel build_kernel(const FiniteJoint& j) {
    const Conditional alpha = conditional_alpha(j);
    const Conditional beta = conditional_beta(j);

    GibbsKernel k;
    k.state_index = Grid<int>(j.x_size, j.y_size, -1);
    for (std::size_t i = 0; i < j.x_size; ++i) {
        if (!alpha.is_defined(i)) continue;
        for (std::size_t c = 0; c < j.y_size; ++c) {
            k.state_index(i, c) = static_cast<int>(k.states.size());
            k.states.push_back(Cell{i, c});
        }
    }

    const std::size_t n = k.states.size();
    k.matrix = RealGrid(n, n, 0.0);
    k.stationary.resize(n);
    for (std::size_t a = 0; a < n; ++a) {
        const std::size_t x = k.states[a].x;
        k.stationary[a] = j.prob(k.states[a].x, k.states[a].y);
        for (std::size_t b = 0; b < n; ++b) {
            const std::size_t xp = k.states[b].x;
            const std::size_t yp = k.states[b].y;
            if (beta.is_defined(yp))
                k.matrix(a, b) = alpha.rows(x, yp) * beta.rows(yp, xp);
        }
    }
    return k;
}

// Exact n-fold composition; n = 0 gives the identity. Sequential products
// with an ascending inner sum keep the result reproducible.
inline RealGrid kernel_power(const GibbsKernel& k, std::size_t n) {
    const std::size_t m = k.states.size();
    RealGrid out(m, m, 0.0);
    for (std::size_t i = 0; i < m; ++i) out(i, i) = 1.0;
    RealGrid next(m, m, 0.0);
    for (std::size_t step = 0; step < n; ++step) {
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t c = 0; c < m; ++c) {
                double acc = 0.0;
                for (std::size_t t = 0; t < m; ++t) acc += out(i, t) * k.matrix(t, c);
                next(i, c) = acc;
            }
        std::swap(out, next);
    }
    return out;
}

// Alternating conditional expectations of an observable. Step n conditions
// on Y when n is odd and on X when n is even (pass start_with_sigma_x to swap
// the parity). Each step is constant on its conditioning blocks by
// construction; conditionals undefined off the marginals contribute zero on
// those null rows/columns.
struct IterateTrace {
    std::vector<RealGrid> steps;
    bool started_with_x = false;
};

inline IterateTrace bc_iterates(const FiniteJoint& j, const RealGrid& phi, std::size_t n_max,
                                bool start_with_sigma_x = false) {
    if (!phi.same_shape(j.prob)) throw std::invalid_argument("shape error");
    const Conditional alpha = conditional_alpha(j);
    const Conditional beta = conditional_beta(j);

    IterateTrace tr;
    tr.started_with_x = start_with_sigma_x;
    tr.steps.push_back(phi);
    for (std::size_t n = 1; n <= n_max; ++n) {
        const RealGrid& prev = tr.steps.back();
        RealGrid cur(j.x_size, j.y_size, 0.0);
        const bool on_y = start_with_sigma_x ? (n % 2 == 0) : (n % 2 == 1);
        if (on_y) {
            for (std::size_t c = 0; c < j.y_size; ++c) {
                double g = 0.0;
                if (beta.is_defined(c))
                    for (std::size_t i = 0; i < j.x_size; ++i)
                        g += beta.rows(c, i) * prev(i, c);
                for (std::size_t i = 0; i < j.x_size; ++i) cur(i, c) = g;
            }
        } else {
            for (std::size_t i = 0; i < j.x_size; ++i) {
                double g = 0.0;
                if (alpha.is_defined(i))
                    for (std::size_t c = 0; c < j.y_size; ++c)
                        g += alpha.rows(i, c) * prev(i, c);
                for (std::size_t c = 0; c < j.y_size; ++c) cur(i, c) = g;
            }
        }
        tr.steps.push_back(std::move(cur));
    }
    return tr;
}

// Max over support states and n <= n_max of |(K^n phi)(state) - phi_{2n}(state)|.
inline double verify_theorem_41(const FiniteJoint& j, const GibbsKernel& k,
                                const RealGrid& phi, std::size_t n_max) {
    const IterateTrace tr = bc_iterates(j, phi, 2 * n_max);
    const std::size_t m = k.states.size();
    std::vector<double> v(m);
    for (std::size_t a = 0; a < m; ++a) v[a] = phi(k.states[a].x, k.states[a].y);

    double worst = 0.0;
    std::vector<double> next(m);
    for (std::size_t n = 1; n <= n_max; ++n) {
        for (std::size_t a = 0; a < m; ++a) {
            double acc = 0.0;
            for (std::size_t b = 0; b < m; ++b) acc += k.matrix(a, b) * v[b];
            next[a] = acc;
        }
        v.swap(next);
        const RealGrid& expected = tr.steps[2 * n];
        for (std::size_t a = 0; a < m; ++a) {
            const Cell& s = k.states[a];
            if (!j.on_support(s.x, s.y)) continue;
            double d = std::abs(v[a] - expected(s.x, s.y));
            if (d > worst) worst = d;
        }
    }
    return worst;
}

// Conditional mean of phi on each atom of the intersection sigma-field;
// off-support cells carry the global mean.
inline RealGrid limit_conditional_d(const FiniteJoint& j, const RealGrid& phi) {
    if (!phi.same_shape(j.prob)) throw std::invalid_argument("shape error");
    const Partition atoms = d_atoms(j);
    const std::vector<Cell> cells = support_cells(j);
    std::vector<double> mass(static_cast<std::size_t>(atoms.block_count), 0.0);
    std::vector<double> mean(static_cast<std::size_t>(atoms.block_count), 0.0);
    double global = 0.0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto b = static_cast<std::size_t>(atoms.block_id[c]);
        const double p = j.prob(cells[c].x, cells[c].y);
        mass[b] += p;
        mean[b] += p * phi(cells[c].x, cells[c].y);
        global += p * phi(cells[c].x, cells[c].y);
    }
    for (std::size_t b = 0; b < mean.size(); ++b) mean[b] /= mass[b];

    RealGrid out(j.x_size, j.y_size, global);
    for (std::size_t c = 0; c < cells.size(); ++c)
        out(cells[c].x, cells[c].y) = mean[static_cast<std::size_t>(atoms.block_id[c])];
    return out;
}

// True iff the even iterates converge (in sup-norm over the support) to the
// plain expectation of phi within the step budget.
inline bool check_corollary_21(const FiniteJoint& j, const RealGrid& phi, double tolerance,
                               std::size_t n_budget) {
    if (!(tolerance > 0.0)) throw std::invalid_argument("invalid weight");
    double target = 0.0;
    for (std::size_t f = 0; f < j.prob.size(); ++f)
        target += j.prob.at_flat(f) * phi.at_flat(f);

    const IterateTrace tr = bc_iterates(j, phi, 2 * n_budget);
    for (std::size_t n = 0; n <= n_budget; ++n) {
        const RealGrid& step = tr.steps[2 * n];
        double sup = 0.0;
        for (std::size_t i = 0; i < j.x_size; ++i)
            for (std::size_t c = 0; c < j.y_size; ++c)
                if (j.on_support(i, c)) sup = std::max(sup, std::abs(step(i, c) - target));
        if (sup <= tolerance) return true;
    }
    return false;
}

} // namespace gibbsgate
