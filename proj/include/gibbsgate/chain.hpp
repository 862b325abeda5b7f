#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "gibbsgate/grid.hpp"
#include "gibbsgate/parallel.hpp"
#include "gibbsgate/rng.hpp"
#include "gibbsgate/space.hpp"

namespace gibbsgate {

struct StartSpec {
    enum class Kind { Stationary, State, Distribution };
    Kind kind = Kind::Stationary;
    Cell state;
    std::vector<double> dist; // over flat cells, row-major
};

struct ChainConfig {
    std::uint64_t seed = 0;
    std::size_t steps = 1;
    std::size_t chains = 1;
    StartSpec start;
};

namespace detail {

inline void validate_config(const FiniteJoint& j, const ChainConfig& cfg,
                            const std::vector<double>& mx) {
    if (cfg.steps < 1 || cfg.chains < 1) throw std::invalid_argument("invalid chain config");
    switch (cfg.start.kind) {
        case StartSpec::Kind::Stationary:
            break;
        case StartSpec::Kind::State: {
            const Cell& s = cfg.start.state;
            if (s.x >= j.x_size || s.y >= j.y_size || !(mx[s.x] > 0.0))
                throw std::invalid_argument("invalid start state");
            break;
        }
        case StartSpec::Kind::Distribution: {
            if (cfg.start.dist.size() != j.x_size * j.y_size)
                throw std::invalid_argument("shape error");
            double total = 0.0;
            for (std::size_t f = 0; f < cfg.start.dist.size(); ++f) {
                const double q = cfg.start.dist[f];
                if (!(q >= 0.0) || !std::isfinite(q))
                    throw std::invalid_argument("invalid start state");
                if (q > 0.0 && !(mx[f / j.y_size] > 0.0))
                    throw std::invalid_argument("invalid start state");
                total += q;
            }
            if (std::abs(total - 1.0) > 1e-9)
                throw std::invalid_argument("invalid start state");
            break;
        }
    }
}

inline Cell draw_start(const FiniteJoint& j, const StartSpec& start, CounterRng& rng) {
    switch (start.kind) {
        case StartSpec::Kind::State:
            return start.state;
        case StartSpec::Kind::Stationary: {
            const std::size_t f = sample_index(j.prob.data(), rng.next_unit());
            return Cell{f / j.y_size, f % j.y_size};
        }
        case StartSpec::Kind::Distribution: {
            const std::size_t f = sample_index(start.dist, rng.next_unit());
            return Cell{f / j.y_size, f % j.y_size};
        }
    }
    return Cell{};
}

} // namespace detail

// One replicate: X_0 drawn per the start spec (one uniform unless an explicit
// state), then each transition spends two uniforms: y* from alpha(x), x* from
// beta(y*). The trajectory has cfg.steps entries, start included.
inline std::vector<Cell> simulate_one(const FiniteJoint& j, const Conditional& alpha,
                                      const Conditional& beta, const StartSpec& start,
                                      std::size_t steps, CounterRng rng) {
    std::vector<Cell> traj;
    traj.reserve(steps);
    Cell cur = detail::draw_start(j, start, rng);
    traj.push_back(cur);
    for (std::size_t n = 1; n < steps; ++n) {
        const std::size_t ys = sample_index(&alpha.rows(cur.x, 0), j.y_size, rng.next_unit());
        const std::size_t xs = sample_index(&beta.rows(ys, 0), j.x_size, rng.next_unit());
        cur = Cell{xs, ys};
        traj.push_back(cur);
    }
    return traj;
}

inline std::vector<std::vector<Cell>> simulate(const FiniteJoint& j, const ChainConfig& cfg) {
    const std::vector<double> mx = marginal_x(j);
    detail::validate_config(j, cfg, mx);
    const Conditional alpha = conditional_alpha(j);
    const Conditional beta = conditional_beta(j);
    std::vector<std::vector<Cell>> out(cfg.chains);
    parallel_for(cfg.chains, [&](std::size_t i) {
        out[i] = simulate_one(j, alpha, beta, cfg.start, cfg.steps,
                              CounterRng(replicate_seed(cfg.seed, i)));
    });
    return out;
}

struct SllnReport {
    std::vector<std::size_t> record_ns;            // the n at which means are recorded
    std::vector<std::vector<double>> running_means; // one trace per replicate
    double target = 0.0;
    std::vector<double> finals;
    std::vector<double> final_abs_error;
    bool pass = false;
    double band = 0.0;
};

struct SllnBand {
    enum class Mode { Absolute, StdMultiple };
    Mode mode = Mode::Absolute;
    double value = 0.01;
};

// Running means m_n = (1/n) sum_{i<n} phi(X_i, Y_i), recorded every `stride`
// steps (and at the final step). Means are exact sums divided at the record
// points.
inline SllnReport slln_estimate(const FiniteJoint& j, const RealGrid& phi,
                                const ChainConfig& cfg, std::size_t stride = 1) {
    if (!phi.same_shape(j.prob)) throw std::invalid_argument("shape error");
    const std::vector<double> mx = marginal_x(j);
    detail::validate_config(j, cfg, mx);
    if (stride < 1) stride = 1;
    const Conditional alpha = conditional_alpha(j);
    const Conditional beta = conditional_beta(j);

    SllnReport rep;
    for (std::size_t n = stride; n <= cfg.steps; n += stride) rep.record_ns.push_back(n);
    if (cfg.steps % stride != 0) rep.record_ns.push_back(cfg.steps);
    rep.target = 0.0;
    for (std::size_t f = 0; f < j.prob.size(); ++f)
        rep.target += j.prob.at_flat(f) * phi.at_flat(f);

    rep.running_means.assign(cfg.chains, {});
    rep.finals.assign(cfg.chains, 0.0);
    parallel_for(cfg.chains, [&](std::size_t i) {
        CounterRng rng(replicate_seed(cfg.seed, i));
        Cell cur = detail::draw_start(j, cfg.start, rng);
        double sum = phi(cur.x, cur.y);
        std::vector<double> trace;
        trace.reserve(rep.record_ns.size());
        std::size_t rec = 0;
        for (std::size_t n = 1; n <= cfg.steps; ++n) {
            if (rec < rep.record_ns.size() && n == rep.record_ns[rec]) {
                trace.push_back(sum / static_cast<double>(n));
                ++rec;
            }
            if (n == cfg.steps) break;
            const std::size_t ys = sample_index(&alpha.rows(cur.x, 0), j.y_size, rng.next_unit());
            const std::size_t xs = sample_index(&beta.rows(ys, 0), j.x_size, rng.next_unit());
            cur = Cell{xs, ys};
            sum += phi(cur.x, cur.y);
        }
        rep.running_means[i] = std::move(trace);
        rep.finals[i] = rep.running_means[i].back();
    });
    rep.final_abs_error.resize(cfg.chains);
    for (std::size_t i = 0; i < cfg.chains; ++i)
        rep.final_abs_error[i] = std::abs(rep.finals[i] - rep.target);
    return rep;
}

// Pass iff every replicate's final mean lands inside the band around the
// expectation of phi. The default band is an absolute half-width of 0.01.
inline SllnReport slln_diagnose(const FiniteJoint& j, const RealGrid& phi,
                                const ChainConfig& cfg, SllnBand band = {},
                                std::size_t stride = 1) {
    if (cfg.chains < 2) throw std::invalid_argument("invalid chain config");
    SllnReport rep = slln_estimate(j, phi, cfg, stride);
    double width = band.value;
    if (band.mode == SllnBand::Mode::StdMultiple) {
        double mean = 0.0;
        for (double f : rep.finals) mean += f;
        mean /= static_cast<double>(rep.finals.size());
        double var = 0.0;
        for (double f : rep.finals) var += (f - mean) * (f - mean);
        var /= static_cast<double>(rep.finals.size() - 1);
        width = band.value * std::sqrt(var);
    }
    rep.band = width;
    rep.pass = true;
    for (double e : rep.final_abs_error)
        if (!(e <= width)) rep.pass = false;
    return rep;
}

// Trajectory over the rows of an arbitrary row-stochastic matrix; one uniform
// per step. Used to drive chains whose states are not product cells.
inline std::vector<std::size_t> simulate_kernel_rows(const RealGrid& matrix,
                                                     std::size_t start_row, std::size_t steps,
                                                     CounterRng rng) {
    if (start_row >= matrix.rows() || steps < 1)
        throw std::invalid_argument("invalid chain config");
    std::vector<std::size_t> traj;
    traj.reserve(steps);
    std::size_t cur = start_row;
    traj.push_back(cur);
    for (std::size_t n = 1; n < steps; ++n) {
        cur = sample_index(&matrix(cur, 0), matrix.cols(), rng.next_unit());
        traj.push_back(cur);
    }
    return traj;
}

} // namespace gibbsgate
