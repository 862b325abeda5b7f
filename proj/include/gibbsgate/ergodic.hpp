#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gibbsgate/grid.hpp"
#include "gibbsgate/kernel.hpp"
#include "gibbsgate/parallel.hpp"
#include "gibbsgate/sigma.hpp"
#include "gibbsgate/space.hpp"

namespace gibbsgate {

// Minorization data: s 1_{U x V} <= f pointwise, f_1 <= t 1_U pointwise, and
// the resulting one-step coupling mass epsilon = (s/t) nu(V). The chain's
// distance to stationarity contracts by at least epsilon per step.
struct DoeblinCertificate {
    std::vector<std::uint8_t> u;
    std::vector<std::uint8_t> v;
    double s = 0.0;
    double t = 0.0;
    double epsilon = 0.0;
    double rate_bound = 1.0;
};

// Rectangle and level witnessing: f >= s on U x V, f = 0 on U^c x V^c, and
// sup over U^c x V of f strictly below s mu(U)/mu(U^c).
struct GeometricCertificate {
    std::vector<std::uint8_t> u;
    std::vector<std::uint8_t> v;
    double s = 0.0;
};

struct S0Report {
    std::vector<std::uint8_t> in_s0; // per kernel state
    bool full = false;
};

// States whose one-step law is absolutely continuous with respect to the
// joint: the kernel row's support must lie inside the support of P.
inline S0Report compute_s0(const FiniteJoint& j, const GibbsKernel& k) {
    S0Report r;
    r.in_s0.assign(k.states.size(), 0);
    r.full = true;
    for (std::size_t a = 0; a < k.states.size(); ++a) {
        bool ok = true;
        for (std::size_t b = 0; b < k.states.size(); ++b) {
            if (k.matrix(a, b) > 0.0 && !j.on_support(k.states[b].x, k.states[b].y)) {
                ok = false;
                break;
            }
        }
        r.in_s0[a] = ok ? 1 : 0;
        if (!ok) r.full = false;
    }
    return r;
}

// Sup over events of |p(F) - q(F)|, i.e. half the L1 distance.
inline double tv_distance(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw std::invalid_argument("length mismatch");
    double sp = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!(p[i] >= 0.0) || !(q[i] >= 0.0)) throw std::invalid_argument("non-probability input");
        sp += p[i];
        sq += q[i];
    }
    if (std::abs(sp - 1.0) > 1e-9 || std::abs(sq - 1.0) > 1e-9)
        throw std::invalid_argument("non-probability input");
    double l1 = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) l1 += std::abs(p[i] - q[i]);
    return 0.5 * l1;
}

struct ErgodicityReport {
    bool s0_full = false;
    bool aperiodic = false;
    std::vector<double> tv_curve; // entry n-1 is the distance after n steps
    double fitted_rate = 0.0;
    bool ergodic = false;
    int atom_count = 0;
    std::optional<DoeblinCertificate> certificate;
};

// Per-step worst-case distance to stationarity over all start states.
// Optionally truncates once the curve drops below stop_below.
inline std::vector<double> tv_curve(const FiniteJoint& j, const GibbsKernel& k,
                                    std::size_t n_max, double stop_below = 0.0) {
    const std::size_t m = k.states.size();
    std::vector<double> curve;
    curve.reserve(n_max);
    RealGrid pow = k.matrix;
    RealGrid next(m, m, 0.0);
    std::vector<double> row(m);
    for (std::size_t n = 1; n <= n_max; ++n) {
        if (n > 1) {
            parallel_for(m, [&](std::size_t i) {
                for (std::size_t c = 0; c < m; ++c) {
                    double acc = 0.0;
                    for (std::size_t t = 0; t < m; ++t) acc += pow(i, t) * k.matrix(t, c);
                    next(i, c) = acc;
                }
            });
            std::swap(pow, next);
        }
        double worst = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t c = 0; c < m; ++c) row[c] = pow(i, c);
            worst = std::max(worst, tv_distance(row, k.stationary));
        }
        curve.push_back(worst);
        if (stop_below > 0.0 && worst < stop_below) break;
    }
    return curve;
}

// Least-squares geometric rate from the tail of the curve: fit log v against
// n over the last half of the strictly positive entries.
inline double fitted_rate(const std::vector<double>& curve) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < curve.size(); ++i)
        if (curve[i] > 0.0) idx.push_back(i);
    if (idx.size() < 2) return 0.0;
    idx.erase(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(idx.size() / 2));
    if (idx.size() < 2) return 0.0;
    double sn = 0.0, sv = 0.0, snn = 0.0, snv = 0.0;
    for (std::size_t i : idx) {
        const double n = static_cast<double>(i + 1);
        const double v = std::log(curve[i]);
        sn += n;
        sv += v;
        snn += n * n;
        snv += n * v;
    }
    const double count = static_cast<double>(idx.size());
    const double slope = (count * snv - sn * sv) / (count * snn - sn * sn);
    return std::clamp(std::exp(slope), 0.0, 1.0);
}

// Best minorization rectangle. U is forced to the positive-marginal rows
// (f_1 must vanish off U and stay positive on it); V ranges over nonempty
// sets of columns supported in every such row. Ties in epsilon go to the
// lexicographically smallest V.
inline std::optional<DoeblinCertificate> doeblin_certificate(const FiniteJoint& j) {
    if (j.x_size + j.y_size > 24) throw budget_exceeded("size budget exceeded");
    const RealGrid f = density(j);
    const std::vector<double> mx = marginal_x(j);

    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < j.x_size; ++i)
        if (mx[i] > 0.0) rows.push_back(i);

    // f_1(x) = sum_y f(x,y) nu(y); equals the x-marginal of the joint law.
    double t = 0.0;
    for (std::size_t i : rows) {
        double f1 = 0.0;
        for (std::size_t c = 0; c < j.y_size; ++c) f1 += f(i, c) * j.nu[c];
        t = std::max(t, f1);
    }

    std::uint32_t eligible = 0;
    for (std::size_t c = 0; c < j.y_size; ++c) {
        bool all = true;
        for (std::size_t i : rows)
            if (!j.on_support(i, c)) { all = false; break; }
        if (all) eligible |= 1u << c;
    }
    if (eligible == 0) return std::nullopt;

    auto elements = [&](std::uint32_t mask) {
        std::vector<std::size_t> out;
        for (std::size_t c = 0; c < j.y_size; ++c)
            if ((mask >> c) & 1u) out.push_back(c);
        return out;
    };
    auto lex_less = [&](std::uint32_t a, std::uint32_t b) {
        const auto ea = elements(a), eb = elements(b);
        return std::lexicographical_compare(ea.begin(), ea.end(), eb.begin(), eb.end());
    };

    bool found = false;
    double best_eps = 0.0;
    std::uint32_t best_v = 0;
    double best_s = 0.0;
    const std::uint32_t full_v = j.y_size == 32 ? 0xffffffffu : ((1u << j.y_size) - 1u);
    for (std::uint32_t vm = 1; vm <= full_v; ++vm) {
        if ((vm & ~eligible) != 0) continue;
        double s = std::numeric_limits<double>::infinity();
        double nu_v = 0.0;
        for (std::size_t c = 0; c < j.y_size; ++c) {
            if (!((vm >> c) & 1u)) continue;
            nu_v += j.nu[c];
            for (std::size_t i : rows) s = std::min(s, f(i, c));
        }
        const double eps = (s / t) * nu_v;
        if (!found || eps > best_eps ||
            (eps == best_eps && lex_less(vm, best_v))) {
            found = true;
            best_eps = eps;
            best_v = vm;
            best_s = s;
        }
    }
    if (!found) return std::nullopt;

    DoeblinCertificate cert;
    cert.u.assign(j.x_size, 0);
    for (std::size_t i : rows) cert.u[i] = 1;
    cert.v.assign(j.y_size, 0);
    for (std::size_t c = 0; c < j.y_size; ++c)
        if ((best_v >> c) & 1u) cert.v[c] = 1;
    cert.s = best_s;
    cert.t = t;
    cert.epsilon = best_eps;
    cert.rate_bound = 1.0 - best_eps;
    return cert;
}

// First rectangle (U ascending, then V ascending; U proper and nonempty)
// meeting all the displayed geometric-ergodicity hypotheses.
inline std::optional<GeometricCertificate> geometric_hypotheses(const FiniteJoint& j) {
    if (j.x_size + j.y_size > 24) throw budget_exceeded("size budget exceeded");
    const RealGrid f = density(j);
    double mu_all = 0.0;
    for (double m : j.mu) mu_all += m;

    const std::uint32_t full_u = j.x_size == 32 ? 0xffffffffu : ((1u << j.x_size) - 1u);
    const std::uint32_t full_v = j.y_size == 32 ? 0xffffffffu : ((1u << j.y_size) - 1u);
    for (std::uint32_t um = 1; um < full_u; ++um) {
        double mu_u = 0.0;
        for (std::size_t i = 0; i < j.x_size; ++i)
            if ((um >> i) & 1u) mu_u += j.mu[i];
        const double ratio_base = mu_u / (mu_all - mu_u);
        for (std::uint32_t vm = 1; vm <= full_v; ++vm) {
            double s = std::numeric_limits<double>::infinity();
            double sup_out = 0.0;
            bool ok = true;
            for (std::size_t i = 0; i < j.x_size && ok; ++i) {
                const bool in_u = (um >> i) & 1u;
                for (std::size_t c = 0; c < j.y_size; ++c) {
                    const bool in_v = (vm >> c) & 1u;
                    if (in_u && in_v) s = std::min(s, f(i, c));
                    else if (!in_u && !in_v) {
                        if (f(i, c) != 0.0) { ok = false; break; }
                    } else if (!in_u && in_v) {
                        sup_out = std::max(sup_out, f(i, c));
                    }
                }
            }
            if (!ok || !(s > 0.0)) continue;
            if (!(sup_out < s * ratio_base)) continue;
            GeometricCertificate cert;
            cert.u.assign(j.x_size, 0);
            cert.v.assign(j.y_size, 0);
            for (std::size_t i = 0; i < j.x_size; ++i)
                if ((um >> i) & 1u) cert.u[i] = 1;
            for (std::size_t c = 0; c < j.y_size; ++c)
                if ((vm >> c) & 1u) cert.v[c] = 1;
            cert.s = s;
            return cert;
        }
    }
    return std::nullopt;
}

// Structural aperiodicity: every recurrent class of the transition digraph
// must have cycle-length gcd 1.
inline bool check_aperiodic(const FiniteJoint& j, const GibbsKernel& k) {
    const std::size_t m = k.states.size();
    std::vector<std::vector<std::size_t>> adj(m);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b)
            if (k.matrix(a, b) > 0.0) adj[a].push_back(b);

    // Tarjan-style SCCs via iterative Kosaraju: order by finish time, then
    // sweep the transpose.
    std::vector<std::size_t> order;
    order.reserve(m);
    {
        std::vector<std::uint8_t> seen(m, 0);
        for (std::size_t s = 0; s < m; ++s) {
            if (seen[s]) continue;
            std::vector<std::pair<std::size_t, std::size_t>> stack{{s, 0}};
            seen[s] = 1;
            while (!stack.empty()) {
                auto& [node, next] = stack.back();
                if (next < adj[node].size()) {
                    std::size_t to = adj[node][next++];
                    if (!seen[to]) {
                        seen[to] = 1;
                        stack.emplace_back(to, 0);
                    }
                } else {
                    order.push_back(node);
                    stack.pop_back();
                }
            }
        }
    }
    std::vector<std::vector<std::size_t>> radj(m);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b : adj[a]) radj[b].push_back(a);
    std::vector<int> comp(m, -1);
    int ncomp = 0;
    for (std::size_t i = order.size(); i-- > 0;) {
        if (comp[order[i]] != -1) continue;
        std::vector<std::size_t> stack{order[i]};
        comp[order[i]] = ncomp;
        while (!stack.empty()) {
            std::size_t node = stack.back();
            stack.pop_back();
            for (std::size_t to : radj[node])
                if (comp[to] == -1) {
                    comp[to] = ncomp;
                    stack.push_back(to);
                }
        }
        ++ncomp;
    }

    std::vector<std::uint8_t> recurrent(static_cast<std::size_t>(ncomp), 1);
    std::vector<std::uint8_t> has_state(static_cast<std::size_t>(ncomp), 0);
    std::vector<std::uint8_t> has_edge(static_cast<std::size_t>(ncomp), 0);
    for (std::size_t a = 0; a < m; ++a) {
        has_state[static_cast<std::size_t>(comp[a])] = 1;
        for (std::size_t b : adj[a]) {
            if (comp[a] != comp[b]) recurrent[static_cast<std::size_t>(comp[a])] = 0;
            else has_edge[static_cast<std::size_t>(comp[a])] = 1;
        }
    }

    bool aperiodic = true;
    for (int cc = 0; cc < ncomp && aperiodic; ++cc) {
        if (!recurrent[static_cast<std::size_t>(cc)] || !has_edge[static_cast<std::size_t>(cc)])
            continue;
        // BFS levels within the class; gcd of lev(u)+1-lev(v) over class edges.
        std::size_t root = m;
        for (std::size_t a = 0; a < m; ++a)
            if (comp[a] == cc) { root = a; break; }
        std::vector<long long> lev(m, -1);
        std::vector<std::size_t> queue{root};
        lev[root] = 0;
        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
            std::size_t node = queue[qi];
            for (std::size_t to : adj[node]) {
                if (comp[to] != cc) continue;
                if (lev[to] < 0) {
                    lev[to] = lev[node] + 1;
                    queue.push_back(to);
                }
            }
        }
        long long g = 0;
        for (std::size_t a = 0; a < m; ++a) {
            if (comp[a] != cc) continue;
            for (std::size_t b : adj[a]) {
                if (comp[b] != cc) continue;
                g = std::gcd(g, lev[a] + 1 - lev[b]);
            }
        }
        if (g < 0) g = -g;
        if (g != 1) aperiodic = false;
    }

    if (check_gibbs_admissible(j).admissible && !aperiodic)
        throw invariant_violation("connected support produced a periodic kernel");
    return aperiodic;
}

// Second-largest eigenvalue modulus of the kernel.
inline double spectral_rate(const GibbsKernel& k) {
    const std::size_t m = k.states.size();
    if (m <= 1) return 0.0;
    Eigen::MatrixXd a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t c = 0; c < m; ++c)
            a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = k.matrix(i, c);
    Eigen::EigenSolver<Eigen::MatrixXd> solver(a, false);
    std::vector<double> mods(m);
    for (std::size_t i = 0; i < m; ++i)
        mods[i] = std::abs(solver.eigenvalues()(static_cast<Eigen::Index>(i)));
    std::sort(mods.begin(), mods.end(), std::greater<>());
    return std::clamp(mods[1], 0.0, 1.0);
}

inline ErgodicityReport ergodic_report(const FiniteJoint& j, const GibbsKernel& k,
                                       std::size_t n_max, double stop_below = 0.0) {
    ErgodicityReport r;
    r.s0_full = compute_s0(j, k).full;
    r.aperiodic = check_aperiodic(j, k);
    r.tv_curve = tv_curve(j, k, n_max, stop_below);
    r.fitted_rate = fitted_rate(r.tv_curve);
    r.atom_count = d_atoms(j).block_count;
    r.ergodic = !r.tv_curve.empty() && r.tv_curve.back() < 1e-9;
    return r;
}

} // namespace gibbsgate
