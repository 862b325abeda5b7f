#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gibbsgate/grid.hpp"
#include "gibbsgate/sigma.hpp"
#include "gibbsgate/space.hpp"

namespace gibbsgate {

namespace detail {

inline std::vector<double> normalize_positive(const std::vector<double>& v) {
    for (double x : v)
        if (!(x > 0.0) || !std::isfinite(x)) throw std::invalid_argument("invalid weight");
    double total = 0.0;
    for (double x : v) total += x;
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / total;
    return out;
}

} // namespace detail

// The product measure conditioned on H. Base measures are normalized first,
// so the result is invariant under rescaling mu or nu; for power-of-two
// scale factors the invariance is bit-exact.
inline FiniteJoint conditioned(const std::vector<double>& mu, const std::vector<double>& nu,
                               const Event& h) {
    if (h.rows() != mu.size() || h.cols() != nu.size())
        throw std::invalid_argument("shape error");
    const std::vector<double> mu0 = detail::normalize_positive(mu);
    const std::vector<double> nu0 = detail::normalize_positive(nu);
    RealGrid w(mu.size(), nu.size(), 0.0);
    bool any = false;
    for (std::size_t i = 0; i < mu.size(); ++i)
        for (std::size_t k = 0; k < nu.size(); ++k)
            if (h.contains(i, k)) {
                w(i, k) = mu0[i] * nu0[k];
                any = true;
            }
    if (!any) throw std::invalid_argument("null conditioning event");
    return build_joint(w, {}, {}, mu0, nu0);
}

struct TipReport {
    bool tip = false;
    int components = 0;
};

// H is TIP iff the conditioned measure Q_H admits no disconnecting rectangle,
// i.e. H is one bipartite component.
inline TipReport is_tip(const std::vector<double>& mu, const std::vector<double>& nu,
                        const Event& h) {
    const FiniteJoint q = conditioned(mu, nu, h);
    const AdmissibilityReport r = check_gibbs_admissible(q);
    return TipReport{r.admissible, r.atom_count};
}

struct CommunicationReport {
    bool communicates = false;
    bool via_column = false; // fired on a shared column; otherwise a shared row
    std::size_t index = 0;
};

// F and G communicate iff some positive-measure column meets both (checked
// first, ascending), or some positive-measure row meets both.
inline CommunicationReport communicates(const std::vector<double>& mu,
                                        const std::vector<double>& nu,
                                        const Event& f, const Event& g) {
    if (f.rows() != mu.size() || f.cols() != nu.size() ||
        g.rows() != mu.size() || g.cols() != nu.size())
        throw std::invalid_argument("shape error");
    const std::size_t nx = mu.size(), ny = nu.size();
    for (std::size_t k = 0; k < ny; ++k) {
        if (!(nu[k] > 0.0)) continue;
        bool in_f = false, in_g = false;
        for (std::size_t i = 0; i < nx; ++i) {
            if (!(mu[i] > 0.0)) continue;
            if (f.contains(i, k)) in_f = true;
            if (g.contains(i, k)) in_g = true;
        }
        if (in_f && in_g) return CommunicationReport{true, true, k};
    }
    for (std::size_t i = 0; i < nx; ++i) {
        if (!(mu[i] > 0.0)) continue;
        bool in_f = false, in_g = false;
        for (std::size_t k = 0; k < ny; ++k) {
            if (!(nu[k] > 0.0)) continue;
            if (f.contains(i, k)) in_f = true;
            if (g.contains(i, k)) in_g = true;
        }
        if (in_f && in_g) return CommunicationReport{true, false, i};
    }
    return CommunicationReport{};
}

struct ChainCertificate {
    bool valid = false;
    bool union_tip = false;
    std::size_t fail_index = 0;        // 1-based: set index or communication step
    bool fail_was_communication = false;
};

// Valid iff every member is TIP and consecutive members communicate. Validity
// forces the union to be TIP; that implication is recomputed and enforced
// rather than assumed.
inline ChainCertificate tip_union_chain(const std::vector<double>& mu,
                                        const std::vector<double>& nu,
                                        const std::vector<Event>& hs) {
    if (hs.empty()) throw std::invalid_argument("empty distribution");
    ChainCertificate cert;
    for (std::size_t n = 0; n < hs.size(); ++n) {
        if (!is_tip(mu, nu, hs[n]).tip) {
            cert.fail_index = n + 1;
            cert.fail_was_communication = false;
            return cert;
        }
    }
    for (std::size_t n = 0; n + 1 < hs.size(); ++n) {
        if (!communicates(mu, nu, hs[n], hs[n + 1]).communicates) {
            cert.fail_index = n + 1;
            cert.fail_was_communication = true;
            return cert;
        }
    }
    Event u = hs.front();
    for (std::size_t n = 1; n < hs.size(); ++n) u = u | hs[n];
    cert.valid = true;
    cert.union_tip = is_tip(mu, nu, u).tip;
    if (!cert.union_tip)
        throw invariant_violation("communicating chain of connected sets has disconnected union");
    return cert;
}

// Search for U0, V0 with U0 x V0 inside the support and the support inside
// (U0 x Y) union (X x V0). U0 scans ascending, V0 descending from the full
// column set, so the widest V0 certificate for the smallest U0 wins.
inline std::optional<Rectangle> corollary_37_certificate(const FiniteJoint& j) {
    if (j.x_size + j.y_size > 24) throw budget_exceeded("size budget exceeded");
    const std::size_t nx = j.x_size, ny = j.y_size;
    std::vector<std::uint32_t> row_mask(nx, 0);
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t k = 0; k < ny; ++k)
            if (j.on_support(i, k)) row_mask[i] |= 1u << k;
    const std::uint32_t full_u = nx == 32 ? 0xffffffffu : ((1u << nx) - 1u);
    const std::uint32_t full_v = ny == 32 ? 0xffffffffu : ((1u << ny) - 1u);

    for (std::uint32_t um = 1; um <= full_u; ++um) {
        for (std::uint32_t vm = full_v; vm >= 1; --vm) {
            bool ok = true;
            for (std::size_t i = 0; i < nx && ok; ++i) {
                if (um & (1u << i)) {
                    if ((vm & ~row_mask[i]) != 0) ok = false;   // U0 x V0 escapes support
                } else {
                    if ((row_mask[i] & ~vm) != 0) ok = false;   // support escapes the sandwich
                }
            }
            if (ok) {
                Rectangle r;
                r.u.assign(nx, 0);
                r.v.assign(ny, 0);
                for (std::size_t i = 0; i < nx; ++i)
                    if (um & (1u << i)) r.u[i] = 1;
                for (std::size_t k = 0; k < ny; ++k)
                    if (vm & (1u << k)) r.v[k] = 1;
                if (!check_gibbs_admissible(j).admissible)
                    throw invariant_violation("sandwich certificate found for a disconnected support");
                return r;
            }
        }
    }
    return std::nullopt;
}

struct Mixture {
    std::vector<double> weights;
    std::vector<FiniteJoint> components;
};

inline void validate_mixture(const Mixture& m) {
    if (m.components.empty() || m.weights.size() != m.components.size())
        throw std::invalid_argument("shape error");
    double total = 0.0;
    for (double w : m.weights) {
        if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("invalid weight");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("invalid weight");
    const FiniteJoint& j0 = m.components.front();
    for (const FiniteJoint& j : m.components) {
        if (j.x_size != j0.x_size || j.y_size != j0.y_size)
            throw std::invalid_argument("shape error");
        if (j.mu != j0.mu || j.nu != j0.nu)
            throw std::invalid_argument("base mismatch");
    }
}

inline FiniteJoint mixture_joint(const Mixture& m) {
    validate_mixture(m);
    const FiniteJoint& j0 = m.components.front();
    RealGrid w(j0.x_size, j0.y_size, 0.0);
    for (std::size_t t = 0; t < m.components.size(); ++t)
        for (std::size_t f = 0; f < w.size(); ++f)
            w.at_flat(f) += m.weights[t] * m.components[t].prob.at_flat(f);
    return build_joint(w, j0.x_labels, j0.y_labels, j0.mu, j0.nu);
}

// Whenever some component puts mass one on a rectangle, every component must
// charge that rectangle.
inline bool check_condition_9(const Mixture& m) {
    validate_mixture(m);
    const FiniteJoint& j0 = m.components.front();
    const std::size_t nx = j0.x_size, ny = j0.y_size;
    if (nx + ny > 24) throw budget_exceeded("size budget exceeded");
    const std::size_t nt = m.components.size();

    std::vector<std::vector<std::uint32_t>> row_mask(nt, std::vector<std::uint32_t>(nx, 0));
    for (std::size_t t = 0; t < nt; ++t)
        for (std::size_t i = 0; i < nx; ++i)
            for (std::size_t k = 0; k < ny; ++k)
                if (m.components[t].on_support(i, k)) row_mask[t][i] |= 1u << k;

    const std::uint32_t full_u = nx == 32 ? 0xffffffffu : ((1u << nx) - 1u);
    const std::uint32_t full_v = ny == 32 ? 0xffffffffu : ((1u << ny) - 1u);
    for (std::uint32_t um = 0; um <= full_u; ++um) {
        // hit = columns a component's support reaches from U rows; miss = from U^c rows
        std::vector<std::uint32_t> hit(nt, 0), miss(nt, 0);
        for (std::size_t t = 0; t < nt; ++t)
            for (std::size_t i = 0; i < nx; ++i) {
                if (um & (1u << i)) hit[t] |= row_mask[t][i];
                else miss[t] |= row_mask[t][i];
            }
        for (std::uint32_t vm = 0; vm <= full_v; ++vm) {
            bool any_full = false;
            for (std::size_t t = 0; t < nt && !any_full; ++t)
                any_full = miss[t] == 0 && (hit[t] & ~vm) == 0;
            if (!any_full) continue;
            for (std::size_t t = 0; t < nt; ++t)
                if ((hit[t] & vm) == 0) return false;
        }
    }
    return true;
}

// Every component support is TIP and every pair of supports communicates;
// this forces the mixture to be admissible (recomputed and enforced).
inline bool check_condition_10(const Mixture& m) {
    validate_mixture(m);
    const FiniteJoint& j0 = m.components.front();
    std::vector<Event> supports;
    supports.reserve(m.components.size());
    for (const FiniteJoint& j : m.components) {
        Event e(j.x_size, j.y_size);
        e.member = j.support;
        supports.push_back(std::move(e));
    }
    for (const Event& e : supports)
        if (!is_tip(j0.mu, j0.nu, e).tip) return false;
    for (std::size_t a = 0; a < supports.size(); ++a)
        for (std::size_t b = a + 1; b < supports.size(); ++b)
            if (!communicates(j0.mu, j0.nu, supports[a], supports[b]).communicates)
                return false;
    if (!check_gibbs_admissible(mixture_joint(m)).admissible)
        throw invariant_violation("communicating connected components yield a disconnected mixture");
    return true;
}

struct Example316 {
    std::vector<Event> chain; // strictly decreasing, every member connected
    Event intersection;       // the common limit; two separated blocks
};

// Two opposite corner blocks joined by a shrinking bridge of columns. Each
// emitted set is connected; the limit set drops the bridge entirely and
// splits into the two blocks.
inline Example316 gen_example_316(std::size_t n) {
    const std::size_t h = n / 2;
    if (n < 4) throw std::invalid_argument("n too small to separate blocks");
    Example316 out;
    Event base(n, n);
    for (std::size_t i = n - h; i < n; ++i)       // lower-left block
        for (std::size_t k = 0; k < h; ++k) base.set(i, k);
    for (std::size_t i = 0; i < h; ++i)           // upper-right block
        for (std::size_t k = n - h; k < n; ++k) base.set(i, k);
    out.intersection = base;
    for (std::size_t step = 1; step < h; ++step) {
        Event e = base;
        for (std::size_t i = 0; i < h; ++i)
            for (std::size_t k = step; k < n - h; ++k) e.set(i, k);
        out.chain.push_back(std::move(e));
    }
    return out;
}

// Uniform distribution on the block-diagonal set {x, y both in I or both
// outside I}; always splits into exactly two components.
inline FiniteJoint gen_example_317(std::size_t x_size, const std::vector<std::uint8_t>& in_i) {
    if (in_i.size() != x_size) throw std::invalid_argument("shape error");
    bool any_in = false, any_out = false;
    for (std::uint8_t b : in_i) (b ? any_in : any_out) = true;
    if (!any_in || !any_out) throw std::invalid_argument("degenerate I");
    RealGrid w(x_size, x_size, 0.0);
    for (std::size_t i = 0; i < x_size; ++i)
        for (std::size_t k = 0; k < x_size; ++k)
            if ((in_i[i] != 0) == (in_i[k] != 0)) w(i, k) = 1.0;
    return build_joint(w);
}

} // namespace gibbsgate
