#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gibbsgate/grid.hpp"
#include "gibbsgate/parallel.hpp"
#include "gibbsgate/partition.hpp"
#include "gibbsgate/space.hpp"

namespace gibbsgate {

// A sub-sigma-field modulo null sets: the trace partition it induces on the
// support cells. An event is measurable iff its support trace is a union of
// blocks; null and co-null events are automatically measurable.
struct CompletedSigma {
    FiniteJoint base;
    std::vector<Cell> cells;
    Partition blocks;

    friend bool operator==(const CompletedSigma& a, const CompletedSigma& b) {
        return a.cells == b.cells && a.blocks == b.blocks;
    }
};

inline std::size_t flat_index(const FiniteJoint& j, std::size_t x, std::size_t y) {
    return x * j.y_size + y;
}

// Partition of all cells by row (the sigma-field generated by X).
inline Partition row_partition(const FiniteJoint& j) {
    std::vector<int> raw(j.x_size * j.y_size);
    for (std::size_t i = 0; i < j.x_size; ++i)
        for (std::size_t k = 0; k < j.y_size; ++k)
            raw[flat_index(j, i, k)] = static_cast<int>(i);
    return normalize_labels(raw);
}

// Partition of all cells by column (the sigma-field generated by Y).
inline Partition col_partition(const FiniteJoint& j) {
    std::vector<int> raw(j.x_size * j.y_size);
    for (std::size_t i = 0; i < j.x_size; ++i)
        for (std::size_t k = 0; k < j.y_size; ++k)
            raw[flat_index(j, i, k)] = static_cast<int>(k);
    return normalize_labels(raw);
}

// Complete the sigma-field generated by a partition of all cells: keep only
// its trace on the support.
inline CompletedSigma complete(const FiniteJoint& j, const Partition& pi) {
    if (pi.size() != j.x_size * j.y_size) throw std::invalid_argument("shape error");
    CompletedSigma s;
    s.base = j;
    s.cells = support_cells(j);
    std::vector<int> raw(s.cells.size());
    for (std::size_t c = 0; c < s.cells.size(); ++c)
        raw[c] = pi.block_id[flat_index(j, s.cells[c].x, s.cells[c].y)];
    s.blocks = normalize_labels(raw);
    return s;
}

inline bool same_base(const CompletedSigma& a, const CompletedSigma& b) {
    return a.base.x_size == b.base.x_size && a.base.y_size == b.base.y_size &&
           a.base.weights == b.base.weights;
}

// Events measurable in both completions form a completed sigma-field; its
// trace blocks are the connected components linking cells that share a block
// in either input.
inline CompletedSigma intersect_completed(const CompletedSigma& s1, const CompletedSigma& s2) {
    if (!same_base(s1, s2)) throw std::invalid_argument("base mismatch");
    CompletedSigma out;
    out.base = s1.base;
    out.cells = s1.cells;
    out.blocks = coarsest_common_coarsening(s1.blocks, s2.blocks);
    return out;
}

inline bool event_measurable(const CompletedSigma& s, const Event& e) {
    if (e.rows() != s.base.x_size || e.cols() != s.base.y_size)
        throw std::invalid_argument("shape error");
    // Union of blocks <=> no block is split by the event.
    std::vector<signed char> verdict(static_cast<std::size_t>(s.blocks.block_count), -1);
    for (std::size_t c = 0; c < s.cells.size(); ++c) {
        signed char in = e.contains(s.cells[c].x, s.cells[c].y) ? 1 : 0;
        auto b = static_cast<std::size_t>(s.blocks.block_id[c]);
        if (verdict[b] == -1) verdict[b] = in;
        else if (verdict[b] != in) return false;
    }
    return true;
}

// Completed sigma-field generated by a list of events: cells are equivalent
// iff no event separates them.
inline CompletedSigma sigma_from_events(const FiniteJoint& j, const std::vector<Event>& events) {
    CompletedSigma s;
    s.base = j;
    s.cells = support_cells(j);
    std::vector<std::vector<std::uint8_t>> sig(s.cells.size());
    for (std::size_t c = 0; c < s.cells.size(); ++c) {
        sig[c].reserve(events.size());
        for (const Event& e : events) {
            if (e.rows() != j.x_size || e.cols() != j.y_size)
                throw std::invalid_argument("shape error");
            sig[c].push_back(e.contains(s.cells[c].x, s.cells[c].y) ? 1 : 0);
        }
    }
    std::vector<int> raw(s.cells.size());
    std::vector<std::vector<std::uint8_t>> seen;
    for (std::size_t c = 0; c < s.cells.size(); ++c) {
        int id = -1;
        for (std::size_t k = 0; k < seen.size(); ++k)
            if (seen[k] == sig[c]) { id = static_cast<int>(k); break; }
        if (id < 0) {
            id = static_cast<int>(seen.size());
            seen.push_back(sig[c]);
        }
        raw[c] = id;
    }
    s.blocks = normalize_labels(raw);
    return s;
}

namespace detail {

// Shared precomputation for the pairwise null-split checks. Everything is
// exact mask arithmetic over a support grid: a block union is null iff it
// holds no supported cell.
struct PairScan {
    std::size_t bA = 0, bB = 0;
    std::uint32_t fullA = 0, fullB = 0;
    std::uint32_t nzA = 0, nzB = 0;             // blocks with a supported cell
    std::vector<std::uint32_t> or_inc;          // Amask -> B-blocks it touches
    std::vector<std::uint8_t> meas_a, meas_b;   // trace-measurable block unions
};

inline PairScan prepare_pair_scan(const FiniteJoint& j, const Partition& pi_a,
                                  const Partition& pi_b, const BoolGrid& supp) {
    const std::size_t n = j.x_size * j.y_size;
    if (pi_a.size() != n || pi_b.size() != n) throw std::invalid_argument("shape error");
    const auto ba = static_cast<std::size_t>(pi_a.block_count);
    const auto bb = static_cast<std::size_t>(pi_b.block_count);
    if (ba + bb > 20) throw budget_exceeded("enumeration budget exceeded");

    PairScan ps;
    ps.bA = ba;
    ps.bB = bb;
    ps.fullA = ba == 32 ? 0xffffffffu : ((1u << ba) - 1u);
    ps.fullB = bb == 32 ? 0xffffffffu : ((1u << bb) - 1u);

    std::vector<std::uint32_t> inc(ba, 0);
    for (std::size_t f = 0; f < n; ++f) {
        if (!supp.at_flat(f)) continue;
        auto a = static_cast<std::size_t>(pi_a.block_id[f]);
        auto b = static_cast<std::size_t>(pi_b.block_id[f]);
        inc[a] |= 1u << b;
        ps.nzA |= 1u << a;
        ps.nzB |= 1u << b;
    }

    ps.or_inc.assign(std::size_t{1} << ba, 0);
    for (std::uint32_t m = 1; m < (1u << ba); ++m) {
        std::uint32_t low = m & (~m + 1u);
        unsigned bit = static_cast<unsigned>(__builtin_ctz(low));
        ps.or_inc[m] = ps.or_inc[m ^ low] | inc[bit];
    }

    // Candidate resolvents D are block unions of the plain set-algebra
    // intersection, i.e. of the coarsest common coarsening. P(E delta D) = 0
    // for some such D iff E's support trace never splits a coarsening block.
    Partition pi_int = coarsest_common_coarsening(pi_a, pi_b);
    auto group_masks = [&](const Partition& pi, std::size_t blocks,
                           std::uint32_t nz) -> std::vector<std::uint32_t> {
        std::vector<int> owner(blocks, -1);
        for (std::size_t f = 0; f < n; ++f)
            owner[static_cast<std::size_t>(pi.block_id[f])] = pi_int.block_id[f];
        std::vector<std::uint32_t> gm(static_cast<std::size_t>(pi_int.block_count), 0);
        for (std::size_t a = 0; a < blocks; ++a)
            if (nz & (1u << a)) gm[static_cast<std::size_t>(owner[a])] |= 1u << a;
        return gm;
    };
    auto fill_meas = [&](const std::vector<std::uint32_t>& gm, std::size_t blocks,
                         std::vector<std::uint8_t>& out) {
        out.assign(std::size_t{1} << blocks, 1);
        for (std::uint32_t m = 0; m < (1u << blocks); ++m) {
            for (std::uint32_t g : gm) {
                std::uint32_t hit = m & g;
                if (hit != 0 && hit != g) { out[m] = 0; break; }
            }
        }
    };
    fill_meas(group_masks(pi_a, ba, ps.nzA), ba, ps.meas_a);
    fill_meas(group_masks(pi_b, bb, ps.nzB), bb, ps.meas_b);
    return ps;
}

inline Event event_from_blocks(const FiniteJoint& j, const Partition& pi, std::uint32_t mask) {
    Event e(j.x_size, j.y_size);
    for (std::size_t i = 0; i < j.x_size; ++i)
        for (std::size_t k = 0; k < j.y_size; ++k) {
            auto b = static_cast<std::size_t>(pi.block_id[i * j.y_size + k]);
            if (mask & (1u << b)) e.set(i, k);
        }
    return e;
}

} // namespace detail

struct Condition4Result {
    bool holds = true;
    bool has_counterexample = false;
    Event a;
    Event b;
};

// True iff every pair (A, B) of block-union events with A cap B and
// A^c cap B^c both null admits a resolvent D from the plain intersection
// algebra with P(A delta D) = 0 or P(B delta D) = 0. Counterexamples are
// searched with the B event in the outer loop, masks ascending.
inline Condition4Result check_condition_4(const FiniteJoint& j, const Partition& pi_a,
                                          const Partition& pi_b) {
    detail::PairScan ps = detail::prepare_pair_scan(j, pi_a, pi_b, j.support);
    for (std::uint32_t bm = 0; bm <= ps.fullB; ++bm) {
        for (std::uint32_t am = 0; am <= ps.fullA; ++am) {
            if ((ps.or_inc[am] & bm) != 0) continue;
            if ((ps.or_inc[ps.fullA ^ am] & (ps.fullB ^ bm)) != 0) continue;
            if (ps.meas_a[am] || ps.meas_b[bm]) continue;
            Condition4Result r;
            r.holds = false;
            r.has_counterexample = true;
            r.a = detail::event_from_blocks(j, pi_a, am);
            r.b = detail::event_from_blocks(j, pi_b, bm);
            return r;
        }
    }
    return Condition4Result{};
}

// Same hypothesis with the stronger conclusion P(A) = 0 or P(B) = 0.
inline Condition4Result check_condition_5(const FiniteJoint& j, const Partition& pi_a,
                                          const Partition& pi_b) {
    detail::PairScan ps = detail::prepare_pair_scan(j, pi_a, pi_b, j.support);
    for (std::uint32_t bm = 0; bm <= ps.fullB; ++bm) {
        for (std::uint32_t am = 0; am <= ps.fullA; ++am) {
            if ((ps.or_inc[am] & bm) != 0) continue;
            if ((ps.or_inc[ps.fullA ^ am] & (ps.fullB ^ bm)) != 0) continue;
            if ((am & ps.nzA) == 0 || (bm & ps.nzB) == 0) continue;
            Condition4Result r;
            r.holds = false;
            r.has_counterexample = true;
            r.a = detail::event_from_blocks(j, pi_a, am);
            r.b = detail::event_from_blocks(j, pi_b, bm);
            return r;
        }
    }
    return Condition4Result{};
}

// Family version: null sets are quantified over every member, so the scan
// runs against the union of the supports.
inline Condition4Result check_condition_4star(const std::vector<FiniteJoint>& family,
                                              const Partition& pi_a, const Partition& pi_b) {
    if (family.empty()) throw std::invalid_argument("empty distribution");
    const FiniteJoint& j0 = family.front();
    BoolGrid union_support(j0.x_size, j0.y_size, 0);
    for (const FiniteJoint& j : family) {
        if (j.x_size != j0.x_size || j.y_size != j0.y_size)
            throw std::invalid_argument("shape error");
        for (std::size_t f = 0; f < union_support.size(); ++f)
            if (j.support.at_flat(f)) union_support.at_flat(f) = 1;
    }
    detail::PairScan ps = detail::prepare_pair_scan(j0, pi_a, pi_b, union_support);
    for (std::uint32_t bm = 0; bm <= ps.fullB; ++bm) {
        for (std::uint32_t am = 0; am <= ps.fullA; ++am) {
            if ((ps.or_inc[am] & bm) != 0) continue;
            if ((ps.or_inc[ps.fullA ^ am] & (ps.fullB ^ bm)) != 0) continue;
            if (ps.meas_a[am] || ps.meas_b[bm]) continue;
            Condition4Result r;
            r.holds = false;
            r.has_counterexample = true;
            r.a = detail::event_from_blocks(j0, pi_a, am);
            r.b = detail::event_from_blocks(j0, pi_b, bm);
            return r;
        }
    }
    return Condition4Result{};
}

// All events A cap B whose complementary corner A^c cap B^c carries the rest
// of the mass, i.e. the support never meets A delta B. Duplicates are removed;
// the empty set and the whole space always appear.
inline std::vector<Event> j_class(const FiniteJoint& j, const Partition& pi_a,
                                  const Partition& pi_b) {
    detail::PairScan ps = detail::prepare_pair_scan(j, pi_a, pi_b, j.support);
    std::vector<Event> out;
    for (std::uint32_t am = 0; am <= ps.fullA; ++am) {
        for (std::uint32_t bm = 0; bm <= ps.fullB; ++bm) {
            if ((ps.or_inc[am] & (ps.fullB ^ bm)) != 0) continue;
            if ((ps.or_inc[ps.fullA ^ am] & bm) != 0) continue;
            Event a = detail::event_from_blocks(j, pi_a, am);
            Event b = detail::event_from_blocks(j, pi_b, bm);
            Event e = a & b;
            bool dup = false;
            for (const Event& seen : out)
                if (seen == e) { dup = true; break; }
            if (!dup) out.push_back(std::move(e));
        }
    }
    return out;
}

struct AdmissibilityReport {
    bool admissible = true;
    bool has_witness = false;
    Rectangle witness;
    Partition atoms;
    int atom_count = 0;
};

// Atoms of the intersection sigma-field: connected components of the
// bipartite graph whose edges are the support cells.
inline Partition d_atoms(const FiniteJoint& j) {
    std::vector<Cell> cells = support_cells(j);
    const std::size_t n = cells.size();
    UnionFind uf(n);
    std::vector<std::size_t> first_row(j.x_size, n);
    std::vector<std::size_t> first_col(j.y_size, n);
    for (std::size_t c = 0; c < n; ++c) {
        if (first_row[cells[c].x] == n) first_row[cells[c].x] = c;
        else uf.merge(first_row[cells[c].x], c);
        if (first_col[cells[c].y] == n) first_col[cells[c].y] = c;
        else uf.merge(first_col[cells[c].y], c);
    }
    return partition_from_union_find(uf, n);
}

inline std::vector<double> atom_masses(const FiniteJoint& j, const Partition& atoms) {
    std::vector<Cell> cells = support_cells(j);
    std::vector<double> mass(static_cast<std::size_t>(atoms.block_count), 0.0);
    for (std::size_t c = 0; c < cells.size(); ++c)
        mass[static_cast<std::size_t>(atoms.block_id[c])] += j.prob(cells[c].x, cells[c].y);
    return mass;
}

// Admissible iff the support graph is connected. The witness component is the
// one containing the lexicographically smallest support cell (block 0 after
// normalization): V = its columns, U = positive-marginal rows outside it.
inline AdmissibilityReport check_gibbs_admissible(const FiniteJoint& j) {
    AdmissibilityReport r;
    r.atoms = d_atoms(j);
    r.atom_count = r.atoms.block_count;
    r.admissible = r.atom_count <= 1;
    if (!r.admissible) {
        std::vector<Cell> cells = support_cells(j);
        std::vector<std::uint8_t> comp_rows(j.x_size, 0);
        r.witness.u.assign(j.x_size, 0);
        r.witness.v.assign(j.y_size, 0);
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (r.atoms.block_id[c] != 0) continue;
            comp_rows[cells[c].x] = 1;
            r.witness.v[cells[c].y] = 1;
        }
        const std::vector<double> mx = marginal_x(j);
        for (std::size_t i = 0; i < j.x_size; ++i)
            if (mx[i] > 0.0 && !comp_rows[i]) r.witness.u[i] = 1;
        r.has_witness = true;
    }
    return r;
}

// Ground truth for check_gibbs_admissible: scan every rectangle U x V and
// look for P(U x V) = P(U^c x V^c) = 0 with both marginals positive. All
// tests are support-mask arithmetic, no floats.
inline bool oracle_condition_6(const FiniteJoint& j) {
    if (j.x_size + j.y_size > 24) throw budget_exceeded("size budget exceeded");
    const std::size_t nx = j.x_size, ny = j.y_size;
    std::vector<std::uint32_t> row_mask(nx, 0);
    std::uint32_t pos_rows = 0, pos_cols = 0;
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t k = 0; k < ny; ++k)
            if (j.on_support(i, k)) {
                row_mask[i] |= 1u << k;
                pos_rows |= 1u << i;
                pos_cols |= 1u << k;
            }
    const std::uint32_t full_u = nx == 32 ? 0xffffffffu : ((1u << nx) - 1u);
    const std::uint32_t full_v = ny == 32 ? 0xffffffffu : ((1u << ny) - 1u);

    std::vector<std::uint32_t> hit(std::size_t{1} << nx, 0);
    for (std::uint32_t m = 1; m <= full_u; ++m) {
        std::uint32_t low = m & (~m + 1u);
        hit[m] = hit[m ^ low] | row_mask[static_cast<unsigned>(__builtin_ctz(low))];
    }

    return parallel_all(std::size_t{1} << nx, [&](std::size_t um_) {
        const auto um = static_cast<std::uint32_t>(um_);
        if ((um & pos_rows) == 0) return true;
        const std::uint32_t hit_u = hit[um];
        const std::uint32_t hit_uc = hit[full_u ^ um];
        for (std::uint32_t vm = 0; vm <= full_v; ++vm) {
            if ((vm & pos_cols) == 0) continue;
            if ((hit_u & vm) != 0) continue;
            if ((hit_uc & (full_v ^ vm)) != 0) continue;
            return false;
        }
        return true;
    });
}

// Pointwise values of the two-sided alternating conditional expectation of
// the rectangle's indicator: g(x, y) = g1(y) + g2(x) with
// g1(y) = sum_{x in U} beta(y)(x) alpha(x)(V), g2(x) = sum_{y in V} alpha(x)(y) beta(y)(U).
inline RealGrid condition_7_values(const FiniteJoint& j, const Rectangle& r) {
    if (r.u.size() != j.x_size || r.v.size() != j.y_size)
        throw std::invalid_argument("shape error");
    const Conditional alpha = conditional_alpha(j);
    const Conditional beta = conditional_beta(j);

    std::vector<double> alpha_v(j.x_size, 0.0);
    std::vector<double> beta_u(j.y_size, 0.0);
    for (std::size_t i = 0; i < j.x_size; ++i)
        if (alpha.is_defined(i))
            for (std::size_t k = 0; k < j.y_size; ++k)
                if (r.v[k]) alpha_v[i] += alpha.rows(i, k);
    for (std::size_t k = 0; k < j.y_size; ++k)
        if (beta.is_defined(k))
            for (std::size_t i = 0; i < j.x_size; ++i)
                if (r.u[i]) beta_u[k] += beta.rows(k, i);

    std::vector<double> g1(j.y_size, 0.0);
    std::vector<double> g2(j.x_size, 0.0);
    for (std::size_t k = 0; k < j.y_size; ++k)
        if (beta.is_defined(k))
            for (std::size_t i = 0; i < j.x_size; ++i)
                if (r.u[i]) g1[k] += beta.rows(k, i) * alpha_v[i];
    for (std::size_t i = 0; i < j.x_size; ++i)
        if (alpha.is_defined(i))
            for (std::size_t k = 0; k < j.y_size; ++k)
                if (r.v[k]) g2[i] += alpha.rows(i, k) * beta_u[k];

    RealGrid g(j.x_size, j.y_size, 0.0);
    for (std::size_t i = 0; i < j.x_size; ++i)
        for (std::size_t k = 0; k < j.y_size; ++k)
            g(i, k) = g1[k] + g2[i];
    return g;
}

inline bool check_condition_7(const FiniteJoint& j, const Rectangle& r) {
    const RealGrid g = condition_7_values(j, r);
    for (std::size_t i = 0; i < j.x_size; ++i)
        for (std::size_t k = 0; k < j.y_size; ++k)
            if (j.on_support(i, k) && !(g(i, k) > 0.0)) return false;
    return true;
}

struct Condition11Result {
    bool holds = true;
    bool has_witness = false;
    std::vector<std::uint8_t> witness_v;
};

// alpha(x)(V) is {0,1}-valued over positive rows iff each row's support is
// contained in V or disjoint from it; the condition demands every such V give
// a constant value.
inline Condition11Result check_condition_11(const FiniteJoint& j) {
    if (j.y_size > 24) throw budget_exceeded("size budget exceeded");
    const std::vector<double> mx = marginal_x(j);
    std::vector<std::uint32_t> row_mask;
    for (std::size_t i = 0; i < j.x_size; ++i) {
        if (!(mx[i] > 0.0)) continue;
        std::uint32_t m = 0;
        for (std::size_t k = 0; k < j.y_size; ++k)
            if (j.on_support(i, k)) m |= 1u << k;
        row_mask.push_back(m);
    }
    const std::uint32_t full_v = j.y_size == 32 ? 0xffffffffu : ((1u << j.y_size) - 1u);
    for (std::uint32_t vm = 0; vm <= full_v; ++vm) {
        bool qualifies = true, any0 = false, any1 = false;
        for (std::uint32_t rm : row_mask) {
            std::uint32_t hit = rm & vm;
            if (hit == 0) any0 = true;
            else if (hit == rm) any1 = true;
            else { qualifies = false; break; }
        }
        if (qualifies && any0 && any1) {
            Condition11Result r;
            r.holds = false;
            r.has_witness = true;
            r.witness_v.assign(j.y_size, 0);
            for (std::size_t k = 0; k < j.y_size; ++k)
                if (vm & (1u << k)) r.witness_v[k] = 1;
            return r;
        }
    }
    return Condition11Result{};
}

// For every V whose row-set {alpha(X)(V) = 1} has mass strictly between 0
// and 1, demand alpha(x)(V) > 0 for all positive rows.
inline bool check_condition_12(const FiniteJoint& j) {
    if (j.y_size > 24) throw budget_exceeded("size budget exceeded");
    const std::vector<double> mx = marginal_x(j);
    std::vector<std::uint32_t> row_mask;
    for (std::size_t i = 0; i < j.x_size; ++i) {
        if (!(mx[i] > 0.0)) continue;
        std::uint32_t m = 0;
        for (std::size_t k = 0; k < j.y_size; ++k)
            if (j.on_support(i, k)) m |= 1u << k;
        row_mask.push_back(m);
    }
    const std::uint32_t full_v = j.y_size == 32 ? 0xffffffffu : ((1u << j.y_size) - 1u);
    for (std::uint32_t vm = 0; vm <= full_v; ++vm) {
        bool any_inside = false, any_outside = false, any_zero = false;
        for (std::uint32_t rm : row_mask) {
            std::uint32_t hit = rm & vm;
            if (hit == rm) any_inside = true;
            else any_outside = true;
            if (hit == 0) any_zero = true;
        }
        if (any_inside && any_outside && any_zero) return false;
    }
    return true;
}

} // namespace gibbsgate
