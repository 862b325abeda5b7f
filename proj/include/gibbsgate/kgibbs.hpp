#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "gibbsgate/grid.hpp"
#include "gibbsgate/parallel.hpp"
#include "gibbsgate/partition.hpp"
#include "gibbsgate/space.hpp"

namespace gibbsgate {

// Joint distribution on a product of k >= 2 finite coordinates, stored flat
// with the last coordinate fastest. The k = 2 case lays out exactly like a
// FiniteJoint's row-major grid.
struct KJoint {
    std::vector<std::size_t> shape;
    std::vector<double> weights;
    std::vector<double> prob;
    std::vector<std::uint8_t> support;
    std::vector<std::size_t> strides; // strides[i] = product of sizes after i

    std::size_t cells() const { return prob.size(); }
    std::size_t dims() const { return shape.size(); }

    std::size_t digit(std::size_t flat, std::size_t i) const {
        return (flat / strides[i]) % shape[i];
    }
};

inline KJoint build_kjoint(const std::vector<std::size_t>& shape,
                           const std::vector<double>& weights) {
    if (shape.size() < 2) throw std::invalid_argument("shape error");
    std::size_t cells = 1;
    for (std::size_t s : shape) {
        if (s == 0) throw std::invalid_argument("empty distribution");
        cells *= s;
    }
    if (weights.size() != cells) throw std::invalid_argument("shape error");
    for (double w : weights)
        if (!std::isfinite(w) || w < 0.0) throw std::invalid_argument("invalid weight");
    double total = 0.0;
    for (double w : weights) total += w;
    if (total <= 0.0) throw std::invalid_argument("empty distribution");

    KJoint k;
    k.shape = shape;
    k.weights = weights;
    k.strides.assign(shape.size(), 1);
    for (std::size_t i = shape.size() - 1; i-- > 0;)
        k.strides[i] = k.strides[i + 1] * shape[i + 1];
    k.prob.resize(cells);
    k.support.resize(cells);
    for (std::size_t f = 0; f < cells; ++f) {
        k.prob[f] = weights[f] / total;
        k.support[f] = weights[f] > 0.0 ? 1 : 0;
    }
    return k;
}

inline KJoint kjoint_from_joint(const FiniteJoint& j) {
    return build_kjoint({j.x_size, j.y_size}, j.weights.data());
}

inline std::vector<std::size_t> k_support_cells(const KJoint& k) {
    std::vector<std::size_t> out;
    for (std::size_t f = 0; f < k.cells(); ++f)
        if (k.support[f]) out.push_back(f);
    return out;
}

namespace detail {

// Key of the fiber through `flat` along coordinate i: the flat index with
// that digit zeroed. Cells share a key iff they agree on every other
// coordinate.
inline std::size_t fiber_key(const KJoint& k, std::size_t flat, std::size_t i) {
    return flat - k.digit(flat, i) * k.strides[i];
}

} // namespace detail

// Components of the graph on support cells joining cells that differ in
// exactly one coordinate. Two cells in one fiber along coordinate i differ
// only there, so merging whole fibers realizes the adjacency.
inline Partition hamming_atoms(const KJoint& k) {
    const std::vector<std::size_t> cells = k_support_cells(k);
    const std::size_t n = cells.size();
    UnionFind uf(n);
    std::vector<std::size_t> key_first(k.cells());
    for (std::size_t i = 0; i < k.dims(); ++i) {
        std::fill(key_first.begin(), key_first.end(), n);
        for (std::size_t c = 0; c < n; ++c) {
            const std::size_t key = detail::fiber_key(k, cells[c], i);
            if (key_first[key] == n) key_first[key] = c;
            else uf.merge(key_first[key], c);
        }
    }
    return partition_from_union_find(uf, n);
}

struct KAdmissibilityReport {
    bool admissible = true;
    int atom_count = 0;
    bool has_witness = false;
    std::size_t witness_a = 0; // flat support cells in different atoms
    std::size_t witness_b = 0;
};

// Single Hamming component <=> admissible. The characterization is validated
// against oracle_d_trivial by the test suite before anything trusts it.
inline KAdmissibilityReport check_k_admissible(const KJoint& k) {
    const Partition atoms = hamming_atoms(k);
    KAdmissibilityReport r;
    r.atom_count = atoms.block_count;
    r.admissible = atoms.block_count <= 1;
    if (!r.admissible) {
        const std::vector<std::size_t> cells = k_support_cells(k);
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (atoms.block_id[c] == 0) r.witness_a = cells[c];
            if (atoms.block_id[c] == 1) {
                r.witness_b = cells[c];
                break;
            }
        }
        r.has_witness = true;
    }
    return r;
}

// Exhaustive check of the k-field null-split condition: whenever the support
// lies entirely inside or entirely outside every member of an event tuple
// (E_1, ..., E_k), some E_i must be resolvable by the plain intersection
// algebra of all k fields.
inline bool oracle_theorem_32(const KJoint& k, const std::vector<Partition>& fields) {
    if (fields.empty()) throw std::invalid_argument("shape error");
    std::size_t total_bits = 0;
    for (const Partition& p : fields) {
        if (p.size() != k.cells()) throw std::invalid_argument("shape error");
        total_bits += static_cast<std::size_t>(p.block_count);
    }
    if (total_bits > 24) throw budget_exceeded("enumeration budget exceeded");
    const std::vector<std::size_t> cells = k_support_cells(k);
    if (cells.size() > 64) throw budget_exceeded("size budget exceeded");
    const std::size_t nf = fields.size();
    const std::size_t ns = cells.size();
    const std::uint64_t full = ns == 64 ? ~0ull : ((1ull << ns) - 1ull);

    // Per field: support-cell bitmask of each block.
    std::vector<std::vector<std::uint64_t>> block_mask(nf);
    for (std::size_t i = 0; i < nf; ++i) {
        block_mask[i].assign(static_cast<std::size_t>(fields[i].block_count), 0);
        for (std::size_t c = 0; c < ns; ++c)
            block_mask[i][static_cast<std::size_t>(fields[i].block_id[cells[c]])] |= 1ull << c;
    }

    // Plain intersection algebra of all fields = coarsest common coarsening.
    Partition pint = fields[0];
    for (std::size_t i = 1; i < nf; ++i) pint = coarsest_common_coarsening(pint, fields[i]);
    std::vector<std::uint64_t> pint_mask(static_cast<std::size_t>(pint.block_count), 0);
    for (std::size_t c = 0; c < ns; ++c)
        pint_mask[static_cast<std::size_t>(pint.block_id[cells[c]])] |= 1ull << c;

    auto resolvable = [&](std::uint64_t trace) {
        for (std::uint64_t gm : pint_mask) {
            const std::uint64_t hit = trace & gm;
            if (hit != 0 && hit != gm) return false;
        }
        return true;
    };

    std::vector<std::uint32_t> masks(nf, 0);
    std::vector<std::uint32_t> limits(nf);
    for (std::size_t i = 0; i < nf; ++i)
        limits[i] = 1u << static_cast<std::uint32_t>(fields[i].block_count);
    while (true) {
        std::uint64_t all = full, any = 0;
        for (std::size_t i = 0; i < nf; ++i) {
            std::uint64_t trace = 0;
            for (std::size_t b = 0; b < block_mask[i].size(); ++b)
                if (masks[i] & (1u << b)) trace |= block_mask[i][b];
            all &= trace;
            any |= trace;
        }
        if (all == any) { // support is inside every E_i or outside every E_i
            bool ok = false;
            for (std::size_t i = 0; i < nf && !ok; ++i) {
                std::uint64_t trace = 0;
                for (std::size_t b = 0; b < block_mask[i].size(); ++b)
                    if (masks[i] & (1u << b)) trace |= block_mask[i][b];
                ok = resolvable(trace);
            }
            if (!ok) return false;
        }
        std::size_t pos = 0;
        while (pos < nf && ++masks[pos] == limits[pos]) {
            masks[pos] = 0;
            ++pos;
        }
        if (pos == nf) break;
    }
    return true;
}

// Exhaustive triviality check for the intersection of the completed
// leave-one-out fields: an event's support trace is measurable in completed
// field i iff it is a union of the support traces of the coordinate-i fibers.
// Trivial iff only the null and co-null traces are measurable in all fields.
inline bool oracle_d_trivial(const KJoint& k) {
    if (k.cells() > 16) throw budget_exceeded("size budget exceeded");
    const std::vector<std::size_t> cells = k_support_cells(k);
    const std::size_t ns = cells.size();
    const std::uint32_t full = ns == 32 ? 0xffffffffu : ((1u << ns) - 1u);

    std::vector<std::vector<std::uint32_t>> fiber_masks(k.dims());
    for (std::size_t i = 0; i < k.dims(); ++i) {
        std::vector<std::uint32_t> by_key(k.cells(), 0);
        for (std::size_t c = 0; c < ns; ++c)
            by_key[detail::fiber_key(k, cells[c], i)] |= 1u << c;
        for (std::uint32_t m : by_key)
            if (m != 0) fiber_masks[i].push_back(m);
    }

    const std::size_t count = full; // masks 1 .. full-1 checked; 0 and full are trivial
    return parallel_all(count == 0 ? 0 : count - 1, [&](std::size_t idx) {
        const auto m = static_cast<std::uint32_t>(idx + 1);
        for (std::size_t i = 0; i < k.dims(); ++i)
            for (std::uint32_t fm : fiber_masks[i]) {
                const std::uint32_t hit = m & fm;
                if (hit != 0 && hit != fm) return true; // m not measurable in field i
            }
        return false; // nontrivial common event found
    });
}

// Full conditional row of coordinate `coord` through `flat`: mass of each
// value of that coordinate holding the others fixed, in ascending value
// order. Throws when the fiber carries no mass.
inline std::vector<double> k_conditional(const KJoint& k, std::size_t flat, std::size_t coord) {
    const std::size_t base = detail::fiber_key(k, flat, coord);
    double total = 0.0;
    for (std::size_t v = 0; v < k.shape[coord]; ++v)
        total += k.prob[base + v * k.strides[coord]];
    if (!(total > 0.0))
        throw invariant_violation("zero-conditional state encountered off support");
    std::vector<double> row(k.shape[coord]);
    for (std::size_t v = 0; v < k.shape[coord]; ++v)
        row[v] = k.prob[base + v * k.strides[coord]] / total;
    return row;
}

struct KKernel {
    std::vector<std::size_t> states; // flat cells, ascending
    std::vector<int> state_index;    // per flat cell, -1 off the state space
    RealGrid matrix;
    std::vector<double> stationary;
};

// One transition resamples each coordinate in scan order from its full
// conditional given the current values of the others. The state space is the
// set of cells where the first scanned coordinate's conditional exists; from
// there every later conditional is defined because the path has entered the
// support.
inline KKernel build_k_kernel(const KJoint& k, const std::vector<std::size_t>& scan_order) {
    if (scan_order.size() != k.dims()) throw std::invalid_argument("shape error");
    std::vector<std::uint8_t> seen(k.dims(), 0);
    for (std::size_t s : scan_order) {
        if (s >= k.dims() || seen[s]) throw std::invalid_argument("shape error");
        seen[s] = 1;
    }

    KKernel kk;
    kk.state_index.assign(k.cells(), -1);
    const std::size_t first = scan_order.front();
    for (std::size_t f = 0; f < k.cells(); ++f) {
        const std::size_t base = detail::fiber_key(k, f, first);
        double total = 0.0;
        for (std::size_t v = 0; v < k.shape[first]; ++v)
            total += k.prob[base + v * k.strides[first]];
        if (total > 0.0) {
            kk.state_index[f] = static_cast<int>(kk.states.size());
            kk.states.push_back(f);
        }
    }

    const std::size_t m = kk.states.size();
    kk.matrix = RealGrid(m, m, 0.0);
    kk.stationary.resize(m);
    for (std::size_t a = 0; a < m; ++a) {
        kk.stationary[a] = k.prob[kk.states[a]];
        for (std::size_t b = 0; b < m; ++b) {
            const std::size_t target = kk.states[b];
            // The target is reachable in one sweep only if it matches the
            // start on every coordinate not yet scanned at each step; the
            // interpolating path below realizes exactly that event.
            std::size_t cur = kk.states[a];
            double p = 1.0;
            bool possible = true;
            for (std::size_t s : scan_order) {
                const std::size_t v = k.digit(target, s);
                const std::vector<double> row = k_conditional(k, cur, s);
                if (!(row[v] > 0.0)) { possible = false; break; }
                p *= row[v];
                cur = cur - k.digit(cur, s) * k.strides[s] + v * k.strides[s];
            }
            if (possible && cur == target) kk.matrix(a, b) = p;
        }
    }
    return kk;
}

} // namespace gibbsgate
