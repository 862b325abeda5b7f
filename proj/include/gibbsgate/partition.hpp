#pragma once

#include <cstddef>
#include <numeric>
#include <vector>

namespace gibbsgate {

// Standard union-find with path compression and union by size.
class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }

    std::size_t find(std::size_t a) {
        while (parent_[a] != a) {
            parent_[a] = parent_[parent_[a]];
            a = parent_[a];
        }
        return a;
    }

    bool merge(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
        return true;
    }

    std::size_t count() const {
        std::size_t c = 0;
        for (std::size_t i = 0; i < parent_.size(); ++i)
            if (parent_[i] == i) ++c;
        return c;
    }

private:
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> size_;
};

// Partition of {0, ..., n-1}. Block ids are normalized so that scanning
// elements in ascending order meets blocks 0, 1, 2, ... in turn, which makes
// equality of partitions plain vector equality.
struct Partition {
    std::vector<int> block_id;
    int block_count = 0;

    std::size_t size() const { return block_id.size(); }

    friend bool operator==(const Partition&, const Partition&) = default;
};

inline Partition normalize_labels(const std::vector<int>& raw) {
    Partition p;
    p.block_id.assign(raw.size(), -1);
    std::vector<int> seen;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        int id = -1;
        for (std::size_t k = 0; k < seen.size(); ++k)
            if (seen[k] == raw[i]) { id = static_cast<int>(k); break; }
        if (id < 0) {
            id = static_cast<int>(seen.size());
            seen.push_back(raw[i]);
        }
        p.block_id[i] = id;
    }
    p.block_count = static_cast<int>(seen.size());
    return p;
}

inline Partition partition_from_union_find(UnionFind& uf, std::size_t n) {
    std::vector<int> raw(n);
    for (std::size_t i = 0; i < n; ++i) raw[i] = static_cast<int>(uf.find(i));
    return normalize_labels(raw);
}

// Coarsest partition refined by both arguments: merge any two elements that
// share a block in either input.
inline Partition coarsest_common_coarsening(const Partition& a, const Partition& b) {
    const std::size_t n = a.size();
    UnionFind uf(n);
    std::vector<std::size_t> first_a(static_cast<std::size_t>(a.block_count), n);
    std::vector<std::size_t> first_b(static_cast<std::size_t>(b.block_count), n);
    for (std::size_t i = 0; i < n; ++i) {
        auto ia = static_cast<std::size_t>(a.block_id[i]);
        auto ib = static_cast<std::size_t>(b.block_id[i]);
        if (first_a[ia] == n) first_a[ia] = i; else uf.merge(first_a[ia], i);
        if (first_b[ib] == n) first_b[ib] = i; else uf.merge(first_b[ib], i);
    }
    return partition_from_union_find(uf, n);
}

// Finest partition coarsened by both arguments: blocks are intersections of
// an a-block with a b-block.
inline Partition common_refinement(const Partition& a, const Partition& b) {
    const std::size_t n = a.size();
    std::vector<int> raw(n);
    for (std::size_t i = 0; i < n; ++i)
        raw[i] = a.block_id[i] * b.block_count + b.block_id[i];
    return normalize_labels(raw);
}

} // namespace gibbsgate
