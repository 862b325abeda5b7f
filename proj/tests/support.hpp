#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "gibbsgate/partition.hpp"
#include "gibbsgate/space.hpp"

namespace testsupport {

// L-shaped support: connected, non-product, all hand values dyadic.
inline gibbsgate::FiniteJoint fixture_a() {
    gibbsgate::RealGrid w(2, 2, 0.0);
    w(0, 0) = 1.0;
    w(0, 1) = 1.0;
    w(1, 1) = 1.0;
    return gibbsgate::build_joint(w);
}

// Diagonal support: two components of mass 1/2 each.
inline gibbsgate::FiniteJoint fixture_b() {
    gibbsgate::RealGrid w(2, 2, 0.0);
    w(0, 0) = 1.0;
    w(1, 1) = 1.0;
    return gibbsgate::build_joint(w);
}

// Uniform on the lower triangle y <= x of a 3x3 grid.
inline gibbsgate::FiniteJoint triangle3() {
    gibbsgate::RealGrid w(3, 3, 0.0);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t k = 0; k <= i; ++k) w(i, k) = 1.0;
    return gibbsgate::build_joint(w);
}

// Independent uniform product on 2x2.
inline gibbsgate::FiniteJoint product22() {
    gibbsgate::RealGrid w(2, 2, 1.0);
    return gibbsgate::build_joint(w);
}

inline gibbsgate::RealGrid indicator(std::size_t rows, std::size_t cols, std::size_t x,
                                     std::size_t y) {
    gibbsgate::RealGrid phi(rows, cols, 0.0);
    phi(x, y) = 1.0;
    return phi;
}

// Random weights with a controllable zero rate; always at least one positive.
inline gibbsgate::RealGrid random_weights(std::mt19937_64& gen, std::size_t nx, std::size_t ny,
                                          double zero_prob = 0.35) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> mass(0.1, 1.0);
    gibbsgate::RealGrid w(nx, ny, 0.0);
    bool any = false;
    for (std::size_t f = 0; f < w.size(); ++f) {
        if (unit(gen) >= zero_prob) {
            w.at_flat(f) = mass(gen);
            any = true;
        }
    }
    if (!any) w(0, 0) = 1.0;
    return w;
}

inline gibbsgate::FiniteJoint random_joint(std::mt19937_64& gen, std::size_t nx, std::size_t ny,
                                           double zero_prob = 0.35) {
    return gibbsgate::build_joint(random_weights(gen, nx, ny, zero_prob));
}

inline gibbsgate::FiniteJoint random_joint_up_to(std::mt19937_64& gen, std::size_t max_nx,
                                                 std::size_t max_ny, double zero_prob = 0.35) {
    std::uniform_int_distribution<std::size_t> dx(1, max_nx);
    std::uniform_int_distribution<std::size_t> dy(1, max_ny);
    return random_joint(gen, dx(gen), dy(gen), zero_prob);
}

inline gibbsgate::Partition random_partition(std::mt19937_64& gen, std::size_t n,
                                             std::size_t max_blocks) {
    std::uniform_int_distribution<int> pick(0, static_cast<int>(max_blocks) - 1);
    std::vector<int> raw(n);
    for (std::size_t i = 0; i < n; ++i) raw[i] = pick(gen);
    return gibbsgate::normalize_labels(raw);
}

inline gibbsgate::RealGrid random_phi(std::mt19937_64& gen, std::size_t nx, std::size_t ny) {
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    gibbsgate::RealGrid phi(nx, ny, 0.0);
    for (std::size_t f = 0; f < phi.size(); ++f) phi.at_flat(f) = val(gen);
    return phi;
}

inline gibbsgate::Event random_event(std::mt19937_64& gen, std::size_t rows, std::size_t cols) {
    std::bernoulli_distribution coin(0.5);
    gibbsgate::Event e(rows, cols);
    for (std::size_t f = 0; f < e.member.size(); ++f) e.member.at_flat(f) = coin(gen) ? 1 : 0;
    return e;
}

// Joint whose support is a given bitmask over row-major cells, uniform mass.
inline gibbsgate::FiniteJoint joint_from_mask(std::size_t nx, std::size_t ny, std::uint32_t mask) {
    gibbsgate::RealGrid w(nx, ny, 0.0);
    for (std::size_t f = 0; f < w.size(); ++f)
        if (mask & (1u << f)) w.at_flat(f) = 1.0;
    return gibbsgate::build_joint(w);
}

} // namespace testsupport
