#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>

#include "gibbsgate/chain.hpp"
#include "gibbsgate/kernel.hpp"
#include "support.hpp"

using namespace gibbsgate;
using namespace testsupport;

TEST_CASE("counter generator stream") {
    CHECK(std::string(rng_name) == "gibbsgate-rng-v1");
    CounterRng r(0);
    CHECK(r.next_u64() == 0xE220A8397B1DCDAFULL);
    CHECK(r.next_u64() == 0x6E789E6AA1B965F4ULL);
    CHECK(r.draws() == 2);
    CHECK(CounterRng(7).next_u64() == 0x63CBE1E459320DD7ULL);

    CounterRng u(0);
    CHECK(u.next_unit() == 0x1.c4415072f63b9p-1); // (first >> 11) * 2^-53
    for (int i = 0; i < 1000; ++i) {
        const double x = u.next_unit();
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
    }

    // Same (seed, counter) pair, same value: streams replay bit for bit.
    CounterRng a(123), b(123);
    for (int i = 0; i < 50; ++i) CHECK(a.next_u64() == b.next_u64());

    CHECK(replicate_seed(7, 0) == 7);
    CHECK(replicate_seed(7, 1) == 6);
}

TEST_CASE("inverse-CDF sampling") {
    const std::vector<double> half{0.5, 0.5};
    CHECK(sample_index(half, 0.0) == 0);
    CHECK(sample_index(half, 0.49) == 0);
    CHECK(sample_index(half, 0.5) == 1);
    CHECK(sample_index(half, 0.999) == 1);

    const std::vector<double> gap{0.5, 0.0, 0.5};
    CHECK(sample_index(gap, 0.6) == 2);

    // Accumulated row mass can fall short of u; the draw then lands on the
    // last positive entry, never on a zero one.
    const std::vector<double> low{0.3, 0.3, 0.0};
    CHECK(sample_index(low, 0.9) == 1);
}

TEST_CASE("config validation") {
    const FiniteJoint j = fixture_a();
    ChainConfig cfg;
    cfg.steps = 0;
    CHECK_THROWS_WITH(simulate(j, cfg), "invalid chain config");

    cfg.steps = 5;
    cfg.start.kind = StartSpec::Kind::State;
    cfg.start.state = Cell{5, 0};
    CHECK_THROWS_WITH(simulate(j, cfg), "invalid start state");

    // Off-support start in a positive-marginal row is legal: the first sweep
    // immediately projects back onto the support.
    cfg.start.state = Cell{1, 0};
    CHECK_NOTHROW(simulate(j, cfg));

    RealGrid top(2, 2, 0.0);
    top(0, 0) = 1.0;
    top(0, 1) = 1.0;
    const FiniteJoint rowonly = build_joint(top);
    cfg.start.state = Cell{1, 0}; // zero-marginal row
    CHECK_THROWS_WITH(simulate(rowonly, cfg), "invalid start state");

    cfg.start.kind = StartSpec::Kind::Distribution;
    cfg.start.dist = {1.0};
    CHECK_THROWS_WITH(simulate(j, cfg), "shape error");
    cfg.start.dist = {0.5, 0.5, 0.1, 0.0};
    CHECK_THROWS_WITH(simulate(j, cfg), "invalid start state"); // mass 1.1
    cfg.start.dist = {0.5, 0.5, 0.0, 0.0};
    CHECK_NOTHROW(simulate(j, cfg));
    cfg.start.dist = {0.5, 0.5, -0.5, 0.5};
    CHECK_THROWS_WITH(simulate(j, cfg), "invalid start state");
}

TEST_CASE("trajectories replay and split by replicate") {
    const FiniteJoint j = fixture_a();
    ChainConfig cfg;
    cfg.seed = 42;
    cfg.steps = 64;
    cfg.chains = 3;

    const auto runs1 = simulate(j, cfg);
    const auto runs2 = simulate(j, cfg);
    REQUIRE(runs1.size() == 3);
    CHECK(runs1 == runs2);
    for (const auto& t : runs1) CHECK(t.size() == 64);
    CHECK(runs1[0] != runs1[1]);

    // Each replicate is one stream seeded by XOR of the replicate index.
    const Conditional alpha = conditional_alpha(j);
    const Conditional beta = conditional_beta(j);
    for (std::size_t i = 0; i < 3; ++i) {
        const auto solo = simulate_one(j, alpha, beta, cfg.start, cfg.steps,
                                       CounterRng(replicate_seed(cfg.seed, i)));
        CHECK(solo == runs1[i]);
    }
}

TEST_CASE("absorbing start pins the running mean") {
    const FiniteJoint b = fixture_b();
    ChainConfig cfg;
    cfg.seed = 9;
    cfg.steps = 500;
    cfg.start.kind = StartSpec::Kind::State;
    cfg.start.state = Cell{0, 0};

    const SllnReport rep = slln_estimate(b, indicator(2, 2, 0, 0), cfg);
    CHECK(rep.target == 0.5);
    REQUIRE(rep.record_ns.size() == 500);
    for (double m : rep.running_means[0]) CHECK(m == 1.0);
    CHECK(rep.finals[0] == 1.0);
    CHECK(rep.final_abs_error[0] == 0.5);
}

TEST_CASE("record grid honors the stride") {
    const FiniteJoint j = fixture_a();
    ChainConfig cfg;
    cfg.steps = 10;
    const SllnReport rep = slln_estimate(j, indicator(2, 2, 0, 0), cfg, 3);
    CHECK(rep.record_ns == std::vector<std::size_t>{3, 6, 9, 10});
    REQUIRE(rep.running_means[0].size() == 4);
    CHECK(rep.finals[0] == rep.running_means[0].back());
}

TEST_CASE("long-run means settle at the expectation when admissible") {
    const FiniteJoint j = fixture_a();
    ChainConfig cfg;
    cfg.seed = 7;
    cfg.steps = 200000;
    cfg.chains = 4;
    const SllnReport rep = slln_diagnose(j, indicator(2, 2, 0, 0), cfg, {}, 1000);
    CHECK(rep.target == 1.0 / 3.0);
    CHECK(rep.band == 0.01);
    for (double e : rep.final_abs_error) CHECK(e <= 0.01);
    CHECK(rep.pass);

    ChainConfig single = cfg;
    single.chains = 1;
    CHECK_THROWS_WITH(slln_diagnose(j, indicator(2, 2, 0, 0), single), "invalid chain config");
}

TEST_CASE("split supports never average across atoms") {
    const FiniteJoint b = fixture_b();
    ChainConfig cfg;
    cfg.seed = 11;
    cfg.steps = 20000;
    cfg.chains = 4;
    const SllnReport rep = slln_diagnose(b, indicator(2, 2, 0, 0), cfg, {}, 500);
    CHECK_FALSE(rep.pass);
    // Every chain is trapped, so every final mean is exactly 0 or 1.
    for (double f : rep.finals) CHECK((f == 0.0 || f == 1.0));
    for (double e : rep.final_abs_error) CHECK(e == 0.5);
}

TEST_CASE("dispersion-scaled bands") {
    const FiniteJoint j = fixture_a();
    ChainConfig cfg;
    cfg.seed = 3;
    cfg.steps = 100000;
    cfg.chains = 6;
    SllnBand band;
    band.mode = SllnBand::Mode::StdMultiple;
    band.value = 4.0;
    const SllnReport rep = slln_diagnose(j, indicator(2, 2, 0, 0), cfg, band, 1000);
    CHECK(rep.band > 0.0);
    CHECK(rep.band < 0.01);
}

TEST_CASE("row chains over an arbitrary stochastic matrix") {
    const GibbsKernel k = build_kernel(fixture_b());
    const auto traj = simulate_kernel_rows(k.matrix, 0, 10, CounterRng(1));
    REQUIRE(traj.size() == 10);
    for (std::size_t s : traj) CHECK(s == 0); // absorbing state

    const auto t2 = simulate_kernel_rows(k.matrix, 3, 10, CounterRng(1));
    for (std::size_t i = 1; i < t2.size(); ++i) CHECK(t2[i] == 3);

    CHECK_THROWS_WITH(simulate_kernel_rows(k.matrix, 9, 5, CounterRng(0)),
                      "invalid chain config");
    CHECK_THROWS_WITH(simulate_kernel_rows(k.matrix, 0, 0, CounterRng(0)),
                      "invalid chain config");
}
