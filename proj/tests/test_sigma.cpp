#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "gibbsgate/sigma.hpp"
#include "support.hpp"

using namespace gibbsgate;
using namespace testsupport;

TEST_CASE("row and column partitions") {
    const FiniteJoint j = fixture_a();
    const Partition rows = row_partition(j);
    CHECK(rows.block_count == 2);
    CHECK(rows.block_id == std::vector<int>{0, 0, 1, 1});
    const Partition cols = col_partition(j);
    CHECK(cols.block_count == 2);
    CHECK(cols.block_id == std::vector<int>{0, 1, 0, 1});
}

TEST_CASE("completion keeps the support trace") {
    const FiniteJoint b = fixture_b();
    const CompletedSigma sx = complete(b, row_partition(b));
    REQUIRE(sx.cells.size() == 2);
    CHECK(sx.blocks.block_count == 2);
    Partition tiny;
    tiny.block_id = {0};
    tiny.block_count = 1;
    CHECK_THROWS_WITH(complete(b, tiny), "shape error");
}

TEST_CASE("intersection of completions") {
    const FiniteJoint a = fixture_a();
    const CompletedSigma ia = intersect_completed(complete(a, row_partition(a)),
                                                  complete(a, col_partition(a)));
    CHECK(ia.blocks.block_count == 1);

    const FiniteJoint b = fixture_b();
    const CompletedSigma ib = intersect_completed(complete(b, row_partition(b)),
                                                  complete(b, col_partition(b)));
    CHECK(ib.blocks.block_count == 2);

    CHECK_THROWS_WITH(intersect_completed(complete(a, row_partition(a)),
                                          complete(b, col_partition(b))),
                      "base mismatch");
}

TEST_CASE("event measurability in a completion") {
    const FiniteJoint a = fixture_a();
    const CompletedSigma d = intersect_completed(complete(a, row_partition(a)),
                                                 complete(a, col_partition(a)));
    CHECK(event_measurable(d, Event(2, 2)));
    CHECK(event_measurable(d, Event(2, 2, true)));
    Event row0 = event_from_cells(2, 2, {{0, 0}, {0, 1}});
    CHECK_FALSE(event_measurable(d, row0));
    // Null modifications of a measurable event stay measurable.
    Event full_plus_null = Event(2, 2, true);
    full_plus_null.set(1, 0, false);
    CHECK(event_measurable(d, full_plus_null));
    CHECK_THROWS_WITH(event_measurable(d, Event(3, 3)), "shape error");
}

TEST_CASE("null-split pair check agrees with hand analysis") {
    const FiniteJoint a = fixture_a();
    CHECK(check_condition_4(a, row_partition(a), col_partition(a)).holds);

    const FiniteJoint b = fixture_b();
    const Condition4Result r = check_condition_4(b, row_partition(b), col_partition(b));
    CHECK_FALSE(r.holds);
    REQUIRE(r.has_counterexample);
    CHECK(r.a == event_from_cells(2, 2, {{1, 0}, {1, 1}}));
    CHECK(r.b == event_from_cells(2, 2, {{0, 0}, {1, 0}}));
}

TEST_CASE("strong conclusion is strictly stronger") {
    // Same field on both sides: the weak form resolves every pair, the strong
    // form fails on a half-mass block.
    const FiniteJoint b = fixture_b();
    const Partition rows = row_partition(b);
    CHECK(check_condition_4(b, rows, rows).holds);
    const Condition4Result r = check_condition_5(b, rows, rows);
    CHECK_FALSE(r.holds);
    REQUIRE(r.has_counterexample);
    CHECK(r.a == event_from_cells(2, 2, {{1, 0}, {1, 1}}));
    CHECK(r.b == event_from_cells(2, 2, {{0, 0}, {0, 1}}));
}

TEST_CASE("family version quantifies nulls over all members") {
    const FiniteJoint a = fixture_a();
    const FiniteJoint b = fixture_b();
    const Partition rows = row_partition(a);
    const Partition cols = col_partition(a);
    CHECK(check_condition_4star({a, b}, rows, cols).holds);
    CHECK_FALSE(check_condition_4star({b, b}, rows, cols).holds);
    CHECK_THROWS_WITH(check_condition_4star({}, rows, cols), "empty distribution");
}

TEST_CASE("two-sided corner events") {
    const FiniteJoint b = fixture_b();
    const std::vector<Event> js = j_class(b, row_partition(b), col_partition(b));
    REQUIRE(js.size() == 4);
    CHECK(js[0] == Event(2, 2));
    CHECK(js[1] == event_from_cells(2, 2, {{0, 0}}));
    CHECK(js[2] == event_from_cells(2, 2, {{1, 1}}));
    CHECK(js[3] == Event(2, 2, true));
}

TEST_CASE("generated field from corner events matches the intersection") {
    for (const FiniteJoint& j : {fixture_a(), fixture_b(), triangle3(), product22()}) {
        const Partition rows = row_partition(j);
        const Partition cols = col_partition(j);
        const CompletedSigma lhs = sigma_from_events(j, j_class(j, rows, cols));
        const CompletedSigma rhs = intersect_completed(complete(j, rows), complete(j, cols));
        CHECK(lhs == rhs);
    }
}

TEST_CASE("pair scans respect the enumeration budget") {
    RealGrid w(4, 3, 1.0);
    const FiniteJoint j = build_joint(w);
    std::vector<int> raw(12);
    for (int i = 0; i < 12; ++i) raw[i] = i;
    const Partition discrete = normalize_labels(raw);
    CHECK_THROWS_WITH(check_condition_4(j, discrete, discrete), "enumeration budget exceeded");
}

TEST_CASE("atoms and witness") {
    const FiniteJoint a = fixture_a();
    CHECK(d_atoms(a).block_count == 1);
    const AdmissibilityReport ra = check_gibbs_admissible(a);
    CHECK(ra.admissible);
    CHECK(ra.atom_count == 1);
    CHECK_FALSE(ra.has_witness);

    const FiniteJoint b = fixture_b();
    const AdmissibilityReport rb = check_gibbs_admissible(b);
    CHECK_FALSE(rb.admissible);
    CHECK(rb.atom_count == 2);
    REQUIRE(rb.has_witness);
    CHECK(rb.witness.u == std::vector<std::uint8_t>{0, 1});
    CHECK(rb.witness.v == std::vector<std::uint8_t>{1, 0});
    // The witness rectangle and its opposite corner are both null.
    CHECK(rectangle_prob(b, rb.witness) == 0.0);
    Rectangle opposite;
    opposite.u = {1, 0};
    opposite.v = {0, 1};
    CHECK(rectangle_prob(b, opposite) == 0.0);

    const std::vector<double> masses = atom_masses(b, rb.atoms);
    REQUIRE(masses.size() == 2);
    CHECK(masses[0] == 0.5);
    CHECK(masses[1] == 0.5);
}

TEST_CASE("exhaustive rectangle scan") {
    CHECK(oracle_condition_6(fixture_a()));
    CHECK_FALSE(oracle_condition_6(fixture_b()));
    CHECK(oracle_condition_6(triangle3()));
    CHECK(oracle_condition_6(product22()));
    RealGrid big(13, 13, 1.0);
    CHECK_THROWS_WITH(oracle_condition_6(build_joint(big)), "size budget exceeded");
}

TEST_CASE("oracle agreement on random instances") {
    std::mt19937_64 gen(2024);
    for (int t = 0; t < 200; ++t) {
        const FiniteJoint j = random_joint_up_to(gen, 4, 4, 0.5);
        CHECK(check_gibbs_admissible(j).admissible == oracle_condition_6(j));
    }
}

TEST_CASE("two-sided projection values on the corner rectangle") {
    const FiniteJoint a = fixture_a();
    Rectangle r;
    r.u = {1, 0};
    r.v = {1, 0};
    const RealGrid g = condition_7_values(a, r);
    CHECK(g(0, 0) == 1.0);
    CHECK(g(0, 1) == 0.75);
    CHECK(g(1, 0) == 0.5);
    CHECK(g(1, 1) == 0.25);
    CHECK(check_condition_7(a, r));

    const FiniteJoint b = fixture_b();
    const RealGrid gb = condition_7_values(b, r);
    CHECK(gb(1, 1) == 0.0);
    CHECK_FALSE(check_condition_7(b, r));
}

TEST_CASE("zero-one section conditions") {
    const FiniteJoint a = fixture_a();
    CHECK(check_condition_11(a).holds);
    CHECK(check_condition_12(a));

    const FiniteJoint b = fixture_b();
    const Condition11Result r11 = check_condition_11(b);
    CHECK_FALSE(r11.holds);
    REQUIRE(r11.has_witness);
    CHECK(r11.witness_v == std::vector<std::uint8_t>{1, 0});
    CHECK_FALSE(check_condition_12(b));

    RealGrid wide(1, 25, 1.0);
    CHECK_THROWS_WITH(check_condition_11(build_joint(wide)), "size budget exceeded");
    CHECK_THROWS_WITH(check_condition_12(build_joint(wide)), "size budget exceeded");
}
