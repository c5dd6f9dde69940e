#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lqproj/examples.hpp"

using namespace lqproj;

namespace {

const CheckRow& find_row(const ExampleReport& rep, const std::string& name) {
    for (const CheckRow& row : rep.checks)
        if (row.name == name) return row;
    FAIL("missing check row: " << name);
    static CheckRow dummy;
    return dummy;
}

} // namespace

TEST_CASE("coordinate-plane scenario reproduces the cubic golden values") {
    ExampleReport rep = run_example1(3.0, 500, 42);
    REQUIRE(rep.overall_pass);

    const CheckRow& d1 = find_row(rep, "distance_to_plane_xy_at_(1,2,3)");
    CHECK(d1.expected == Catch::Approx(18.0).epsilon(1e-15));
    CHECK(d1.computed == Catch::Approx(18.0).margin(1e-8));

    const CheckRow& d2 = find_row(rep, "distance_to_plane_xz_at_(1,2,3)");
    CHECK(d2.expected == Catch::Approx(16.0 / 3.0).epsilon(1e-15));

    const CheckRow& d12 = find_row(rep, "distance_to_axis_at_(1,2,3)");
    CHECK(d12.expected == Catch::Approx(70.0 / 3.0).epsilon(1e-15));

    const CheckRow& ratio = find_row(rep, "regularity_ratio_at_(1,2,3)");
    CHECK(ratio.expected == Catch::Approx(35.0 / 27.0).epsilon(1e-15));
    CHECK(ratio.computed == Catch::Approx(35.0 / 27.0).margin(1e-8));
}

TEST_CASE("coordinate-plane scenario holds across gauges") {
    for (double q : {1.5, 2.0, 4.0}) {
        ExampleReport rep = run_example1(q, 400, 7);
        INFO("q = " << q);
        for (const CheckRow& row : rep.checks)
            INFO(row.name << ": expected " << row.expected << " computed "
                          << row.computed);
        CHECK(rep.overall_pass);
        const CheckRow& ratio = find_row(rep, "regularity_ratio_at_(1,2,3)");
        CHECK(ratio.expected ==
              Catch::Approx(1.0 + std::pow(2.0 / 3.0, q)).epsilon(1e-14));
    }
}

TEST_CASE("coordinate-plane scenario rejects bad arguments") {
    CHECK_THROWS_AS(run_example1(1.0), Error);
    CHECK_THROWS_AS(run_example1(3.0, 0), Error);
}

TEST_CASE("near-parallel scenario matches its closed forms on the default "
          "grid") {
    ExampleReport rep = run_example2();
    for (const CheckRow& row : rep.checks)
        INFO(row.name << ": expected " << row.expected << " computed "
                      << row.computed << " err " << row.abs_err);
    REQUIRE(rep.overall_pass);

    // lambda = 1: the line-projection coefficient is sqrt(12)/3.
    const CheckRow& coeff =
        find_row(rep, "line_projection_coefficient(lambda=1.000000)");
    CHECK(coeff.expected == Catch::Approx(std::sqrt(12.0) / 3.0).epsilon(1e-15));
    CHECK(coeff.abs_err <= 1e-8);

    // The ratio floor at lambda = 0.001 is already in the tens of thousands.
    const CheckRow& floor_ =
        find_row(rep, "regularity_ratio_floor(lambda=0.001000)");
    CHECK(floor_.expected > 1e5);
    CHECK(floor_.computed >= floor_.expected * (1.0 - 1e-9));

    // The floor grows without bound across the whole grid; the measured
    // ratios grow once lambda is small.
    const CheckRow& floors = find_row(rep, "ratio_floor_divergence");
    CHECK(floors.computed > 1.0);
    const CheckRow& growth = find_row(rep, "ratio_divergence_small_lambda");
    CHECK(growth.computed > 1.0);
}

TEST_CASE("near-parallel scenario validates its grid") {
    CHECK_THROWS_AS(run_example2({}), Error);
    CHECK_THROWS_AS(run_example2({0.5, -0.1}), Error);
    CHECK_THROWS_AS(run_example2({2.0}), Error);
}

TEST_CASE("distance growth exponent sits between the convexity and "
          "smoothness powers") {
    PowerTypeReport cubic = power_type_probe(3.0, 2.0, 10000, 5);
    INFO("q=3 slope " << cubic.slope);
    CHECK(cubic.slope >= 1.85);
    CHECK(cubic.slope <= 3.15);
    CHECK(cubic.overall_pass);

    PowerTypeReport sub = power_type_probe(1.5, 2.0, 10000, 5);
    INFO("q=1.5 slope " << sub.slope);
    CHECK(sub.slope >= 1.35);
    CHECK(sub.slope <= 2.15);
    CHECK(sub.overall_pass);
}

TEST_CASE("quadratic gauge collapses to half the squared distance") {
    PowerTypeReport rep = power_type_probe(2.0, 2.0, 4000, 9);
    CHECK(rep.slope_ok);
    CHECK(rep.identity_worst <= 1e-12);
    CHECK(rep.identity_ok);
    CHECK(rep.overall_pass);
}

TEST_CASE("reports serialize with verdicts") {
    ExampleReport rep = run_example1(3.0, 50, 1);
    std::string js = to_json(rep);
    CHECK(js.find("\"overall_pass\": true") != std::string::npos);
    CHECK(js.find("distance_to_plane_xy_at_(1,2,3)") != std::string::npos);
    CHECK(js.find("\"abs_err\"") != std::string::npos);

    PowerTypeReport probe = power_type_probe(2.0, 1.0, 500, 3);
    std::string pj = to_json(probe);
    CHECK(pj.find("\"slope\"") != std::string::npos);
    CHECK(pj.find("\"window\"") != std::string::npos);
}
