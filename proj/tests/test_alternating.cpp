#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "lqproj/alternating.hpp"
#include "test_util.hpp"

using namespace lqproj;
using testutil::random_subspace;
using testutil::random_vec;

namespace {

Subspace xy_plane() { return Subspace::from_rows(3, {{1, 0, 0}, {0, 1, 0}}); }
Subspace xz_plane() { return Subspace::from_rows(3, {{1, 0, 0}, {0, 0, 1}}); }

// A pair of rank-2 subspaces of R^4 sharing exactly the line through u.
std::pair<Subspace, Subspace> pair_with_line_intersection(
    std::mt19937_64& rng) {
    for (;;) {
        Eigen::VectorXd u = random_vec(rng, 4, 1.0);
        Eigen::MatrixXd a(4, 2), b(4, 2);
        a.col(0) = u;
        a.col(1) = random_vec(rng, 4, 1.0);
        b.col(0) = u;
        b.col(1) = random_vec(rng, 4, 1.0);
        try {
            Subspace m(4, a), n(4, b);
            if (intersect(m, n).rank() != 1 || sum(m, n).rank() != 3)
                continue;
            // Keep the pair well separated outside the shared line: the
            // second principal angle governs the contraction rate, and a
            // cosine near 1 turns convergence into a crawl.
            Eigen::MatrixXd overlap = m.orthonormal_basis().transpose() *
                                      n.orthonormal_basis();
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(overlap);
            if (svd.singularValues()(1) <= 0.9) return {m, n};
        } catch (const DegenerateBasis&) {
        }
    }
}

} // namespace

TEST_CASE("alternating bregman on the coordinate planes") {
    SpaceConfig cfg(3, 3.0, 3.0);
    PrimalVector x0{1.0, 2.0, 3.0};
    IterationTrace tr = alternate_bregman(x0, xy_plane(), xz_plane(), cfg);

    // Two genuine steps: (1,2,3) -> (1,2,0) -> (1,0,0), then fixed.
    REQUIRE(tr.iterates.size() == 3);
    CHECK((tr.iterates[1].coords - Eigen::Vector3d(1, 2, 0)).norm() < 1e-9);
    CHECK((tr.iterates[2].coords - Eigen::Vector3d(1, 0, 0)).norm() < 1e-9);
    CHECK((tr.limit.coords - Eigen::Vector3d(1, 0, 0)).norm() < 1e-9);
    CHECK(tr.stop_reason == StopReason::tol_reached);
    CHECK(tr.limit_kind == LimitKind::bregman_projection_of_x0);
    REQUIRE(tr.d_breg_to_limit.size() == 3);
    REQUIRE(tr.dist_to_limit.size() == 3);
    for (double d : tr.d_breg_to_limit) CHECK(d >= -1e-12);
    CHECK(tr.dist_to_limit.back() < 1e-6);
}

TEST_CASE("point already in the intersection gives a constant trace") {
    SpaceConfig cfg(3, 3.0, 3.0);
    PrimalVector x0{2.0, 0.0, 0.0};
    IterationTrace tr = alternate_bregman(x0, xy_plane(), xz_plane(), cfg);
    REQUIRE(tr.iterates.size() == 1);
    CHECK(tr.stop_reason == StopReason::tol_reached);
    CHECK(tr.dist_to_limit[0] < 1e-9);

    // A point in M but not in N must not trigger a premature stop.
    PrimalVector in_m{1.0, 2.0, 0.0};
    IterationTrace tr2 = alternate_bregman(in_m, xy_plane(), xz_plane(), cfg);
    REQUIRE(tr2.iterates.size() > 1);
    CHECK((tr2.iterates.back().coords - Eigen::Vector3d(1, 0, 0)).norm() <
          1e-6);
}

TEST_CASE("alternating bregman converges to the intersection projection") {
    std::mt19937_64 rng(301);
    SpaceConfig cfg(4, 3.0, 3.0);
    for (int k = 0; k < 8; ++k) {
        auto [m, n] = pair_with_line_intersection(rng);
        PrimalVector x0(random_vec(rng, 4, 1.5));
        IterationTrace tr = alternate_bregman(x0, m, n, cfg);
        CHECK(tr.stop_reason == StopReason::tol_reached);
        // Limit equals the direct projection onto the intersection.
        auto direct = bregman_project(x0, intersect(m, n), cfg);
        CHECK(detail::lq_norm(tr.iterates.back().coords - direct.point.coords,
                              cfg.q) < 1e-6);
        // Bregman monotone with respect to the intersection.
        CHECK(check_bregman_monotone(tr, intersect(m, n), cfg) <= 1e-9);

        // Per-step energy identity against members z of the intersection.
        Eigen::VectorXd z = tr.limit.coords;
        for (std::size_t i = 0; i + 1 < tr.iterates.size(); ++i) {
            double lhs = detail::bregman_raw(z, tr.iterates[i + 1].coords,
                                             cfg.q, cfg.p);
            double rhs = detail::bregman_raw(z, tr.iterates[i].coords, cfg.q,
                                             cfg.p) -
                         detail::bregman_raw(tr.iterates[i + 1].coords,
                                             tr.iterates[i].coords, cfg.q,
                                             cfg.p);
            CHECK(std::abs(lhs - rhs) <= 1e-9 * (1.0 + std::abs(rhs)));
        }
    }
}

TEST_CASE("norms are nonincreasing along alternating bregman traces") {
    std::mt19937_64 rng(307);
    SpaceConfig cfg(4, 3.0, 3.0);
    auto [m, n] = pair_with_line_intersection(rng);
    PrimalVector x0(random_vec(rng, 4, 1.5));
    IterationTrace tr = alternate_bregman(x0, m, n, cfg);
    for (std::size_t i = 0; i + 1 < tr.iterates.size(); ++i)
        CHECK(detail::lq_norm(tr.iterates[i + 1].coords, cfg.q) <=
              detail::lq_norm(tr.iterates[i].coords, cfg.q) + 1e-10);
}

TEST_CASE("residual method drives coordinate-plane pairs to zero") {
    SpaceConfig cfg(3, 3.0, 3.0);
    PrimalVector x0{1.0, 2.0, 3.0};
    // M + N is the whole space, so the limit is 0.
    IterationTrace tr = alternate_residual_metric(x0, xy_plane(), xz_plane(),
                                                  cfg);
    CHECK(tr.limit.coords.norm() < 1e-9);
    CHECK(tr.limit_kind == LimitKind::residual_projection_of_x0);
    CHECK(tr.stop_reason == StopReason::tol_reached);
    CHECK(detail::lq_norm(tr.iterates.back().coords, cfg.q) < 1e-6);
}

TEST_CASE("orthogonal subspaces converge in one sweep in the Hilbert case") {
    SpaceConfig cfg(3, 2.0, 2.0);
    Subspace m = Subspace::from_rows(3, {{1, 0, 0}});
    Subspace n = Subspace::from_rows(3, {{0, 1, 0}});
    PrimalVector x0{1.0, 1.0, 0.0};  // inside M + N
    IterationTrace tr = alternate_residual_metric(x0, m, n, cfg);
    CHECK(tr.limit.coords.norm() < 1e-12);
    CHECK(tr.iterates.size() <= 3);
    CHECK(tr.iterates.back().coords.norm() < 1e-9);
}

TEST_CASE("direct and dual residual engines agree") {
    std::mt19937_64 rng(311);
    // q=3 with gauge p=2, so p* = 2 as well.
    for (double q : {3.0, 1.5}) {
        SpaceConfig cfg(3, q, 2.0);
        for (int k = 0; k < 6; ++k) {
            Subspace m = random_subspace(rng, 3, 1);
            Subspace n = random_subspace(rng, 3, 1);
            PrimalVector x0(random_vec(rng, 3, 1.2));
            std::vector<DualVector> ys;
            IterationTrace td = alternate_residual_metric(
                x0, m, n, cfg, {}, ResidualEngine::direct);
            IterationTrace tu = alternate_residual_metric(
                x0, m, n, cfg, {}, ResidualEngine::dual, &ys);
            std::size_t common =
                std::min(td.iterates.size(), tu.iterates.size());
            REQUIRE(common >= 2);
            for (std::size_t i = 0; i < common; ++i)
                CHECK(detail::lq_norm(
                          td.iterates[i].coords - tu.iterates[i].coords,
                          cfg.q) < 1e-6);
            CHECK(detail::lq_norm(td.limit.coords - tu.limit.coords, cfg.q) <
                  1e-9);
            // Duality conjugacy: the dual engine's y_n are j_p(x_n).
            REQUIRE(ys.size() == tu.iterates.size());
            for (std::size_t i = 0; i < ys.size(); ++i) {
                Eigen::VectorXd want = detail::gauge_gradient(
                    tu.iterates[i].coords, cfg.q, cfg.p);
                CHECK((ys[i].coords - want).cwiseAbs().maxCoeff() <=
                      1e-8 * (1.0 + want.cwiseAbs().maxCoeff()));
            }
        }
    }
}

TEST_CASE("cyclic residual with two subspaces reproduces the pair driver") {
    std::mt19937_64 rng(313);
    SpaceConfig cfg(4, 3.0, 3.0);
    Subspace m = random_subspace(rng, 4, 2);
    Subspace n = random_subspace(rng, 4, 1);
    PrimalVector x0(random_vec(rng, 4, 1.5));
    IterationTrace pair = alternate_residual_metric(x0, m, n, cfg);
    IterationTrace cyc = alternate_residual_cyclic(x0, {m, n}, cfg);
    REQUIRE(pair.iterates.size() == cyc.iterates.size());
    for (std::size_t i = 0; i < pair.iterates.size(); ++i)
        CHECK((pair.iterates[i].coords - cyc.iterates[i].coords)
                  .cwiseAbs()
                  .maxCoeff() <= 1e-15);
    CHECK(pair.stop_reason == cyc.stop_reason);
}

TEST_CASE("cyclic residual over spanning coordinate lines vanishes") {
    SpaceConfig cfg(3, 3.0, 3.0);
    std::vector<Subspace> lines = {Subspace::from_rows(3, {{1, 0, 0}}),
                                   Subspace::from_rows(3, {{0, 1, 0}}),
                                   Subspace::from_rows(3, {{0, 0, 1}})};
    PrimalVector x0{0.7, -1.3, 2.1};
    IterationTrace tr = alternate_residual_cyclic(x0, lines, cfg);
    CHECK(tr.limit.coords.norm() < 1e-12);
    CHECK(detail::lq_norm(tr.iterates.back().coords, cfg.q) < 1e-6);

    // Hilbert case: one sweep kills every coordinate.
    SpaceConfig h(3, 2.0, 2.0);
    IterationTrace th = alternate_residual_cyclic(x0, lines, h);
    CHECK(th.iterates.back().coords.norm() < 1e-12);
    CHECK(th.iterates.size() <= 4);

    REQUIRE_THROWS_AS(alternate_residual_cyclic(x0, {lines[0]}, cfg), Error);
}

TEST_CASE("monotonicity checker flags nothing on constant traces") {
    SpaceConfig cfg(3, 3.0, 3.0);
    IterationTrace tr;
    tr.limit = PrimalVector{1.0, 0.0, 0.0};
    tr.iterates = {PrimalVector{1.0, 2.0, 0.0}, PrimalVector{1.0, 2.0, 0.0}};
    tr.d_breg_to_limit = {0.0, 0.0};
    tr.dist_to_limit = {0.0, 0.0};
    CHECK(check_bregman_monotone(tr, xy_plane(), cfg) == 0.0);
}

TEST_CASE("monotonicity checker catches an expanding sequence") {
    SpaceConfig cfg(3, 3.0, 3.0);
    IterationTrace tr;
    tr.limit = PrimalVector{0.0, 0.0, 0.0};
    // Moving away from every sampled z, including z = 0.
    tr.iterates = {PrimalVector{1.0, 0.0, 0.0}, PrimalVector{2.0, 0.0, 0.0}};
    tr.d_breg_to_limit = {0.0, 0.0};
    tr.dist_to_limit = {0.0, 0.0};
    CHECK(check_bregman_monotone(tr, xy_plane(), cfg) > 0.1);
}

TEST_CASE("rate estimation recovers synthetic geometric decay") {
    std::vector<double> exact;
    for (int n = 0; n <= 30; ++n) exact.push_back(std::pow(0.5, n));
    RateEstimate est = estimate_linear_rate(exact);
    CHECK(est.q_hat == Catch::Approx(0.5).margin(1e-6));
    CHECK(est.r_squared > 0.999999);
    // head skip is a quarter of the 31-entry span (all above the floor)
    CHECK(est.window_begin == 7);
    CHECK(est.window_end == 31);

    std::mt19937_64 rng(317);
    std::normal_distribution<double> noise(0.0, 1e-14);
    std::vector<double> noisy;
    for (int n = 0; n <= 40; ++n)
        noisy.push_back(3.0 * std::pow(0.9, n) + noise(rng));
    RateEstimate est2 = estimate_linear_rate(noisy);
    CHECK(est2.q_hat > 0.899);
    CHECK(est2.q_hat < 0.901);
}

TEST_CASE("rate estimation rejects traces without usable decay") {
    std::vector<double> flat(20, 5e-14);  // all at the rounding floor
    REQUIRE_THROWS_AS(estimate_linear_rate(flat), InsufficientDecay);
    std::vector<double> short_run = {1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125};
    REQUIRE_THROWS_AS(estimate_linear_rate(short_run), InsufficientDecay);
}

TEST_CASE("hilbert alternating rate matches the closed-form angle law") {
    // Two lines in R^2 at angle theta: squared distance to the limit
    // contracts by cos^2(theta) per projection.
    SpaceConfig cfg(2, 2.0, 2.0);
    for (double theta : {0.6, 0.9, 1.2}) {
        Subspace m = Subspace::from_rows(2, {{1.0, 0.0}});
        Subspace n = Subspace::from_rows(2, {{std::cos(theta),
                                              std::sin(theta)}});
        PrimalVector x0{0.3, 0.8};
        IterationTrace tr = alternate_bregman(x0, m, n, cfg);
        RateEstimate est = estimate_linear_rate(tr);
        double want = std::cos(theta) * std::cos(theta);
        CHECK(std::abs(est.q_hat - want) < 0.02);
        // the asymptotic window weights the near-floor tail, where log
        // residuals pick up rounding noise; 0.995 leaves room for that
        CHECK(est.r_squared > 0.995);
    }
}

TEST_CASE("budget exhaustion with visible motion reports nonconvergence") {
    SpaceConfig cfg(2, 2.0, 2.0);
    double theta = 0.05;  // nearly parallel lines: very slow contraction
    Subspace m = Subspace::from_rows(2, {{1.0, 0.0}});
    Subspace n = Subspace::from_rows(2, {{std::cos(theta), std::sin(theta)}});
    PrimalVector x0{1.0, 0.5};
    StopRule few{1e-12, 6};
    REQUIRE_THROWS_AS(alternate_bregman(x0, m, n, cfg, few), NonConvergence);
}

TEST_CASE("budget exhaustion just short of the gap rule stops cleanly") {
    SpaceConfig cfg(2, 2.0, 2.0);
    double theta = 0.5;
    Subspace m = Subspace::from_rows(2, {{1.0, 0.0}});
    Subspace n = Subspace::from_rows(2, {{std::cos(theta), std::sin(theta)}});
    PrimalVector x0{1.0, 0.5};
    StopRule mid{1e-12, 60};  // gap well below 1e-6 but above 1e-12 at cutoff
    IterationTrace tr = alternate_bregman(x0, m, n, cfg, mid);
    CHECK(tr.stop_reason == StopReason::max_iter_reached);
}

TEST_CASE("stop rule validation") {
    SpaceConfig cfg(3, 3.0, 3.0);
    PrimalVector x0{1.0, 2.0, 3.0};
    StopRule bad{0.0, 100};
    REQUIRE_THROWS_AS(alternate_bregman(x0, xy_plane(), xz_plane(), cfg, bad),
                      Error);
}

TEST_CASE("trace csv serialization") {
    SpaceConfig cfg(3, 3.0, 3.0);
    PrimalVector x0{1.0, 2.0, 3.0};
    IterationTrace tr = alternate_bregman(x0, xy_plane(), xz_plane(), cfg);
    std::ostringstream os;
    write_trace_csv(os, tr, cfg);
    std::istringstream is(os.str());
    std::string line;
    REQUIRE(std::getline(is, line));
    CHECK(line == "iter,d_breg_to_limit,dist_to_limit,norm,step_gap");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == static_cast<int>(tr.iterates.size()));
    // First data row starts with iter 0 and zero step gap.
    std::istringstream again(os.str());
    std::getline(again, line);
    std::getline(again, line);
    CHECK(line.substr(0, 2) == "0,");
    CHECK(line.substr(line.rfind(',') + 1) == "0");
}
