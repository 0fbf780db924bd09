#include <doctest.h>

#include <cmath>
#include <random>

#include <json.hpp>

#include "jmvd/detector.hpp"
#include "support.hpp"

using namespace jmvd;

TEST_CASE("loop_test: enclosing, disjoint and boundary-crossing boxes") {
    const MatrixFamily f = load_family(test::data_path("triangular_2x2.json"));
    CHECK(loop_test(f, {-0.5, 0.5, -0.5, 0.5}).classification == LoopClass::RankLossInside);
    CHECK(loop_test(f, {0.2, 0.6, 0.2, 0.6}).classification == LoopClass::NoRankLoss);

    // The rank-loss point sits on the bottom edge; inflation about the center recovers.
    const LoopTestResult edge = loop_test(f, {-0.5, 0.5, 0.0, 1.0});
    CHECK(edge.retries >= 1);
    CHECK(edge.classification == LoopClass::RankLossInside);
    CHECK(edge.box_used.contains({0.0, 0.0}));

    DetectOptions no_retry;
    no_retry.inflate_retries = 0;
    const LoopTestResult fail = loop_test(f, {-0.5, 0.5, 0.0, 1.0}, no_retry);
    CHECK(fail.classification == LoopClass::Inconclusive);
    CHECK(!fail.reason.empty());
}

TEST_CASE("polish_root converges quadratically on an affine determinant") {
    const MatrixFamily f = load_family(test::data_path("triangular_2x2.json"));
    const NewtonResult r = polish_root(f, {0.3, -0.2}, 1e-14);
    CHECK(r.converged);
    CHECK(std::abs(r.location.x) < 1e-14);
    CHECK(std::abs(r.location.y) < 1e-14);
    CHECK(r.iterations <= 3);
}

TEST_CASE("detect: triangular family has one point at the origin") {
    const MatrixFamily f = load_family(test::data_path("triangular_2x2.json"));
    for (Box box : {Box{-1.0, 0.9, -0.8, 1.0}, Box{-1.0, 1.0, -1.0, 1.0}}) {
        const DetectionResult r = detect(f, box);
        REQUIRE(r.points.size() == 1);
        CHECK(std::hypot(r.points[0].location.x, r.points[0].location.y) < 1e-8);
        CHECK(r.points[0].genericity.regular);
        CHECK(r.points[0].polish_residual <= r.points[0].det_tol);
        CHECK_FALSE(r.budget_exhausted);
    }
}

TEST_CASE("detect: constant family has nothing to find") {
    std::mt19937_64 rng(2);
    const MatrixFamily f = MatrixFamily::constant(test::random_matrix(rng, 3));
    const DetectionResult r = detect(f, {-1, 1, -1, 1});
    CHECK(r.points.empty());
    CHECK(r.inconclusive.empty());
    CHECK(r.cells_tested == 1);
}

TEST_CASE("detect: 4x4 affine family") {
    const MatrixFamily f = load_family(test::data_path("affine_4x4.json"));
    const DetectionResult a = detect(f, {-1, 1, -1, 1});
    REQUIRE(a.points.size() == 1);
    // Frozen from the first run.
    CHECK(a.points[0].location.x == doctest::Approx(0.0257435).epsilon(1e-5));
    CHECK(a.points[0].location.y == doctest::Approx(0.0927385).epsilon(1e-5));
    CHECK(std::abs(a.points[0].unpolished.x - a.points[0].location.x) <= 1e-3);
    CHECK(std::abs(a.points[0].unpolished.y - a.points[0].location.y) <= 1e-3);
    CHECK(a.points[0].genericity.regular);

    const DetectionResult b = detect(f, {-1, 1, -1, 1});
    CHECK(b.cells_tested == a.cells_tested);
    CHECK(b.points[0].location.x == a.points[0].location.x);
    CHECK(b.points[0].location.y == a.points[0].location.y);
    CHECK(detection_json(a) == detection_json(b));
}

TEST_CASE("detect: budget exhaustion is reported") {
    const MatrixFamily f = load_family(test::data_path("affine_4x4.json"));
    DetectOptions opts;
    opts.max_cells = 5;
    const DetectionResult r = detect(f, {-1, 1, -1, 1}, opts);
    CHECK(r.budget_exhausted);
    CHECK(r.cells_tested == 5);
    CHECK(r.points.empty());
    CHECK(nlohmann::json::parse(detection_json(r)).at("budget_exhausted") == true);
}

TEST_CASE("detect: manufactured families with a known rank-loss point") {
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> u(-0.8, 0.8);
    for (int trial = 0; trial < 10; ++trial) {
        const double a = u(rng);
        const double b = u(rng);
        const MatrixFamily f = test::manufactured_family(rng, 2 + trial % 4, a, b);
        const DetectionResult r = detect(f, {-1, 1, -1, 1});
        CAPTURE(trial);
        REQUIRE(r.points.size() == 1);
        CHECK(std::hypot(r.points[0].location.x - a, r.points[0].location.y - b) < 1e-8);
        CHECK(std::hypot(r.points[0].unpolished.x - a, r.points[0].unpolished.y - b) < 1e-3);
    }
}
