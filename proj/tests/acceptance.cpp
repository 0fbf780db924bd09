// One PASS/FAIL line per acceptance criterion; exit status is the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "jmvd/continuation.hpp"
#include "jmvd/detector.hpp"
#include "jmvd/embedding.hpp"
#include "jmvd/errors.hpp"
#include "jmvd/phase.hpp"
#include "support.hpp"

using namespace jmvd;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// Every joint trace produced by the suite, for the U/V endpoint check.
double g_uv_worst = 0.0;
int g_joint_traces = 0;

PhaseReport joint_report(const ContinuationTrace& t) {
    const PhaseReport r = accrued_phases(t);
    g_uv_worst = std::max(g_uv_worst, r.uv_mismatch);
    ++g_joint_traces;
    return r;
}

MatrixFamily triangular() { return load_family(test::data_path("triangular_2x2.json")); }

Outcome closed_form() {
    const MatrixFamily f = triangular();
    double worst = 0.0;
    double slowest = 0.0;
    for (double r : {0.25, 0.5, 1.0, 2.0}) {
        const auto t0 = std::chrono::steady_clock::now();
        const PhaseReport rep = joint_report(continue_loop(f, PathLoop::circle({0, 0}, r, 2048), Gauge::Joint));
        slowest = std::max(slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        const double b1 = test::triangular_beta1(r);
        worst = std::max({worst, std::abs(rep.beta[0] - b1), std::abs(rep.beta[1] - (kPi - b1))});
    }
    return {worst <= 1e-6 && slowest < 5.0,
            fmt("max |beta - closed form| = %.2e", worst) + fmt(", slowest radius %.3f s", slowest)};
}

Outcome gauge_contrast() {
    const MatrixFamily f = triangular();
    double u_err = 0.0;
    double v_max = 0.0;
    for (double r : {0.25, 0.5, 1.0, 2.0}) {
        const PathLoop loop = PathLoop::circle({0, 0}, r, 2048);
        const PhaseReport u = accrued_phases(continue_loop(f, loop, Gauge::UMvd));
        const double a1 = 2.0 * test::triangular_beta1(r);
        u_err = std::max({u_err, test::angle_distance(u.beta[0], a1), test::angle_distance(u.beta[1], -u.beta[0])});
        const PhaseReport v = accrued_phases(continue_loop(f, loop, Gauge::VMvd));
        for (double b : v.beta) v_max = std::max(v_max, std::abs(b));
    }
    return {u_err <= 1e-6 && v_max <= 1e-6, fmt("umvd error %.2e", u_err) + fmt(", vmvd max |phase| %.2e", v_max)};
}

Outcome affine_sums() {
    const MatrixFamily f = load_family(test::data_path("affine_4x4.json"));
    const DetectionResult d = detect(f, {-1, 1, -1, 1});
    if (d.points.size() != 1) return {false, std::to_string(d.points.size()) + " points detected"};
    const Point2 p = d.points[0].location;
    const PhaseReport in = joint_report(continue_loop(f, PathLoop::circle(p, 0.3, 2048), Gauge::Joint));
    const PhaseReport out = joint_report(continue_loop(f, PathLoop::circle({0.6, -0.6}, 0.2, 2048), Gauge::Joint));
    const std::string s_in = format_phase(in.sum_mod_2pi);
    const std::string s_out = format_phase(out.sum_mod_2pi);
    return {s_in == "+3.1416" && s_out == "+0.0000" && in.classification == LoopClass::RankLossInside &&
                out.classification == LoopClass::NoRankLoss,
            fmt("1 point at (%.6f, ", p.x) + fmt("%.6f); enclosing sum ", p.y) + s_in + ", disjoint sum " + s_out};
}

Outcome embedding_identities() {
    std::mt19937_64 rng(20240501);
    std::uniform_int_distribution<int> size(1, 8);
    std::uniform_real_distribution<double> ue(-2.0, 2.0);
    double eig_err = 0.0, diag_err = 0.0, discr_err = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        const int n = size(rng);
        const Matrix A = test::random_matrix(rng, n);
        const double eps = ue(rng);
        const SvdTriple T = svd_point(A);
        const Matrix M = build_M(A, eps);
        const HermEig ref = herm_eig(M);
        const EmbeddingEig E = eigendec_M(T, eps);
        RealVector lam(2 * n);
        for (int j = 0; j < n; ++j) {
            const double s = std::sqrt(T.sigma[j] * T.sigma[j] + eps * eps);
            eig_err = std::max({eig_err, std::abs(ref.lambda[j] - s), std::abs(ref.lambda[2 * n - 1 - j] + s)});
        }
        Matrix S = Matrix::Zero(2 * n, 2 * n);
        for (int j = 0; j < n; ++j) {
            S(j, j) = E.S[j];
            S(n + j, n + j) = -E.S[j];
        }
        diag_err = std::max(diag_err, (E.W.adjoint() * M * E.W - S).norm() / M.norm());
        const double dref = discriminant(ref.lambda);
        discr_err = std::max(discr_err, std::abs(discr_M(T.sigma, eps) - dref) / std::abs(dref));
    }
    return {eig_err <= 1e-10 && diag_err <= 1e-10 && discr_err <= 1e-8,
            fmt("eigenvalue %.2e", eig_err) + fmt(", diagonalization %.2e", diag_err) +
                fmt(", discriminant rel %.2e", discr_err)};
}

Outcome quantization() {
    std::mt19937_64 rng(777);
    std::uniform_real_distribution<double> u(-0.8, 0.8);
    std::uniform_real_distribution<double> ur(0.1, 0.6);
    int loops = 0, unhealthy = 0, misclassified = 0, located = 0;
    double worst_residual = 0.0, worst_raw = 0.0, worst_polished = 0.0;
    for (int fam = 0; fam < 50; ++fam) {
        const int n = 2 + fam % 5;
        const double a = u(rng);
        const double b = u(rng);
        const MatrixFamily f = test::manufactured_family(rng, n, a, b);

        std::vector<std::pair<Point2, double>> circles = {{{a, b}, 0.3}};
        for (int k = 0; k < 4; ++k) circles.push_back({{u(rng), u(rng)}, ur(rng)});
        for (const auto& [c, r] : circles) {
            const bool inside = std::hypot(c.x - a, c.y - b) < r;
            try {
                const PhaseReport rep = joint_report(continue_loop(f, PathLoop::circle(c, r, 512), Gauge::Joint));
                ++loops;
                worst_residual = std::max(worst_residual, rep.residual);
                const LoopClass expect = inside ? LoopClass::RankLossInside : LoopClass::NoRankLoss;
                if (rep.classification != expect) ++misclassified;
            } catch (const ContinuationFailed&) {
                ++unhealthy;
            }
        }

        const DetectionResult d = detect(f, {-1, 1, -1, 1});
        if (d.points.size() == 1) {
            ++located;
            const DetectedPoint& p = d.points[0];
            worst_raw = std::max(worst_raw, std::hypot(p.unpolished.x - a, p.unpolished.y - b));
            worst_polished = std::max(worst_polished, std::hypot(p.location.x - a, p.location.y - b));
        }
    }
    return {misclassified == 0 && worst_residual <= 1e-3 && located == 50 && worst_raw <= 1e-3 &&
                worst_polished <= 1e-8,
            std::to_string(loops) + " healthy loops (" + std::to_string(unhealthy) + " skipped), " +
                std::to_string(misclassified) + " misclassified" + fmt(", max residual %.2e; ", worst_residual) +
                std::to_string(located) + "/50 located" + fmt(", raw %.2e", worst_raw) +
                fmt(", polished %.2e", worst_polished)};
}

Outcome genericity_equivalence() {
    const auto planar = planar_directions(16);
    const auto spatial = spatial_directions(16);
    const auto steps = default_probe_steps();
    const MatrixFamily tri = triangular();
    const MatrixFamily sq = load_family(test::data_path("squared_2x2.json"));

    const bool tri_g = genericity_det(tri, {0, 0}).regular;
    const ProbeVerdict tri_s = sigma_limit_probe(tri, {0, 0}, planar, steps).verdict;
    const ProbeVerdict tri_d = discr_limit_probe(tri, {0, 0}, spatial, steps).verdict;
    const bool sq_g = genericity_det(sq, {0, 0}).regular;
    const ProbeVerdict sq_s = sigma_limit_probe(sq, {0, 0}, planar, steps).verdict;
    const ProbeVerdict sq_d = discr_limit_probe(sq, {0, 0}, spatial, steps).verdict;

    const bool ok = tri_g && tri_s == ProbeVerdict::Positive && tri_d == ProbeVerdict::Positive && !sq_g &&
                    sq_s == ProbeVerdict::Degenerate && sq_d == ProbeVerdict::Degenerate;
    return {ok, std::string("triangular: ") + (tri_g ? "regular/" : "singular/") + to_string(tri_s) + "/" +
                    to_string(tri_d) + "; squared: " + (sq_g ? "regular/" : "singular/") + to_string(sq_s) + "/" +
                    to_string(sq_d)};
}

Outcome stepper_cross_check() {
    const MatrixFamily f = triangular();
    const PathLoop loop = PathLoop::circle({0, 0}, 1.0, 2048);
    const PhaseReport disc = joint_report(continue_loop(f, loop, Gauge::Joint));
    const PhaseReport dae = joint_report(integrate_dae(f, loop, Gauge::Joint, 4000));
    double worst = 0.0;
    for (int j = 0; j < 2; ++j) worst = std::max(worst, test::angle_distance(disc.beta[j], dae.beta[j]));
    return {worst <= 1e-4, fmt("max phase difference %.2e", worst)};
}

Outcome gauge_consistency() {
    return {g_joint_traces > 0 && g_uv_worst <= 1e-8,
            std::to_string(g_joint_traces) + fmt(" joint traces, max endpoint mismatch %.2e", g_uv_worst)};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"triangular closed-form phases", closed_form},
        {"triangular gauge contrast", gauge_contrast},
        {"4x4 affine phase sums", affine_sums},
        {"embedding identities", embedding_identities},
        {"quantization on manufactured families", quantization},
        {"genericity equivalence", genericity_equivalence},
        {"stepper cross-check", stepper_cross_check},
        // Last, so that it covers every joint trace above.
        {"joint gauge U/V endpoint consistency", gauge_consistency},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::printf("%s  %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    }
    return failures;
}
