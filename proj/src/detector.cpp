#include "jmvd/detector.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>
#include <json.hpp>

#include "jmvd/errors.hpp"

namespace jmvd {

LoopTestResult loop_test(const MatrixFamily& f, const Box& box, const DetectOptions& opts) {
    LoopTestResult result;
    Box current = box;
    for (int attempt = 0; attempt <= opts.inflate_retries; ++attempt) {
        result.box_used = current;
        result.retries = attempt;
        try {
            LoopMeasurement m = measure_loop(f, PathLoop::rectangle(current, opts.loop_samples), Gauge::Joint,
                                             opts.continuation, opts.phase);
            result.report = std::move(m.report);
            result.classification = result.report.classification;
            if (result.classification == LoopClass::Inconclusive) result.reason = result.report.note;
            return result;
        } catch (const ContinuationFailed& e) {
            result.reason = e.what();
            current = current.inflated(opts.inflate_factor);
        }
    }
    result.classification = LoopClass::Inconclusive;
    result.reason = "continuation failed on the boundary after inflation: " + result.reason;
    return result;
}

NewtonResult polish_root(const MatrixFamily& f, Point2 start, double det_tol, int max_iters) {
    NewtonResult r{start, std::abs(det(eval_family(f, start))), 0, false};
    for (; r.iterations < max_iters; ++r.iterations) {
        if (r.absdet <= det_tol) {
            r.converged = true;
            return r;
        }
        const Complex F = det(eval_family(f, r.location));
        const Eigen::Matrix2d J = genericity_det(f, r.location).jacobian;
        Eigen::FullPivLU<Eigen::Matrix2d> lu(J);
        if (!lu.isInvertible()) break;
        const Eigen::Vector2d step = lu.solve(Eigen::Vector2d(-F.real(), -F.imag()));

        double lambda = 1.0;
        Point2 trial{};
        double trial_abs = 0.0;
        for (int halving = 0; halving < 30; ++halving, lambda *= 0.5) {
            trial = {r.location.x + lambda * step[0], r.location.y + lambda * step[1]};
            trial_abs = std::abs(det(eval_family(f, trial)));
            if (trial_abs < r.absdet) break;
        }
        if (!(trial_abs < r.absdet)) break;
        r.location = trial;
        r.absdet = trial_abs;
    }
    r.converged = r.absdet <= det_tol;
    return r;
}

namespace {

std::vector<Box> split(const Box& b) {
    const Point2 c = b.center();
    return {{b.xmin, c.x, b.ymin, c.y}, {c.x, b.xmax, b.ymin, c.y}, {b.xmin, c.x, c.y, b.ymax}, {c.x, b.xmax, c.y, b.ymax}};
}

double dist(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

DetectionResult detect(const MatrixFamily& f, const Box& box, const DetectOptions& opts) {
    if (!(box.xmax > box.xmin) || !(box.ymax > box.ymin)) throw DomainError("detect: degenerate box");
    DetectionResult result;

    std::vector<Box> stack;
    const int d = std::max(1, opts.initial_divisions);
    for (int iy = d - 1; iy >= 0; --iy) {
        for (int ix = d - 1; ix >= 0; --ix) {
            stack.push_back({box.xmin + box.width() * ix / d, ix + 1 == d ? box.xmax : box.xmin + box.width() * (ix + 1) / d,
                             box.ymin + box.height() * iy / d, iy + 1 == d ? box.ymax : box.ymin + box.height() * (iy + 1) / d});
        }
    }

    while (!stack.empty()) {
        if (result.cells_tested >= opts.max_cells) {
            result.budget_exhausted = true;
            break;
        }
        const Box cell = stack.back();
        stack.pop_back();
        ++result.cells_tested;

        const LoopTestResult test = loop_test(f, cell, opts);
        if (test.classification == LoopClass::NoRankLoss) continue;
        if (test.classification == LoopClass::Inconclusive) {
            result.inconclusive.push_back({cell, test.reason});
            continue;
        }
        if (cell.diameter() > opts.loc_tol) {
            auto children = split(cell);
            for (auto it = children.rbegin(); it != children.rend(); ++it) stack.push_back(*it);
            continue;
        }

        const Point2 center = cell.center();
        const Matrix A = eval_family(f, center);
        const double det_tol = opts.det_tol_rel * std::pow(std::max(1.0, A.norm()), f.size());
        const NewtonResult polished = polish_root(f, center, det_tol, opts.newton_iters);
        if (!polished.converged) {
            result.inconclusive.push_back({cell, "Newton polish did not reach the determinant tolerance"});
            continue;
        }
        Box reported = cell;
        if (!cell.contains(polished.location)) {
            const double slack = opts.loc_tol;
            if (!test.box_used.inflated(1.0 + slack / std::max(cell.width(), cell.height())).contains(polished.location)) {
                result.inconclusive.push_back({cell, "Newton polish left the cell"});
                continue;
            }
            reported.xmin = std::min(reported.xmin, polished.location.x);
            reported.xmax = std::max(reported.xmax, polished.location.x);
            reported.ymin = std::min(reported.ymin, polished.location.y);
            reported.ymax = std::max(reported.ymax, polished.location.y);
        }
        const bool duplicate = std::any_of(result.points.begin(), result.points.end(), [&](const DetectedPoint& p) {
            return dist(p.location, polished.location) <= opts.loc_tol;
        });
        if (duplicate) continue;
        result.points.push_back(
            {polished.location, reported, polished.absdet, det_tol, center, genericity_det(f, polished.location)});
    }
    return result;
}

std::string detection_json(const DetectionResult& result) {
    using nlohmann::json;
    json points = json::array();
    for (const auto& p : result.points) {
        points.push_back({{"xy", {p.location.x, p.location.y}},
                          {"absdet", p.polish_residual},
                          {"det_tol", p.det_tol},
                          {"generic", p.genericity.regular},
                          {"jacobian_min_sv", p.genericity.min_singular_value},
                          {"box", {p.box.xmin, p.box.xmax, p.box.ymin, p.box.ymax}},
                          {"cell_center", {p.unpolished.x, p.unpolished.y}}});
    }
    json inconclusive = json::array();
    for (const auto& c : result.inconclusive) {
        inconclusive.push_back({{"box", {c.box.xmin, c.box.xmax, c.box.ymin, c.box.ymax}}, {"reason", c.reason}});
    }
    return json{{"points", std::move(points)},
                {"inconclusive", std::move(inconclusive)},
                {"cells_tested", result.cells_tested},
                {"budget_exhausted", result.budget_exhausted}}
        .dump(2);
}

}  // namespace jmvd
