#pragma once

#include <string>
#include <vector>

#include "jmvd/embedding.hpp"
#include "jmvd/model.hpp"
#include "jmvd/phase.hpp"

namespace jmvd {

struct DetectOptions {
    double loc_tol = 1e-3;        // stop subdividing once the cell diameter is below this
    double det_tol_rel = 1e-10;   // Newton target |det| <= det_tol_rel * max(1, ||A||_F)^n
    int max_cells = 4096;
    int initial_divisions = 1;    // the box is first cut into d x d cells
    int loop_samples = 128;
    int newton_iters = 50;
    int inflate_retries = 3;
    double inflate_factor = 1.1;
    ContinuationOptions continuation;
    PhaseOptions phase;
};

struct LoopTestResult {
    LoopClass classification = LoopClass::Inconclusive;
    PhaseReport report;
    Box box_used;
    int retries = 0;
    std::string reason;
};

/// Joint-gauge phase test around the boundary of `box`. When continuation fails on the
/// boundary the box is inflated about its center and retried.
LoopTestResult loop_test(const MatrixFamily& f, const Box& box, const DetectOptions& opts = {});

struct DetectedPoint {
    Point2 location;
    Box box;
    double polish_residual = 0.0;  // |det A(location)|
    double det_tol = 0.0;
    Point2 unpolished;             // center of the final cell
    GenericityReport genericity;
};

struct InconclusiveCell {
    Box box;
    std::string reason;
};

struct DetectionResult {
    std::vector<DetectedPoint> points;
    std::vector<InconclusiveCell> inconclusive;
    int cells_tested = 0;
    bool budget_exhausted = false;
};

struct NewtonResult {
    Point2 location;
    double absdet = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Damped Newton on (Re det, Im det) with the finite-difference Jacobian.
NewtonResult polish_root(const MatrixFamily& f, Point2 start, double det_tol, int max_iters = 50);

/// Quadtree subdivision driven by loop_test, then Newton polish of each leaf.
/// Cells are visited depth-first in (SW, SE, NW, NE) order, so results are deterministic.
DetectionResult detect(const MatrixFamily& f, const Box& box, const DetectOptions& opts = {});

/// {"points":[{"xy":[x,y],"absdet":...,"generic":true,...}],"inconclusive":[...],...}
std::string detection_json(const DetectionResult& result);

}  // namespace jmvd
