#pragma once

#include <string>
#include <vector>

#include "jmvd/continuation.hpp"

namespace jmvd {

enum class LoopClass { RankLossInside, NoRankLoss, Inconclusive };

std::string to_string(LoopClass c);

struct PhaseOptions {
    double class_tol = 0.3;     // radians around 0 or pi
    double offdiag_tol = 1e-6;  // U(0)^* U(1) must be diagonal to this level
    double uv_tol = 1e-8;       // |diag U(0)^* U(1) - diag V(0)^* V(1)|
};

struct PhaseReport {
    Gauge gauge = Gauge::Joint;
    std::vector<double> beta;            // (-pi, pi]
    std::vector<double> beta_unwrapped;  // NaN when a step was too coarse to unwrap
    double sum_mod_2pi = 0.0;            // (-pi, pi]
    LoopClass classification = LoopClass::Inconclusive;
    double residual = 0.0;               // distance of the sum to {0, pi}
    double offdiag_max = 0.0;
    double uv_mismatch = 0.0;
    std::string note;                    // why a report was demoted, if it was
};

/// Reduces an angle to (-pi, pi].
double wrap_angle(double a);

/// Rank loss iff the sum is within tol of pi, none iff within tol of 0, else inconclusive.
LoopClass classify(double sum_mod_2pi, double class_tol);
LoopClass classify(const PhaseReport& report, double class_tol);

/// Phases of diag(U(0)^* U(end)). Only joint-gauge traces are classified; others are
/// reported as inconclusive. Throws ContractError for an open trace.
PhaseReport accrued_phases(const ContinuationTrace& trace, const PhaseOptions& opts = {});

/// Sum of the per-step phase increments arg(u_j(t_k)^* u_j(t_{k+1})) plus the closing
/// correction against the start frame, reduced to (-pi, pi]. Congruent to beta_j mod 2 pi
/// but keeps the winding of the per-step increments. Throws RefinementNeeded if any
/// increment reaches pi/2.
double unwrapped_phase(const ContinuationTrace& trace, int column);

struct LoopMeasurement {
    ContinuationTrace trace;
    PhaseReport report;
    int samples_used = 0;
};

/// continue_loop + accrued_phases; an inconclusive joint-gauge result is retried with
/// twice the samples, up to `refinements` times.
LoopMeasurement measure_loop(const MatrixFamily& f, const PathLoop& loop, Gauge gauge,
                             const ContinuationOptions& copts = {}, const PhaseOptions& popts = {},
                             int refinements = 3);

/// "%+.4f" with -0.0000 printed as +0.0000 and -3.1416 as +3.1416 (the branch is (-pi, pi]).
std::string format_phase(double value);

/// {"beta":[...], "beta_unwrapped":[...], "sum_mod_2pi": s, "classification": "...", "diagnostics": {...}}
std::string report_json(const PhaseReport& report, const ContinuationTrace* trace = nullptr);

/// Human-readable beta table with the sum, four decimals.
std::string report_table(const PhaseReport& report);

}  // namespace jmvd
