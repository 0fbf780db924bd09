#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "jmvd/linalg.hpp"
#include "jmvd/model.hpp"

namespace jmvd {

/// Diagonal gauge of a smooth SVD path.
///   Joint: H_jj + K_jj = 0   (joint minimum variation)
///   UMvd:  H_jj = 0          (minimum variation of U)
///   VMvd:  K_jj = 0          (minimum variation of V)
enum class Gauge { Joint, UMvd, VMvd };

std::string to_string(Gauge g);
/// Accepts "joint", "umvd", "vmvd" (case-sensitive); DomainError otherwise.
Gauge parse_gauge(const std::string& name);

struct ContinuationOptions {
    double corr_min = 0.99;     // per-column overlap floor between consecutive frames
    double corr_grow = 0.999;   // grow the step only when every overlap is at least this
    double growth = 1.25;
    double dt_max = 1.0 / 64.0; // further capped by 1 / loop.samples
    double dt_min = 1e-9;
    double gap_min = 1e-8;
    double sig_min = 1e-10;
};

/// Per accepted step.
struct StepDiagnostics {
    double min_gap = 0.0;
    double sigma_min = 0.0;
    double min_corr = 1.0;
    double dt = 0.0;
    double gauge_residual = 0.0;
};

struct TraceSample {
    double t = 0.0;
    Point2 point;
    SvdTriple svd;
};

struct ContinuationTrace {
    Gauge gauge = Gauge::Joint;
    std::vector<TraceSample> steps;
    std::vector<StepDiagnostics> diagnostics;  // diagnostics[k] describes steps[k-1] -> steps[k]; [0] is the start
    bool closed = false;
    int rejected = 0;
};

/// Skew-Hermitian generators of U' = U H, V' = V K.
struct HKPair {
    Matrix H;
    Matrix K;
};

/// Off-diagonal entries from the smooth-SVD DAE with W = U^* A' V:
///   H_jl = (s_l W_jl + s_j conj(W_lj)) / (s_l^2 - s_j^2)
///   K_jl = (s_j W_jl + s_l conj(W_lj)) / (s_l^2 - s_j^2)
/// Diagonals satisfy H_jj - K_jj = i Im(W_jj) / s_j, split according to the gauge.
/// Throws NearDegenerate if a gap is below gap_min or sigma_n below sig_min.
HKPair hk_from_derivative(const SvdTriple& T, const Matrix& Adot, Gauge gauge, double gap_min = 1e-8,
                          double sig_min = 1e-10);

/// Rephases the columns of `fresh` so the gauge-defining overlap with `prev` is real
/// and nonnegative (joint: u^*u' + v^*v'; U: u^*u'; V: v^*v').
/// Throws StepTooLarge if any column overlap magnitude is below corr_min.
SvdTriple align_step(const SvdTriple& prev, const SvdTriple& fresh, Gauge gauge, double corr_min = 0.99);

/// Smallest |u_prev^* u_fresh| or |v_prev^* v_fresh| over all columns.
double min_column_overlap(const SvdTriple& prev, const SvdTriple& fresh);

/// The gauge-defining overlap of column j after alignment.
Complex gauge_overlap(const SvdTriple& prev, const SvdTriple& next, Gauge gauge, int j);

/// Variable-step discrete continuation along a closed loop, starting from svd_point(A(gamma(0))).
/// The t = 1 sample is aligned to its predecessor only; the holonomy is kept.
/// Throws ContinuationFailed when the step size underflows.
ContinuationTrace continue_loop(const MatrixFamily& f, const PathLoop& loop, Gauge gauge,
                                const ContinuationOptions& opts = {});

/// Same as continue_loop but starting from an explicit frame at gamma(0).
ContinuationTrace continue_loop_from(const MatrixFamily& f, const PathLoop& loop, Gauge gauge,
                                     const SvdTriple& start, const ContinuationOptions& opts = {});

/// Fixed-step RK4 integration of U' = U H, V' = V K, sigma' = Re diag(W) with polar
/// re-unitarization after every step. Cross-check oracle for continue_loop.
ContinuationTrace integrate_dae(const MatrixFamily& f, const PathLoop& loop, Gauge gauge, int steps,
                                const ContinuationOptions& opts = {});

/// CSV: t,x,y,sigma_1..sigma_n
void write_trace_csv(const ContinuationTrace& trace, std::ostream& out);

/// Binary sidecar, little-endian. Header: "JMVDTRC1", int32 n, int32 gauge, int32 closed, int64 count.
/// Each sample: float64 t, x, y, sigma[n], then U and V as n*n row-major (re, im) pairs.
void write_trace_binary(const ContinuationTrace& trace, std::ostream& out);
ContinuationTrace read_trace_binary(std::istream& in);

}  // namespace jmvd
