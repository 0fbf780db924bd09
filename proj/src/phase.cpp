#include "jmvd/phase.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "jmvd/errors.hpp"

namespace jmvd {

namespace {
constexpr double kPi = std::numbers::pi;
}

std::string to_string(LoopClass c) {
    switch (c) {
        case LoopClass::RankLossInside: return "RANK_LOSS_INSIDE";
        case LoopClass::NoRankLoss: return "NO_RANK_LOSS";
        case LoopClass::Inconclusive: return "INCONCLUSIVE";
    }
    return "INCONCLUSIVE";
}

double wrap_angle(double a) {
    double r = std::remainder(a, 2.0 * kPi);  // [-pi, pi]
    if (r <= -kPi) r += 2.0 * kPi;
    return r;
}

LoopClass classify(double sum_mod_2pi, double class_tol) {
    const double s = wrap_angle(sum_mod_2pi);
    if (kPi - std::abs(s) <= class_tol) return LoopClass::RankLossInside;
    if (std::abs(s) <= class_tol) return LoopClass::NoRankLoss;
    return LoopClass::Inconclusive;
}

LoopClass classify(const PhaseReport& report, double class_tol) {
    if (report.gauge != Gauge::Joint) return LoopClass::Inconclusive;
    return classify(report.sum_mod_2pi, class_tol);
}

double unwrapped_phase(const ContinuationTrace& trace, int column) {
    if (!trace.closed) throw ContractError("unwrapped_phase: trace is not closed");
    const auto& steps = trace.steps;
    if (column < 0 || column >= steps.front().svd.size()) throw DimensionError("unwrapped_phase: bad column");
    double dynamic = 0.0;
    for (std::size_t k = 0; k + 1 < steps.size(); ++k) {
        const double inc = std::arg(steps[k].svd.U.col(column).dot(steps[k + 1].svd.U.col(column)));
        if (std::abs(inc) >= 0.5 * kPi) {
            throw RefinementNeeded("phase increment " + std::to_string(inc) + " at step " + std::to_string(k) +
                                   " is too large to unwrap");
        }
        dynamic += inc;
    }
    const double total = std::arg(steps.front().svd.U.col(column).dot(steps.back().svd.U.col(column)));
    return dynamic + wrap_angle(total - dynamic);
}

PhaseReport accrued_phases(const ContinuationTrace& trace, const PhaseOptions& opts) {
    if (!trace.closed || trace.steps.size() < 2) throw ContractError("accrued_phases: trace is not closed");
    const SvdTriple& first = trace.steps.front().svd;
    const SvdTriple& last = trace.steps.back().svd;
    const int n = first.size();

    const Matrix P = first.U.adjoint() * last.U;
    const Matrix Q = first.V.adjoint() * last.V;

    PhaseReport r;
    r.gauge = trace.gauge;
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
        const double b = wrap_angle(std::arg(P(j, j)));
        r.beta.push_back(b);
        sum += b;
        r.uv_mismatch = std::max(r.uv_mismatch, std::abs(P(j, j) - Q(j, j)));
        for (int l = 0; l < n; ++l) {
            if (l != j) r.offdiag_max = std::max({r.offdiag_max, std::abs(P(j, l)), std::abs(Q(j, l))});
        }
        try {
            r.beta_unwrapped.push_back(unwrapped_phase(trace, j));
        } catch (const RefinementNeeded&) {
            r.beta_unwrapped.push_back(std::numeric_limits<double>::quiet_NaN());
        }
    }
    r.sum_mod_2pi = wrap_angle(sum);
    r.residual = std::min(std::abs(r.sum_mod_2pi), kPi - std::abs(r.sum_mod_2pi));

    if (trace.gauge != Gauge::Joint) {
        r.classification = LoopClass::Inconclusive;
        r.note = "only joint-gauge traces are classified";
    } else if (r.offdiag_max > opts.offdiag_tol) {
        r.classification = LoopClass::Inconclusive;
        r.note = "end frame is not a rephasing of the start frame";
    } else if (r.uv_mismatch > opts.uv_tol) {
        r.classification = LoopClass::Inconclusive;
        r.note = "left and right end-point phases disagree";
    } else {
        r.classification = classify(r.sum_mod_2pi, opts.class_tol);
    }
    return r;
}

LoopMeasurement measure_loop(const MatrixFamily& f, const PathLoop& loop, Gauge gauge,
                             const ContinuationOptions& copts, const PhaseOptions& popts, int refinements) {
    PathLoop current = loop;
    ContinuationOptions opts = copts;
    for (int round = 0;; ++round) {
        ContinuationTrace trace = continue_loop(f, current, gauge, opts);
        PhaseReport report = accrued_phases(trace, popts);
        const bool retry = gauge == Gauge::Joint && report.classification == LoopClass::Inconclusive;
        if (!retry || round >= refinements) return {std::move(trace), std::move(report), current.samples};
        current.samples *= 2;
        opts.dt_max *= 0.5;
    }
}

std::string format_phase(double value) {
    double rounded = std::round(value * 1e4) / 1e4;
    if (rounded == 0.0) rounded = 0.0;  // drops the sign of -0
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%+.4f", rounded);
    std::string s = buf;
    if (s == "-3.1416") s = "+3.1416";
    return s;
}

std::string report_json(const PhaseReport& report, const ContinuationTrace* trace) {
    using nlohmann::json;
    json unwrapped = json::array();
    for (double b : report.beta_unwrapped) {
        if (std::isnan(b)) {
            unwrapped.push_back(nullptr);
        } else {
            unwrapped.push_back(b);
        }
    }
    json diag = {{"gauge", to_string(report.gauge)},
                 {"residual", report.residual},
                 {"offdiag_max", report.offdiag_max},
                 {"uv_mismatch", report.uv_mismatch}};
    if (!report.note.empty()) diag["note"] = report.note;
    if (trace != nullptr) {
        double min_gap_seen = std::numeric_limits<double>::infinity();
        double min_sigma_seen = std::numeric_limits<double>::infinity();
        double min_corr_seen = 1.0;
        double max_residual = 0.0;
        for (const auto& d : trace->diagnostics) {
            min_gap_seen = std::min(min_gap_seen, d.min_gap);
            min_sigma_seen = std::min(min_sigma_seen, d.sigma_min);
            min_corr_seen = std::min(min_corr_seen, d.min_corr);
            max_residual = std::max(max_residual, d.gauge_residual);
        }
        diag["steps"] = trace->steps.size() - 1;
        diag["rejected_steps"] = trace->rejected;
        diag["min_gap"] = min_gap_seen;
        diag["min_sigma"] = min_sigma_seen;
        diag["min_corr"] = min_corr_seen;
        diag["max_gauge_residual"] = max_residual;
    }
    json doc = {{"beta", report.beta},
                {"beta_unwrapped", std::move(unwrapped)},
                {"sum_mod_2pi", report.sum_mod_2pi},
                {"classification", to_string(report.classification)},
                {"diagnostics", std::move(diag)}};
    return doc.dump(2);
}

std::string report_table(const PhaseReport& report) {
    std::ostringstream out;
    for (std::size_t j = 0; j < report.beta.size(); ++j) {
        out << "beta_" << (j + 1) << "  " << format_phase(report.beta[j]) << '\n';
    }
    out << "sum     " << format_phase(report.sum_mod_2pi) << '\n';
    out << "class   " << to_string(report.classification) << '\n';
    return out.str();
}

}  // namespace jmvd
