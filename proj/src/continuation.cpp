#include "jmvd/continuation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <iomanip>

#include "jmvd/errors.hpp"

namespace jmvd {

std::string to_string(Gauge g) {
    switch (g) {
        case Gauge::Joint: return "joint";
        case Gauge::UMvd: return "umvd";
        case Gauge::VMvd: return "vmvd";
    }
    return "unknown";
}

Gauge parse_gauge(const std::string& name) {
    if (name == "joint") return Gauge::Joint;
    if (name == "umvd") return Gauge::UMvd;
    if (name == "vmvd") return Gauge::VMvd;
    throw DomainError("unknown gauge '" + name + "' (expected joint|umvd|vmvd)");
}

namespace {

void check_separation(const RealVector& sigma, double gap_min, double sig_min) {
    const int n = static_cast<int>(sigma.size());
    for (int j = 0; j + 1 < n; ++j) {
        if (sigma[j] - sigma[j + 1] < gap_min) {
            throw NearDegenerate(j, j + 1, "singular values " + std::to_string(j + 1) + " and " +
                                               std::to_string(j + 2) + " nearly coalesce");
        }
    }
    if (sigma[n - 1] < sig_min) {
        throw NearDegenerate(n - 1, n - 1, "smallest singular value nearly vanishes");
    }
}

double gauge_residual(const SvdTriple& prev, const SvdTriple& next, Gauge gauge) {
    double worst = 0.0;
    for (int j = 0; j < prev.size(); ++j) {
        const Complex z = gauge_overlap(prev, next, gauge, j);
        worst = std::max(worst, std::abs(z.imag()));
        if (z.real() < 0.0) worst = std::max(worst, -z.real());
    }
    return worst;
}

}  // namespace

HKPair hk_from_derivative(const SvdTriple& T, const Matrix& Adot, Gauge gauge, double gap_min, double sig_min) {
    const int n = T.size();
    if (Adot.rows() != n || Adot.cols() != n) throw DimensionError("hk_from_derivative: size mismatch");
    check_separation(T.sigma, gap_min, sig_min);

    const Matrix W = T.U.adjoint() * Adot * T.V;
    HKPair hk{Matrix::Zero(n, n), Matrix::Zero(n, n)};
    for (int j = 0; j < n; ++j) {
        for (int l = 0; l < n; ++l) {
            if (j == l) continue;
            const double sj = T.sigma[j];
            const double sl = T.sigma[l];
            const double denom = sl * sl - sj * sj;
            hk.H(j, l) = (sl * W(j, l) + sj * std::conj(W(l, j))) / denom;
            hk.K(j, l) = (sj * W(j, l) + sl * std::conj(W(l, j))) / denom;
        }
        const double m = W(j, j).imag() / T.sigma[j];
        switch (gauge) {
            case Gauge::Joint:
                hk.H(j, j) = Complex(0.0, 0.5 * m);
                hk.K(j, j) = Complex(0.0, -0.5 * m);
                break;
            case Gauge::UMvd:
                hk.K(j, j) = Complex(0.0, -m);
                break;
            case Gauge::VMvd:
                hk.H(j, j) = Complex(0.0, m);
                break;
        }
    }
    return hk;
}

Complex gauge_overlap(const SvdTriple& prev, const SvdTriple& next, Gauge gauge, int j) {
    const Complex a = prev.U.col(j).dot(next.U.col(j));
    const Complex b = prev.V.col(j).dot(next.V.col(j));
    switch (gauge) {
        case Gauge::Joint: return a + b;
        case Gauge::UMvd: return a;
        case Gauge::VMvd: return b;
    }
    return a + b;
}

double min_column_overlap(const SvdTriple& prev, const SvdTriple& fresh) {
    double worst = 1.0;
    for (int j = 0; j < prev.size(); ++j) {
        worst = std::min(worst, std::abs(prev.U.col(j).dot(fresh.U.col(j))));
        worst = std::min(worst, std::abs(prev.V.col(j).dot(fresh.V.col(j))));
    }
    return worst;
}

SvdTriple align_step(const SvdTriple& prev, const SvdTriple& fresh, Gauge gauge, double corr_min) {
    if (prev.size() != fresh.size()) throw DimensionError("align_step: size mismatch");
    SvdTriple out = fresh;
    for (int j = 0; j < prev.size(); ++j) {
        const Complex a = prev.U.col(j).dot(fresh.U.col(j));
        const Complex b = prev.V.col(j).dot(fresh.V.col(j));
        if (std::abs(a) < corr_min) throw StepTooLarge(j, std::abs(a), "left singular vector overlap too small");
        if (std::abs(b) < corr_min) throw StepTooLarge(j, std::abs(b), "right singular vector overlap too small");
        const Complex z = gauge_overlap(prev, fresh, gauge, j);
        // a + b can cancel even when both overlaps are large; never pick a default phase.
        if (std::abs(z) < corr_min) throw StepTooLarge(j, std::abs(z), "gauge overlap too small");
        const Complex rot = std::conj(z) / std::abs(z);
        out.U.col(j) *= rot;
        out.V.col(j) *= rot;
    }
    return out;
}

ContinuationTrace continue_loop(const MatrixFamily& f, const PathLoop& loop, Gauge gauge,
                                const ContinuationOptions& opts) {
    const SvdTriple start = svd_point(eval_family(f, loop_point(loop, 0.0).point));
    return continue_loop_from(f, loop, gauge, start, opts);
}

ContinuationTrace continue_loop_from(const MatrixFamily& f, const PathLoop& loop, Gauge gauge,
                                     const SvdTriple& start, const ContinuationOptions& opts) {
    try {
        check_separation(start.sigma, opts.gap_min, opts.sig_min);
    } catch (const NearDegenerate& e) {
        throw ContinuationFailed(0.0, std::string("start point: ") + e.what());
    }

    ContinuationTrace trace;
    trace.gauge = gauge;
    const Point2 p0 = loop_point(loop, 0.0).point;
    trace.steps.push_back({0.0, p0, start});
    trace.diagnostics.push_back({min_gap(start.sigma), start.sigma[start.size() - 1], 1.0, 0.0, 0.0});

    const double dt_cap = std::min(opts.dt_max, 1.0 / loop.samples);
    double dt = dt_cap;
    double t = 0.0;
    while (t < 1.0) {
        double t_next = t + dt;
        if (t_next > 1.0 - opts.dt_min) t_next = 1.0;
        const Point2 p = loop_point(loop, t_next).point;
        const SvdTriple& prev = trace.steps.back().svd;
        try {
            const SvdTriple fresh = svd_point(eval_family(f, p));
            check_separation(fresh.sigma, opts.gap_min, opts.sig_min);
            SvdTriple aligned = align_step(prev, fresh, gauge, opts.corr_min);
            const double corr = min_column_overlap(prev, aligned);
            StepDiagnostics d{min_gap(aligned.sigma), aligned.sigma[aligned.size() - 1], corr, t_next - t,
                              gauge_residual(prev, aligned, gauge)};
            trace.steps.push_back({t_next, p, std::move(aligned)});
            trace.diagnostics.push_back(d);
            t = t_next;
            if (corr >= opts.corr_grow) dt = std::min(dt * opts.growth, dt_cap);
        } catch (const NearDegenerate& e) {
            ++trace.rejected;
            dt *= 0.5;
            if (dt < opts.dt_min) throw ContinuationFailed(t, std::string("step size underflow: ") + e.what());
        } catch (const StepTooLarge& e) {
            ++trace.rejected;
            dt *= 0.5;
            if (dt < opts.dt_min) throw ContinuationFailed(t, std::string("step size underflow: ") + e.what());
        }
    }
    trace.closed = true;
    return trace;
}

namespace {

struct DaeState {
    Matrix U;
    Matrix V;
    RealVector sigma;
};

DaeState dae_rhs(const MatrixFamily& f, const PathLoop& loop, Gauge gauge, double t, const DaeState& s,
                 const ContinuationOptions& opts) {
    const LoopSample ls = loop_point(loop, t);
    const Matrix Adot = eval_velocity(f, ls.point, ls.tangent);
    const SvdTriple T{s.U, s.sigma, s.V};
    const HKPair hk = hk_from_derivative(T, Adot, gauge, opts.gap_min, opts.sig_min);
    const Matrix W = s.U.adjoint() * Adot * s.V;
    return {s.U * hk.H, s.V * hk.K, W.diagonal().real()};
}

DaeState axpy(const DaeState& s, double h, const DaeState& k) {
    return {s.U + h * k.U, s.V + h * k.V, s.sigma + h * k.sigma};
}

Matrix polar_factor(const Matrix& X) {
    const SvdTriple p = svd_point(X);
    return p.U * p.V.adjoint();
}

}  // namespace

ContinuationTrace integrate_dae(const MatrixFamily& f, const PathLoop& loop, Gauge gauge, int steps,
                                const ContinuationOptions& opts) {
    if (steps < 1) throw DomainError("integrate_dae: need at least one step");
    const SvdTriple start = svd_point(eval_family(f, loop_point(loop, 0.0).point));
    try {
        check_separation(start.sigma, opts.gap_min, opts.sig_min);
    } catch (const NearDegenerate& e) {
        throw ContinuationFailed(0.0, std::string("start point: ") + e.what());
    }

    ContinuationTrace trace;
    trace.gauge = gauge;
    trace.steps.push_back({0.0, loop_point(loop, 0.0).point, start});
    trace.diagnostics.push_back({min_gap(start.sigma), start.sigma[start.size() - 1], 1.0, 0.0, 0.0});

    DaeState s{start.U, start.V, start.sigma};
    const double h = 1.0 / steps;
    for (int k = 0; k < steps; ++k) {
        const double t = k * h;
        try {
            const DaeState k1 = dae_rhs(f, loop, gauge, t, s, opts);
            const DaeState k2 = dae_rhs(f, loop, gauge, t + 0.5 * h, axpy(s, 0.5 * h, k1), opts);
            const DaeState k3 = dae_rhs(f, loop, gauge, t + 0.5 * h, axpy(s, 0.5 * h, k2), opts);
            const DaeState k4 = dae_rhs(f, loop, gauge, t + h, axpy(s, h, k3), opts);
            DaeState next{s.U + (h / 6.0) * (k1.U + 2.0 * k2.U + 2.0 * k3.U + k4.U),
                          s.V + (h / 6.0) * (k1.V + 2.0 * k2.V + 2.0 * k3.V + k4.V),
                          s.sigma + (h / 6.0) * (k1.sigma + 2.0 * k2.sigma + 2.0 * k3.sigma + k4.sigma)};
            next.U = polar_factor(next.U);
            next.V = polar_factor(next.V);
            const double t_next = (k + 1 == steps) ? 1.0 : (k + 1) * h;
            const Point2 p = loop_point(loop, t_next).point;
            next.sigma = (next.U.adjoint() * eval_family(f, p) * next.V).diagonal().real();

            SvdTriple sample{next.U, next.sigma, next.V};
            const SvdTriple& prev = trace.steps.back().svd;
            StepDiagnostics d{min_gap(sample.sigma), sample.sigma[sample.size() - 1],
                              min_column_overlap(prev, sample), h, gauge_residual(prev, sample, gauge)};
            trace.steps.push_back({t_next, p, std::move(sample)});
            trace.diagnostics.push_back(d);
            s = std::move(next);
        } catch (const NearDegenerate& e) {
            throw ContinuationFailed(t, std::string("DAE right-hand side degenerate: ") + e.what());
        }
    }
    trace.closed = true;
    return trace;
}

// ---------------------------------------------------------------------------
// Export

void write_trace_csv(const ContinuationTrace& trace, std::ostream& out) {
    const int n = trace.steps.empty() ? 0 : trace.steps.front().svd.size();
    out << "t,x,y";
    for (int j = 1; j <= n; ++j) out << ",sigma_" << j;
    out << '\n' << std::setprecision(17);
    for (const auto& s : trace.steps) {
        out << s.t << ',' << s.point.x << ',' << s.point.y;
        for (int j = 0; j < n; ++j) out << ',' << s.svd.sigma[j];
        out << '\n';
    }
}

namespace {

static_assert(std::endian::native == std::endian::little, "binary trace I/O assumes a little-endian host");

template <typename T>
void put(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
    T value{};
    if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) throw ParseError("trace", "truncated binary trace");
    return value;
}

constexpr char kTraceMagic[8] = {'J', 'M', 'V', 'D', 'T', 'R', 'C', '1'};

void put_matrix(std::ostream& out, const Matrix& M) {
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            put(out, M(i, j).real());
            put(out, M(i, j).imag());
        }
    }
}

Matrix get_matrix(std::istream& in, int n) {
    Matrix M(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double re = get<double>(in);
            const double im = get<double>(in);
            M(i, j) = Complex(re, im);
        }
    }
    return M;
}

}  // namespace

void write_trace_binary(const ContinuationTrace& trace, std::ostream& out) {
    const int n = trace.steps.empty() ? 0 : trace.steps.front().svd.size();
    out.write(kTraceMagic, sizeof(kTraceMagic));
    put<std::int32_t>(out, n);
    put<std::int32_t>(out, static_cast<std::int32_t>(trace.gauge));
    put<std::int32_t>(out, trace.closed ? 1 : 0);
    put<std::int64_t>(out, static_cast<std::int64_t>(trace.steps.size()));
    for (const auto& s : trace.steps) {
        put(out, s.t);
        put(out, s.point.x);
        put(out, s.point.y);
        for (int j = 0; j < n; ++j) put(out, s.svd.sigma[j]);
        put_matrix(out, s.svd.U);
        put_matrix(out, s.svd.V);
    }
}

ContinuationTrace read_trace_binary(std::istream& in) {
    char magic[8];
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kTraceMagic, sizeof(magic)) != 0) {
        throw ParseError("trace", "bad magic");
    }
    const int n = get<std::int32_t>(in);
    const int gauge = get<std::int32_t>(in);
    const int closed = get<std::int32_t>(in);
    const auto count = get<std::int64_t>(in);
    if (n < 1 || n > kMaxDimension || gauge < 0 || gauge > 2 || count < 0) throw ParseError("trace", "bad header");

    ContinuationTrace trace;
    trace.gauge = static_cast<Gauge>(gauge);
    trace.closed = closed != 0;
    for (std::int64_t k = 0; k < count; ++k) {
        TraceSample s;
        s.t = get<double>(in);
        s.point.x = get<double>(in);
        s.point.y = get<double>(in);
        s.svd.sigma.resize(n);
        for (int j = 0; j < n; ++j) s.svd.sigma[j] = get<double>(in);
        s.svd.U = get_matrix(in, n);
        s.svd.V = get_matrix(in, n);
        trace.steps.push_back(std::move(s));
    }
    return trace;
}

}  // namespace jmvd
