#include "jmvd/embedding.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/SVD>

#include "jmvd/errors.hpp"

namespace jmvd {

Matrix build_M(const Matrix& A, double eps) {
    if (A.rows() != A.cols()) throw DimensionError("build_M: A must be square");
    const Eigen::Index n = A.rows();
    Matrix M(2 * n, 2 * n);
    M.topLeftCorner(n, n) = eps * Matrix::Identity(n, n);
    M.topRightCorner(n, n) = A;
    M.bottomLeftCorner(n, n) = A.adjoint();
    M.bottomRightCorner(n, n) = -eps * Matrix::Identity(n, n);
    return M;
}

CdPair cd_factors(double sigma, double eps) {
    if (!(sigma > 0.0)) throw DomainError("cd_factors: sigma must be positive");
    const double s = std::hypot(sigma, eps);
    // s - eps loses all digits for eps >> sigma > 0; use sigma^2 / (s + eps) there.
    const double s_minus_eps = eps > 0.0 ? sigma * sigma / (s + eps) : s - eps;
    return {sigma / std::sqrt(2.0 * s * s_minus_eps), std::sqrt(s_minus_eps / (2.0 * s))};
}

EmbeddingEig eigendec_M(const SvdTriple& T, double eps, double gap_min, double sig_min) {
    const int n = T.size();
    for (int j = 0; j + 1 < n; ++j) {
        if (T.sigma[j] - T.sigma[j + 1] < gap_min) throw NearDegenerate(j, j + 1, "eigendec_M: repeated singular value");
    }
    if (T.sigma[n - 1] < sig_min) throw NearDegenerate(n - 1, n - 1, "eigendec_M: vanishing singular value");

    EmbeddingEig out{Matrix(2 * n, 2 * n), RealVector(n), RealVector(n), RealVector(n)};
    for (int j = 0; j < n; ++j) {
        const CdPair cd = cd_factors(T.sigma[j], eps);
        out.C[j] = cd.c;
        out.D[j] = cd.d;
        out.S[j] = std::hypot(T.sigma[j], eps);
    }
    const auto C = out.C.cast<Complex>().asDiagonal();
    const auto D = out.D.cast<Complex>().asDiagonal();
    out.W.topLeftCorner(n, n) = T.U * C;
    out.W.topRightCorner(n, n) = -(T.U * D);
    out.W.bottomLeftCorner(n, n) = T.V * D;
    out.W.bottomRightCorner(n, n) = T.V * C;
    return out;
}

double discr_M(const RealVector& sigma, double eps) {
    const Eigen::Index n = sigma.size();
    double value = std::pow(4.0, static_cast<double>(n));
    for (Eigen::Index j = 0; j < n; ++j) {
        const double sj2 = sigma[j] * sigma[j];
        for (Eigen::Index l = j + 1; l < n; ++l) {
            const double d = sj2 - sigma[l] * sigma[l];
            const double d2 = d * d;
            value *= d2 * d2;
        }
        value *= sj2 + eps * eps;
    }
    return value;
}

GenericityReport genericity_det(const MatrixFamily& f, Point2 xi0, double h, double gen_tol) {
    if (h <= 0.0) h = 1e-6 * (1.0 + std::hypot(xi0.x, xi0.y));
    auto F = [&](double x, double y) { return det(eval_family(f, {x, y})); };
    const Complex dx = (F(xi0.x + h, xi0.y) - F(xi0.x - h, xi0.y)) / (2.0 * h);
    const Complex dy = (F(xi0.x, xi0.y + h) - F(xi0.x, xi0.y - h)) / (2.0 * h);

    GenericityReport r;
    r.jacobian << dx.real(), dy.real(), dx.imag(), dy.imag();
    const Eigen::Vector2d sv = Eigen::JacobiSVD<Eigen::Matrix2d>(r.jacobian).singularValues();
    r.min_singular_value = sv[1];
    r.regular = sv[1] >= gen_tol * (1.0 + sv[0]);
    r.absdet = std::abs(F(xi0.x, xi0.y));
    return r;
}

std::string to_string(ProbeVerdict v) {
    switch (v) {
        case ProbeVerdict::Positive: return "positive";
        case ProbeVerdict::Degenerate: return "degenerate";
        case ProbeVerdict::NotApplicable: return "not-applicable";
    }
    return "not-applicable";
}

std::vector<double> default_probe_steps() { return {1e-2, 1e-3, 1e-4, 1e-5}; }

std::vector<Point2> planar_directions(int count) {
    std::vector<Point2> dirs;
    for (int k = 0; k < count; ++k) {
        const double a = 2.0 * std::numbers::pi * k / count;
        dirs.push_back({std::cos(a), std::sin(a)});
    }
    return dirs;
}

std::vector<Eigen::Vector3d> spatial_directions(int count, const std::vector<double>& elevations) {
    std::vector<Eigen::Vector3d> dirs;
    for (double e : elevations) {
        for (const Point2& p : planar_directions(count)) {
            dirs.emplace_back(std::cos(e) * p.x, std::cos(e) * p.y, std::sin(e));
        }
    }
    return dirs;
}

bool probe_applicable(const MatrixFamily& f, Point2 xi0, double rel_tol) {
    const Matrix A = eval_family(f, xi0);
    const SvdTriple T = svd_point(A);
    return T.sigma[T.size() - 1] <= rel_tol * (1.0 + A.norm());
}

namespace {

bool stabilized(const std::vector<double>& ratios, double tol) {
    if (ratios.size() < 2) return false;
    const double last = ratios.back();
    const double prev = ratios[ratios.size() - 2];
    return std::abs(last - prev) <= tol * std::abs(prev);
}

void summarize(ProbeReport& report) {
    report.min_ratio = std::numeric_limits<double>::infinity();
    bool all_positive = true;
    for (const auto& d : report.directions) {
        report.min_ratio = std::min(report.min_ratio, d.ratios.back());
        if (!d.converged || !(d.ratios.back() > 0.0)) all_positive = false;
    }
    report.verdict = all_positive ? ProbeVerdict::Positive : ProbeVerdict::Degenerate;
}

}  // namespace

ProbeReport sigma_limit_probe(const MatrixFamily& f, Point2 xi0, const std::vector<Point2>& directions,
                              const std::vector<double>& t_values, double stabilization) {
    ProbeReport report;
    for (const Point2& v : directions) {
        DirectionProbe d;
        d.direction = {v.x, v.y};
        for (double t : t_values) {
            const SvdTriple T = svd_point(eval_family(f, {xi0.x + t * v.x, xi0.y + t * v.y}));
            d.ratios.push_back(T.sigma[T.size() - 1] / t);
        }
        d.converged = stabilized(d.ratios, stabilization);
        report.directions.push_back(std::move(d));
    }
    if (!probe_applicable(f, xi0)) {
        report.verdict = ProbeVerdict::NotApplicable;
        report.min_ratio = 0.0;
        return report;
    }
    summarize(report);
    return report;
}

ProbeReport discr_limit_probe(const MatrixFamily& f, Point2 xi0, const std::vector<Eigen::Vector3d>& directions,
                              const std::vector<double>& t_values, double stabilization) {
    ProbeReport report;
    for (const Eigen::Vector3d& v : directions) {
        DirectionProbe d;
        d.direction = {v[0], v[1], v[2]};
        for (double t : t_values) {
            const SvdTriple T = svd_point(eval_family(f, {xi0.x + t * v[0], xi0.y + t * v[1]}));
            d.ratios.push_back(discr_M(T.sigma, t * v[2]) / (t * t));
        }
        d.converged = stabilized(d.ratios, stabilization);
        report.directions.push_back(std::move(d));
    }
    if (!probe_applicable(f, xi0)) {
        report.verdict = ProbeVerdict::NotApplicable;
        report.min_ratio = 0.0;
        return report;
    }
    summarize(report);
    return report;
}

}  // namespace jmvd
