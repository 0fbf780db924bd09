#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "jmvd/linalg.hpp"
#include "jmvd/model.hpp"

namespace jmvd {

/// M(eps) = [[eps I, A], [A^*, -eps I]]
Matrix build_M(const Matrix& A, double eps);

struct CdPair {
    double c;
    double d;
};

/// Positive solution of the 2x2 eigenvector system for the embedding,
///   c = sigma / sqrt(2 s (s - eps)),  d = sqrt(s - eps) / sqrt(2 s),  s = sqrt(sigma^2 + eps^2),
/// with s - eps evaluated without cancellation. DomainError for sigma <= 0.
CdPair cd_factors(double sigma, double eps);

/// W^* M W = diag(S, -S) with W = [[U C, -U D], [V D, V C]].
struct EmbeddingEig {
    Matrix W;
    RealVector S;
    RealVector C;
    RealVector D;
};

/// Closed-form eigendecomposition of build_M(A, eps) from an SVD of A.
/// NearDegenerate for repeated (gap < gap_min) or vanishing (< sig_min) singular values.
EmbeddingEig eigendec_M(const SvdTriple& T, double eps, double gap_min = 1e-8, double sig_min = 1e-10);

/// 4^n prod_{j<l} (s_j^2 - s_l^2)^4 prod_j (s_j^2 + eps^2)
double discr_M(const RealVector& sigma, double eps);

struct GenericityReport {
    bool regular = false;
    Eigen::Matrix2d jacobian = Eigen::Matrix2d::Zero();  // rows: Re det, Im det; cols: d/dx, d/dy
    double min_singular_value = 0.0;
    double absdet = 0.0;
};

/// Central-difference Jacobian of (Re det A, Im det A) at xi0; regular iff its smallest
/// singular value is at least gen_tol (1 + ||J||_2). h <= 0 selects 1e-6 (1 + |xi0|).
GenericityReport genericity_det(const MatrixFamily& f, Point2 xi0, double h = 0.0, double gen_tol = 1e-6);

enum class ProbeVerdict { Positive, Degenerate, NotApplicable };
std::string to_string(ProbeVerdict v);

struct DirectionProbe {
    std::vector<double> direction;  // (vx, vy) or (vx, vy, eps-component)
    std::vector<double> ratios;     // one per t value
    bool converged = false;
};

struct ProbeReport {
    std::vector<DirectionProbe> directions;
    double min_ratio = 0.0;  // min over directions of the smallest-t ratio
    ProbeVerdict verdict = ProbeVerdict::NotApplicable;
};

std::vector<double> default_probe_steps();

/// n equispaced unit vectors in the plane.
std::vector<Point2> planar_directions(int count = 16);

/// Unit vectors (vx, vy, g) at the given elevations, `count` azimuths each.
std::vector<Eigen::Vector3d> spatial_directions(int count = 16, const std::vector<double>& elevations = {-0.7853981633974483, 0.0, 0.7853981633974483});

/// sigma_n(A(xi0 + t v)) / t per direction and t. Converged when the last two ratios
/// agree within `stabilization`; positive iff every direction converged to a positive value.
ProbeReport sigma_limit_probe(const MatrixFamily& f, Point2 xi0, const std::vector<Point2>& directions,
                              const std::vector<double>& t_values, double stabilization = 0.05);

/// discr(M(xi0 + t v, t g)) / t^2 for spatial directions (v, g), via discr_M on singular values.
ProbeReport discr_limit_probe(const MatrixFamily& f, Point2 xi0, const std::vector<Eigen::Vector3d>& directions,
                              const std::vector<double>& t_values, double stabilization = 0.05);

/// Probes only make sense at (near) rank-loss points.
bool probe_applicable(const MatrixFamily& f, Point2 xi0, double rel_tol = 1e-6);

}  // namespace jmvd
