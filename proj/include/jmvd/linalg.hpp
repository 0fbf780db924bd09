#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace jmvd {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Largest matrix size accepted by the Jacobi SVD.
inline constexpr int kMaxDimension = 64;

/// A = U diag(sigma) V^*, sigma descending.
struct SvdTriple {
    Matrix U;
    RealVector sigma;
    Matrix V;

    int size() const { return static_cast<int>(sigma.size()); }
    Matrix reconstruct() const;
};

/// H = Q diag(lambda) Q^*, lambda descending.
struct HermEig {
    Matrix Q;
    RealVector lambda;
};

/// Singular value decomposition by one-sided (Hestenes) Jacobi with complex rotations.
///
/// Phase convention: the largest-magnitude entry of each right singular vector is
/// made real positive (first such entry on ties); the left vector gets the same phase.
/// Throws DimensionError for non-square or oversized input, DomainError for NaN/Inf.
SvdTriple svd_point(const Matrix& A);

/// Hermitian eigendecomposition with descending eigenvalues. The input is
/// symmetrized first; a Hermitian defect above 1e-12 ||H||_F is a DomainError.
HermEig herm_eig(const Matrix& H);

/// Determinant via LU with partial pivoting.
Complex det(const Matrix& A);

/// prod_{l<j} (lambda_j - lambda_l)^2
double discriminant(std::span<const double> lambda);
double discriminant(const RealVector& lambda);

/// min_j (sigma_j - sigma_{j+1}); 0 for a single value.
double min_gap(const RealVector& sigma);

/// ||X^* X - I||_F
double unitarity_defect(const Matrix& X);

bool all_finite(const Matrix& A);

}  // namespace jmvd
