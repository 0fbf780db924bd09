#include "jmvd/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "jmvd/errors.hpp"

namespace jmvd {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_square(const Matrix& A, const char* who) {
    if (A.rows() != A.cols() || A.rows() < 1) {
        throw DimensionError(std::string(who) + ": expected a non-empty square matrix, got " +
                             std::to_string(A.rows()) + "x" + std::to_string(A.cols()));
    }
}

// Fills columns of U whose singular value vanished with an orthonormal completion.
void complete_basis(Matrix& U, const std::vector<bool>& valid) {
    const Eigen::Index n = U.rows();
    Eigen::Index probe = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
        if (valid[j]) continue;
        while (probe < n) {
            Vector candidate = Vector::Unit(n, probe++);
            for (int pass = 0; pass < 2; ++pass) {
                for (Eigen::Index k = 0; k < n; ++k) {
                    if (k == j || (!valid[k] && k > j)) continue;
                    candidate -= U.col(k) * U.col(k).dot(candidate);
                }
            }
            const double norm = candidate.norm();
            if (norm > 0.5) {
                U.col(j) = candidate / norm;
                break;
            }
        }
    }
}

}  // namespace

Matrix SvdTriple::reconstruct() const {
    return U * sigma.cast<Complex>().asDiagonal() * V.adjoint();
}

bool all_finite(const Matrix& A) {
    for (Eigen::Index i = 0; i < A.size(); ++i) {
        const Complex z = A.data()[i];
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    }
    return true;
}

SvdTriple svd_point(const Matrix& A) {
    require_square(A, "svd_point");
    if (A.rows() > kMaxDimension) {
        throw DimensionError("svd_point: size " + std::to_string(A.rows()) + " exceeds cap " +
                             std::to_string(kMaxDimension));
    }
    if (!all_finite(A)) throw DomainError("svd_point: non-finite entry");

    const Eigen::Index n = A.rows();
    Matrix G = A;
    Matrix V = Matrix::Identity(n, n);
    const double tol = kEps * static_cast<double>(n);
    const double scale = A.norm();

    if (scale > 0.0) {
        for (int sweep = 0; sweep < 100; ++sweep) {
            bool rotated = false;
            for (Eigen::Index p = 0; p + 1 < n; ++p) {
                for (Eigen::Index q = p + 1; q < n; ++q) {
                    const double alpha = G.col(p).squaredNorm();
                    const double beta = G.col(q).squaredNorm();
                    const Complex gamma = G.col(p).dot(G.col(q));
                    const double g = std::abs(gamma);
                    if (g == 0.0 || g <= tol * std::sqrt(alpha * beta)) continue;
                    rotated = true;

                    const Complex phase = std::conj(gamma) / g;  // e^{-i arg gamma}
                    const double zeta = (beta - alpha) / (2.0 * g);
                    const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                     (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                    const double c = 1.0 / std::sqrt(1.0 + t * t);
                    const double s = c * t;

                    Vector gp = G.col(p);
                    Vector gq = G.col(q) * phase;
                    G.col(p) = c * gp - s * gq;
                    G.col(q) = s * gp + c * gq;

                    Vector vp = V.col(p);
                    Vector vq = V.col(q) * phase;
                    V.col(p) = c * vp - s * vq;
                    V.col(q) = s * vp + c * vq;
                }
            }
            if (!rotated) break;
        }
    }

    RealVector norms(n);
    for (Eigen::Index j = 0; j < n; ++j) norms[j] = G.col(j).norm();
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return norms[a] > norms[b]; });

    SvdTriple out{Matrix(n, n), RealVector(n), Matrix(n, n)};
    std::vector<bool> valid(n, true);
    const double floor = std::numeric_limits<double>::min() / kEps;
    for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::Index src = order[j];
        out.sigma[j] = norms[src];
        out.V.col(j) = V.col(src);
        if (norms[src] > floor) {
            out.U.col(j) = G.col(src) / norms[src];
        } else {
            out.sigma[j] = 0.0;
            out.U.col(j).setZero();
            valid[j] = false;
        }
    }
    if (std::find(valid.begin(), valid.end(), false) != valid.end()) complete_basis(out.U, valid);

    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::Index arg_max = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double m = std::abs(out.V(i, j));
            if (m > best * (1.0 + 1e-12) + 1e-300) {
                best = m;
                arg_max = i;
            }
        }
        const Complex z = out.V(arg_max, j);
        if (std::abs(z) == 0.0) continue;
        const Complex fix = std::conj(z) / std::abs(z);
        out.V.col(j) *= fix;
        out.U.col(j) *= fix;
        out.V(arg_max, j) = Complex(out.V(arg_max, j).real(), 0.0);
    }
    return out;
}

HermEig herm_eig(const Matrix& H) {
    require_square(H, "herm_eig");
    if (!all_finite(H)) throw DomainError("herm_eig: non-finite entry");
    const double scale = H.norm();
    const double defect = (H - H.adjoint()).norm();
    if (defect > 1e-12 * scale) {
        throw DomainError("herm_eig: matrix is not Hermitian (defect " + std::to_string(defect) + ")");
    }
    const Matrix sym = 0.5 * (H + H.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
    if (solver.info() != Eigen::Success) throw DomainError("herm_eig: eigensolver did not converge");

    // Eigen returns ascending order.
    const Eigen::Index n = H.rows();
    HermEig out{Matrix(n, n), RealVector(n)};
    for (Eigen::Index j = 0; j < n; ++j) {
        out.lambda[j] = solver.eigenvalues()[n - 1 - j];
        out.Q.col(j) = solver.eigenvectors().col(n - 1 - j);
    }
    return out;
}

Complex det(const Matrix& A) {
    require_square(A, "det");
    return Eigen::PartialPivLU<Matrix>(A).determinant();
}

double discriminant(std::span<const double> lambda) {
    double product = 1.0;
    for (std::size_t j = 0; j < lambda.size(); ++j) {
        for (std::size_t l = 0; l < j; ++l) {
            const double d = lambda[j] - lambda[l];
            product *= d * d;
        }
    }
    return product;
}

double discriminant(const RealVector& lambda) {
    return discriminant(std::span<const double>(lambda.data(), static_cast<std::size_t>(lambda.size())));
}

double min_gap(const RealVector& sigma) {
    if (sigma.size() < 2) return 0.0;
    double gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j + 1 < sigma.size(); ++j) gap = std::min(gap, sigma[j] - sigma[j + 1]);
    return gap;
}

double unitarity_defect(const Matrix& X) {
    return (X.adjoint() * X - Matrix::Identity(X.cols(), X.cols())).norm();
}

}  // namespace jmvd
