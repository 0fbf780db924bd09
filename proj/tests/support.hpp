#pragma once

// Test-only helpers: random generators and independent oracles.

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include <Eigen/QR>

#include "jmvd/linalg.hpp"
#include "jmvd/model.hpp"

namespace jmvd::test {

inline std::string data_path(const std::string& name) { return std::string(JMVD_DATA_DIR) + "/" + name; }

inline Matrix random_matrix(std::mt19937_64& rng, int rows, int cols) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix A(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            const double re = u(rng);
            const double im = u(rng);
            A(i, j) = Complex(re, im);
        }
    }
    return A;
}

inline Matrix random_matrix(std::mt19937_64& rng, int n) { return random_matrix(rng, n, n); }

inline Matrix random_unitary(std::mt19937_64& rng, int n) {
    Eigen::HouseholderQR<Matrix> qr(random_matrix(rng, n));
    return qr.householderQ() * Matrix::Identity(n, n);
}

/// A(x, y) = B diag((x - a) - i (y - b), d_2, ..., d_n) C with random unitary B, C and
/// distinct d_k = 3 + 1.5 (k - 2), so the only rank loss is the generic one at (a, b).
inline MatrixFamily manufactured_family(std::mt19937_64& rng, int n, double a, double b) {
    const Matrix B = random_unitary(rng, n);
    const Matrix C = random_unitary(rng, n);
    Matrix D0 = Matrix::Zero(n, n);
    Matrix Dx = Matrix::Zero(n, n);
    Matrix Dy = Matrix::Zero(n, n);
    D0(0, 0) = Complex(-a, b);
    Dx(0, 0) = 1.0;
    Dy(0, 0) = Complex(0.0, -1.0);
    for (int k = 1; k < n; ++k) D0(k, k) = 3.0 + 1.5 * (k - 1);
    return MatrixFamily::affine(B * D0 * C, B * Dx * C, B * Dy * C);
}

/// Closed-form joint-gauge phase of the first column for A = [[1, 1], [0, x - iy]] on a
/// circle of radius r about the origin.
inline double triangular_beta1(double r) {
    const double q = 0.5 * (std::sqrt(r * r * r * r + 4.0) - r * r) + 1.0;
    return std::numbers::pi * r * r / (q * q + r * r);
}

inline double angle_distance(double a, double b) {
    return std::abs(std::remainder(a - b, 2.0 * std::numbers::pi));
}

}  // namespace jmvd::test
