#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "jmvd/linalg.hpp"

namespace jmvd {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// Axis-aligned parameter box [xmin, xmax] x [ymin, ymax].
struct Box {
    double xmin = 0.0;
    double xmax = 0.0;
    double ymin = 0.0;
    double ymax = 0.0;

    double width() const { return xmax - xmin; }
    double height() const { return ymax - ymin; }
    double diameter() const;
    Point2 center() const { return {0.5 * (xmin + xmax), 0.5 * (ymin + ymax)}; }
    bool contains(Point2 p) const { return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax; }
    /// Scales both sides by `factor` about the center.
    Box inflated(double factor) const;
};

/// One coefficient x^jx y^ky M.
struct FamilyTerm {
    int jx = 0;
    int ky = 0;
    Matrix coeff;
};

/// Polynomial matrix family A(x, y) = sum_{(j,k)} x^j y^k M_{jk}.
class MatrixFamily {
public:
    /// Validates sizes, exponents and uniqueness of (jx, ky); throws DimensionError/DomainError.
    MatrixFamily(int n, std::vector<FamilyTerm> terms);

    int size() const { return n_; }
    const std::vector<FamilyTerm>& terms() const { return terms_; }

    static MatrixFamily constant(const Matrix& M);
    static MatrixFamily affine(const Matrix& M0, const Matrix& Mx, const Matrix& My);

private:
    int n_;
    std::vector<FamilyTerm> terms_;
};

Matrix eval_family(const MatrixFamily& f, Point2 xi);

/// Partial derivatives (dA/dx, dA/dy), evaluated analytically.
std::pair<Matrix, Matrix> eval_gradient(const MatrixFamily& f, Point2 xi);

/// Directional derivative along a unit vector; DomainError when |dir| != 1.
Matrix eval_derivative(const MatrixFamily& f, Point2 xi, Point2 dir);

/// Derivative along an arbitrary (not necessarily unit) velocity vector.
Matrix eval_velocity(const MatrixFamily& f, Point2 xi, Point2 velocity);

MatrixFamily parse_family(const std::string& text);
std::string serialize_family(const MatrixFamily& f);
MatrixFamily load_family(const std::string& path);

struct Circle {
    Point2 center;
    double radius = 1.0;
};

struct Rectangle {
    Box box;
};

/// Closed curve in parameter space plus its nominal sample count.
struct PathLoop {
    std::variant<Circle, Rectangle> shape;
    int samples = 256;

    static PathLoop circle(Point2 center, double radius, int samples = 256);
    static PathLoop rectangle(const Box& box, int samples = 256);
};

struct LoopSample {
    Point2 point;
    Point2 tangent;  // d gamma / dt
};

/// gamma(t) and gamma'(t) for t in [0,1]; t = 1 maps to exactly the t = 0 sample.
/// Circles: center + r (cos 2 pi t, sin 2 pi t). Rectangles: counterclockwise from
/// (xmin, ymin), arclength-proportional, corners belong to the outgoing edge.
LoopSample loop_point(const PathLoop& loop, double t);

PathLoop parse_loop(const std::string& text);
std::string serialize_loop(const PathLoop& loop);
PathLoop load_loop(const std::string& path);

struct SurfaceNode {
    double x;
    double y;
    double sigma_min;
    double gap;
    double absdet;
};

/// sigma_n, singular gap and |det| on a lattice; nodes are stored row by row (y outer, x inner).
struct SigmaSurface {
    std::vector<double> xs;
    std::vector<double> ys;
    std::vector<SurfaceNode> nodes;

    const SurfaceNode& at(std::size_t ix, std::size_t iy) const { return nodes[iy * xs.size() + ix]; }
    const SurfaceNode& argmin_sigma() const;
};

SigmaSurface grid_scan(const MatrixFamily& f, const Box& box, int nx, int ny);
void write_surface_csv(const SigmaSurface& surface, std::ostream& out);

}  // namespace jmvd
