#include "jmvd/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "jmvd/errors.hpp"

namespace jmvd {

using json = nlohmann::json;

double Box::diameter() const { return std::hypot(width(), height()); }

Box Box::inflated(double factor) const {
    const Point2 c = center();
    const double hw = 0.5 * width() * factor;
    const double hh = 0.5 * height() * factor;
    return {c.x - hw, c.x + hw, c.y - hh, c.y + hh};
}

MatrixFamily::MatrixFamily(int n, std::vector<FamilyTerm> terms) : n_(n), terms_(std::move(terms)) {
    if (n_ < 1) throw DimensionError("MatrixFamily: size must be positive");
    std::set<std::pair<int, int>> seen;
    for (const auto& term : terms_) {
        if (term.jx < 0 || term.ky < 0) throw DomainError("MatrixFamily: negative exponent");
        if (term.coeff.rows() != n_ || term.coeff.cols() != n_) {
            throw DimensionError("MatrixFamily: coefficient is not " + std::to_string(n_) + "x" +
                                 std::to_string(n_));
        }
        if (!all_finite(term.coeff)) throw DomainError("MatrixFamily: non-finite coefficient");
        if (!seen.emplace(term.jx, term.ky).second) {
            throw DomainError("MatrixFamily: duplicate term (" + std::to_string(term.jx) + "," +
                              std::to_string(term.ky) + ")");
        }
    }
}

MatrixFamily MatrixFamily::constant(const Matrix& M) {
    return MatrixFamily(static_cast<int>(M.rows()), {{0, 0, M}});
}

MatrixFamily MatrixFamily::affine(const Matrix& M0, const Matrix& Mx, const Matrix& My) {
    return MatrixFamily(static_cast<int>(M0.rows()), {{0, 0, M0}, {1, 0, Mx}, {0, 1, My}});
}

namespace {

double ipow(double base, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

}  // namespace

Matrix eval_family(const MatrixFamily& f, Point2 xi) {
    Matrix A = Matrix::Zero(f.size(), f.size());
    for (const auto& term : f.terms()) A += (ipow(xi.x, term.jx) * ipow(xi.y, term.ky)) * term.coeff;
    return A;
}

std::pair<Matrix, Matrix> eval_gradient(const MatrixFamily& f, Point2 xi) {
    Matrix dx = Matrix::Zero(f.size(), f.size());
    Matrix dy = Matrix::Zero(f.size(), f.size());
    for (const auto& term : f.terms()) {
        if (term.jx > 0) dx += (term.jx * ipow(xi.x, term.jx - 1) * ipow(xi.y, term.ky)) * term.coeff;
        if (term.ky > 0) dy += (term.ky * ipow(xi.x, term.jx) * ipow(xi.y, term.ky - 1)) * term.coeff;
    }
    return {std::move(dx), std::move(dy)};
}

Matrix eval_velocity(const MatrixFamily& f, Point2 xi, Point2 velocity) {
    auto [dx, dy] = eval_gradient(f, xi);
    return velocity.x * dx + velocity.y * dy;
}

Matrix eval_derivative(const MatrixFamily& f, Point2 xi, Point2 dir) {
    if (std::abs(std::hypot(dir.x, dir.y) - 1.0) > 1e-12) {
        throw DomainError("eval_derivative: direction is not a unit vector");
    }
    return eval_velocity(f, xi, dir);
}

// ---------------------------------------------------------------------------
// Family documents

namespace {

const json& require(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object()) throw ParseError(where, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(where, std::string("missing key '") + key + "'");
    return *it;
}

int require_int(const json& v, const std::string& where) {
    if (!v.is_number_integer()) throw ParseError(where, "expected an integer");
    return v.get<int>();
}

double require_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ParseError(where, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ParseError(where, "non-finite number");
    return d;
}

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("byte " + std::to_string(e.byte), e.what());
    }
}

Matrix parse_matrix(const json& rows, int n, const std::string& where) {
    if (!rows.is_array() || static_cast<int>(rows.size()) != n) {
        throw ParseError(where, "expected " + std::to_string(n) + " rows");
    }
    Matrix M(n, n);
    for (int i = 0; i < n; ++i) {
        const std::string row_at = where + "[" + std::to_string(i) + "]";
        const json& row = rows[i];
        if (!row.is_array() || static_cast<int>(row.size()) != n) {
            throw ParseError(row_at, "expected " + std::to_string(n) + " entries");
        }
        for (int j = 0; j < n; ++j) {
            const std::string at = row_at + "[" + std::to_string(j) + "]";
            const json& z = row[j];
            if (!z.is_array() || z.size() != 2) throw ParseError(at, "expected [re, im]");
            M(i, j) = Complex(require_number(z[0], at + "[0]"), require_number(z[1], at + "[1]"));
        }
    }
    return M;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path, "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

MatrixFamily parse_family(const std::string& text) {
    const json doc = parse_json(text);
    const int n = require_int(require(doc, "n", "$"), "$.n");
    if (n < 1 || n > kMaxDimension) throw ParseError("$.n", "size out of range");
    const json& terms = require(doc, "terms", "$");
    if (!terms.is_array() || terms.empty()) throw ParseError("$.terms", "expected a non-empty array");

    std::vector<FamilyTerm> out;
    std::set<std::pair<int, int>> seen;
    for (std::size_t t = 0; t < terms.size(); ++t) {
        const std::string at = "$.terms[" + std::to_string(t) + "]";
        const int jx = require_int(require(terms[t], "jx", at), at + ".jx");
        const int ky = require_int(require(terms[t], "ky", at), at + ".ky");
        if (jx < 0 || ky < 0) throw ParseError(at, "negative exponent");
        if (!seen.emplace(jx, ky).second) {
            throw ParseError(at, "duplicate term (" + std::to_string(jx) + "," + std::to_string(ky) + ")");
        }
        out.push_back({jx, ky, parse_matrix(require(terms[t], "matrix", at), n, at + ".matrix")});
    }
    return MatrixFamily(n, std::move(out));
}

std::string serialize_family(const MatrixFamily& f) {
    json terms = json::array();
    for (const auto& term : f.terms()) {
        json rows = json::array();
        for (Eigen::Index i = 0; i < term.coeff.rows(); ++i) {
            json row = json::array();
            for (Eigen::Index j = 0; j < term.coeff.cols(); ++j) {
                row.push_back({term.coeff(i, j).real(), term.coeff(i, j).imag()});
            }
            rows.push_back(std::move(row));
        }
        terms.push_back({{"jx", term.jx}, {"ky", term.ky}, {"matrix", std::move(rows)}});
    }
    return json{{"n", f.size()}, {"terms", std::move(terms)}}.dump(2);
}

MatrixFamily load_family(const std::string& path) { return parse_family(slurp(path)); }

// ---------------------------------------------------------------------------
// Loops

PathLoop PathLoop::circle(Point2 center, double radius, int samples) {
    if (!(radius > 0.0)) throw DomainError("PathLoop: radius must be positive");
    if (samples < 8) throw DomainError("PathLoop: at least 8 samples required");
    return {Circle{center, radius}, samples};
}

PathLoop PathLoop::rectangle(const Box& box, int samples) {
    if (!(box.xmax > box.xmin) || !(box.ymax > box.ymin)) throw DomainError("PathLoop: degenerate box");
    if (samples < 8) throw DomainError("PathLoop: at least 8 samples required");
    return {Rectangle{box}, samples};
}

LoopSample loop_point(const PathLoop& loop, double t) {
    if (t >= 1.0) t = 0.0;
    if (t < 0.0) t = 0.0;
    if (const auto* c = std::get_if<Circle>(&loop.shape)) {
        const double w = 2.0 * std::numbers::pi;
        const double cs = std::cos(w * t);
        const double sn = std::sin(w * t);
        return {{c->center.x + c->radius * cs, c->center.y + c->radius * sn},
                {-w * c->radius * sn, w * c->radius * cs}};
    }
    const Box& b = std::get<Rectangle>(loop.shape).box;
    const double w = b.width();
    const double h = b.height();
    const double perimeter = 2.0 * (w + h);
    const double s = t * perimeter;
    if (s < w) return {{b.xmin + s, b.ymin}, {perimeter, 0.0}};
    if (s < w + h) return {{b.xmax, b.ymin + (s - w)}, {0.0, perimeter}};
    if (s < 2.0 * w + h) return {{b.xmax - (s - w - h), b.ymax}, {-perimeter, 0.0}};
    return {{b.xmin, b.ymax - (s - 2.0 * w - h)}, {0.0, -perimeter}};
}

PathLoop parse_loop(const std::string& text) {
    const json doc = parse_json(text);
    const json& kind = require(doc, "kind", "$");
    if (!kind.is_string()) throw ParseError("$.kind", "expected a string");
    int samples = 256;
    if (doc.contains("samples")) samples = require_int(doc["samples"], "$.samples");
    if (samples < 8) throw ParseError("$.samples", "at least 8 samples required");

    const std::string k = kind.get<std::string>();
    if (k == "circle") {
        const json& c = require(doc, "center", "$");
        if (!c.is_array() || c.size() != 2) throw ParseError("$.center", "expected [x, y]");
        const double r = require_number(require(doc, "radius", "$"), "$.radius");
        if (!(r > 0.0)) throw ParseError("$.radius", "radius must be positive");
        return PathLoop::circle({require_number(c[0], "$.center[0]"), require_number(c[1], "$.center[1]")}, r,
                                samples);
    }
    if (k == "rect") {
        const json& b = require(doc, "box", "$");
        if (!b.is_array() || b.size() != 4) throw ParseError("$.box", "expected [xmin, xmax, ymin, ymax]");
        Box box{require_number(b[0], "$.box[0]"), require_number(b[1], "$.box[1]"),
                require_number(b[2], "$.box[2]"), require_number(b[3], "$.box[3]")};
        if (!(box.xmax > box.xmin) || !(box.ymax > box.ymin)) throw ParseError("$.box", "degenerate box");
        return PathLoop::rectangle(box, samples);
    }
    throw ParseError("$.kind", "unknown loop kind '" + k + "'");
}

std::string serialize_loop(const PathLoop& loop) {
    json doc;
    if (const auto* c = std::get_if<Circle>(&loop.shape)) {
        doc = {{"kind", "circle"}, {"center", {c->center.x, c->center.y}}, {"radius", c->radius}};
    } else {
        const Box& b = std::get<Rectangle>(loop.shape).box;
        doc = {{"kind", "rect"}, {"box", {b.xmin, b.xmax, b.ymin, b.ymax}}};
    }
    doc["samples"] = loop.samples;
    return doc.dump(2);
}

PathLoop load_loop(const std::string& path) { return parse_loop(slurp(path)); }

// ---------------------------------------------------------------------------
// Surface scan

const SurfaceNode& SigmaSurface::argmin_sigma() const {
    return *std::min_element(nodes.begin(), nodes.end(),
                             [](const SurfaceNode& a, const SurfaceNode& b) { return a.sigma_min < b.sigma_min; });
}

SigmaSurface grid_scan(const MatrixFamily& f, const Box& box, int nx, int ny) {
    if (nx < 2 || ny < 2) throw DomainError("grid_scan: resolution must be at least 2 per axis");
    if (!(box.xmax > box.xmin) || !(box.ymax > box.ymin)) throw DomainError("grid_scan: degenerate box");
    SigmaSurface s;
    for (int i = 0; i < nx; ++i) s.xs.push_back(box.xmin + box.width() * i / (nx - 1));
    for (int i = 0; i < ny; ++i) s.ys.push_back(box.ymin + box.height() * i / (ny - 1));
    s.xs.back() = box.xmax;
    s.ys.back() = box.ymax;
    s.nodes.reserve(static_cast<std::size_t>(nx) * ny);
    for (double y : s.ys) {
        for (double x : s.xs) {
            const Matrix A = eval_family(f, {x, y});
            const SvdTriple T = svd_point(A);
            s.nodes.push_back({x, y, T.sigma[T.size() - 1], min_gap(T.sigma), std::abs(det(A))});
        }
    }
    return s;
}

void write_surface_csv(const SigmaSurface& surface, std::ostream& out) {
    out << "x,y,sigma_min,gap,absdet\n";
    out << std::setprecision(17);
    for (const auto& node : surface.nodes) {
        out << node.x << ',' << node.y << ',' << node.sigma_min << ',' << node.gap << ',' << node.absdet << '\n';
    }
}

}  // namespace jmvd
