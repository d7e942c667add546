#include "chemofluid/geometry.hpp"

#include "chemofluid/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace chemofluid {

LevelSetDomain::LevelSetDomain(Function phi, Box bbox, ShapeKind kind, std::string description)
    : phi_(std::move(phi)), bbox_(bbox), kind_(kind), description_(std::move(description)) {
    if (!phi_) throw GeometryError("level-set function is empty");
    if (!(bbox_.x1 > bbox_.x0) || !(bbox_.y1 > bbox_.y0)) throw GeometryError("empty bounding box");
}

LevelSetDomain LevelSetDomain::disk(double radius, Vec2 center) {
    if (!(radius > 0)) throw GeometryError("disk radius must be positive");
    const double half = 1.2 * radius;
    Box box{center.x - half, center.y - half, center.x + half, center.y + half};
    std::ostringstream d;
    d << "disk(R=" << radius << ")";
    return LevelSetDomain([=](double x, double y) { return std::hypot(x - center.x, y - center.y) - radius; }, box,
                          ShapeKind::disk, d.str());
}

LevelSetDomain LevelSetDomain::annulus(double r_inner, double r_outer) {
    if (!(r_inner > 0) || !(r_outer > r_inner)) throw GeometryError("annulus needs 0 < r_inner < r_outer");
    const double half = 1.2 * r_outer;
    std::ostringstream d;
    d << "annulus(" << r_inner << ", " << r_outer << ")";
    return LevelSetDomain(
        [=](double x, double y) {
            const double r = std::hypot(x, y);
            return (r - r_inner) * (r - r_outer);
        },
        Box{-half, -half, half, half}, ShapeKind::annulus, d.str());
}

LevelSetDomain LevelSetDomain::star(int k, double amplitude, double base_radius) {
    if (k < 1) throw GeometryError("star needs k >= 1");
    if (!(amplitude >= 0) || !(amplitude < 1)) throw GeometryError("star amplitude must lie in [0, 1)");
    if (!(base_radius > 0)) throw GeometryError("star base radius must be positive");
    const double half = base_radius * (1.0 + amplitude) + 0.2 * base_radius;
    std::ostringstream d;
    d << "star(k=" << k << ", a=" << amplitude << ")";
    return LevelSetDomain(
        [=](double x, double y) {
            const double r = std::hypot(x, y);
            const double theta = std::atan2(y, x);
            return r - base_radius * (1.0 + amplitude * std::cos(k * theta));
        },
        Box{-half, -half, half, half}, ShapeKind::star, d.str());
}

LevelSetDomain LevelSetDomain::from_samples(const GridBlock& samples) {
    if (samples.layout != "node") throw GeometryError("sampled level set must use layout 'node'");
    if (samples.nx < 2 || samples.ny < 2) throw GeometryError("sampled level set needs at least 2x2 samples");
    const int nx = samples.nx;
    const int ny = samples.ny;
    const Box box = samples.bbox;
    const double dx = box.width() / (nx - 1);
    const double dy = box.height() / (ny - 1);
    auto values = samples.values;
    auto phi = [=](double x, double y) {
        const double fx = std::clamp((x - box.x0) / dx, 0.0, static_cast<double>(nx - 1));
        const double fy = std::clamp((y - box.y0) / dy, 0.0, static_cast<double>(ny - 1));
        const int i = std::min(static_cast<int>(fx), nx - 2);
        const int j = std::min(static_cast<int>(fy), ny - 2);
        const double tx = fx - i;
        const double ty = fy - j;
        auto v = [&](int a, int b) { return values[static_cast<std::size_t>(b) * nx + a]; };
        return (1 - tx) * (1 - ty) * v(i, j) + tx * (1 - ty) * v(i + 1, j) + (1 - tx) * ty * v(i, j + 1) +
               tx * ty * v(i + 1, j + 1);
    };
    return LevelSetDomain(phi, box, ShapeKind::custom, "sampled(" + samples.name + ")");
}

Vec2 LevelSetDomain::gradient(Vec2 p, double step) const {
    return {(phi_(p.x + step, p.y) - phi_(p.x - step, p.y)) / (2 * step),
            (phi_(p.x, p.y + step) - phi_(p.x, p.y - step)) / (2 * step)};
}

double GridGeometry::area() const {
    double a = 0;
    for (double f : volume_fraction) a += f;
    return a * shape.h * shape.h;
}

double GridGeometry::perimeter() const {
    double p = 0;
    for (const auto& s : segments) p += s.length;
    return p;
}

std::size_t GridGeometry::count(CellClass c) const {
    return static_cast<std::size_t>(std::count(cell_class.begin(), cell_class.end(), c));
}

namespace {

constexpr double kGradientFloor = 1e-6;

/// Area fraction of {phi < 0} inside a triangle with linear phi.
double triangle_fraction(double a, double b, double c) {
    const int neg = (a < 0) + (b < 0) + (c < 0);
    if (neg == 0) return 0.0;
    if (neg == 3) return 1.0;
    // Rotate so that the odd vertex (the one on its own side) comes first.
    std::array<double, 3> v{a, b, c};
    const bool lone_negative = neg == 1;
    int lone = 0;
    for (int k = 0; k < 3; ++k) {
        if ((v[k] < 0) == lone_negative) lone = k;
    }
    const double p = v[lone];
    const double q = v[(lone + 1) % 3];
    const double r = v[(lone + 2) % 3];
    const double corner = p * p / ((p - q) * (p - r));
    return lone_negative ? corner : 1.0 - corner;
}

double edge_fraction(double a, double b) {
    const bool na = a < 0;
    const bool nb = b < 0;
    if (na && nb) return 1.0;
    if (!na && !nb) return 0.0;
    return na ? a / (a - b) : b / (b - a);
}

Vec2 crossing(Vec2 pa, Vec2 pb, double a, double b) {
    const double t = a / (a - b);
    return pa + (pb - pa) * t;
}

} // namespace

double boundary_curvature(const LevelSetDomain& domain, Vec2 p, double step) {
    if (!(step > 0)) throw std::invalid_argument("boundary_curvature: step must be positive");
    const double s = step;
    const double c = domain(p);
    const double e = domain(p.x + s, p.y);
    const double w = domain(p.x - s, p.y);
    const double n = domain(p.x, p.y + s);
    const double so = domain(p.x, p.y - s);
    const double ne = domain(p.x + s, p.y + s);
    const double nw = domain(p.x - s, p.y + s);
    const double se = domain(p.x + s, p.y - s);
    const double sw = domain(p.x - s, p.y - s);
    const double px = (e - w) / (2 * s);
    const double py = (n - so) / (2 * s);
    const double g = std::hypot(px, py);
    if (g <= kGradientFloor) {
        throw SingularGradientError("boundary_curvature: |grad phi| below threshold");
    }
    if (std::abs(c) / g > 2.0 * s) {
        throw std::invalid_argument("boundary_curvature: point is not within one grid band of the boundary");
    }
    const double pxx = (e - 2 * c + w) / (s * s);
    const double pyy = (n - 2 * c + so) / (s * s);
    const double pxy = (ne - nw - se + sw) / (4 * s * s);
    return (pxx * py * py - 2 * px * py * pxy + pyy * px * px) / (g * g * g);
}

double curvature_bound(const GridGeometry& geom) {
    double kmax = 0;
    for (const auto& s : geom.segments) kmax = std::max(kmax, std::abs(s.curvature));
    const double floor = geom.diameter > 0 ? 1.0 / geom.diameter : 1.0;
    return std::max(1.1 * kmax, floor);
}

GridGeometry classify_cells(const LevelSetDomain& domain, double h) {
    if (!(h > 0)) throw ResolutionError("grid spacing must be positive");
    const Box box = domain.bbox();
    const int nx = static_cast<int>(std::ceil(box.width() / h - 1e-9));
    const int ny = static_cast<int>(std::ceil(box.height() / h - 1e-9));
    if (nx < 16 || ny < 16) {
        throw ResolutionError("grid spacing leaves fewer than 16 cells per side of the bounding box");
    }

    GridGeometry g;
    g.shape = GridShape{nx, ny, h, box.x0, box.y0};
    const GridShape& s = g.shape;

    g.node_phi.resize(s.nodes());
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i <= nx; ++i) g.node_phi[s.node(i, j)] = domain(s.node_pos(i, j));
    }
    auto phi_at = [&](int i, int j) { return g.node_phi[s.node(i, j)]; };

    const double tie = 1e-12 * h;
    g.cell_class.assign(s.cells(), CellClass::exterior);
    g.volume_fraction.assign(s.cells(), 0.0);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const double a = phi_at(i, j);
            const double b = phi_at(i + 1, j);
            const double c = phi_at(i + 1, j + 1);
            const double d = phi_at(i, j + 1);
            const bool near = std::abs(a) < tie || std::abs(b) < tie || std::abs(c) < tie || std::abs(d) < tie;
            const int neg = (a < 0) + (b < 0) + (c < 0) + (d < 0);
            CellClass cls = CellClass::boundary_band;
            if (!near && neg == 4) cls = CellClass::interior;
            if (!near && neg == 0) cls = CellClass::exterior;
            g.cell_class[s.cell(i, j)] = cls;
            // Two triangles split along the (i,j)-(i+1,j+1) diagonal.
            g.volume_fraction[s.cell(i, j)] = 0.5 * (triangle_fraction(a, b, c) + triangle_fraction(a, c, d));
        }
    }

    if (g.count(CellClass::interior) == 0) throw GeometryError("degenerate domain: no interior cells");
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const bool rim = i < 2 || j < 2 || i >= nx - 2 || j >= ny - 2;
            if (rim && (g.cell_class[s.cell(i, j)] != CellClass::exterior || g.volume_fraction[s.cell(i, j)] > 0)) {
                throw GeometryError("domain interior is closer than 2 cells to the bounding box");
            }
        }
    }

    g.aperture_x.assign(s.xfaces(), 0.0);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i <= nx; ++i) g.aperture_x[s.xface(i, j)] = edge_fraction(phi_at(i, j), phi_at(i, j + 1));
    }
    g.aperture_y.assign(s.yfaces(), 0.0);
    for (int j = 0; j <= ny; ++j) {
        for (int i = 0; i < nx; ++i) g.aperture_y[s.yface(i, j)] = edge_fraction(phi_at(i, j), phi_at(i + 1, j));
    }

    const double normal_step = 1e-3 * h;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            if (g.cell_class[s.cell(i, j)] != CellClass::boundary_band) continue;
            const std::array<Vec2, 4> pos{s.node_pos(i, j), s.node_pos(i + 1, j), s.node_pos(i + 1, j + 1),
                                          s.node_pos(i, j + 1)};
            const std::array<double, 4> val{phi_at(i, j), phi_at(i + 1, j), phi_at(i + 1, j + 1), phi_at(i, j + 1)};
            std::vector<Vec2> cross;
            for (int e = 0; e < 4; ++e) {
                const int f = (e + 1) % 4;
                if ((val[e] < 0) != (val[f] < 0)) cross.push_back(crossing(pos[e], pos[f], val[e], val[f]));
            }
            const Vec2 center = s.cell_center(i, j);
            if (domain.gradient(center, normal_step).norm() <= kGradientFloor) {
                throw SingularGradientError("|grad phi| vanishes inside the boundary band");
            }
            if (cross.size() > 2) {
                std::ostringstream m;
                m << "boundary under-resolved: cell (" << i << ", " << j << ") has " << cross.size()
                  << " zero crossings";
                throw ResolutionError(m.str());
            }
            if (cross.size() != 2) continue;
            BoundarySegment seg;
            seg.a = cross[0];
            seg.b = cross[1];
            seg.midpoint = (seg.a + seg.b) * 0.5;
            seg.length = (seg.b - seg.a).norm();
            seg.cell = s.cell(i, j);
            const Vec2 grad = domain.gradient(seg.midpoint, normal_step);
            const double gn = grad.norm();
            if (gn <= kGradientFloor) throw SingularGradientError("|grad phi| vanishes on the boundary");
            seg.normal = grad * (1.0 / gn);
            seg.curvature = boundary_curvature(domain, seg.midpoint, h);
            if (seg.length > 0) g.segments.push_back(seg);
        }
    }
    if (g.segments.empty()) throw GeometryError("no boundary segments extracted");

    double diam = 0;
    for (std::size_t a = 0; a < g.segments.size(); ++a) {
        for (std::size_t b = a + 1; b < g.segments.size(); ++b) {
            diam = std::max(diam, (g.segments[a].midpoint - g.segments[b].midpoint).norm());
        }
    }
    g.diameter = diam;
    g.kappa_max = curvature_bound(g);
    return g;
}

double volume_integral(const ScalarField& field, const GridGeometry& geom) {
    require_same_grid(field.shape(), geom.shape, "volume_integral");
    double sum = 0;
    for (std::size_t k = 0; k < field.size(); ++k) {
        if (geom.volume_fraction[k] > 0) sum += geom.volume_fraction[k] * field[k];
    }
    return sum * geom.shape.h * geom.shape.h;
}

double surface_integral(std::span<const double> boundary_values, const GridGeometry& geom) {
    if (boundary_values.size() != geom.segments.size()) {
        throw GridMismatchError("surface_integral: one value per boundary segment required");
    }
    double sum = 0;
    for (std::size_t k = 0; k < boundary_values.size(); ++k) sum += boundary_values[k] * geom.segments[k].length;
    return sum;
}

} // namespace chemofluid
