#include "chemofluid/geometry.hpp"
#include "oracle_values.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

using namespace chemofluid;
using std::numbers::pi;

namespace {

ScalarField filled(const GridGeometry& g, double (*f)(Vec2)) {
    ScalarField s(g.shape);
    for (int j = 0; j < g.shape.ny; ++j)
        for (int i = 0; i < g.shape.nx; ++i) s.at(i, j) = f(g.shape.cell_center(i, j));
    return s;
}

} // namespace

TEST_CASE("classify_cells: unit disk area at h = 1/64") {
    const GridGeometry g = classify_cells(LevelSetDomain::disk(1.0), 1.0 / 64);
    CHECK(std::abs(g.area() - pi) / pi < 0.02);
    std::size_t total = g.count(CellClass::interior) + g.count(CellClass::boundary_band) + g.count(CellClass::exterior);
    CHECK(total == g.shape.cells());
    // Fully interior cells alone under-count by about one band.
    const double interior_only = static_cast<double>(g.count(CellClass::interior)) / (64.0 * 64.0);
    CHECK(interior_only < pi);
    CHECK(interior_only > pi - 2 * pi * 2.0 / 64);
}

TEST_CASE("classify_cells: interior touching the bounding box is rejected") {
    LevelSetDomain tight([](double x, double y) { return std::hypot(x, y) - 1.0; }, Box{-1.01, -1.01, 1.01, 1.01},
                         ShapeKind::custom, "tight disk");
    CHECK_THROWS_AS(classify_cells(tight, 1.0 / 32), GeometryError);
}

TEST_CASE("classify_cells: too few cells and empty interior") {
    CHECK_THROWS_AS(classify_cells(LevelSetDomain::disk(1.0), 0.25), ResolutionError);
    CHECK_THROWS_AS(classify_cells(LevelSetDomain::disk(1.0), 0.0), ResolutionError);
    LevelSetDomain empty([](double, double) { return 1.0; }, Box{-1, -1, 1, 1}, ShapeKind::custom, "empty");
    CHECK_THROWS_AS(classify_cells(empty, 1.0 / 32), GeometryError);
}

TEST_CASE("classify_cells: under-resolved boundary") {
    // Twenty petals at h = 1/16 cross single cells several times.
    CHECK_THROWS_AS(classify_cells(LevelSetDomain::star(20, 0.6), 1.0 / 16), ResolutionError);
}

TEST_CASE("classify_cells: star perimeter and area") {
    const GridGeometry g = classify_cells(LevelSetDomain::star(3, 0.4), 1.0 / 64);
    CHECK(std::abs(g.perimeter() - oracle::kStarPerimeter) / oracle::kStarPerimeter < 0.02);
    CHECK(std::abs(g.area() - oracle::kStarArea) / oracle::kStarArea < 0.02);
}

TEST_CASE("classify_cells: sampled level set matches the analytic disk") {
    const int m = 161;
    GridBlock b;
    b.name = "phi";
    b.layout = "node";
    b.nx = m;
    b.ny = m;
    b.bbox = {-1.25, -1.25, 1.25, 1.25};
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) {
            const double x = -1.25 + 2.5 * i / (m - 1), y = -1.25 + 2.5 * j / (m - 1);
            b.values.push_back(x * x + y * y - 1.0);
        }
    std::stringstream io;
    write_grid_blocks(io, {b});
    const auto blocks = read_grid_blocks(io);
    const GridGeometry g = classify_cells(LevelSetDomain::from_samples(find_block(blocks, "phi")), 1.0 / 64);
    CHECK(g.area() == doctest::Approx(pi).epsilon(0.02));
    CHECK(g.perimeter() == doctest::Approx(2 * pi).epsilon(0.02));
}

TEST_CASE("boundary_curvature: circles") {
    const double h = 1.0 / 64;
    const LevelSetDomain unit = LevelSetDomain::disk(1.0);
    for (double t : {0.0, 0.7, 2.0, 4.5}) {
        CHECK(boundary_curvature(unit, {std::cos(t), std::sin(t)}, h) == doctest::Approx(1.0).epsilon(h));
    }
    const LevelSetDomain two = LevelSetDomain::disk(2.0);
    CHECK(boundary_curvature(two, {2.0, 0.0}, h) == doctest::Approx(0.5).epsilon(h));
}

TEST_CASE("boundary_curvature: star is non-convex at theta = pi/3") {
    const double h = 1.0 / 256;
    const LevelSetDomain star = LevelSetDomain::star(3, 0.4);
    auto at = [](double t) {
        const double r = 1 + 0.4 * std::cos(3 * t);
        return Vec2{r * std::cos(t), r * std::sin(t)};
    };
    const double k3 = boundary_curvature(star, at(pi / 3), h);
    CHECK(k3 < 0);
    CHECK(k3 == doctest::Approx(oracle::kStarCurvatureAtPiOver3).epsilon(0.02));
    CHECK(boundary_curvature(star, at(0.0), h) == doctest::Approx(oracle::kStarCurvatureAt0).epsilon(0.02));
}

TEST_CASE("boundary_curvature: singular gradient") {
    LevelSetDomain flat([](double x, double y) { return std::pow(x * x + y * y - 1.0, 3); }, Box{-2, -2, 2, 2},
                        ShapeKind::custom, "cubed");
    CHECK_THROWS_AS(boundary_curvature(flat, {1.0, 0.0}, 1e-4), SingularGradientError);
}

TEST_CASE("curvature_bound") {
    CHECK(classify_cells(LevelSetDomain::disk(1.0), 1.0 / 64).kappa_max == doctest::Approx(1.1).epsilon(0.02));
    CHECK(classify_cells(LevelSetDomain::annulus(0.5, 1.0), 1.0 / 64).kappa_max == doctest::Approx(2.2).epsilon(0.02));
    const GridGeometry star = classify_cells(LevelSetDomain::star(3, 0.4), 1.0 / 64);
    CHECK(star.kappa_max > 0);
    for (const BoundarySegment& s : star.segments) CHECK(star.kappa_max >= s.curvature);
    // Flat samples: the floor 1/diameter applies.
    GridGeometry g = classify_cells(LevelSetDomain::disk(1.0), 1.0 / 32);
    for (BoundarySegment& s : g.segments) s.curvature = 0.0;
    CHECK(curvature_bound(g) == doctest::Approx(1.0 / g.diameter));
}

TEST_CASE("volume_integral") {
    const GridGeometry g = classify_cells(LevelSetDomain::disk(1.0), 1.0 / 64);
    CHECK(std::abs(volume_integral(ScalarField(g.shape, 1.0), g) - pi) / pi < 0.01);
    CHECK(volume_integral(ScalarField(g.shape, 0.0), g) == 0.0);
    CHECK(std::abs(volume_integral(filled(g, [](Vec2 p) { return p.x; }), g)) < g.h() * g.h());
    const GridGeometry other = classify_cells(LevelSetDomain::disk(1.0), 1.0 / 32);
    CHECK_THROWS_AS(volume_integral(ScalarField(other.shape, 1.0), g), GridMismatchError);
}

TEST_CASE("surface_integral") {
    const GridGeometry g = classify_cells(LevelSetDomain::disk(1.0), 1.0 / 64);
    std::vector<double> ones(g.segments.size(), 1.0), zeros(g.segments.size(), 0.0), nu1;
    for (const BoundarySegment& s : g.segments) nu1.push_back(s.normal.x);
    CHECK(std::abs(surface_integral(ones, g) - 2 * pi) / (2 * pi) < 0.02);
    CHECK(surface_integral(zeros, g) == 0.0);
    CHECK(std::abs(surface_integral(nu1, g)) < g.h() * g.h());
    ones.pop_back();
    CHECK_THROWS_AS(surface_integral(ones, g), GridMismatchError);
}

TEST_CASE("property: area and perimeter converge at first order on the disk") {
    std::vector<double> ea, ep;
    for (int n : {32, 64, 128}) {
        const GridGeometry g = classify_cells(LevelSetDomain::disk(1.0), 1.0 / n);
        ea.push_back(std::abs(g.area() - pi));
        ep.push_back(std::abs(g.perimeter() - 2 * pi));
    }
    for (int k = 0; k < 2; ++k) {
        CHECK(std::log2(ea[k] / ea[k + 1]) >= 1.0);
        CHECK(std::log2(ep[k] / ep[k + 1]) >= 1.0);
    }
}

TEST_CASE("property: normals are unit and outward, signs of curvature") {
    for (const LevelSetDomain& d :
         {LevelSetDomain::disk(1.0), LevelSetDomain::annulus(0.5, 1.0), LevelSetDomain::star(3, 0.4)}) {
        const GridGeometry g = classify_cells(d, 1.0 / 64);
        for (const BoundarySegment& s : g.segments) {
            CHECK(std::abs(s.normal.norm() - 1.0) <= 1e-12);
            CHECK(s.normal.dot(d.gradient(s.midpoint, 1e-6)) > 0);
        }
    }
    const GridGeometry disk = classify_cells(LevelSetDomain::disk(1.0, {0.1, -0.2}), 1.0 / 64);
    for (const BoundarySegment& s : disk.segments) CHECK(s.curvature >= 0);
    const GridGeometry star = classify_cells(LevelSetDomain::star(3, 0.4), 1.0 / 64);
    int negative = 0;
    for (const BoundarySegment& s : star.segments) negative += s.curvature < 0;
    CHECK(negative > 0);
}
