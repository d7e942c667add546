// Level-set domains on a Cartesian bounding grid.
//
// A domain is {phi < 0} for a smooth function phi on a bounding box. The
// grid geometry derived from it carries, per cell, a classification and a
// cut-cell volume fraction, per face an aperture, and a list of boundary
// segments (marching segments through the zero level set) with outward unit
// normals and curvature samples.
//
// Curvature sign: div(grad phi / |grad phi|), i.e. positive on arcs that are
// convex seen from inside (a disk of radius R has curvature 1/R; the inner
// circle of an annulus has -1/r_in).

#pragma once

#include "chemofluid/field_types.hpp"
#include "chemofluid/grid.hpp"
#include "chemofluid/grid_io.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace chemofluid {

enum class ShapeKind { disk, annulus, star, custom };

class LevelSetDomain {
public:
    using Function = std::function<double(double, double)>;

    LevelSetDomain(Function phi, Box bbox, ShapeKind kind, std::string description);

    /// phi = |x - center| - radius.
    static LevelSetDomain disk(double radius, Vec2 center = {});
    /// phi = (r - r_in)(r - r_out); negative between the circles.
    static LevelSetDomain annulus(double r_inner, double r_outer);
    /// Star r(theta) = base * (1 + amplitude cos(k theta)); phi = r - r(theta).
    static LevelSetDomain star(int k, double amplitude, double base_radius = 1.0);
    /// Bilinear interpolation of node samples (layout "node").
    static LevelSetDomain from_samples(const GridBlock& samples);

    double operator()(double x, double y) const { return phi_(x, y); }
    double operator()(Vec2 p) const { return phi_(p.x, p.y); }

    /// Centred-difference gradient with the given step.
    Vec2 gradient(Vec2 p, double step) const;

    const Box& bbox() const { return bbox_; }
    ShapeKind kind() const { return kind_; }
    const std::string& description() const { return description_; }

private:
    Function phi_;
    Box bbox_;
    ShapeKind kind_;
    std::string description_;
};

enum class CellClass : std::uint8_t { exterior = 0, boundary_band = 1, interior = 2 };

struct BoundarySegment {
    Vec2 a;
    Vec2 b;
    Vec2 midpoint;
    Vec2 normal;       ///< unit outward normal at the midpoint
    double length = 0; ///< arc-length quadrature weight
    double curvature = 0;
    std::size_t cell = 0;
};

struct GridGeometry {
    GridShape shape;
    std::vector<double> node_phi;
    std::vector<CellClass> cell_class;
    std::vector<double> volume_fraction; ///< in [0, 1], linear cut-cell fraction
    std::vector<double> aperture_x;      ///< wetted fraction of each x-face
    std::vector<double> aperture_y;      ///< wetted fraction of each y-face
    std::vector<BoundarySegment> segments;
    double kappa_max = 0;
    double diameter = 0; ///< extent of the boundary point cloud

    double h() const { return shape.h; }
    double area() const;
    double perimeter() const;
    std::size_t count(CellClass c) const;
};

/// Build the grid geometry. Throws ResolutionError when h leaves fewer than
/// 16 cells per side or a cell is crossed more than twice, GeometryError for
/// an empty interior or an interior closer than 2 cells to the box edge,
/// SingularGradientError when |grad phi| <= 1e-6 on the boundary band.
GridGeometry classify_cells(const LevelSetDomain& domain, double h);

/// Curvature div(grad phi/|grad phi|) at a point within one grid band of the
/// boundary, by centred differences with the given step.
double boundary_curvature(const LevelSetDomain& domain, Vec2 point, double step);

/// 1.1 * max |curvature| over the boundary samples (floored at 1/diameter).
double curvature_bound(const GridGeometry& geom);

/// Fraction-weighted cell quadrature of a cell-centred field over the domain.
double volume_integral(const ScalarField& field, const GridGeometry& geom);

/// Sum of value * arc-length weight over the boundary segments.
double surface_integral(std::span<const double> boundary_values, const GridGeometry& geom);

} // namespace chemofluid
