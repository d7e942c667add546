// Finite-volume discretisation on the masked grid and the spatial
// operators built on it.
//
// Scalars (n, c, p) are cell-centred. A cell is active when its cut-cell
// volume fraction is positive. Active cells with a fraction below 0.5 are
// merged into the neighbour with the largest fraction; each resulting group
// is a control volume (CV) whose volume is the sum of the member fractions
// times h^2. Fluxes are exchanged across links: grid faces with a positive
// aperture that separate two different CVs. Faces without a link carry no
// flux, which is the discrete zero-flux (Neumann) boundary condition.
//
// Velocity is MAC-staggered. A face is a fluid face when both adjacent cells
// are interior cells; every other face is a no-slip face and holds zero.
// Pressure unknowns are the interior cells.

#pragma once

#include "chemofluid/field_types.hpp"
#include "chemofluid/geometry.hpp"

#include <memory>
#include <span>
#include <vector>

namespace chemofluid {

struct Link {
    std::size_t cell_a; ///< left / bottom cell
    std::size_t cell_b; ///< right / top cell
    int cv_a;
    int cv_b;
    std::size_t face; ///< x-face or y-face index
    bool x_axis;      ///< true: x-face (normal +x), false: y-face (normal +y)
    double aperture;
};

enum class Dir { east, west, north, south };

class Mesh {
public:
    explicit Mesh(GridGeometry geom);

    const GridGeometry& geometry() const { return geom_; }
    const GridShape& shape() const { return geom_.shape; }
    double h() const { return geom_.shape.h; }

    bool active(std::size_t cell) const { return cv_of_[cell] >= 0; }
    bool interior(std::size_t cell) const { return geom_.cell_class[cell] == CellClass::interior; }
    int cv_of(std::size_t cell) const { return cv_of_[cell]; }
    std::size_t num_cv() const { return cv_volume_.size(); }
    double cv_volume(int cv) const { return cv_volume_[cv]; }
    std::span<const std::size_t> cv_cells(int cv) const;
    std::span<const Link> links() const { return links_; }
    std::size_t merged_cells() const { return merged_cells_; }

    /// Neighbour that participates in stencils: active and sharing a face of
    /// positive aperture. Returns -1 when absent (mirror ghost applies).
    long neighbor(int i, int j, Dir d) const;

    /// Fraction-weighted mean of the member cell centres.
    Vec2 cv_center(int cv) const { return cv_center_[cv]; }

    bool fluid_xface(std::size_t f) const { return fluid_x_[f] != 0; }
    bool fluid_yface(std::size_t f) const { return fluid_y_[f] != 0; }

    /// Pressure unknown index of a cell (-1 for non-interior cells).
    int pressure_index(std::size_t cell) const { return p_index_[cell]; }
    std::size_t num_pressure() const { return p_cells_.size(); }
    std::span<const std::size_t> pressure_cells() const { return p_cells_; }
    /// Connected component of each pressure unknown (fluid-face adjacency).
    std::span<const int> pressure_components() const { return p_component_; }
    int num_pressure_components() const { return n_components_; }

    /// Cell values -> CV values (fraction-weighted mean over members).
    std::vector<double> restrict_cv(const ScalarField& s) const;
    /// CV values -> cell field (inactive cells set to zero).
    ScalarField prolong_cv(std::span<const double> cv_values) const;
    /// Replace every member value by its CV mean.
    ScalarField make_cv_consistent(const ScalarField& s) const;

private:
    GridGeometry geom_;
    std::vector<int> cv_of_;
    std::vector<double> cv_volume_;
    std::vector<Vec2> cv_center_;
    std::vector<std::size_t> cv_offsets_;
    std::vector<std::size_t> cv_members_;
    std::vector<Link> links_;
    std::vector<char> fluid_x_;
    std::vector<char> fluid_y_;
    std::vector<int> p_index_;
    std::vector<std::size_t> p_cells_;
    std::vector<int> p_component_;
    int n_components_ = 0;
    std::size_t merged_cells_ = 0;
};

using MeshPtr = std::shared_ptr<const Mesh>;

struct CellGradient {
    ScalarField x;
    ScalarField y;
};

/// Centred differences; a missing neighbour is replaced by the cell's own
/// value (mirror ghost, zero normal derivative across that face).
CellGradient gradient_neumann(const Mesh& mesh, const ScalarField& s);

/// Flux-form 5-point Laplacian with zero boundary flux, per control volume.
/// The fraction-weighted integral of the result vanishes to rounding.
ScalarField laplacian_neumann(const Mesh& mesh, const ScalarField& s);

/// Centred second differences, falling back to one-sided ones (two cells on
/// the available side) next to the boundary. The cross term averages the two
/// orders of nested first differences so the result is exactly symmetric.
TensorField hessian(const Mesh& mesh, const ScalarField& s);

/// Centred gradient and Hessian at cells whose 3x3 block consists of interior
/// single-cell CVs; every
/// other active cell takes the average of already-filled 4-neighbours,
/// sweeping outward from the interior.
struct CellJet {
    CellGradient grad;
    TensorField hess;
};
CellJet jet_extended(const Mesh& mesh, const ScalarField& s);

/// -div(w s) with first-order upwind face values; w is a face velocity with
/// the MAC layout. Only links carry flux.
ScalarField advect_conservative(const Mesh& mesh, const ScalarField& s, const VectorField& w);

/// -(w . grad s) in upwind advective form: each CV only sees inflow faces.
/// Preserves the range of s for dt * inflow <= volume.
ScalarField advect_advective(const Mesh& mesh, const ScalarField& s, const VectorField& w);

/// Boundary samples of q = |grad s|^2 derived from deep interior cells.
struct BoundaryGradSq {
    std::vector<double> dq_dnu;   ///< one-sided d q / d nu
    std::vector<double> q;        ///< q extrapolated to the boundary
    std::vector<double> value;    ///< s extrapolated to the boundary
    std::vector<char> skipped;    ///< no deep stencil within 4h
    std::size_t num_skipped = 0;
};

/// d|grad s|^2/d nu at each boundary segment. q is formed with centred
/// gradients at single-cell interior CVs whose four neighbours are the same;
/// it is sampled by biquadratic interpolation at depths d, d + h, d + 2h,
/// d + 3h along -nu (d from h to 4h) and differentiated through the cubic in
/// the normal coordinate.
BoundaryGradSq normal_derivative_of_gradsq(const Mesh& mesh, const ScalarField& s);

/// MAC divergence per cell: (u_e - u_w + v_n - v_s) / h.
ScalarField divergence(const Mesh& mesh, const VectorField& u);

/// Undo the piecewise-constant representation of merged CVs: each member of
/// a multi-cell CV gets v_cv + G . (x_cell - x_cv), with G a least-squares
/// gradient from the linked neighbour CVs. Single-cell CVs are unchanged.
/// Derivative stencils applied to the result see no artificial jumps.
ScalarField reconstruct_merged(const Mesh& mesh, const ScalarField& s);

/// Cell-centred average of the MAC velocity.
CellGradient cell_velocity(const Mesh& mesh, const VectorField& u);

} // namespace chemofluid
