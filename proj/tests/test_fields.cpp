#include "chemofluid/fields.hpp"
#include "chemofluid/initial.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>

using namespace chemofluid;
using std::numbers::pi;

namespace {

Mesh mesh_for(const LevelSetDomain& d, double h) { return Mesh(classify_cells(d, h)); }

ScalarField sample(const Mesh& m, const std::function<double(Vec2)>& f) {
    const GridShape& g = m.shape();
    ScalarField s(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (m.active(g.cell(i, j))) s.at(i, j) = f(g.cell_center(i, j));
    return s;
}

ScalarField random_field(const Mesh& m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ScalarField s(m.shape());
    for (std::size_t k = 0; k < s.size(); ++k)
        if (m.active(k)) s[k] = u(rng);
    return m.make_cv_consistent(s);
}

VectorField random_velocity(const Mesh& m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    VectorField w(m.shape());
    for (double& x : w.u()) x = u(rng);
    for (double& x : w.v()) x = u(rng);
    return w;
}

/// Cells whose four neighbours are single-cell interior CVs, like the cell itself.
bool deep(const Mesh& m, int i, int j) {
    const GridShape& g = m.shape();
    auto ok = [&](long c) { return c >= 0 && m.interior(c) && m.cv_cells(m.cv_of(c)).size() == 1; };
    if (!ok(static_cast<long>(g.cell(i, j)))) return false;
    for (Dir d : {Dir::east, Dir::west, Dir::north, Dir::south})
        if (!ok(m.neighbor(i, j, d))) return false;
    return true;
}

double abs_sum(const Mesh& m, const ScalarField& s) {
    double a = 0;
    for (std::size_t k = 0; k < s.size(); ++k)
        if (m.active(k)) a += std::abs(s[k]) * m.geometry().volume_fraction[k] * m.h() * m.h();
    return a;
}

/// Unit square [0, 1]^2 as a level set.
LevelSetDomain unit_square() {
    return LevelSetDomain([](double x, double y) { return std::max(std::abs(x - 0.5), std::abs(y - 0.5)) - 0.5; },
                          Box{-0.3, -0.3, 1.3, 1.3}, ShapeKind::custom, "unit square");
}

} // namespace

TEST_CASE("gradient_neumann: constants and linear functions") {
    const Mesh m = mesh_for(LevelSetDomain::disk(1.0), 1.0 / 32);
    const CellGradient g0 = gradient_neumann(m, ScalarField(m.shape(), 3.5));
    for (std::size_t k = 0; k < g0.x.size(); ++k) {
        CHECK(g0.x[k] == 0.0);
        CHECK(g0.y[k] == 0.0);
    }
    const CellGradient g1 = gradient_neumann(m, sample(m, [](Vec2 p) { return p.x; }));
    const GridShape& s = m.shape();
    for (int j = 0; j < s.ny; ++j)
        for (int i = 0; i < s.nx; ++i)
            if (deep(m, i, j)) {
                CHECK(g1.x.at(i, j) == doctest::Approx(1.0).epsilon(1e-12));
                CHECK(std::abs(g1.y.at(i, j)) < 1e-12);
            }
}

TEST_CASE("gradient_neumann: cos(pi x) cos(pi y) on the unit square") {
    std::vector<double> interior, boundary;
    for (int n : {32, 64}) {
        const Mesh m = mesh_for(unit_square(), 1.0 / n);
        auto f = [](Vec2 p) { return std::cos(pi * p.x) * std::cos(pi * p.y); };
        const CellGradient g = gradient_neumann(m, sample(m, f));
        double ei = 0, eb = 0;
        const GridShape& s = m.shape();
        for (int j = 0; j < s.ny; ++j)
            for (int i = 0; i < s.nx; ++i) {
                const std::size_t c = s.cell(i, j);
                if (!m.active(c) || m.cv_cells(m.cv_of(c)).size() != 1) continue;
                const Vec2 p = s.cell_center(i, j);
                const double e = std::max(std::abs(g.x[c] + pi * std::sin(pi * p.x) * std::cos(pi * p.y)),
                                          std::abs(g.y[c] + pi * std::cos(pi * p.x) * std::sin(pi * p.y)));
                (deep(m, i, j) ? ei : eb) = std::max(deep(m, i, j) ? ei : eb, e);
            }
        interior.push_back(ei);
        boundary.push_back(eb);
    }
    CHECK(interior[0] < pi * pi * pi / 6 / (32.0 * 32.0) * 1.01);
    CHECK(std::log2(interior[0] / interior[1]) > 1.8);
    CHECK(boundary[0] < 4.0 / 32.0);
    CHECK(boundary[1] < boundary[0]);
}

TEST_CASE("laplacian_neumann: constants and conservation") {
    const Mesh m = mesh_for(LevelSetDomain::star(3, 0.4), 1.0 / 64);
    const ScalarField l0 = laplacian_neumann(m, ScalarField(m.shape(), 2.0));
    for (std::size_t k = 0; k < l0.size(); ++k) CHECK(l0[k] == 0.0);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const ScalarField l = laplacian_neumann(m, random_field(m, seed));
        CHECK(std::abs(volume_integral(l, m.geometry())) <= 1e-10 * abs_sum(m, l));
    }
}

TEST_CASE("laplacian_neumann: manufactured Neumann profile on the disk") {
    // w = r^2 (2 - r^2) has dw/dr = 0 on r = 1 and lap w = 8 - 16 r^2. The
    // volume-weighted residual is fitted over three refinements.
    std::vector<double> err;
    for (int n : {32, 64, 128, 256}) {
        const Mesh m = mesh_for(LevelSetDomain::disk(1.0), 1.0 / n);
        std::vector<double> w(m.num_cv());
        for (std::size_t cv = 0; cv < w.size(); ++cv) {
            const double r2 = m.cv_center(static_cast<int>(cv)).dot(m.cv_center(static_cast<int>(cv)));
            w[cv] = r2 * (2 - r2);
        }
        const ScalarField l = laplacian_neumann(m, m.prolong_cv(w));
        double e = 0, vol = 0;
        for (std::size_t cv = 0; cv < w.size(); ++cv) {
            const Vec2 p = m.cv_center(static_cast<int>(cv));
            e += std::abs(l[m.cv_cells(static_cast<int>(cv))[0]] - (8 - 16 * p.dot(p))) * m.cv_volume(static_cast<int>(cv));
            vol += m.cv_volume(static_cast<int>(cv));
        }
        err.push_back(e / vol);
    }
    CHECK(std::log2(err.front() / err.back()) / 3.0 >= 1.0);
}

TEST_CASE("hessian: quadratics and the trace bound") {
    const Mesh m = mesh_for(LevelSetDomain::disk(1.0), 1.0 / 32);
    const GridShape& s = m.shape();
    const TensorField hx = hessian(m, sample(m, [](Vec2 p) { return p.x * p.x; }));
    const TensorField hr = hessian(m, sample(m, [](Vec2 p) { return p.dot(p); }));
    for (int j = 0; j < s.ny; ++j)
        for (int i = 0; i < s.nx; ++i) {
            if (!deep(m, i, j)) continue;
            const std::size_t c = s.cell(i, j);
            CHECK(hx.xx[c] == doctest::Approx(2.0).epsilon(1e-9));
            CHECK(std::abs(hx.xy[c]) < 1e-9);
            CHECK(std::abs(hx.yy[c]) < 1e-9);
            CHECK(hr.trace(c) * hr.trace(c) == doctest::Approx(16.0).epsilon(1e-9));
            CHECK(2 * hr.frobenius_sq(c) == doctest::Approx(16.0).epsilon(1e-9));
        }
    const TensorField hz = hessian(m, random_field(m, 7));
    for (std::size_t c = 0; c < hz.xx.size(); ++c) CHECK(hz.trace(c) * hz.trace(c) <= 2 * hz.frobenius_sq(c) + 1e-10);
}

TEST_CASE("property: trace of the Hessian equals the Laplacian for polynomials") {
    const Mesh m = mesh_for(LevelSetDomain::disk(1.0), 1.0 / 32);
    const ScalarField s = sample(m, [](Vec2 p) { return 1 + p.x * p.x * p.y - 0.3 * p.y * p.y * p.y + p.x * p.y; });
    const TensorField h = hessian(m, s);
    const ScalarField l = laplacian_neumann(m, s);
    const GridShape& g = m.shape();
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!deep(m, i, j)) continue;
            const std::size_t c = g.cell(i, j);
            CHECK(std::abs(h.trace(c) - l[c]) <= 1e-8 * std::max(1.0, std::abs(l[c])));
        }
}

TEST_CASE("advect_conservative: constants, conservation, monotone transport") {
    const Mesh m = mesh_for(LevelSetDomain::disk(1.0), 1.0 / 64);
    // Unit speed at the centre, vanishing on the wall.
    const VectorField flow = velocity_from_stream(m, [](Vec2 p) { return p.y * std::pow(1 - p.dot(p), 2); });
    const ScalarField t0 = advect_conservative(m, ScalarField(m.shape(), 1.7), flow);
    for (std::size_t k = 0; k < t0.size(); ++k) CHECK(std::abs(t0[k]) < 1e-12);

    for (std::uint64_t seed : {11u, 12u}) {
        const ScalarField t = advect_conservative(m, random_field(m, seed), random_velocity(m, seed + 100));
        CHECK(std::abs(volume_integral(t, m.geometry())) <= 1e-12 * abs_sum(m, t));
    }

    ScalarField s = sample(m, [](Vec2 p) { return std::abs(p.x + 0.3) < 0.2 ? 1.0 : 0.0; });
    const double dt = 0.25 * m.h();
    for (int k = 0; k < 80; ++k) {
        const ScalarField t = advect_conservative(m, s, flow);
        for (std::size_t c = 0; c < s.size(); ++c) s[c] += dt * t[c];
    }
    const auto [lo, hi] = std::minmax_element(s.values().begin(), s.values().end());
    CHECK(*lo >= -1e-12);
    CHECK(*hi <= 1.0 + 1e-12);
}

TEST_CASE("property: upwind advective transport keeps the range") {
    const Mesh m = mesh_for(LevelSetDomain::star(3, 0.4), 1.0 / 64);
    ScalarField s = random_field(m, 5);
    const VectorField w = random_velocity(m, 6);
    const double dt = 0.25 * m.h(); // inflow over at most 4 faces of speed <= 1
    const ScalarField t = advect_advective(m, s, w);
    for (std::size_t c = 0; c < s.size(); ++c) {
        if (!m.active(c)) continue;
        const double v = s[c] + dt * t[c];
        CHECK(v >= -1e-12);
        CHECK(v <= 1.0 + 1e-12);
    }
}

TEST_CASE("normal_derivative_of_gradsq") {
    const Mesh m = mesh_for(LevelSetDomain::disk(1.0), 1.0 / 64);
    const BoundaryGradSq b0 = normal_derivative_of_gradsq(m, ScalarField(m.shape(), 2.0));
    for (std::size_t k = 0; k < b0.dq_dnu.size(); ++k)
        if (!b0.skipped[k]) CHECK(b0.dq_dnu[k] == 0.0);

    // w = r^2 (2 - r^2): both d|grad w|^2/dnu and 2 kappa |grad w|^2 vanish at r = 1.
    std::vector<double> worst;
    for (int n : {32, 64, 128, 256}) {
        const Mesh mm = mesh_for(LevelSetDomain::disk(1.0), 1.0 / n);
        const BoundaryGradSq b =
            normal_derivative_of_gradsq(mm, sample(mm, [](Vec2 p) { return p.dot(p) * (2 - p.dot(p)); }));
        CHECK(b.num_skipped < b.dq_dnu.size());
        double e = 0;
        for (std::size_t k = 0; k < b.dq_dnu.size(); ++k)
            if (!b.skipped[k]) e = std::max({e, std::abs(b.dq_dnu[k]), 2 * std::abs(b.q[k])});
        worst.push_back(e);
    }
    for (std::size_t k = 1; k < worst.size(); ++k) CHECK(std::log2(worst[k - 1] / worst[k]) >= 1.0);

    const Mesh star = mesh_for(LevelSetDomain::star(3, 0.4), 1.0 / 64);
    const BoundaryGradSq bs = normal_derivative_of_gradsq(
        star, sample(star, [](Vec2 p) { return std::sin(2 * p.x) * std::cos(p.y); }));
    for (std::size_t k = 0; k < bs.dq_dnu.size(); ++k)
        if (!bs.skipped[k]) CHECK(std::isfinite(bs.dq_dnu[k]));
}

TEST_CASE("divergence of a stream-function velocity vanishes") {
    const Mesh m = mesh_for(LevelSetDomain::star(3, 0.4), 1.0 / 64);
    const VectorField u = velocity_from_stream(m, [](Vec2 p) { return std::sin(3 * p.x) * std::exp(p.y); });
    const ScalarField d = divergence(m, u);
    for (std::size_t c = 0; c < d.size(); ++c) CHECK(std::abs(d[c]) < 1e-10);
    for (std::size_t f = 0; f < u.u().size(); ++f)
        if (!m.fluid_xface(f)) CHECK(u.u()[f] == 0.0);
}

TEST_CASE("operators reject fields from another grid") {
    const Mesh a = mesh_for(LevelSetDomain::disk(1.0), 1.0 / 32);
    const Mesh b = mesh_for(LevelSetDomain::disk(1.0), 1.0 / 64);
    CHECK_THROWS_AS(laplacian_neumann(a, ScalarField(b.shape(), 1.0)), GridMismatchError);
    CHECK_THROWS_AS(gradient_neumann(a, ScalarField(b.shape(), 1.0)), GridMismatchError);
}
