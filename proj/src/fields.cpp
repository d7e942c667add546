#include "chemofluid/fields.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>

namespace chemofluid {

namespace {

constexpr double kMergeThreshold = 0.5;

} // namespace

Mesh::Mesh(GridGeometry geom) : geom_(std::move(geom)) {
    const GridShape& s = geom_.shape;
    const auto& frac = geom_.volume_fraction;
    const std::size_t ncell = s.cells();

    // Merge small cut cells into their best-connected neighbour. Parents are
    // strictly larger in (fraction, -index) order, so chains terminate.
    auto larger = [&](std::size_t a, std::size_t b) {
        return frac[a] > frac[b] || (frac[a] == frac[b] && a < b);
    };
    std::vector<std::size_t> parent(ncell);
    for (std::size_t k = 0; k < ncell; ++k) parent[k] = k;
    for (int j = 0; j < s.ny; ++j) {
        for (int i = 0; i < s.nx; ++i) {
            const std::size_t c = s.cell(i, j);
            if (!(frac[c] > 0) || frac[c] >= kMergeThreshold) continue;
            std::size_t best = c;
            auto consider = [&](std::size_t nb, double aperture) {
                if (frac[nb] > 0 && aperture > 0 && larger(nb, best)) best = nb;
            };
            if (i + 1 < s.nx) consider(s.cell(i + 1, j), geom_.aperture_x[s.xface(i + 1, j)]);
            if (i > 0) consider(s.cell(i - 1, j), geom_.aperture_x[s.xface(i, j)]);
            if (j + 1 < s.ny) consider(s.cell(i, j + 1), geom_.aperture_y[s.yface(i, j + 1)]);
            if (j > 0) consider(s.cell(i, j - 1), geom_.aperture_y[s.yface(i, j)]);
            parent[c] = best;
        }
    }
    auto root = [&](std::size_t c) {
        while (parent[c] != c) c = parent[c];
        return c;
    };

    cv_of_.assign(ncell, -1);
    std::vector<int> root_cv(ncell, -1);
    for (std::size_t c = 0; c < ncell; ++c) {
        if (!(frac[c] > 0)) continue;
        const std::size_t r = root(c);
        if (root_cv[r] < 0) {
            root_cv[r] = static_cast<int>(cv_volume_.size());
            cv_volume_.push_back(0.0);
        }
        cv_of_[c] = root_cv[r];
        cv_volume_[cv_of_[c]] += frac[c] * s.h * s.h;
        if (r != c) ++merged_cells_;
    }
    cv_offsets_.assign(cv_volume_.size() + 1, 0);
    for (std::size_t c = 0; c < ncell; ++c) {
        if (cv_of_[c] >= 0) ++cv_offsets_[cv_of_[c] + 1];
    }
    for (std::size_t k = 1; k < cv_offsets_.size(); ++k) cv_offsets_[k] += cv_offsets_[k - 1];
    cv_members_.resize(cv_offsets_.back());
    {
        std::vector<std::size_t> fill(cv_offsets_.begin(), cv_offsets_.end() - 1);
        for (std::size_t c = 0; c < ncell; ++c) {
            if (cv_of_[c] >= 0) cv_members_[fill[cv_of_[c]]++] = c;
        }
    }

    cv_center_.assign(cv_volume_.size(), Vec2{});
    for (std::size_t cv = 0; cv < cv_volume_.size(); ++cv) {
        Vec2 sum{};
        double w = 0;
        for (std::size_t c : cv_cells(static_cast<int>(cv))) {
            sum = sum + s.cell_center(static_cast<int>(c % s.nx), static_cast<int>(c / s.nx)) * frac[c];
            w += frac[c];
        }
        cv_center_[cv] = sum * (1.0 / w);
    }

    for (int j = 0; j < s.ny; ++j) {
        for (int i = 1; i < s.nx; ++i) {
            const std::size_t a = s.cell(i - 1, j);
            const std::size_t b = s.cell(i, j);
            const double ap = geom_.aperture_x[s.xface(i, j)];
            if (cv_of_[a] >= 0 && cv_of_[b] >= 0 && ap > 0 && cv_of_[a] != cv_of_[b]) {
                links_.push_back({a, b, cv_of_[a], cv_of_[b], s.xface(i, j), true, ap});
            }
        }
    }
    for (int j = 1; j < s.ny; ++j) {
        for (int i = 0; i < s.nx; ++i) {
            const std::size_t a = s.cell(i, j - 1);
            const std::size_t b = s.cell(i, j);
            const double ap = geom_.aperture_y[s.yface(i, j)];
            if (cv_of_[a] >= 0 && cv_of_[b] >= 0 && ap > 0 && cv_of_[a] != cv_of_[b]) {
                links_.push_back({a, b, cv_of_[a], cv_of_[b], s.yface(i, j), false, ap});
            }
        }
    }

    fluid_x_.assign(s.xfaces(), 0);
    fluid_y_.assign(s.yfaces(), 0);
    for (int j = 0; j < s.ny; ++j) {
        for (int i = 1; i < s.nx; ++i) {
            fluid_x_[s.xface(i, j)] = interior(s.cell(i - 1, j)) && interior(s.cell(i, j));
        }
    }
    for (int j = 1; j < s.ny; ++j) {
        for (int i = 0; i < s.nx; ++i) {
            fluid_y_[s.yface(i, j)] = interior(s.cell(i, j - 1)) && interior(s.cell(i, j));
        }
    }

    p_index_.assign(ncell, -1);
    for (std::size_t c = 0; c < ncell; ++c) {
        if (interior(c)) {
            p_index_[c] = static_cast<int>(p_cells_.size());
            p_cells_.push_back(c);
        }
    }
    p_component_.assign(p_cells_.size(), -1);
    for (std::size_t start = 0; start < p_cells_.size(); ++start) {
        if (p_component_[start] >= 0) continue;
        std::deque<std::size_t> queue{start};
        p_component_[start] = n_components_;
        while (!queue.empty()) {
            const std::size_t k = queue.front();
            queue.pop_front();
            const std::size_t c = p_cells_[k];
            const int i = static_cast<int>(c % s.nx);
            const int j = static_cast<int>(c / s.nx);
            auto visit = [&](bool fluid, std::size_t nb) {
                if (!fluid) return;
                const int q = p_index_[nb];
                if (p_component_[q] < 0) {
                    p_component_[q] = n_components_;
                    queue.push_back(static_cast<std::size_t>(q));
                }
            };
            if (i + 1 < s.nx) visit(fluid_x_[s.xface(i + 1, j)], s.cell(i + 1, j));
            if (i > 0) visit(fluid_x_[s.xface(i, j)], s.cell(i - 1, j));
            if (j + 1 < s.ny) visit(fluid_y_[s.yface(i, j + 1)], s.cell(i, j + 1));
            if (j > 0) visit(fluid_y_[s.yface(i, j)], s.cell(i, j - 1));
        }
        ++n_components_;
    }
}

std::span<const std::size_t> Mesh::cv_cells(int cv) const {
    return {cv_members_.data() + cv_offsets_[cv], cv_offsets_[cv + 1] - cv_offsets_[cv]};
}

long Mesh::neighbor(int i, int j, Dir d) const {
    const GridShape& s = geom_.shape;
    int ni = i;
    int nj = j;
    double ap = 0;
    switch (d) {
    case Dir::east:
        if (i + 1 >= s.nx) return -1;
        ni = i + 1;
        ap = geom_.aperture_x[s.xface(i + 1, j)];
        break;
    case Dir::west:
        if (i == 0) return -1;
        ni = i - 1;
        ap = geom_.aperture_x[s.xface(i, j)];
        break;
    case Dir::north:
        if (j + 1 >= s.ny) return -1;
        nj = j + 1;
        ap = geom_.aperture_y[s.yface(i, j + 1)];
        break;
    case Dir::south:
        if (j == 0) return -1;
        nj = j - 1;
        ap = geom_.aperture_y[s.yface(i, j)];
        break;
    }
    const std::size_t nb = s.cell(ni, nj);
    if (cv_of_[nb] < 0 || !(ap > 0)) return -1;
    return static_cast<long>(nb);
}

std::vector<double> Mesh::restrict_cv(const ScalarField& s) const {
    require_same_grid(s.shape(), shape(), "restrict_cv");
    std::vector<double> out(num_cv(), 0.0);
    for (std::size_t cv = 0; cv < num_cv(); ++cv) {
        double num = 0;
        double den = 0;
        for (std::size_t c : cv_cells(static_cast<int>(cv))) {
            num += geom_.volume_fraction[c] * s[c];
            den += geom_.volume_fraction[c];
        }
        out[cv] = num / den;
    }
    return out;
}

ScalarField Mesh::prolong_cv(std::span<const double> cv_values) const {
    ScalarField out(shape());
    for (std::size_t c = 0; c < out.size(); ++c) {
        if (cv_of_[c] >= 0) out[c] = cv_values[cv_of_[c]];
    }
    return out;
}

ScalarField Mesh::make_cv_consistent(const ScalarField& s) const {
    const auto cv = restrict_cv(s);
    return prolong_cv(cv);
}

namespace {

double neighbor_or_self(const Mesh& m, const ScalarField& s, int i, int j, Dir d, std::size_t self) {
    const long nb = m.neighbor(i, j, d);
    return nb >= 0 ? s[static_cast<std::size_t>(nb)] : s[self];
}

ScalarField from_cv_accumulator(const Mesh& mesh, std::vector<double> acc) {
    for (std::size_t cv = 0; cv < acc.size(); ++cv) acc[cv] /= mesh.cv_volume(static_cast<int>(cv));
    return mesh.prolong_cv(acc);
}

double face_value(const VectorField& w, const Link& l) { return l.x_axis ? w.u()[l.face] : w.v()[l.face]; }

} // namespace

CellGradient gradient_neumann(const Mesh& mesh, const ScalarField& s) {
    const GridShape& g = mesh.shape();
    require_same_grid(s.shape(), g, "gradient_neumann");
    CellGradient out{ScalarField(g), ScalarField(g)};
    const double inv = 1.0 / (2.0 * g.h);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t c = g.cell(i, j);
            if (!mesh.active(c)) continue;
            out.x[c] = (neighbor_or_self(mesh, s, i, j, Dir::east, c) - neighbor_or_self(mesh, s, i, j, Dir::west, c)) * inv;
            out.y[c] = (neighbor_or_self(mesh, s, i, j, Dir::north, c) - neighbor_or_self(mesh, s, i, j, Dir::south, c)) * inv;
        }
    }
    return out;
}

ScalarField laplacian_neumann(const Mesh& mesh, const ScalarField& s) {
    require_same_grid(s.shape(), mesh.shape(), "laplacian_neumann");
    std::vector<double> acc(mesh.num_cv(), 0.0);
    for (const Link& l : mesh.links()) {
        const double flux = l.aperture * (s[l.cell_b] - s[l.cell_a]);
        acc[l.cv_a] += flux;
        acc[l.cv_b] -= flux;
    }
    return from_cv_accumulator(mesh, std::move(acc));
}

namespace {

/// First difference along one axis: centred when both neighbours exist,
/// one-sided otherwise, zero for an isolated cell.
double first_difference(const Mesh& m, const ScalarField& s, int i, int j, Dir plus, Dir minus, double h) {
    const long p = m.neighbor(i, j, plus);
    const long q = m.neighbor(i, j, minus);
    const std::size_t c = m.shape().cell(i, j);
    if (p >= 0 && q >= 0) return (s[static_cast<std::size_t>(p)] - s[static_cast<std::size_t>(q)]) / (2 * h);
    if (p >= 0) return (s[static_cast<std::size_t>(p)] - s[c]) / h;
    if (q >= 0) return (s[c] - s[static_cast<std::size_t>(q)]) / h;
    return 0.0;
}

/// Second difference along one axis with a one-sided fallback that uses two
/// cells on the available side.
double second_difference(const Mesh& m, const ScalarField& s, int i, int j, Dir plus, Dir minus, double h) {
    const GridShape& g = m.shape();
    const long p = m.neighbor(i, j, plus);
    const long q = m.neighbor(i, j, minus);
    const std::size_t c = g.cell(i, j);
    if (p >= 0 && q >= 0) {
        return (s[static_cast<std::size_t>(p)] - 2 * s[c] + s[static_cast<std::size_t>(q)]) / (h * h);
    }
    const long one = p >= 0 ? p : q;
    if (one < 0) return 0.0;
    const Dir d = p >= 0 ? plus : minus;
    const int i1 = static_cast<int>(static_cast<std::size_t>(one) % g.nx);
    const int j1 = static_cast<int>(static_cast<std::size_t>(one) / g.nx);
    const long two = m.neighbor(i1, j1, d);
    if (two < 0) return 0.0;
    return (s[static_cast<std::size_t>(two)] - 2 * s[static_cast<std::size_t>(one)] + s[c]) / (h * h);
}

} // namespace

TensorField hessian(const Mesh& mesh, const ScalarField& s) {
    const GridShape& g = mesh.shape();
    require_same_grid(s.shape(), g, "hessian");
    const double h = g.h;
    ScalarField dx(g);
    ScalarField dy(g);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t c = g.cell(i, j);
            if (!mesh.active(c)) continue;
            dx[c] = first_difference(mesh, s, i, j, Dir::east, Dir::west, h);
            dy[c] = first_difference(mesh, s, i, j, Dir::north, Dir::south, h);
        }
    }
    TensorField out(g);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t c = g.cell(i, j);
            if (!mesh.active(c)) continue;
            out.xx[c] = second_difference(mesh, s, i, j, Dir::east, Dir::west, h);
            out.yy[c] = second_difference(mesh, s, i, j, Dir::north, Dir::south, h);
            out.xy[c] = 0.5 * (first_difference(mesh, dy, i, j, Dir::east, Dir::west, h) +
                               first_difference(mesh, dx, i, j, Dir::north, Dir::south, h));
        }
    }
    return out;
}

CellJet jet_extended(const Mesh& mesh, const ScalarField& s) {
    const GridShape& g = mesh.shape();
    require_same_grid(s.shape(), g, "jet_extended");
    CellJet out{gradient_neumann(mesh, s), hessian(mesh, s)};
    auto inside = [&](int i, int j) {
        if (i < 0 || j < 0 || i >= g.nx || j >= g.ny) return false;
        const std::size_t k = g.cell(i, j);
        return mesh.interior(k) && mesh.cv_cells(mesh.cv_of(k)).size() == 1;
    };
    std::array<ScalarField*, 5> f{&out.grad.x, &out.grad.y, &out.hess.xx, &out.hess.xy, &out.hess.yy};
    std::vector<char> known(g.cells(), 0);
    std::size_t missing = 0;
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t k = g.cell(i, j);
            if (!mesh.active(k)) continue;
            bool ok = true;
            for (int b = -1; b <= 1 && ok; ++b) {
                for (int a = -1; a <= 1 && ok; ++a) ok = inside(i + a, j + b);
            }
            if (ok) {
                out.grad.x[k] = (s.at(i + 1, j) - s.at(i - 1, j)) / (2 * g.h);
                out.grad.y[k] = (s.at(i, j + 1) - s.at(i, j - 1)) / (2 * g.h);
            }
            known[k] = ok;
            if (!ok) ++missing;
        }
    }
    const int di[4] = {1, -1, 0, 0};
    const int dj[4] = {0, 0, 1, -1};
    while (missing > 0) {
        std::vector<std::pair<std::size_t, std::array<double, 5>>> fill;
        for (int j = 0; j < g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) {
                const std::size_t k = g.cell(i, j);
                if (known[k] || !mesh.active(k)) continue;
                std::array<double, 5> v{};
                int cnt = 0;
                for (int n = 0; n < 4; ++n) {
                    const int a = i + di[n];
                    const int b = j + dj[n];
                    if (a < 0 || b < 0 || a >= g.nx || b >= g.ny || !known[g.cell(a, b)]) continue;
                    for (int m = 0; m < 5; ++m) v[m] += (*f[m])[g.cell(a, b)];
                    ++cnt;
                }
                if (cnt == 0) continue;
                for (double& x : v) x /= cnt;
                fill.emplace_back(k, v);
            }
        }
        if (fill.empty()) break; // pockets with no interior block keep the plain stencils
        for (const auto& [k, v] : fill) {
            for (int m = 0; m < 5; ++m) (*f[m])[k] = v[m];
            known[k] = 1;
        }
        missing -= fill.size();
    }
    return out;
}

ScalarField advect_conservative(const Mesh& mesh, const ScalarField& s, const VectorField& w) {
    require_same_grid(s.shape(), mesh.shape(), "advect_conservative");
    require_same_grid(w.shape(), mesh.shape(), "advect_conservative");
    const double h = mesh.h();
    std::vector<double> acc(mesh.num_cv(), 0.0);
    for (const Link& l : mesh.links()) {
        const double wf = face_value(w, l);
        const double flux = l.aperture * h * wf * (wf > 0 ? s[l.cell_a] : s[l.cell_b]);
        acc[l.cv_a] -= flux;
        acc[l.cv_b] += flux;
    }
    return from_cv_accumulator(mesh, std::move(acc));
}

ScalarField advect_advective(const Mesh& mesh, const ScalarField& s, const VectorField& w) {
    require_same_grid(s.shape(), mesh.shape(), "advect_advective");
    require_same_grid(w.shape(), mesh.shape(), "advect_advective");
    const double h = mesh.h();
    std::vector<double> acc(mesh.num_cv(), 0.0);
    for (const Link& l : mesh.links()) {
        const double wf = face_value(w, l);
        if (wf > 0) {
            acc[l.cv_b] -= l.aperture * h * wf * (s[l.cell_b] - s[l.cell_a]);
        } else if (wf < 0) {
            acc[l.cv_a] -= l.aperture * h * (-wf) * (s[l.cell_a] - s[l.cell_b]);
        }
    }
    return from_cv_accumulator(mesh, std::move(acc));
}

namespace {

/// Bilinear interpolation from cell centres restricted to cells flagged in
/// `ok`; returns false when any of the four cells is not usable.
bool interpolate_cells(const GridShape& g, const std::vector<char>& ok, const ScalarField& f, Vec2 p, double& out) {
    // Biquadratic Lagrange interpolation on the 3x3 block around the nearest centre.
    const double fx = (p.x - g.x0) / g.h - 0.5;
    const double fy = (p.y - g.y0) / g.h - 0.5;
    const int i = static_cast<int>(std::lround(fx));
    const int j = static_cast<int>(std::lround(fy));
    if (i < 1 || j < 1 || i + 1 >= g.nx || j + 1 >= g.ny) return false;
    const double tx = fx - i;
    const double ty = fy - j;
    const double wx[3] = {0.5 * tx * (tx - 1), 1 - tx * tx, 0.5 * tx * (tx + 1)};
    const double wy[3] = {0.5 * ty * (ty - 1), 1 - ty * ty, 0.5 * ty * (ty + 1)};
    double sum = 0;
    for (int b = 0; b < 3; ++b) {
        for (int a = 0; a < 3; ++a) {
            const std::size_t c = g.cell(i + a - 1, j + b - 1);
            if (!ok[c]) return false;
            sum += wx[a] * wy[b] * f[c];
        }
    }
    out = sum;
    return true;
}

} // namespace

BoundaryGradSq normal_derivative_of_gradsq(const Mesh& mesh, const ScalarField& s) {
    const GridShape& g = mesh.shape();
    require_same_grid(s.shape(), g, "normal_derivative_of_gradsq");
    const auto& segs = mesh.geometry().segments;

    // Merged CVs hold reconstructed rather than sampled values; keep them out.
    auto solid = [&](int i, int j) {
        const std::size_t k = g.cell(i, j);
        return mesh.interior(k) && mesh.cv_cells(mesh.cv_of(k)).size() == 1;
    };
    std::vector<char> deep(g.cells(), 0);
    for (int j = 1; j + 1 < g.ny; ++j) {
        for (int i = 1; i + 1 < g.nx; ++i) {
            deep[g.cell(i, j)] =
                solid(i, j) && solid(i + 1, j) && solid(i - 1, j) && solid(i, j + 1) && solid(i, j - 1);
        }
    }
    ScalarField q(g);
    const double inv = 1.0 / (2.0 * g.h);
    for (int j = 1; j + 1 < g.ny; ++j) {
        for (int i = 1; i + 1 < g.nx; ++i) {
            const std::size_t c = g.cell(i, j);
            if (!deep[c]) continue;
            double gx = (s.at(i + 1, j) - s.at(i - 1, j)) * inv;
            double gy = (s.at(i, j + 1) - s.at(i, j - 1)) * inv;
            // Fourth order where the wider stencil stays on sampled cells.
            if (i >= 2 && i + 2 < g.nx && deep[g.cell(i + 1, j)] && deep[g.cell(i - 1, j)]) {
                gx = (8 * (s.at(i + 1, j) - s.at(i - 1, j)) - (s.at(i + 2, j) - s.at(i - 2, j))) * inv / 6;
            }
            if (j >= 2 && j + 2 < g.ny && deep[g.cell(i, j + 1)] && deep[g.cell(i, j - 1)]) {
                gy = (8 * (s.at(i, j + 1) - s.at(i, j - 1)) - (s.at(i, j + 2) - s.at(i, j - 2))) * inv / 6;
            }
            q[c] = gx * gx + gy * gy;
        }
    }

    BoundaryGradSq out;
    out.dq_dnu.assign(segs.size(), 0.0);
    out.q.assign(segs.size(), 0.0);
    out.value.assign(segs.size(), 0.0);
    out.skipped.assign(segs.size(), 0);
    for (std::size_t k = 0; k < segs.size(); ++k) {
        const Vec2 xb = segs[k].midpoint;
        const Vec2 nu = segs[k].normal;
        bool found = false;
        for (double mult = 1.0; mult <= 4.0 + 1e-12 && !found; mult += 0.5) {
            // Samples at depths d, d + h, ...; polynomial in the normal coordinate.
            constexpr int kSamples = 4;
            double dist[kSamples], qs[kSamples], ss[kSamples];
            bool ok = true;
            for (int m = 0; m < kSamples && ok; ++m) {
                dist[m] = (mult + m) * g.h;
                ok = interpolate_cells(g, deep, q, xb - nu * dist[m], qs[m]) &&
                     interpolate_cells(g, deep, s, xb - nu * dist[m], ss[m]);
            }
            if (!ok) continue;
            // Lagrange basis at the boundary (normal coordinate 0, samples at -dist).
            double dq = 0, q0 = 0, s0 = 0;
            for (int m = 0; m < kSamples; ++m) {
                double den = 1, val = 1, der = 0;
                for (int l = 0; l < kSamples; ++l) {
                    if (l == m) continue;
                    den *= dist[l] - dist[m];
                    double prod = 1;
                    for (int r = 0; r < kSamples; ++r) {
                        if (r != m && r != l) prod *= dist[r];
                    }
                    der += prod;
                    val *= dist[l];
                }
                dq += qs[m] * der / den;
                q0 += qs[m] * val / den;
                s0 += ss[m] * val / den;
            }
            out.dq_dnu[k] = dq;
            out.q[k] = std::max(0.0, q0);
            out.value[k] = s0;
            found = true;
        }
        if (!found) {
            out.skipped[k] = 1;
            ++out.num_skipped;
        }
    }
    return out;
}

ScalarField divergence(const Mesh& mesh, const VectorField& u) {
    const GridShape& g = mesh.shape();
    require_same_grid(u.shape(), g, "divergence");
    ScalarField out(g);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            out.at(i, j) = (u.u()[g.xface(i + 1, j)] - u.u()[g.xface(i, j)] + u.v()[g.yface(i, j + 1)] -
                            u.v()[g.yface(i, j)]) / g.h;
        }
    }
    return out;
}

ScalarField reconstruct_merged(const Mesh& mesh, const ScalarField& s) {
    const GridShape& g = mesh.shape();
    require_same_grid(s.shape(), g, "reconstruct_merged");
    const std::vector<double> v = mesh.restrict_cv(s);
    // Normal equations of the least-squares gradient per CV.
    std::vector<std::array<double, 5>> ne(mesh.num_cv(), {0, 0, 0, 0, 0});
    for (const Link& l : mesh.links()) {
        const Vec2 d = mesh.cv_center(l.cv_b) - mesh.cv_center(l.cv_a);
        const double dv = v[l.cv_b] - v[l.cv_a];
        for (int side = 0; side < 2; ++side) {
            auto& e = ne[side == 0 ? l.cv_a : l.cv_b];
            e[0] += d.x * d.x;
            e[1] += d.x * d.y;
            e[2] += d.y * d.y;
            e[3] += d.x * dv;
            e[4] += d.y * dv;
        }
    }
    ScalarField out = s;
    for (std::size_t cv = 0; cv < mesh.num_cv(); ++cv) {
        const auto cells = mesh.cv_cells(static_cast<int>(cv));
        if (cells.size() < 2) continue;
        const auto& e = ne[cv];
        const double det = e[0] * e[2] - e[1] * e[1];
        Vec2 grad{};
        if (det > 1e-12 * (e[0] * e[2] + 1e-300)) {
            grad = {(e[2] * e[3] - e[1] * e[4]) / det, (e[0] * e[4] - e[1] * e[3]) / det};
        }
        const Vec2 xc = mesh.cv_center(static_cast<int>(cv));
        for (std::size_t c : cells) {
            const Vec2 x = g.cell_center(static_cast<int>(c % g.nx), static_cast<int>(c / g.nx));
            out[c] = v[cv] + grad.dot(x - xc);
        }
    }
    return out;
}

CellGradient cell_velocity(const Mesh& mesh, const VectorField& u) {
    const GridShape& g = mesh.shape();
    require_same_grid(u.shape(), g, "cell_velocity");
    CellGradient out{ScalarField(g), ScalarField(g)};
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            out.x.at(i, j) = 0.5 * (u.u()[g.xface(i, j)] + u.u()[g.xface(i + 1, j)]);
            out.y.at(i, j) = 0.5 * (u.v()[g.yface(i, j)] + u.v()[g.yface(i, j + 1)]);
        }
    }
    return out;
}

} // namespace chemofluid
