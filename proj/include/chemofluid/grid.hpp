// Cartesian grid shape and small geometric value types.
//
// Indexing conventions used everywhere in the library:
//   cell   (i, j), 0 <= i < nx, 0 <= j < ny          -> j * nx + i
//   node   (i, j), 0 <= i <= nx, 0 <= j <= ny        -> j * (nx + 1) + i
//   x-face (i, j) between cells (i-1, j) and (i, j)  -> j * (nx + 1) + i
//   y-face (i, j) between cells (i, j-1) and (i, j)  -> j * nx + i
// Values are stored row-major (j outer, i inner).

#pragma once

#include <cmath>
#include <cstddef>

namespace chemofluid {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
};

struct Box {
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 0.0;
    double y1 = 0.0;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    bool operator==(const Box&) const = default;
};

/// Uniform square-cell grid covering a box.
struct GridShape {
    int nx = 0;
    int ny = 0;
    double h = 0.0;
    double x0 = 0.0;
    double y0 = 0.0;

    std::size_t cells() const { return static_cast<std::size_t>(nx) * ny; }
    std::size_t nodes() const { return static_cast<std::size_t>(nx + 1) * (ny + 1); }
    std::size_t xfaces() const { return static_cast<std::size_t>(nx + 1) * ny; }
    std::size_t yfaces() const { return static_cast<std::size_t>(nx) * (ny + 1); }

    std::size_t cell(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
    std::size_t node(int i, int j) const { return static_cast<std::size_t>(j) * (nx + 1) + i; }
    std::size_t xface(int i, int j) const { return static_cast<std::size_t>(j) * (nx + 1) + i; }
    std::size_t yface(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }

    Vec2 cell_center(int i, int j) const { return {x0 + (i + 0.5) * h, y0 + (j + 0.5) * h}; }
    Vec2 node_pos(int i, int j) const { return {x0 + i * h, y0 + j * h}; }
    Vec2 xface_center(int i, int j) const { return {x0 + i * h, y0 + (j + 0.5) * h}; }
    Vec2 yface_center(int i, int j) const { return {x0 + (i + 0.5) * h, y0 + j * h}; }

    Box box() const { return {x0, y0, x0 + nx * h, y0 + ny * h}; }

    bool operator==(const GridShape&) const = default;
};

} // namespace chemofluid
