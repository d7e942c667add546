// Flat text grid format shared by sampled domains, field snapshots
// and checkpoints.
//
// A file is a magic line followed by blocks:
//
//     chemofluid-grid 1
//     block <name> <layout> <nx> <ny> <x0> <y0> <x1> <y1>
//     <ny lines of nx values, row-major, j = 0 first>
//     ...
//
// `layout` is one of `node` (samples at x0 + i*(x1-x0)/(nx-1), inclusive),
// `cell`, `xface` or `yface` (staggered positions of a grid covering the box).
// Values are written with 17 significant digits so a write/read cycle is
// exact.

#pragma once

#include "chemofluid/grid.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace chemofluid {

struct GridBlock {
    std::string name;
    std::string layout = "cell";
    int nx = 0;
    int ny = 0;
    Box bbox;
    std::vector<double> values;
};

void write_grid_blocks(std::ostream& os, const std::vector<GridBlock>& blocks);
std::vector<GridBlock> read_grid_blocks(std::istream& is);

void write_grid_file(const std::string& path, const std::vector<GridBlock>& blocks);
std::vector<GridBlock> read_grid_file(const std::string& path);

/// Find a block by name; throws GridMismatchError when absent.
const GridBlock& find_block(const std::vector<GridBlock>& blocks, const std::string& name);

} // namespace chemofluid
