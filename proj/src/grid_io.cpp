#include "chemofluid/grid_io.hpp"

#include "chemofluid/errors.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace chemofluid {

namespace {

constexpr const char* kMagic = "chemofluid-grid";

bool valid_layout(const std::string& layout) {
    return layout == "node" || layout == "cell" || layout == "xface" || layout == "yface";
}

} // namespace

void write_grid_blocks(std::ostream& os, const std::vector<GridBlock>& blocks) {
    os << kMagic << " 1\n";
    os << std::setprecision(17);
    for (const auto& b : blocks) {
        if (b.values.size() != static_cast<std::size_t>(b.nx) * b.ny) {
            throw GridMismatchError("block '" + b.name + "': value count does not match nx*ny");
        }
        os << "block " << b.name << ' ' << b.layout << ' ' << b.nx << ' ' << b.ny << ' ' << b.bbox.x0 << ' '
           << b.bbox.y0 << ' ' << b.bbox.x1 << ' ' << b.bbox.y1 << '\n';
        for (int j = 0; j < b.ny; ++j) {
            for (int i = 0; i < b.nx; ++i) {
                if (i) os << ' ';
                os << b.values[static_cast<std::size_t>(j) * b.nx + i];
            }
            os << '\n';
        }
    }
}

std::vector<GridBlock> read_grid_blocks(std::istream& is) {
    std::string magic;
    int version = 0;
    if (!(is >> magic >> version) || magic != kMagic || version != 1) {
        throw GridMismatchError("not a chemofluid-grid v1 stream");
    }
    std::vector<GridBlock> blocks;
    std::string word;
    while (is >> word) {
        if (word != "block") throw GridMismatchError("expected 'block', found '" + word + "'");
        GridBlock b;
        if (!(is >> b.name >> b.layout >> b.nx >> b.ny >> b.bbox.x0 >> b.bbox.y0 >> b.bbox.x1 >> b.bbox.y1)) {
            throw GridMismatchError("truncated block header");
        }
        if (!valid_layout(b.layout)) throw GridMismatchError("unknown layout '" + b.layout + "'");
        if (b.nx <= 0 || b.ny <= 0) throw GridMismatchError("block '" + b.name + "': non-positive size");
        if (!(b.bbox.x1 > b.bbox.x0) || !(b.bbox.y1 > b.bbox.y0)) {
            throw GridMismatchError("block '" + b.name + "': empty bounding box");
        }
        b.values.resize(static_cast<std::size_t>(b.nx) * b.ny);
        for (auto& v : b.values) {
            if (!(is >> v)) throw GridMismatchError("block '" + b.name + "': truncated values");
        }
        blocks.push_back(std::move(b));
    }
    return blocks;
}

void write_grid_file(const std::string& path, const std::vector<GridBlock>& blocks) {
    std::ofstream os(path);
    if (!os) throw Error("cannot open '" + path + "' for writing");
    write_grid_blocks(os, blocks);
    if (!os) throw Error("write to '" + path + "' failed");
}

std::vector<GridBlock> read_grid_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open '" + path + "'");
    return read_grid_blocks(is);
}

const GridBlock& find_block(const std::vector<GridBlock>& blocks, const std::string& name) {
    for (const auto& b : blocks) {
        if (b.name == name) return b;
    }
    throw GridMismatchError("no block named '" + name + "'");
}

} // namespace chemofluid
