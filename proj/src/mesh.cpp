#include "grb/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>

namespace grb {

namespace {

struct EdgeKey {
    std::int64_t x, y;  // quantized midpoint
    bool operator==(const EdgeKey& o) const noexcept { return x == o.x && y == o.y; }
};

struct EdgeKeyHash {
    size_t operator()(const EdgeKey& k) const noexcept {
        return std::hash<std::int64_t>()(k.x * 0x9E3779B97F4A7C15LL ^ k.y);
    }
};

}  // namespace

QuadMesh QuadMesh::build(const MeshSpec& spec) {
    if (spec.patches.empty()) throw InvalidInputError("mesh: no patches");

    QuadMesh mesh;
    double min_h = std::numeric_limits<double>::infinity();
    for (const auto& p : spec.patches) {
        if (p.nx < 1 || p.ny < 1 || !(p.x1 > p.x0) || !(p.y1 > p.y0)) {
            throw InvalidInputError("mesh: degenerate patch");
        }
        const double hx = (p.x1 - p.x0) / p.nx;
        const double hy = (p.y1 - p.y0) / p.ny;
        min_h = std::min({min_h, hx, hy});
        for (int j = 0; j < p.ny; ++j) {
            for (int i = 0; i < p.nx; ++i) {
                mesh.cells_.push_back(Cell{p.x0 + i * hx, p.y0 + j * hy, hx, hy, p.subdomain});
            }
        }
    }
    mesh.min_h_ = min_h;

    // Edge midpoints quantized well below the cell scale: exterior edges
    // appear once, interior (shared) edges twice.
    const double snap = min_h * 1e-6;
    auto quantize = [snap](double v) { return static_cast<std::int64_t>(std::llround(v / snap)); };
    std::unordered_map<EdgeKey, int, EdgeKeyHash> seen;  // key -> occurrence count
    auto midpoint = [](const Cell& c, int side) {
        switch (side) {
            case 0: return std::pair{c.x0 + 0.5 * c.hx, c.y0};
            case 1: return std::pair{c.x0 + c.hx, c.y0 + 0.5 * c.hy};
            case 2: return std::pair{c.x0 + 0.5 * c.hx, c.y0 + c.hy};
            default: return std::pair{c.x0, c.y0 + 0.5 * c.hy};
        }
    };
    for (const auto& c : mesh.cells_) {
        for (int side = 0; side < 4; ++side) {
            auto [mx, my] = midpoint(c, side);
            ++seen[EdgeKey{quantize(mx), quantize(my)}];
        }
    }
    std::vector<int> patch_of_cell;
    patch_of_cell.reserve(mesh.cells_.size());
    for (int pi = 0; pi < static_cast<int>(spec.patches.size()); ++pi) {
        const auto& p = spec.patches[static_cast<size_t>(pi)];
        for (int k = 0; k < p.nx * p.ny; ++k) patch_of_cell.push_back(pi);
    }

    for (int ci = 0; ci < static_cast<int>(mesh.cells_.size()); ++ci) {
        for (int side = 0; side < 4; ++side) {
            auto [mx, my] = midpoint(mesh.cells_[static_cast<size_t>(ci)], side);
            const int count = seen[EdgeKey{quantize(mx), quantize(my)}];
            if (count == 1) {
                mesh.boundary_.push_back(BoundaryEdge{ci, side, 0});
            } else if (count > 2) {
                throw InvalidInputError("mesh: non-conforming patches (edge shared more than twice)");
            }
        }
    }

    // Mismatched refinement along an interface leaves unmatched edges
    // sitting on the face of another patch.
    auto near = [snap](double a, double b) { return std::abs(a - b) <= snap; };
    for (const auto& be : mesh.boundary_) {
        auto [mx, my] = midpoint(mesh.cells_[static_cast<size_t>(be.cell)], be.side);
        const bool horizontal = be.side == 0 || be.side == 2;
        for (int pi = 0; pi < static_cast<int>(spec.patches.size()); ++pi) {
            if (pi == patch_of_cell[static_cast<size_t>(be.cell)]) continue;
            const auto& p = spec.patches[static_cast<size_t>(pi)];
            const bool on_face = horizontal
                                     ? (near(my, p.y0) || near(my, p.y1)) && mx > p.x0 + snap &&
                                           mx < p.x1 - snap
                                     : (near(mx, p.x0) || near(mx, p.x1)) && my > p.y0 + snap &&
                                           my < p.y1 - snap;
            const bool inside = mx > p.x0 + snap && mx < p.x1 - snap && my > p.y0 + snap &&
                                my < p.y1 - snap;
            if (on_face || inside) {
                throw InvalidInputError("mesh: non-conforming patches (hanging interface edge)");
            }
        }
    }
    return mesh;
}

void QuadMesh::tag_boundary(const std::function<int(double, double)>& tag_of_midpoint) {
    for (auto& be : boundary_) {
        const Cell& c = cells_[static_cast<size_t>(be.cell)];
        double mx = 0.0, my = 0.0;
        switch (be.side) {
            case 0: mx = c.x0 + 0.5 * c.hx; my = c.y0; break;
            case 1: mx = c.x0 + c.hx; my = c.y0 + 0.5 * c.hy; break;
            case 2: mx = c.x0 + 0.5 * c.hx; my = c.y0 + c.hy; break;
            default: mx = c.x0; my = c.y0 + 0.5 * c.hy; break;
        }
        be.tag = tag_of_midpoint(mx, my);
    }
}

}  // namespace grb
