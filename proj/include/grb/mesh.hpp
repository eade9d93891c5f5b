#pragma once

#include <functional>
#include <vector>

#include "grb/errors.hpp"

namespace grb {

// Axis-aligned rectangular patch subdivided into nx x ny cells.
struct PatchSpec {
    double x0, y0, x1, y1;
    int nx, ny;
    int subdomain = 1;
};

struct MeshSpec {
    std::vector<PatchSpec> patches;
};

struct Cell {
    double x0, y0, hx, hy;
    int subdomain;
};

// side: 0 bottom, 1 right, 2 top, 3 left
struct BoundaryEdge {
    int cell;
    int side;
    int tag = 0;
};

// Structured multi-patch quadrilateral mesh. Patches must meet
// conformingly (matching cell traces along shared interfaces).
class QuadMesh {
public:
    static QuadMesh build(const MeshSpec& spec);

    // Assigns a tag to every boundary edge from its midpoint.
    void tag_boundary(const std::function<int(double, double)>& tag_of_midpoint);

    const std::vector<Cell>& cells() const noexcept { return cells_; }
    const std::vector<BoundaryEdge>& boundary() const noexcept { return boundary_; }
    int num_cells() const noexcept { return static_cast<int>(cells_.size()); }
    double min_cell_size() const noexcept { return min_h_; }

private:
    std::vector<Cell> cells_;
    std::vector<BoundaryEdge> boundary_;
    double min_h_ = 0.0;
};

}  // namespace grb
