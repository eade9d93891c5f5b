#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <vector>

#include "grb/mesh.hpp"

namespace grb {

// Tensor-product Lagrange finite element space of degree p on a
// structured quad mesh, with globally deduplicated nodes. Local node
// ordering within a cell is a + (p+1)*b for x-index a and y-index b.
class FeSpace {
public:
    FeSpace(QuadMesh mesh, int degree);

    int degree() const noexcept { return degree_; }
    const QuadMesh& mesh() const noexcept { return mesh_; }
    Eigen::Index num_nodes() const noexcept { return coords_.cols(); }
    const Eigen::Matrix2Xd& node_coords() const noexcept { return coords_; }
    const std::vector<int>& cell_nodes(int cell) const {
        return connectivity_[static_cast<size_t>(cell)];
    }

    // Mask of nodes lying on boundary edges carrying any of the tags.
    std::vector<char> nodes_on_tags(const std::vector<int>& tags) const;

private:
    QuadMesh mesh_;
    int degree_;
    Eigen::Matrix2Xd coords_;
    std::vector<std::vector<int>> connectivity_;
};

// All bilinear forms are assembled with (p+1)^2 Gauss-Legendre points per
// cell, exact on affine rectangular elements. Matrix convention:
// entry (i, j) = form(trial phi_j, test phi_i).

// integral over subdomain (or all of Omega when subdomain = -1) of grad w . grad v
Eigen::SparseMatrix<double> assemble_stiffness(const FeSpace& fe, int subdomain = -1);

// integral over Omega of w v
Eigen::SparseMatrix<double> assemble_mass(const FeSpace& fe);

// integral over Omega of w d(v)/d(x_direction); direction 0 or 1
Eigen::SparseMatrix<double> assemble_convection(const FeSpace& fe, int direction);

// integral over boundary edges with the given tag of w v
Eigen::SparseMatrix<double> assemble_boundary_mass(const FeSpace& fe, int tag);

// integral over Omega of f v
Eigen::VectorXd assemble_domain_load(const FeSpace& fe,
                                     const std::function<double(double, double)>& f);

// integral over boundary edges with the given tag of v
Eigen::VectorXd assemble_boundary_load(const FeSpace& fe, int tag);

}  // namespace grb
