#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <filesystem>
#include <string>
#include <vector>

#include "grb/fem.hpp"
#include "grb/genspace.hpp"
#include "grb/space.hpp"

namespace grb {

// Parameter coefficient in an affine decomposition: the constant 1
// ("one") or a parameter coordinate ("mu1", "mu2", ...).
struct ThetaDescriptor {
    enum class Kind { one, coord };
    Kind kind = Kind::one;
    int index = 0;  // 1-based, for coord

    double eval(const Eigen::VectorXd& mu) const;
    std::string name() const;
    static ThetaDescriptor parse(const std::string& name);
    static ThetaDescriptor one() { return ThetaDescriptor{Kind::one, 0}; }
    static ThetaDescriptor coord(int idx) { return ThetaDescriptor{Kind::coord, idx}; }
};

// a(w,v;mu) = sum_q Theta^q(mu) a^q(w,v), plus mu-independent load and
// output functionals.
struct AffineForm {
    std::vector<ThetaDescriptor> theta;
    std::vector<Eigen::SparseMatrix<double>> ops;
    Eigen::VectorXd load;
    Eigen::VectorXd output;

    int num_terms() const noexcept { return static_cast<int>(ops.size()); }
    Eigen::VectorXd theta_values(const Eigen::VectorXd& mu) const;
    Eigen::SparseMatrix<double> operator_at(const Eigen::VectorXd& mu) const;
};

class FullOrderModel {
public:
    FullOrderModel(SpacePtr space, AffineForm affine, ParamBox box, std::string label,
                   Eigen::Index raw_dim, Eigen::Matrix2Xd dof_coords = {});

    const DiscreteSpace& space() const noexcept { return *space_; }
    const SpacePtr& space_ptr() const noexcept { return space_; }
    const AffineForm& affine() const noexcept { return affine_; }
    const ParamBox& box() const noexcept { return box_; }
    const std::string& label() const noexcept { return label_; }
    Eigen::Index dim() const noexcept { return space_->dim(); }
    // Node count before Dirichlet elimination (the mesh-level dimension).
    Eigen::Index raw_dim() const noexcept { return raw_dim_; }

    // Sparse direct solve with a residual contract of 1e-10 relative to
    // the load; one iterative refinement step is applied if needed.
    Field solve(const Eigen::VectorXd& mu) const;
    double output(const Field& u) const;

    void write_field_csv(const std::filesystem::path& path, const Field& u) const;

private:
    SpacePtr space_;
    AffineForm affine_;
    ParamBox box_;
    std::string label_;
    Eigen::Index raw_dim_;
    Eigen::Matrix2Xd dof_coords_;
};

// Chebyshev nodes rescaled so the extreme nodes hit the endpoints;
// n = 1 returns the midpoint.
std::vector<double> chebyshev_extended(int n, double lo, double hi);

// -grad^2 u + div(mu u) = 100 on the unit square, homogeneous Dirichlet,
// D = [0,50]^2, output integral of u. Default 32x32 cells at degree 3.
FullOrderModel build_convdiff_fom(int nx = 32, int ny = 32, int degree = 3);

// Reaction-diffusion on a T-shaped domain (stem [1,2]x[0,1], bar
// [0,3]x[1,2]) with per-subdomain conductivity, Robin sides, Dirichlet
// bottom and a flux load on the top. resolution scales the base
// 5x5 / 15x5 patch cells; the default 3 gives 900 cells.
FullOrderModel build_reacdiff_fom(int resolution = 3, int degree = 3);

// Pointwise-sampled analytic solution families: grid coordinates plus
// an L2 quadrature space over them.
struct AnalyticGrid {
    Eigen::MatrixXd coords;  // spatial dim x points
    SpacePtr space;
    ParamBox box;
    std::string label;
};

AnalyticGrid make_grid_1d(int n = 2001);  // [0,2], trapezoid weights
AnalyticGrid make_grid_2d(int n = 201);   // [0,1]^2, tensor trapezoid weights
AnalyticGrid make_grid_3d(int n = 41);    // unit ball from an n^3 box grid, cell volumes

// Shock-profile family on [0,2], mu in [0,10].
Field analytic_manifold_1d(double mu, const AnalyticGrid& grid);
// Boundary-layer family on [0,1]^2, mu in [1,50]^2.
Field analytic_manifold_2d(const Eigen::Vector2d& mu, const AnalyticGrid& grid);
// Parametrized spherical Bessel family on the unit ball, mu in [1,20].
Field analytic_manifold_3d(double mu, const AnalyticGrid& grid);

}  // namespace grb
