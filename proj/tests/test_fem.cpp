#include <doctest.h>

#include <Eigen/SparseLU>
#include <cmath>

#include "grb/fem.hpp"

using namespace grb;

namespace {

FeSpace unit_square_space(int cells, int degree) {
    MeshSpec spec;
    spec.patches.push_back(PatchSpec{0.0, 0.0, 1.0, 1.0, cells, cells, 1});
    QuadMesh mesh = QuadMesh::build(spec);
    mesh.tag_boundary([](double, double) { return 1; });
    return FeSpace(std::move(mesh), degree);
}

}  // namespace

TEST_CASE("mesh construction and boundary detection") {
    MeshSpec spec;
    spec.patches.push_back(PatchSpec{0.0, 0.0, 2.0, 1.0, 4, 2, 1});
    const QuadMesh mesh = QuadMesh::build(spec);
    CHECK(mesh.num_cells() == 8);
    // 4 + 4 bottom/top edges plus 2 + 2 side edges
    CHECK(mesh.boundary().size() == 12);

    // non-conforming interface: 2 cells against 3 along a shared edge
    MeshSpec bad;
    bad.patches.push_back(PatchSpec{0.0, 0.0, 1.0, 1.0, 2, 2, 1});
    bad.patches.push_back(PatchSpec{0.0, 1.0, 1.0, 2.0, 3, 3, 2});
    CHECK_THROWS_AS((void)QuadMesh::build(bad), InvalidInputError);
}

TEST_CASE("node counts for tensor Lagrange spaces") {
    for (int p = 1; p <= 3; ++p) {
        const FeSpace fe = unit_square_space(4, p);
        CHECK(fe.num_nodes() == (4 * p + 1) * (4 * p + 1));
    }
    // two conforming patches share interface nodes exactly once
    MeshSpec spec;
    spec.patches.push_back(PatchSpec{0.0, 0.0, 1.0, 1.0, 2, 2, 1});
    spec.patches.push_back(PatchSpec{1.0, 0.0, 2.0, 1.0, 2, 2, 2});
    const FeSpace fe(QuadMesh::build(spec), 3);
    CHECK(fe.num_nodes() == 7 * 13);
}

TEST_CASE("element mass matrix: partition of unity") {
    // 1x1 cell, p = 1: row sums of the 4x4 mass matrix are area/4
    const FeSpace fe = unit_square_space(1, 1);
    const Eigen::MatrixXd mass = Eigen::MatrixXd(assemble_mass(fe));
    REQUIRE(mass.rows() == 4);
    for (int i = 0; i < 4; ++i) {
        CHECK(mass.row(i).sum() == doctest::Approx(0.25).epsilon(1e-14));
    }
    CHECK(mass.sum() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("stiffness row sums vanish (constants in the kernel)") {
    for (int p = 1; p <= 3; ++p) {
        const FeSpace fe = unit_square_space(3, p);
        const Eigen::MatrixXd k = Eigen::MatrixXd(assemble_stiffness(fe));
        CHECK((k * Eigen::VectorXd::Ones(k.cols())).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("mass matrix integrates polynomials exactly") {
    const FeSpace fe = unit_square_space(3, 3);
    const auto& coords = fe.node_coords();
    // nodal interpolation of degree-3 tensor polynomials is exact
    Eigen::VectorXd f(fe.num_nodes()), g(fe.num_nodes());
    for (Eigen::Index i = 0; i < fe.num_nodes(); ++i) {
        const double x = coords(0, i), y = coords(1, i);
        f(i) = x * x * x;
        g(i) = y;
    }
    const auto mass = assemble_mass(fe);
    // int x^3 y over the unit square = 1/8
    CHECK(f.dot(mass * g) == doctest::Approx(0.125).epsilon(1e-13));
    // domain load with f(x,y) = x^3 y against the constant-one field
    const Eigen::VectorXd load =
        assemble_domain_load(fe, [](double x, double y) { return x * x * x * y; });
    CHECK(load.sum() == doctest::Approx(0.125).epsilon(1e-13));
}

TEST_CASE("convection matrix matches integration by parts") {
    const FeSpace fe = unit_square_space(3, 2);
    const auto& coords = fe.node_coords();
    Eigen::VectorXd f(fe.num_nodes()), g(fe.num_nodes());
    for (Eigen::Index i = 0; i < fe.num_nodes(); ++i) {
        const double x = coords(0, i), y = coords(1, i);
        f(i) = x * x;        // trial
        g(i) = x * (1 - y);  // test
    }
    // entry convention: g' C f = int f d(g)/dx
    const auto conv_x = assemble_convection(fe, 0);
    // int x^2 * (1-y) dx dy = (1/3)(1/2)
    CHECK(g.dot(conv_x * f) == doctest::Approx(1.0 / 6.0).epsilon(1e-13));
    const auto conv_y = assemble_convection(fe, 1);
    // int x^2 * (-x) = -1/4
    CHECK(g.dot(conv_y * f) == doctest::Approx(-0.25).epsilon(1e-13));
}

TEST_CASE("boundary mass and load on tagged edges") {
    MeshSpec spec;
    spec.patches.push_back(PatchSpec{0.0, 0.0, 1.0, 1.0, 2, 2, 1});
    QuadMesh mesh = QuadMesh::build(spec);
    mesh.tag_boundary([](double, double y) { return y < 1e-12 ? 7 : 0; });  // bottom only
    const FeSpace fe(std::move(mesh), 3);

    const Eigen::VectorXd load = assemble_boundary_load(fe, 7);
    CHECK(load.sum() == doctest::Approx(1.0).epsilon(1e-13));  // length of the bottom edge

    const auto bmass = assemble_boundary_mass(fe, 7);
    const auto& coords = fe.node_coords();
    Eigen::VectorXd f(fe.num_nodes());
    for (Eigen::Index i = 0; i < fe.num_nodes(); ++i) f(i) = coords(0, i);
    // int_0^1 x^2 dx along the bottom edge
    CHECK(f.dot(bmass * f) == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
    // load functional applied to x: int_0^1 x dx
    CHECK(load.dot(f) == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("Poisson patch test: manufactured solution is hit exactly at p=3") {
    const FeSpace fe = unit_square_space(4, 3);
    const auto& coords = fe.node_coords();
    const auto stiffness = assemble_stiffness(fe);
    const Eigen::VectorXd load = assemble_domain_load(fe, [](double x, double y) {
        return 2.0 * y * (1.0 - y) + 2.0 * x * (1.0 - x);  // -lap of x(1-x)y(1-y)
    });

    // eliminate the boundary (u = 0 on all edges)
    const auto mask = fe.nodes_on_tags({1});
    std::vector<int> keep;
    for (Eigen::Index i = 0; i < fe.num_nodes(); ++i) {
        if (!mask[static_cast<size_t>(i)]) keep.push_back(static_cast<int>(i));
    }
    const int n = static_cast<int>(keep.size());
    Eigen::MatrixXd a(n, n);
    Eigen::VectorXd b(n);
    const Eigen::MatrixXd dense = Eigen::MatrixXd(stiffness);
    for (int i = 0; i < n; ++i) {
        b(i) = load(keep[static_cast<size_t>(i)]);
        for (int j = 0; j < n; ++j) {
            a(i, j) = dense(keep[static_cast<size_t>(i)], keep[static_cast<size_t>(j)]);
        }
    }
    const Eigen::VectorXd u = a.ldlt().solve(b);
    for (int i = 0; i < n; ++i) {
        const double x = coords(0, keep[static_cast<size_t>(i)]);
        const double y = coords(1, keep[static_cast<size_t>(i)]);
        CHECK(u(i) == doctest::Approx(x * (1 - x) * y * (1 - y)).epsilon(1e-10).scale(1.0));
    }
}
