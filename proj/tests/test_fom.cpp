#include <doctest.h>

#include <Eigen/SparseCholesky>
#include <filesystem>
#include <fstream>
#include <cmath>
#include <random>

#include "grb/fom.hpp"
#include "oracles.hpp"

using namespace grb;

namespace {

Eigen::VectorXd mu2(double a, double b) {
    Eigen::VectorXd mu(2);
    mu << a, b;
    return mu;
}

Eigen::VectorXd mu4(double a, double b, double c, double d) {
    Eigen::VectorXd mu(4);
    mu << a, b, c, d;
    return mu;
}

// 24-point Gauss-Legendre on [0,1] via Newton iteration on Legendre
// polynomials; test-side quadrature for weak-form oracles.
void gauss24(std::vector<double>& pts, std::vector<double>& wts) {
    const int n = 24;
    pts.resize(n);
    wts.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        pts[static_cast<size_t>(i)] = 0.5 * (1.0 - x);  // map to [0,1], ascending
        wts[static_cast<size_t>(i)] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
}

}  // namespace

TEST_CASE("chebyshev_extended") {
    CHECK(chebyshev_extended(1, 0.0, 10.0) == std::vector<double>{5.0});
    const auto two = chebyshev_extended(2, -1.0, 1.0);
    CHECK(two[0] == doctest::Approx(-1.0));
    CHECK(two[1] == doctest::Approx(1.0));

    const auto five = chebyshev_extended(5, 0.0, 10.0);
    CHECK(five.front() == doctest::Approx(0.0));
    CHECK(five.back() == doctest::Approx(10.0));
    CHECK(five[2] == doctest::Approx(5.0));
    // direct formula oracle
    const double scale = std::cos(M_PI / 10.0);
    for (int k = 1; k <= 5; ++k) {
        const double x = 5.0 + 5.0 * std::cos((2.0 * k - 1.0) * M_PI / 10.0) / scale;
        CHECK(five[static_cast<size_t>(5 - k)] == doctest::Approx(x).epsilon(1e-13));
    }
    CHECK_THROWS_AS((void)chebyshev_extended(3, 1.0, 1.0), InvalidInputError);
}

TEST_CASE("analytic grids carry consistent quadrature weights") {
    const AnalyticGrid g1 = make_grid_1d(101);
    CHECK(g1.space->weights().sum() == doctest::Approx(2.0));
    const AnalyticGrid g2 = make_grid_2d(41);
    CHECK(g2.space->weights().sum() == doctest::Approx(1.0));
    const AnalyticGrid g3 = make_grid_3d(41);
    // cell-volume weights of the ball restriction approximate 4 pi / 3
    CHECK(g3.space->weights().sum() == doctest::Approx(4.0 * M_PI / 3.0).epsilon(0.02));
}

TEST_CASE("1D manifold values") {
    const AnalyticGrid grid = make_grid_1d(2001);
    const Field u0 = analytic_manifold_1d(0.0, grid);
    CHECK(u0.coeffs(0) == 0.0);  // x = 0
    // x = 0.5 at mu = 0: exponentials cancel, denominator 2
    const Eigen::Index i_half = 500;  // 0.5 / (2/2000)
    CHECK(grid.coords(0, i_half) == doctest::Approx(0.5));
    CHECK(u0.coeffs(i_half) == doctest::Approx(0.25).epsilon(1e-12));

    // high-precision scalar oracle at (x=1, mu=4)
    const Field u4 = analytic_manifold_1d(4.0, grid);
    const Eigen::Index i_one = 1000;
    const double expected = static_cast<double>(oracle::manifold_1d_value(1.0L, 4.0L));
    CHECK(u4.coeffs(i_one) == doctest::Approx(expected).epsilon(1e-13));
    CHECK(u4.coeffs.allFinite());

    CHECK_THROWS_AS((void)analytic_manifold_1d(11.0, grid), OutOfRangeError);
}

TEST_CASE("2D manifold values and refinement stability") {
    const AnalyticGrid grid = make_grid_2d(201);
    const Field u = analytic_manifold_2d(Eigen::Vector2d(1.0, 1.0), grid);
    // boundary zeros on x1 = 0 and x1 = 1
    for (Eigen::Index i = 0; i < grid.coords.cols(); ++i) {
        const double x1 = grid.coords(0, i), x2 = grid.coords(1, i);
        if (x1 == 0.0 || x1 == 1.0 || x2 == 1.0) CHECK(u.coeffs(i) == doctest::Approx(0.0));
        if (x1 == 0.5 && x2 == 0.5) {
            CHECK(u.coeffs(i) ==
                  doctest::Approx(0.25 * std::tanh(0.5) * std::tanh(0.5)).epsilon(1e-13));
        }
    }

    // norm convergence under grid refinement at the roughest corner
    const AnalyticGrid fine = make_grid_2d(401);
    const double n_coarse =
        grid.space->norm(analytic_manifold_2d(Eigen::Vector2d(50.0, 50.0), grid).coeffs);
    const double n_fine =
        fine.space->norm(analytic_manifold_2d(Eigen::Vector2d(50.0, 50.0), fine).coeffs);
    CHECK(std::abs(n_coarse - n_fine) / n_fine <= 1e-3);
}

TEST_CASE("3D manifold limits") {
    const AnalyticGrid grid = make_grid_3d(41);
    const Field u = analytic_manifold_3d(2.0, grid);
    for (Eigen::Index i = 0; i < grid.coords.cols(); ++i) {
        const double r = grid.coords.col(i).norm();
        if (r == 0.0) {
            CHECK(u.coeffs(i) ==
                  doctest::Approx(std::exp(1.0 - 1.0 / std::sqrt(1.0 + 1e-6))).epsilon(1e-12));
        }
        if (std::abs(r - 1.0) < 1e-12) CHECK(std::abs(u.coeffs(i)) <= 1e-300);
        if (std::abs(r - 0.5) < 1e-12) CHECK(std::abs(u.coeffs(i)) <= 1e-14);  // sin(pi) = 0
    }
    CHECK_THROWS_AS((void)analytic_manifold_3d(0.5, grid), OutOfRangeError);
}

TEST_CASE("convdiff FOM dimensions and theta") {
    const FullOrderModel fom = build_convdiff_fom(32, 32, 3);
    CHECK(fom.raw_dim() == 9409);  // 97^2 nodes including the Dirichlet ring
    CHECK(fom.dim() == 9025);      // (3*32 - 1)^2 interior
    const Eigen::VectorXd th = fom.affine().theta_values(mu2(7.0, 3.0));
    CHECK(th(0) == 1.0);
    CHECK(th(1) == 7.0);
    CHECK(th(2) == 3.0);
}

TEST_CASE("convdiff coercivity: convection is skew after elimination") {
    const FullOrderModel fom = build_convdiff_fom(16, 16, 3);
    std::mt19937 rng(4);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto a_mu = fom.affine().operator_at(mu2(37.0, 21.0));
    const auto a_0 = fom.affine().operator_at(mu2(0.0, 0.0));
    for (int rep = 0; rep < 5; ++rep) {
        Eigen::VectorXd v(fom.dim());
        for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = gauss(rng);
        const double q_mu = v.dot(a_mu * v);
        const double q_0 = v.dot(a_0 * v);
        CHECK(q_mu == doctest::Approx(q_0).epsilon(1e-10));
        CHECK(q_0 > 0.0);
    }
}

TEST_CASE("affine operator matches a weak-form quadrature oracle") {
    const FullOrderModel fom = build_convdiff_fom(8, 8, 3);
    // trial f = x(1-x)y(1-y), test g = x^2(1-x)y(1-y): both in the p=3
    // space and zero on the boundary, so constraint elimination is exact
    auto f_fun = [](double x, double y) { return x * (1 - x) * y * (1 - y); };
    auto g_fun = [](double x, double y) { return x * x * (1 - x) * y * (1 - y); };
    auto fx = [](double x, double y) { return (1 - 2 * x) * y * (1 - y); };
    auto fy = [](double x, double y) { return x * (1 - x) * (1 - 2 * y); };
    auto gx = [](double x, double y) { return (2 * x - 3 * x * x) * y * (1 - y); };
    auto gy = [](double x, double y) { return x * x * (1 - x) * (1 - 2 * y); };

    std::vector<double> qp, qw;
    gauss24(qp, qw);
    const Eigen::VectorXd mu = mu2(13.0, 29.0);
    double oracle_value = 0.0;
    for (size_t i = 0; i < qp.size(); ++i) {
        for (size_t j = 0; j < qp.size(); ++j) {
            const double x = qp[i], y = qp[j], w = qw[i] * qw[j];
            const double grad = fx(x, y) * gx(x, y) + fy(x, y) * gy(x, y);
            const double conv = f_fun(x, y) * (mu(0) * gx(x, y) + mu(1) * gy(x, y));
            oracle_value += w * (grad - conv);
        }
    }

    // interpolate f, g on the constrained dofs
    const FullOrderModel& m = fom;
    Eigen::VectorXd f(m.dim()), g(m.dim());
    // recover dof coordinates through the field-export path
    const auto a_mu = m.affine().operator_at(mu);
    // build nodal interpolants via solve-free evaluation: need coordinates
    // of constrained dofs; the model stores them for csv export
    // (direct access through write_field_csv would be awkward here, so we
    // reconstruct them from a fresh assembly of the same mesh)
    MeshSpec spec;
    spec.patches.push_back(PatchSpec{0.0, 0.0, 1.0, 1.0, 8, 8, 1});
    QuadMesh mesh = QuadMesh::build(spec);
    mesh.tag_boundary([](double, double) { return 1; });
    const FeSpace fe(std::move(mesh), 3);
    const auto mask = fe.nodes_on_tags({1});
    Eigen::Index red = 0;
    for (Eigen::Index i = 0; i < fe.num_nodes(); ++i) {
        if (mask[static_cast<size_t>(i)]) continue;
        const double x = fe.node_coords()(0, i), y = fe.node_coords()(1, i);
        f(red) = f_fun(x, y);
        g(red) = g_fun(x, y);
        ++red;
    }
    REQUIRE(red == m.dim());
    CHECK(g.dot(a_mu * f) == doctest::Approx(oracle_value).epsilon(1e-12));
}

TEST_CASE("convdiff solve: compliance, linearity, and the series oracle") {
    const FullOrderModel fom = build_convdiff_fom(32, 32, 3);

    // s(mu) = l(u)/100 by construction
    const Field u = fom.solve(mu2(25.0, 10.0));
    CHECK(fom.output(u) == doctest::Approx(fom.affine().load.dot(u.coeffs) / 100.0)
                               .epsilon(1e-12));

    // linearity in the load
    AffineForm doubled = fom.affine();
    doubled.load *= 2.0;
    const FullOrderModel fom2(fom.space_ptr(), std::move(doubled), fom.box(), "convdiff-2l",
                              fom.raw_dim());
    const Field u2 = fom2.solve(mu2(25.0, 10.0));
    CHECK((u2.coeffs - 2.0 * u.coeffs).cwiseAbs().maxCoeff() <= 1e-10 * u.coeffs.norm());

    // zero load -> zero field
    AffineForm zeroed = fom.affine();
    zeroed.load.setZero();
    const FullOrderModel fom0(fom.space_ptr(), std::move(zeroed), fom.box(), "convdiff-0l",
                              fom.raw_dim());
    CHECK(fom0.solve(mu2(25.0, 10.0)).coeffs.norm() == 0.0);

    // mu = (0,0): -lap u = 100, s = int u against the Fourier sine series
    const Field u_poisson = fom.solve(mu2(0.0, 0.0));
    long double series = 0.0L;
    for (int mm = 1; mm <= 599; mm += 2) {
        for (int nn = 1; nn <= 599; nn += 2) {
            series += 1.0L / (static_cast<long double>(mm) * mm * nn * nn * (mm * mm + nn * nn));
        }
    }
    const double s_exact =
        static_cast<double>(6400.0L / std::pow(static_cast<long double>(M_PI), 6.0L) * series);
    CHECK(std::abs(fom.output(u_poisson) - s_exact) / std::abs(s_exact) <= 1e-6);

    CHECK_THROWS_AS((void)fom.solve(mu2(60.0, 0.0)), OutOfRangeError);
}

TEST_CASE("convdiff output converges under mesh refinement") {
    const FullOrderModel coarse = build_convdiff_fom(32, 32, 3);
    const FullOrderModel fine = build_convdiff_fom(64, 64, 3);
    const Eigen::VectorXd mu = mu2(40.0, 15.0);
    const double s_coarse = coarse.output(coarse.solve(mu));
    const double s_fine = fine.output(fine.solve(mu));
    CHECK(std::abs(s_coarse - s_fine) / std::abs(s_fine) <= 1e-4);
}

TEST_CASE("reacdiff FOM: dimensions, theta, SPD at the corners") {
    const FullOrderModel fom = build_reacdiff_fom(3, 3);
    CHECK(fom.affine().num_terms() == 5);
    // stem 46x46 + bar 136x46 - 46 shared, minus 46 Dirichlet nodes
    CHECK(fom.raw_dim() == 46 * 46 + 136 * 46 - 46);
    CHECK(fom.dim() == fom.raw_dim() - 46);

    const Eigen::VectorXd th = fom.affine().theta_values(mu4(1.0, 1.0, 0.0, 0.0));
    CHECK(th(0) == 1.0);
    CHECK(th(1) == 1.0);
    CHECK(th(2) == 0.0);
    CHECK(th(3) == 0.0);
    CHECK(th(4) == 1.0);

    for (int corner = 0; corner < 16; ++corner) {
        const Eigen::VectorXd mu = mu4(corner & 1 ? 10.0 : 1.0, corner & 2 ? 10.0 : 1.0,
                                       corner & 4 ? 10.0 : 0.0, corner & 8 ? 10.0 : 0.0);
        Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(fom.affine().operator_at(mu));
        CHECK(llt.info() == Eigen::Success);
    }
}

TEST_CASE("reacdiff output converges under mesh refinement") {
    const FullOrderModel coarse = build_reacdiff_fom(3, 3);
    const FullOrderModel fine = build_reacdiff_fom(6, 3);
    const Eigen::VectorXd mu = mu4(10.0, 10.0, 10.0, 10.0);
    const double s_coarse = coarse.output(coarse.solve(mu));
    const double s_fine = fine.output(fine.solve(mu));
    CHECK(std::abs(s_coarse - s_fine) / std::abs(s_fine) <= 1e-4);
}

TEST_CASE("fom solve residual contract") {
    const FullOrderModel fom = build_convdiff_fom(16, 16, 2);
    const Eigen::VectorXd mu = mu2(50.0, 50.0);
    const Field u = fom.solve(mu);
    const auto a = fom.affine().operator_at(mu);
    CHECK((a * u.coeffs - fom.affine().load).norm() <= 1e-10 * fom.affine().load.norm());
}

TEST_CASE("field csv export") {
    const FullOrderModel fom = build_convdiff_fom(4, 4, 1);
    const Field u = fom.solve(mu2(1.0, 1.0));
    const auto path = std::filesystem::temp_directory_path() / "grb_field.csv";
    fom.write_field_csv(path, u);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "x,y,value");
    int rows = 0;
    std::string line;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == fom.dim());
    std::filesystem::remove(path);
}
