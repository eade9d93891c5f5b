#include "grb/fom.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace grb {

double ThetaDescriptor::eval(const Eigen::VectorXd& mu) const {
    if (kind == Kind::one) return 1.0;
    if (index < 1 || index > mu.size()) {
        throw DimensionError("theta: coordinate index out of range");
    }
    return mu(index - 1);
}

std::string ThetaDescriptor::name() const {
    return kind == Kind::one ? "one" : "mu" + std::to_string(index);
}

ThetaDescriptor ThetaDescriptor::parse(const std::string& name) {
    if (name == "one") return one();
    if (name.size() > 2 && name.rfind("mu", 0) == 0) {
        const int idx = std::stoi(name.substr(2));
        if (idx >= 1) return coord(idx);
    }
    throw InvalidInputError("theta: cannot parse descriptor \"" + name + "\"");
}

Eigen::VectorXd AffineForm::theta_values(const Eigen::VectorXd& mu) const {
    Eigen::VectorXd values(num_terms());
    for (int q = 0; q < num_terms(); ++q) values(q) = theta[static_cast<size_t>(q)].eval(mu);
    return values;
}

Eigen::SparseMatrix<double> AffineForm::operator_at(const Eigen::VectorXd& mu) const {
    const Eigen::VectorXd th = theta_values(mu);
    Eigen::SparseMatrix<double> A = th(0) * ops[0];
    for (int q = 1; q < num_terms(); ++q) {
        A += th(q) * ops[static_cast<size_t>(q)];
    }
    A.makeCompressed();
    return A;
}

FullOrderModel::FullOrderModel(SpacePtr space, AffineForm affine, ParamBox box, std::string label,
                               Eigen::Index raw_dim, Eigen::Matrix2Xd dof_coords)
    : space_(std::move(space)),
      affine_(std::move(affine)),
      box_(std::move(box)),
      label_(std::move(label)),
      raw_dim_(raw_dim),
      dof_coords_(std::move(dof_coords)) {
    if (affine_.ops.empty() || affine_.theta.size() != affine_.ops.size()) {
        throw InvalidInputError("fom: affine form needs matching theta/operator lists");
    }
    for (const auto& op : affine_.ops) {
        if (op.rows() != space_->dim() || op.cols() != space_->dim()) {
            throw DimensionError("fom: operator dimension does not match space");
        }
    }
}

Field FullOrderModel::solve(const Eigen::VectorXd& mu) const {
    if (!box_.contains(mu)) {
        throw OutOfRangeError("fom " + label_ + ": parameter outside domain",
                              mu.size() > 0 ? mu(0) : 0.0);
    }
    const Eigen::SparseMatrix<double> A = affine_.operator_at(mu);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(A);
    if (lu.info() != Eigen::Success) {
        throw SolverError("fom " + label_ + ": factorization failed at mu = " +
                          std::to_string(mu(0)));
    }
    Eigen::VectorXd u = lu.solve(affine_.load);
    const double lnorm = std::max(affine_.load.norm(), 1e-300);
    double res = (A * u - affine_.load).norm();
    if (res > 1e-10 * lnorm) {
        u += lu.solve((affine_.load - A * u).eval());
        res = (A * u - affine_.load).norm();
    }
    if (res > 1e-10 * lnorm || !u.allFinite()) {
        throw SolverError("fom " + label_ + ": residual " + std::to_string(res) +
                          " exceeds contract at mu = " + std::to_string(mu(0)));
    }
    return Field(std::move(u), space_);
}

double FullOrderModel::output(const Field& u) const {
    if (u.coeffs.size() != space_->dim()) {
        throw DimensionError("fom: field dimension does not match model space");
    }
    return affine_.output.dot(u.coeffs);
}

void FullOrderModel::write_field_csv(const std::filesystem::path& path, const Field& u) const {
    if (dof_coords_.cols() != space_->dim()) {
        throw UnavailableError("fom: no dof coordinates stored for field export");
    }
    std::ofstream out(path);
    if (!out) throw InvalidInputError("fom: cannot open " + path.string());
    out << "x,y,value\n";
    char buf[96];
    for (Eigen::Index i = 0; i < space_->dim(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", dof_coords_(0, i),
                      dof_coords_(1, i), u.coeffs(i));
        out << buf;
    }
}

std::vector<double> chebyshev_extended(int n, double lo, double hi) {
    if (n < 1) throw InvalidInputError("chebyshev_extended: n must be >= 1");
    if (!(lo < hi)) throw InvalidInputError("chebyshev_extended: lo must be < hi");
    const double mid = 0.5 * (lo + hi);
    if (n == 1) return {mid};
    const double half = 0.5 * (hi - lo);
    const double scale = std::cos(M_PI / (2.0 * n));
    std::vector<double> pts(static_cast<size_t>(n));
    for (int k = 1; k <= n; ++k) {
        pts[static_cast<size_t>(k - 1)] =
            mid + half * std::cos((2.0 * k - 1.0) * M_PI / (2.0 * n)) / scale;
    }
    std::sort(pts.begin(), pts.end());
    // The extreme nodes coincide with the endpoints by construction;
    // snap away the last ulp so the points stay inside the box.
    pts.front() = lo;
    pts.back() = hi;
    return pts;
}

namespace {

// Restriction of assembled full-node operators to unconstrained dofs.
struct Constraint {
    std::vector<int> full_to_red;  // -1 for eliminated nodes
    std::vector<int> red_to_full;

    explicit Constraint(const std::vector<char>& dirichlet_mask) {
        full_to_red.assign(dirichlet_mask.size(), -1);
        for (size_t i = 0; i < dirichlet_mask.size(); ++i) {
            if (!dirichlet_mask[i]) {
                full_to_red[i] = static_cast<int>(red_to_full.size());
                red_to_full.push_back(static_cast<int>(i));
            }
        }
    }

    Eigen::Index dim() const { return static_cast<Eigen::Index>(red_to_full.size()); }

    Eigen::SparseMatrix<double> restrict_matrix(const Eigen::SparseMatrix<double>& A) const {
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(static_cast<size_t>(A.nonZeros()));
        for (int k = 0; k < A.outerSize(); ++k) {
            for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
                const int i = full_to_red[static_cast<size_t>(it.row())];
                const int j = full_to_red[static_cast<size_t>(it.col())];
                if (i >= 0 && j >= 0) trips.emplace_back(i, j, it.value());
            }
        }
        Eigen::SparseMatrix<double> R(dim(), dim());
        R.setFromTriplets(trips.begin(), trips.end());
        R.makeCompressed();
        return R;
    }

    Eigen::VectorXd restrict_vector(const Eigen::VectorXd& v) const {
        Eigen::VectorXd r(dim());
        for (Eigen::Index i = 0; i < dim(); ++i) r(i) = v(red_to_full[static_cast<size_t>(i)]);
        return r;
    }
};

}  // namespace

FullOrderModel build_convdiff_fom(int nx, int ny, int degree) {
    if (nx < 4 || ny < 4) throw InvalidInputError("convdiff: nx, ny must be >= 4");
    MeshSpec spec;
    spec.patches.push_back(PatchSpec{0.0, 0.0, 1.0, 1.0, nx, ny, 1});
    QuadMesh mesh = QuadMesh::build(spec);
    mesh.tag_boundary([](double, double) { return 1; });  // Dirichlet everywhere
    FeSpace fe(std::move(mesh), degree);

    const auto stiffness = assemble_stiffness(fe);
    const auto conv_x = assemble_convection(fe, 0);
    const auto conv_y = assemble_convection(fe, 1);
    const auto mass = assemble_mass(fe);
    const Eigen::VectorXd unit_load = assemble_domain_load(fe, [](double, double) { return 1.0; });

    const Constraint constr(fe.nodes_on_tags({1}));

    AffineForm affine;
    affine.theta = {ThetaDescriptor::one(), ThetaDescriptor::coord(1), ThetaDescriptor::coord(2)};
    affine.ops.push_back(constr.restrict_matrix(stiffness));
    affine.ops.push_back(constr.restrict_matrix((-conv_x).eval()));
    affine.ops.push_back(constr.restrict_matrix((-conv_y).eval()));
    affine.load = 100.0 * constr.restrict_vector(unit_load);
    affine.output = constr.restrict_vector(unit_load);

    Eigen::SparseMatrix<double> h1 = stiffness + mass;
    auto space = std::make_shared<DiscreteSpace>(
        DiscreteSpace::with_matrix(constr.restrict_matrix(h1), "convdiff H1"));

    Eigen::VectorXd lo(2), hi(2);
    lo << 0.0, 0.0;
    hi << 50.0, 50.0;

    Eigen::Matrix2Xd dof_coords(2, constr.dim());
    for (Eigen::Index i = 0; i < constr.dim(); ++i) {
        dof_coords.col(i) = fe.node_coords().col(constr.red_to_full[static_cast<size_t>(i)]);
    }
    return FullOrderModel(std::move(space), std::move(affine), ParamBox(lo, hi), "convdiff",
                          fe.num_nodes(), std::move(dof_coords));
}

FullOrderModel build_reacdiff_fom(int resolution, int degree) {
    if (resolution < 1) throw InvalidInputError("reacdiff: resolution must be >= 1");
    const int m = resolution;
    MeshSpec spec;
    spec.patches.push_back(PatchSpec{1.0, 0.0, 2.0, 1.0, 5 * m, 5 * m, 1});   // stem
    spec.patches.push_back(PatchSpec{0.0, 1.0, 3.0, 2.0, 15 * m, 5 * m, 2});  // bar
    QuadMesh mesh = QuadMesh::build(spec);
    mesh.tag_boundary([](double x, double y) {
        (void)x;
        if (y < 1e-12) return 1;          // Gamma1: bottom of the stem (Dirichlet)
        if (y > 2.0 - 1e-12) return 2;    // Gamma2: top of the bar (flux load)
        return y < 1.0 + 1e-12 && y > 1.0 - 1e-12
                   ? 4                    // exposed bar underside
                   : (y < 1.0 ? 3 : 4);   // stem sides : bar sides
    });
    FeSpace fe(std::move(mesh), degree);

    const auto stiff1 = assemble_stiffness(fe, 1);
    const auto stiff2 = assemble_stiffness(fe, 2);
    const auto robin3 = assemble_boundary_mass(fe, 3);
    const auto robin4 = assemble_boundary_mass(fe, 4);
    const auto mass = assemble_mass(fe);
    const Eigen::VectorXd flux_load = assemble_boundary_load(fe, 2);
    const Eigen::VectorXd unit_load = assemble_domain_load(fe, [](double, double) { return 1.0; });

    const Constraint constr(fe.nodes_on_tags({1}));

    AffineForm affine;
    affine.theta = {ThetaDescriptor::coord(1), ThetaDescriptor::coord(2),
                    ThetaDescriptor::coord(3), ThetaDescriptor::coord(4), ThetaDescriptor::one()};
    affine.ops.push_back(constr.restrict_matrix(stiff1));
    affine.ops.push_back(constr.restrict_matrix(stiff2));
    affine.ops.push_back(constr.restrict_matrix(robin3));
    affine.ops.push_back(constr.restrict_matrix(robin4));
    affine.ops.push_back(constr.restrict_matrix(mass));
    affine.load = constr.restrict_vector(flux_load);
    affine.output = constr.restrict_vector(unit_load);

    Eigen::SparseMatrix<double> h1 = stiff1 + stiff2 + mass;
    auto space = std::make_shared<DiscreteSpace>(
        DiscreteSpace::with_matrix(constr.restrict_matrix(h1), "reacdiff H1"));

    Eigen::VectorXd lo(4), hi(4);
    lo << 1.0, 1.0, 0.0, 0.0;
    hi << 10.0, 10.0, 10.0, 10.0;

    Eigen::Matrix2Xd dof_coords(2, constr.dim());
    for (Eigen::Index i = 0; i < constr.dim(); ++i) {
        dof_coords.col(i) = fe.node_coords().col(constr.red_to_full[static_cast<size_t>(i)]);
    }
    return FullOrderModel(std::move(space), std::move(affine), ParamBox(lo, hi), "reacdiff",
                          fe.num_nodes(), std::move(dof_coords));
}

namespace {

Eigen::VectorXd trapezoid_weights(int n, double length) {
    const double h = length / (n - 1);
    Eigen::VectorXd w = Eigen::VectorXd::Constant(n, h);
    w(0) = 0.5 * h;
    w(n - 1) = 0.5 * h;
    return w;
}

}  // namespace

AnalyticGrid make_grid_1d(int n) {
    if (n < 2) throw InvalidInputError("grid 1d: need at least 2 points");
    AnalyticGrid g;
    g.coords.resize(1, n);
    for (int i = 0; i < n; ++i) g.coords(0, i) = 2.0 * i / (n - 1);
    g.space = std::make_shared<DiscreteSpace>(
        DiscreteSpace::with_diagonal_weights(trapezoid_weights(n, 2.0), "manifold-1d L2"));
    g.box = ParamBox::interval(0.0, 10.0);
    g.label = "manifold-1d";
    return g;
}

AnalyticGrid make_grid_2d(int n) {
    if (n < 2) throw InvalidInputError("grid 2d: need at least 2 points per direction");
    AnalyticGrid g;
    g.coords.resize(2, static_cast<Eigen::Index>(n) * n);
    const Eigen::VectorXd w1 = trapezoid_weights(n, 1.0);
    Eigen::VectorXd w(static_cast<Eigen::Index>(n) * n);
    Eigen::Index idx = 0;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i, ++idx) {
            g.coords(0, idx) = double(i) / (n - 1);
            g.coords(1, idx) = double(j) / (n - 1);
            w(idx) = w1(i) * w1(j);
        }
    }
    g.space = std::make_shared<DiscreteSpace>(
        DiscreteSpace::with_diagonal_weights(std::move(w), "manifold-2d L2"));
    Eigen::VectorXd lo(2), hi(2);
    lo << 1.0, 1.0;
    hi << 50.0, 50.0;
    g.box = ParamBox(lo, hi);
    g.label = "manifold-2d";
    return g;
}

AnalyticGrid make_grid_3d(int n) {
    if (n < 2) throw InvalidInputError("grid 3d: need at least 2 points per direction");
    const double h = 2.0 / (n - 1);
    std::vector<Eigen::Vector3d> pts;
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                Eigen::Vector3d x(-1.0 + i * h, -1.0 + j * h, -1.0 + k * h);
                if (x.norm() <= 1.0) pts.push_back(x);
            }
    AnalyticGrid g;
    g.coords.resize(3, static_cast<Eigen::Index>(pts.size()));
    for (size_t i = 0; i < pts.size(); ++i) g.coords.col(static_cast<Eigen::Index>(i)) = pts[i];
    g.space = std::make_shared<DiscreteSpace>(DiscreteSpace::with_diagonal_weights(
        Eigen::VectorXd::Constant(static_cast<Eigen::Index>(pts.size()), h * h * h),
        "manifold-3d L2"));
    g.box = ParamBox::interval(1.0, 20.0);
    g.label = "manifold-3d";
    return g;
}

Field analytic_manifold_1d(double mu, const AnalyticGrid& grid) {
    Eigen::VectorXd mu_vec(1);
    mu_vec << mu;
    if (!grid.box.contains(mu_vec)) {
        throw OutOfRangeError("manifold-1d: mu outside [0,10]", mu);
    }
    Eigen::VectorXd u(grid.coords.cols());
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        const double x = grid.coords(0, i);
        // sqrt((mu+1)/e^62.5) * exp(125 x^2/(mu+1)) evaluated in log space
        const double e = 0.5 * std::log1p(mu) - 31.25 + 125.0 * x * x / (mu + 1.0);
        if (e > 700.0) {
            u(i) = x / (mu + 1.0) * std::exp(-e);  // underflows smoothly to 0
        } else {
            u(i) = x / ((mu + 1.0) * (1.0 + std::exp(e)));
        }
    }
    return Field(std::move(u), grid.space);
}

Field analytic_manifold_2d(const Eigen::Vector2d& mu, const AnalyticGrid& grid) {
    if (!grid.box.contains(mu)) {
        throw OutOfRangeError("manifold-2d: mu outside [1,50]^2", mu(0));
    }
    Eigen::VectorXd u(grid.coords.cols());
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        const double x1 = grid.coords(0, i);
        const double x2 = grid.coords(1, i);
        u(i) = x1 * x2 * std::tanh((1.0 - x1) * mu(0)) * std::tanh((1.0 - x2) * mu(1));
    }
    return Field(std::move(u), grid.space);
}

Field analytic_manifold_3d(double mu, const AnalyticGrid& grid) {
    Eigen::VectorXd mu_vec(1);
    mu_vec << mu;
    if (!grid.box.contains(mu_vec)) {
        throw OutOfRangeError("manifold-3d: mu outside [1,20]", mu);
    }
    Eigen::VectorXd u(grid.coords.cols());
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        const double r = grid.coords.col(i).norm();
        const double z = mu * M_PI * r;
        const double sinc = z < 1e-4 ? 1.0 - z * z / 6.0 : std::sin(z) / z;
        const double r3 = r * r * r;
        const double env = std::exp(1.0 - 1.0 / std::sqrt((1.0 - r3) * (1.0 - r3) + 1e-6));
        u(i) = sinc * env;
    }
    return Field(std::move(u), grid.space);
}

}  // namespace grb
