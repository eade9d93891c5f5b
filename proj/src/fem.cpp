#include "grb/fem.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <unordered_map>

namespace grb {

namespace {

// Equispaced Lagrange nodes t_j = j/p on [0,1].
double lagrange_value(int p, int i, double t) {
    double v = 1.0;
    for (int j = 0; j <= p; ++j) {
        if (j == i) continue;
        v *= (t * p - j) / double(i - j);
    }
    return v;
}

double lagrange_deriv(int p, int i, double t) {
    double d = 0.0;
    for (int k = 0; k <= p; ++k) {
        if (k == i) continue;
        double term = double(p) / double(i - k);
        for (int j = 0; j <= p; ++j) {
            if (j == i || j == k) continue;
            term *= (t * p - j) / double(i - j);
        }
        d += term;
    }
    return d;
}

// Gauss-Legendre rules mapped to [0,1].
void gauss_rule(int n, std::vector<double>& pts, std::vector<double>& wts) {
    pts.clear();
    wts.clear();
    switch (n) {
        case 1:
            pts = {0.5};
            wts = {1.0};
            break;
        case 2: {
            const double a = 0.5 / std::sqrt(3.0);
            pts = {0.5 - a, 0.5 + a};
            wts = {0.5, 0.5};
            break;
        }
        case 3: {
            const double a = 0.5 * std::sqrt(3.0 / 5.0);
            pts = {0.5 - a, 0.5, 0.5 + a};
            wts = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
            break;
        }
        case 4: {
            const double c1 = std::sqrt((3.0 - 2.0 * std::sqrt(6.0 / 5.0)) / 7.0) / 2.0;
            const double c2 = std::sqrt((3.0 + 2.0 * std::sqrt(6.0 / 5.0)) / 7.0) / 2.0;
            const double w1 = (18.0 + std::sqrt(30.0)) / 72.0;
            const double w2 = (18.0 - std::sqrt(30.0)) / 72.0;
            pts = {0.5 - c2, 0.5 - c1, 0.5 + c1, 0.5 + c2};
            wts = {w2, w1, w1, w2};
            break;
        }
        default:
            throw InvalidInputError("fem: unsupported quadrature order");
    }
}

// Reference 1D matrices on [0,1]: mass, stiffness, and the mixed
// G_ij = int l_i'(t) l_j(t) dt (test-derivative row convention).
struct RefTables {
    Eigen::MatrixXd mass, stiff, mixed;
    Eigen::VectorXd load;                       // int l_i dt
    std::vector<double> qp, qw;                 // quadrature on [0,1]
    Eigen::MatrixXd shape;                      // shape(i, q) = l_i(qp_q)
};

RefTables make_ref_tables(int p) {
    const int nn = p + 1;
    RefTables t;
    gauss_rule(nn, t.qp, t.qw);
    const int nq = static_cast<int>(t.qp.size());
    t.mass = Eigen::MatrixXd::Zero(nn, nn);
    t.stiff = Eigen::MatrixXd::Zero(nn, nn);
    t.mixed = Eigen::MatrixXd::Zero(nn, nn);
    t.load = Eigen::VectorXd::Zero(nn);
    t.shape = Eigen::MatrixXd::Zero(nn, nq);
    Eigen::MatrixXd dshape(nn, nq);
    for (int i = 0; i < nn; ++i) {
        for (int q = 0; q < nq; ++q) {
            t.shape(i, q) = lagrange_value(p, i, t.qp[static_cast<size_t>(q)]);
            dshape(i, q) = lagrange_deriv(p, i, t.qp[static_cast<size_t>(q)]);
        }
    }
    for (int q = 0; q < nq; ++q) {
        const double w = t.qw[static_cast<size_t>(q)];
        for (int i = 0; i < nn; ++i) {
            t.load(i) += w * t.shape(i, q);
            for (int j = 0; j < nn; ++j) {
                t.mass(i, j) += w * t.shape(i, q) * t.shape(j, q);
                t.stiff(i, j) += w * dshape(i, q) * dshape(j, q);
                t.mixed(i, j) += w * dshape(i, q) * t.shape(j, q);
            }
        }
    }
    return t;
}

struct NodeKey {
    std::int64_t x, y;
    bool operator==(const NodeKey& o) const noexcept { return x == o.x && y == o.y; }
};

struct NodeKeyHash {
    size_t operator()(const NodeKey& k) const noexcept {
        return std::hash<std::int64_t>()(k.x * 0x9E3779B97F4A7C15LL ^ k.y);
    }
};

using Triplets = std::vector<Eigen::Triplet<double>>;

Eigen::SparseMatrix<double> from_triplets(Eigen::Index n, Triplets& trips) {
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trips.begin(), trips.end());
    A.makeCompressed();
    return A;
}

// Local node indices of a cell side, in edge order.
std::vector<int> side_local_nodes(int p, int side) {
    std::vector<int> idx;
    idx.reserve(static_cast<size_t>(p + 1));
    for (int k = 0; k <= p; ++k) {
        switch (side) {
            case 0: idx.push_back(k); break;                    // b = 0
            case 1: idx.push_back(p + (p + 1) * k); break;      // a = p
            case 2: idx.push_back(k + (p + 1) * p); break;      // b = p
            default: idx.push_back((p + 1) * k); break;         // a = 0
        }
    }
    return idx;
}

}  // namespace

FeSpace::FeSpace(QuadMesh mesh, int degree) : mesh_(std::move(mesh)), degree_(degree) {
    if (degree < 1 || degree > 3) {
        throw InvalidInputError("fem: element degree must be 1, 2, or 3");
    }
    const int p = degree;
    const double snap = mesh_.min_cell_size() / p * 1e-6;
    auto quantize = [snap](double v) { return static_cast<std::int64_t>(std::llround(v / snap)); };

    std::unordered_map<NodeKey, int, NodeKeyHash> ids;
    std::vector<std::pair<double, double>> coords;
    connectivity_.resize(mesh_.cells().size());
    for (size_t ci = 0; ci < mesh_.cells().size(); ++ci) {
        const Cell& c = mesh_.cells()[ci];
        auto& conn = connectivity_[ci];
        conn.resize(static_cast<size_t>((p + 1) * (p + 1)));
        for (int b = 0; b <= p; ++b) {
            for (int a = 0; a <= p; ++a) {
                const double x = c.x0 + c.hx * a / p;
                const double y = c.y0 + c.hy * b / p;
                const NodeKey key{quantize(x), quantize(y)};
                auto [it, inserted] = ids.try_emplace(key, static_cast<int>(coords.size()));
                if (inserted) coords.emplace_back(x, y);
                conn[static_cast<size_t>(a + (p + 1) * b)] = it->second;
            }
        }
    }
    coords_.resize(2, static_cast<Eigen::Index>(coords.size()));
    for (size_t i = 0; i < coords.size(); ++i) {
        coords_(0, static_cast<Eigen::Index>(i)) = coords[i].first;
        coords_(1, static_cast<Eigen::Index>(i)) = coords[i].second;
    }
}

std::vector<char> FeSpace::nodes_on_tags(const std::vector<int>& tags) const {
    std::vector<char> mask(static_cast<size_t>(num_nodes()), 0);
    for (const auto& be : mesh_.boundary()) {
        bool match = false;
        for (int t : tags) match = match || (be.tag == t);
        if (!match) continue;
        const auto& conn = cell_nodes(be.cell);
        for (int local : side_local_nodes(degree_, be.side)) {
            mask[static_cast<size_t>(conn[static_cast<size_t>(local)])] = 1;
        }
    }
    return mask;
}

Eigen::SparseMatrix<double> assemble_stiffness(const FeSpace& fe, int subdomain) {
    const int p = fe.degree();
    const int nn = p + 1;
    const RefTables t = make_ref_tables(p);
    Triplets trips;
    trips.reserve(fe.mesh().cells().size() * static_cast<size_t>(nn * nn * nn * nn));
    for (size_t ci = 0; ci < fe.mesh().cells().size(); ++ci) {
        const Cell& c = fe.mesh().cells()[ci];
        if (subdomain >= 0 && c.subdomain != subdomain) continue;
        const auto& conn = fe.cell_nodes(static_cast<int>(ci));
        for (int b = 0; b < nn; ++b)
            for (int a = 0; a < nn; ++a)
                for (int d = 0; d < nn; ++d)
                    for (int cc = 0; cc < nn; ++cc) {
                        const double val = t.stiff(a, cc) / c.hx * c.hy * t.mass(b, d) +
                                           c.hx * t.mass(a, cc) * t.stiff(b, d) / c.hy;
                        trips.emplace_back(conn[static_cast<size_t>(a + nn * b)],
                                           conn[static_cast<size_t>(cc + nn * d)], val);
                    }
    }
    return from_triplets(fe.num_nodes(), trips);
}

Eigen::SparseMatrix<double> assemble_mass(const FeSpace& fe) {
    const int p = fe.degree();
    const int nn = p + 1;
    const RefTables t = make_ref_tables(p);
    Triplets trips;
    trips.reserve(fe.mesh().cells().size() * static_cast<size_t>(nn * nn * nn * nn));
    for (size_t ci = 0; ci < fe.mesh().cells().size(); ++ci) {
        const Cell& c = fe.mesh().cells()[ci];
        const auto& conn = fe.cell_nodes(static_cast<int>(ci));
        for (int b = 0; b < nn; ++b)
            for (int a = 0; a < nn; ++a)
                for (int d = 0; d < nn; ++d)
                    for (int cc = 0; cc < nn; ++cc) {
                        const double val = c.hx * t.mass(a, cc) * c.hy * t.mass(b, d);
                        trips.emplace_back(conn[static_cast<size_t>(a + nn * b)],
                                           conn[static_cast<size_t>(cc + nn * d)], val);
                    }
    }
    return from_triplets(fe.num_nodes(), trips);
}

Eigen::SparseMatrix<double> assemble_convection(const FeSpace& fe, int direction) {
    if (direction != 0 && direction != 1) {
        throw InvalidInputError("fem: convection direction must be 0 or 1");
    }
    const int p = fe.degree();
    const int nn = p + 1;
    const RefTables t = make_ref_tables(p);
    Triplets trips;
    trips.reserve(fe.mesh().cells().size() * static_cast<size_t>(nn * nn * nn * nn));
    for (size_t ci = 0; ci < fe.mesh().cells().size(); ++ci) {
        const Cell& c = fe.mesh().cells()[ci];
        const auto& conn = fe.cell_nodes(static_cast<int>(ci));
        for (int b = 0; b < nn; ++b)
            for (int a = 0; a < nn; ++a)
                for (int d = 0; d < nn; ++d)
                    for (int cc = 0; cc < nn; ++cc) {
                        // (i=test, j=trial): int phi_j d(phi_i)/dx_dir
                        const double val = direction == 0
                                               ? t.mixed(a, cc) * c.hy * t.mass(b, d)
                                               : c.hx * t.mass(a, cc) * t.mixed(b, d);
                        trips.emplace_back(conn[static_cast<size_t>(a + nn * b)],
                                           conn[static_cast<size_t>(cc + nn * d)], val);
                    }
    }
    return from_triplets(fe.num_nodes(), trips);
}

Eigen::SparseMatrix<double> assemble_boundary_mass(const FeSpace& fe, int tag) {
    const int p = fe.degree();
    const RefTables t = make_ref_tables(p);
    Triplets trips;
    for (const auto& be : fe.mesh().boundary()) {
        if (be.tag != tag) continue;
        const Cell& c = fe.mesh().cells()[static_cast<size_t>(be.cell)];
        const double h = (be.side == 0 || be.side == 2) ? c.hx : c.hy;
        const auto& conn = fe.cell_nodes(be.cell);
        const auto locals = side_local_nodes(p, be.side);
        for (int i = 0; i <= p; ++i)
            for (int j = 0; j <= p; ++j) {
                trips.emplace_back(conn[static_cast<size_t>(locals[static_cast<size_t>(i)])],
                                   conn[static_cast<size_t>(locals[static_cast<size_t>(j)])],
                                   h * t.mass(i, j));
            }
    }
    return from_triplets(fe.num_nodes(), trips);
}

Eigen::VectorXd assemble_domain_load(const FeSpace& fe,
                                     const std::function<double(double, double)>& f) {
    const int p = fe.degree();
    const int nn = p + 1;
    const RefTables t = make_ref_tables(p);
    const int nq = static_cast<int>(t.qp.size());
    Eigen::VectorXd load = Eigen::VectorXd::Zero(fe.num_nodes());
    for (size_t ci = 0; ci < fe.mesh().cells().size(); ++ci) {
        const Cell& c = fe.mesh().cells()[ci];
        const auto& conn = fe.cell_nodes(static_cast<int>(ci));
        for (int qy = 0; qy < nq; ++qy)
            for (int qx = 0; qx < nq; ++qx) {
                const double x = c.x0 + c.hx * t.qp[static_cast<size_t>(qx)];
                const double y = c.y0 + c.hy * t.qp[static_cast<size_t>(qy)];
                const double w = t.qw[static_cast<size_t>(qx)] * t.qw[static_cast<size_t>(qy)] *
                                 c.hx * c.hy * f(x, y);
                for (int b = 0; b < nn; ++b)
                    for (int a = 0; a < nn; ++a) {
                        load(conn[static_cast<size_t>(a + nn * b)]) +=
                            w * t.shape(a, qx) * t.shape(b, qy);
                    }
            }
    }
    return load;
}

Eigen::VectorXd assemble_boundary_load(const FeSpace& fe, int tag) {
    const int p = fe.degree();
    const RefTables t = make_ref_tables(p);
    Eigen::VectorXd load = Eigen::VectorXd::Zero(fe.num_nodes());
    for (const auto& be : fe.mesh().boundary()) {
        if (be.tag != tag) continue;
        const Cell& c = fe.mesh().cells()[static_cast<size_t>(be.cell)];
        const double h = (be.side == 0 || be.side == 2) ? c.hx : c.hy;
        const auto& conn = fe.cell_nodes(be.cell);
        const auto locals = side_local_nodes(p, be.side);
        for (int i = 0; i <= p; ++i) {
            load(conn[static_cast<size_t>(locals[static_cast<size_t>(i)])]) += h * t.load(i);
        }
    }
    return load;
}

}  // namespace grb
