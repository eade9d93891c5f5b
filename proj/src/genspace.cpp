#include "grb/genspace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace grb {

ParamBox::ParamBox(Eigen::VectorXd l, Eigen::VectorXd h) : lo(std::move(l)), hi(std::move(h)) {
    if (lo.size() == 0 || lo.size() != hi.size()) {
        throw InvalidInputError("param box: lo/hi size mismatch");
    }
    if ((lo.array() >= hi.array()).any()) {
        throw InvalidInputError("param box: lo must be < hi componentwise");
    }
}

ParamBox ParamBox::interval(double lo, double hi) {
    Eigen::VectorXd l(1), h(1);
    l << lo;
    h << hi;
    return ParamBox(std::move(l), std::move(h));
}

bool ParamBox::contains(const Eigen::VectorXd& mu, double slack) const {
    if (mu.size() != lo.size()) return false;
    const Eigen::ArrayXd span = (hi - lo).array();
    return ((mu - lo).array() >= -slack * span).all() &&
           ((hi - mu).array() >= -slack * span).all();
}

ParamSample::ParamSample(ParamBox box, std::vector<Eigen::VectorXd> points)
    : box_(std::move(box)) {
    for (const auto& p : points) append(p);
}

void ParamSample::append(const Eigen::VectorXd& mu) {
    if (!box_.contains(mu)) {
        throw OutOfRangeError("param sample: point outside the parameter box",
                              mu.size() > 0 ? mu(0) : 0.0);
    }
    for (const auto& p : points_) {
        if ((p - mu).norm() == 0.0) {
            throw InvalidInputError("param sample: duplicate parameter point");
        }
    }
    points_.push_back(mu);
}

bool ParamSample::contains_point(const Eigen::VectorXd& mu, double tol) const {
    for (const auto& p : points_) {
        if ((p - mu).norm() <= tol) return true;
    }
    return false;
}

NeighborTable neighbor_table(const ParamSample& sample, int L) {
    const int N = sample.size();
    if (L < 1 || L > N) {
        throw InvalidInputError("neighbor_table: L must satisfy 1 <= L <= N");
    }
    NeighborTable table;
    table.L = L;
    table.rows.resize(static_cast<size_t>(N));
    std::vector<int> order(static_cast<size_t>(N));
    for (int n = 0; n < N; ++n) {
        std::iota(order.begin(), order.end(), 0);
        std::vector<double> dist(static_cast<size_t>(N));
        for (int j = 0; j < N; ++j) {
            dist[static_cast<size_t>(j)] = (sample.point(n) - sample.point(j)).norm();
        }
        // n first, then nearest others, ties by smaller index
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            if (a == n) return b != n;
            if (b == n) return false;
            const double da = dist[static_cast<size_t>(a)], db = dist[static_cast<size_t>(b)];
            if (da != db) return da < db;
            return a < b;
        });
        table.rows[static_cast<size_t>(n)].assign(order.begin(), order.begin() + L);
    }
    return table;
}

double g_transform(const Activation& act, double v1, double v2) {
    return act.eval(v1) + act.deriv1(v1) * (v2 - v1);
}

double h_transform(const Activation& act, double v1, double v2, double v3) {
    return act.eval(v1) + act.deriv1(v1) * (v2 - v1) +
           0.5 * act.deriv2(v1) * (v2 - v1) * (v3 - v1);
}

std::pair<SnapshotSet, SnapshotNormalization>
normalize_snapshots(const SnapshotSet& snapshots, const Activation& act) {
    if (snapshots.empty()) throw InvalidInputError("normalize_snapshots: empty set");
    const auto S = snapshots.matrix();
    const double vmin = S.minCoeff();
    const double vmax = S.maxCoeff();
    const double box_lo = act.safe_input_lo();
    const double box_hi = act.safe_input_hi();

    SnapshotNormalization norm;
    norm.target = act.kind();
    if (vmax - vmin < 1e-300) {
        // Constant snapshots: center them at the box midpoint.
        norm.scale = 1.0;
        norm.shift = 0.5 * (box_lo + box_hi) - vmin;
    } else {
        norm.scale = (box_hi - box_lo) / (vmax - vmin);
        norm.shift = box_lo - norm.scale * vmin;
    }

    SnapshotSet out(snapshots.space());
    out.reserve(snapshots.size());
    for (Eigen::Index k = 0; k < snapshots.size(); ++k) {
        out.append(norm.scale * snapshots.column(k) + Eigen::VectorXd::Constant(snapshots.dim(), norm.shift),
                   snapshots.tag(k) + " (normalized)");
    }
    return {std::move(out), norm};
}

namespace {

Eigen::VectorXd transformed_column(const Activation& act, const Eigen::MatrixXd& S,
                                   int n, int l, const int* lprime) {
    const Eigen::Index dim = S.rows();
    Eigen::VectorXd out(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        const double v1 = S(i, n);
        const double v2 = S(i, l);
        const double g = lprime ? h_transform(act, v1, v2, S(i, *lprime))
                                : g_transform(act, v1, v2);
        out(i) = act.inverse(act.clamp_to_range(g));
    }
    return out;
}

}  // namespace

SnapshotSet generate_g_set(const SnapshotSet& normalized, const Activation& act,
                           const NeighborTable& neighbors) {
    const int N = static_cast<int>(normalized.size());
    if (static_cast<int>(neighbors.rows.size()) != N) {
        throw DimensionError("generate_g_set: neighbor table size does not match snapshot count");
    }
    const Eigen::MatrixXd S = normalized.matrix();
    SnapshotSet out(normalized.space());
    out.reserve(static_cast<Eigen::Index>(N) * neighbors.L);
    for (int n = 0; n < N; ++n) {
        for (int l : neighbors.rows[static_cast<size_t>(n)]) {
            Eigen::VectorXd col = transformed_column(act, S, n, l, nullptr);
            if (!col.allFinite()) {
                throw InvalidInputError("generate_g_set: non-finite result at (n=" +
                                        std::to_string(n) + ", l=" + std::to_string(l) + ")");
            }
            out.append(col, "G(" + std::to_string(n) + "," + std::to_string(l) + ")");
        }
    }
    return out;
}

SnapshotSet generate_h_set(const SnapshotSet& normalized, const Activation& act,
                           const NeighborTable& neighbors) {
    const int N = static_cast<int>(normalized.size());
    if (static_cast<int>(neighbors.rows.size()) != N) {
        throw DimensionError("generate_h_set: neighbor table size does not match snapshot count");
    }
    const Eigen::MatrixXd S = normalized.matrix();
    SnapshotSet out(normalized.space());
    out.reserve(static_cast<Eigen::Index>(N) * neighbors.L * neighbors.L);
    for (int n = 0; n < N; ++n) {
        for (int l : neighbors.rows[static_cast<size_t>(n)]) {
            for (int lp : neighbors.rows[static_cast<size_t>(n)]) {
                Eigen::VectorXd col = transformed_column(act, S, n, l, &lp);
                if (!col.allFinite()) {
                    throw InvalidInputError("generate_h_set: non-finite result at (n=" +
                                            std::to_string(n) + ", l=" + std::to_string(l) +
                                            ", l'=" + std::to_string(lp) + ")");
                }
                out.append(col, "H(" + std::to_string(n) + "," + std::to_string(l) + "," +
                                    std::to_string(lp) + ")");
            }
        }
    }
    return out;
}

namespace {

// Inverse of the normalization map, applied entrywise: the generated
// snapshots live in the same coordinates as the originals, so the
// self-neighbor entries reproduce them exactly.
SnapshotSet denormalize(const SnapshotSet& set, const SnapshotNormalization& norm) {
    SnapshotSet out(set.space());
    out.reserve(set.size());
    const Eigen::VectorXd shift = Eigen::VectorXd::Constant(set.dim(), norm.shift);
    for (Eigen::Index k = 0; k < set.size(); ++k) {
        out.append(((set.column(k) - shift) / norm.scale).eval(), set.tag(k));
    }
    return out;
}

}  // namespace

GenerativeSpaces build_generative_spaces(const DiscreteSpace& space, const SnapshotSet& snapshots,
                                         const ParamSample& sample, const Activation& act,
                                         int L, int M1, int M2) {
    const int N = static_cast<int>(snapshots.size());
    if (sample.size() != N) {
        throw DimensionError("build_generative_spaces: sample size does not match snapshot count");
    }
    const int L_eff = std::min(L, N);
    const NeighborTable nbrs = neighbor_table(sample, L_eff);

    auto [normalized, norm] = normalize_snapshots(snapshots, act);
    SnapshotSet g_set = denormalize(generate_g_set(normalized, act, nbrs), norm);
    SnapshotSet h_set = denormalize(generate_h_set(normalized, act, nbrs), norm);

    // Union with the original snapshots: guards span(S) against clamping
    // perturbations of the self-neighbor entries.
    g_set.append_set(snapshots);
    h_set.append_set(snapshots);

    GenerativeSpaces result;
    result.normalization = norm;
    const int m1 = std::min<int>(M1, static_cast<int>(g_set.size()));
    const int m2 = std::min<int>(M2, static_cast<int>(h_set.size()));
    result.phi = pod(space, g_set, m1);
    result.psi = pod(space, h_set, m2);
    result.phi_capped = result.phi.size() < M1;
    result.psi_capped = result.psi.size() < M2;
    return result;
}

}  // namespace grb
