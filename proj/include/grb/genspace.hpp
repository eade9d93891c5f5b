#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "grb/activation.hpp"
#include "grb/space.hpp"

namespace grb {

// Axis-aligned parameter box D = prod [lo_p, hi_p].
struct ParamBox {
    Eigen::VectorXd lo, hi;

    ParamBox() = default;
    ParamBox(Eigen::VectorXd l, Eigen::VectorXd h);
    static ParamBox interval(double lo, double hi);

    int dim() const noexcept { return static_cast<int>(lo.size()); }
    bool contains(const Eigen::VectorXd& mu, double slack = 1e-12) const;
};

// Ordered, pairwise-distinct parameter points inside a box.
class ParamSample {
public:
    ParamSample() = default;
    explicit ParamSample(ParamBox box) : box_(std::move(box)) {}
    ParamSample(ParamBox box, std::vector<Eigen::VectorXd> points);

    void append(const Eigen::VectorXd& mu);
    bool contains_point(const Eigen::VectorXd& mu, double tol = 0.0) const;

    int size() const noexcept { return static_cast<int>(points_.size()); }
    const Eigen::VectorXd& point(int n) const { return points_[static_cast<size_t>(n)]; }
    const std::vector<Eigen::VectorXd>& points() const noexcept { return points_; }
    const ParamBox& box() const noexcept { return box_; }

private:
    ParamBox box_;
    std::vector<Eigen::VectorXd> points_;
};

// Row n lists n itself first, then the L-1 nearest other sample points.
struct NeighborTable {
    std::vector<std::vector<int>> rows;
    int L = 0;
};

// Affine map y = scale*x + shift taking observed snapshot values into
// the activation's safe input box.
struct SnapshotNormalization {
    double scale = 1.0;
    double shift = 0.0;
    ActivationKind target = ActivationKind::tanh;
};

// Nearest neighbors by Euclidean distance on raw parameter coordinates;
// ties broken by smaller index.
NeighborTable neighbor_table(const ParamSample& sample, int L);

// G(v1, v2) = sigma(v1) + sigma'(v1) (v2 - v1)
double g_transform(const Activation& act, double v1, double v2);

// H(v1, v2, v3) = G(v1, v2) + 1/2 sigma''(v1) (v2 - v1)(v3 - v1)
double h_transform(const Activation& act, double v1, double v2, double v3);

std::pair<SnapshotSet, SnapshotNormalization>
normalize_snapshots(const SnapshotSet& snapshots, const Activation& act);

// N*L fields rho_nl = sigma^-1(clamp(G(xi_n, xi_l))), l over row n of the
// neighbor table, n outer / neighbor rank inner. Input must be normalized.
SnapshotSet generate_g_set(const SnapshotSet& normalized, const Activation& act,
                           const NeighborTable& neighbors);

// N*L^2 fields varrho_nll' = sigma^-1(clamp(H(xi_n, xi_l, xi_l'))),
// (n, l, l') lexicographic.
SnapshotSet generate_h_set(const SnapshotSet& normalized, const Activation& act,
                           const NeighborTable& neighbors);

struct GenerativeSpaces {
    Basis phi;  // POD of G-set + original snapshots, M1 modes
    Basis psi;  // POD of H-set + original snapshots, M2 modes
    SnapshotNormalization normalization;
    bool phi_capped = false;  // requested M1 exceeded available rank
    bool psi_capped = false;
};

GenerativeSpaces build_generative_spaces(const DiscreteSpace& space, const SnapshotSet& snapshots,
                                         const ParamSample& sample, const Activation& act,
                                         int L, int M1, int M2);

}  // namespace grb
