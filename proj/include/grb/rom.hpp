#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "grb/fom.hpp"
#include "grb/genspace.hpp"

namespace grb {

struct OnlineResult {
    int level = 1;              // 1 -> Phi coefficients, 2 -> Psi coefficients
    Eigen::VectorXd coeffs;
    double s = 0.0;
    double seconds = 0.0;
};

struct ErrorEstimates {
    double output_est = 0.0;    // |s_M2 - s_M1|
    double solution_est = 0.0;  // ||u_M2 - u_M1||_X via Gram blocks
    double output_rel = 0.0;    // / max(|s_M2|, 1e-14)
    double solution_rel = 0.0;  // / max(||u_M2||_X, 1e-14)
    OnlineResult level1, level2;
};

struct RomMetadata {
    int version = 1;
    std::string activation;
    int n = 0;
    int l = 0;
    std::string fom_label;
    double output_dual_norm = 0.0;  // ||l^O||_X' of the underlying FOM
    bool store_bases = true;
    Eigen::Index full_dim = 0;
    std::vector<Eigen::VectorXd> sample;  // S_N, kept for baseline studies
    bool m1_capped = false;
    bool m2_capped = false;
};

// Two-level affine reduced model: Galerkin blocks on Phi (level 1) and
// Psi (level 2) plus the Gram blocks that make the solution error
// estimate an O(M2^2) online computation. Immutable after construction.
class ReducedModel {
public:
    ReducedModel(std::vector<ThetaDescriptor> theta,
                 std::vector<Eigen::MatrixXd> a1, Eigen::VectorXd l1, Eigen::VectorXd lO1,
                 std::vector<Eigen::MatrixXd> a2, Eigen::VectorXd l2, Eigen::VectorXd lO2,
                 Eigen::MatrixXd b1, Eigen::MatrixXd b2, Eigen::MatrixXd b12,
                 ParamBox box, RomMetadata meta,
                 Eigen::MatrixXd phi = {}, Eigen::MatrixXd psi = {});

    int num_terms() const noexcept { return static_cast<int>(a1_.size()); }
    int m1() const noexcept { return static_cast<int>(l1_.size()); }
    int m2() const noexcept { return static_cast<int>(l2_.size()); }
    const ParamBox& box() const noexcept { return box_; }
    const RomMetadata& meta() const noexcept { return meta_; }
    const std::vector<ThetaDescriptor>& theta() const noexcept { return theta_; }
    bool has_bases() const noexcept { return phi_.cols() > 0; }

    const std::vector<Eigen::MatrixXd>& level1_ops() const noexcept { return a1_; }
    const std::vector<Eigen::MatrixXd>& level2_ops() const noexcept { return a2_; }
    const Eigen::VectorXd& level1_load() const noexcept { return l1_; }
    const Eigen::VectorXd& level2_load() const noexcept { return l2_; }
    const Eigen::VectorXd& level1_output() const noexcept { return lO1_; }
    const Eigen::VectorXd& level2_output() const noexcept { return lO2_; }
    const Eigen::MatrixXd& gram_11() const noexcept { return b1_; }
    const Eigen::MatrixXd& gram_22() const noexcept { return b2_; }
    const Eigen::MatrixXd& gram_12() const noexcept { return b12_; }
    const Eigen::MatrixXd& phi() const noexcept { return phi_; }
    const Eigen::MatrixXd& psi() const noexcept { return psi_; }

    // Assembles sum_q Theta^q(mu) A^q at the requested level and solves
    // the dense system; errors out on condition estimates above 1e14.
    OnlineResult online_solve(const Eigen::VectorXd& mu, int level) const;

    // Two-level estimates: output |s_M2 - s_M1| and solution
    // sqrt(a'B1 a + b'B2 b - 2 a'B12 b), plus floored relative variants.
    ErrorEstimates estimate_errors(const Eigen::VectorXd& mu) const;

    // Full-space coefficients of the stored-basis combination.
    Eigen::VectorXd reconstruct(const OnlineResult& result) const;

private:
    std::vector<ThetaDescriptor> theta_;
    std::vector<Eigen::MatrixXd> a1_, a2_;
    Eigen::VectorXd l1_, lO1_, l2_, lO2_;
    Eigen::MatrixXd b1_, b2_, b12_;
    ParamBox box_;
    RomMetadata meta_;
    Eigen::MatrixXd phi_, psi_;
};

struct OfflineOptions {
    bool store_bases = true;
    // Precomputed FOM solutions aligned with the sample (greedy reuse).
    const std::vector<Field>* solutions = nullptr;
};

// Algorithm: solve the FOM over the sample, build the generative spaces,
// then form the reduced operators, vectors, and Gram blocks.
ReducedModel offline_build(const FullOrderModel& fom, const ParamSample& sample,
                           const Activation& act, int L, int M1, int M2,
                           const OfflineOptions& opts = {});

// Galerkin blocks for externally supplied bases (used for standard-RB
// baselines and for cross-checking the two levels against each other).
ReducedModel build_reduced_from_bases(const FullOrderModel& fom, const ParamSample& sample,
                                      const Basis& phi, const Basis& psi,
                                      const std::string& activation_name, int L,
                                      bool store_bases = true, bool m1_capped = false,
                                      bool m2_capped = false);

// "GRB1" artifact: magic, little-endian header length, JSON header with
// an array manifest, raw float64 blocks in manifest order, CRC-64 trailer.
void save_rom(const ReducedModel& rm, const std::filesystem::path& path);
ReducedModel load_rom(const std::filesystem::path& path);

// Raw JSON header of an artifact, with magic and checksum validated.
std::string read_rom_header_json(const std::filesystem::path& path);

}  // namespace grb
