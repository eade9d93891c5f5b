#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <memory>
#include <string>
#include <vector>

#include "grb/errors.hpp"

namespace grb {

// Discrete function space of dimension N with an SPD inner product
// (u,v)_X, realized either as diagonal quadrature weights or a sparse
// weight matrix (e.g. an H1 matrix on a finite element space).
class DiscreteSpace {
public:
    static DiscreteSpace with_diagonal_weights(Eigen::VectorXd weights, std::string label);
    static DiscreteSpace with_matrix(Eigen::SparseMatrix<double> inner_op, std::string label);

    Eigen::Index dim() const noexcept { return dim_; }
    const std::string& label() const noexcept { return label_; }
    bool is_diagonal() const noexcept { return diagonal_; }

    double inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;
    double norm(const Eigen::VectorXd& u) const;

    // X*u and X*S (columnwise); the workhorse for Gram assembly.
    Eigen::VectorXd apply(const Eigen::VectorXd& u) const;
    Eigen::MatrixXd apply(const Eigen::MatrixXd& block) const;

    const Eigen::VectorXd& weights() const { return weights_; }
    const Eigen::SparseMatrix<double>& matrix() const { return matrix_; }

private:
    DiscreteSpace() = default;

    Eigen::Index dim_ = 0;
    bool diagonal_ = true;
    Eigen::VectorXd weights_;
    Eigen::SparseMatrix<double> matrix_;
    std::string label_;
};

using SpacePtr = std::shared_ptr<const DiscreteSpace>;

// Coefficient vector living in a DiscreteSpace.
struct Field {
    Eigen::VectorXd coeffs;
    SpacePtr space;

    Field() = default;
    Field(Eigen::VectorXd c, SpacePtr s) : coeffs(std::move(c)), space(std::move(s)) {}
};

// Ordered snapshot collection over a single space, stored columnwise,
// with a provenance tag per entry ("solution n", "G(n,l)", ...).
class SnapshotSet {
public:
    SnapshotSet() = default;
    explicit SnapshotSet(SpacePtr space) : space_(std::move(space)) {}

    void reserve(Eigen::Index count);
    void append(const Eigen::VectorXd& coeffs, std::string tag);
    void append(const Field& field, std::string tag);
    void append_set(const SnapshotSet& other);

    Eigen::Index size() const noexcept { return count_; }
    Eigen::Index dim() const { return space_ ? space_->dim() : 0; }
    bool empty() const noexcept { return count_ == 0; }

    // View of the first size() columns.
    Eigen::Ref<const Eigen::MatrixXd> matrix() const { return data_.leftCols(count_); }
    Eigen::VectorXd column(Eigen::Index k) const { return data_.col(k); }
    Field field(Eigen::Index k) const { return Field(data_.col(k), space_); }
    const std::string& tag(Eigen::Index k) const { return tags_[static_cast<size_t>(k)]; }
    const SpacePtr& space() const noexcept { return space_; }

private:
    Eigen::MatrixXd data_;
    Eigen::Index count_ = 0;
    std::vector<std::string> tags_;
    SpacePtr space_;
};

// X-orthonormal modes with the POD eigenvalues they came from.
struct Basis {
    Eigen::MatrixXd modes;        // dim x M, columns X-orthonormal
    Eigen::VectorXd eigenvalues;  // nonincreasing, >= 0, one per kept mode
    Eigen::Index source_count = 0;
    SpacePtr space;

    Eigen::Index size() const noexcept { return modes.cols(); }
    bool empty() const noexcept { return modes.cols() == 0; }
};

struct Projection {
    Eigen::VectorXd coeffs;
    double residual_norm = 0.0;
};

enum class ErrorMode { absolute, relative };

double inner(const DiscreteSpace& space, const Field& u, const Field& v);

// Gram (covariance) matrix C_kk' = (u_k, u_k')_X.
Eigen::MatrixXd gram(const DiscreteSpace& space, const SnapshotSet& snapshots);

// POD by the method of snapshots: eigendecomposition of the Gram matrix,
// modes rebuilt as snapshot combinations, then one modified Gram-Schmidt
// pass in the X inner product. Modes with eigenvalue < lambda_1 * 1e-14
// are dropped, so the returned dimension may be smaller than requested.
Basis pod(const DiscreteSpace& space, const SnapshotSet& snapshots, int max_modes);

// Keep the smallest M with sum_{m<=M} lambda_m >= (1 - energy_tol) * sum lambda.
Basis pod_by_energy(const DiscreteSpace& space, const SnapshotSet& snapshots, double energy_tol);

// Best-approximation coefficients (u, v_m)_X and the X-norm residual.
Projection project(const DiscreteSpace& space, const Basis& basis, const Field& u);

// Worst-case projection error of the basis over a discrete manifold:
// max_k of the residual norm (relative mode divides by ||u_k||_X and
// skips snapshots with norm < 1e-14).
double error_metric(const DiscreteSpace& space, const Basis& basis,
                    const SnapshotSet& manifold, ErrorMode mode);

}  // namespace grb
