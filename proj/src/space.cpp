#include "grb/space.hpp"

#include <algorithm>
#include <cmath>

namespace grb {

namespace {

constexpr double kRankCutoff = 1e-14;   // relative to lambda_1
constexpr double kDegenerateNorm = 1e-14;

void check_same_dim(const DiscreteSpace& space, const Eigen::VectorXd& u, const char* what) {
    if (u.size() != space.dim()) {
        throw DimensionError(std::string(what) + ": vector of size " + std::to_string(u.size()) +
                             " does not live in space of dim " + std::to_string(space.dim()));
    }
}

}  // namespace

DiscreteSpace DiscreteSpace::with_diagonal_weights(Eigen::VectorXd weights, std::string label) {
    if (weights.size() == 0) throw InvalidInputError("space: empty weight vector");
    if ((weights.array() <= 0.0).any()) {
        throw InvalidInputError("space: diagonal weights must be strictly positive");
    }
    DiscreteSpace s;
    s.dim_ = weights.size();
    s.diagonal_ = true;
    s.weights_ = std::move(weights);
    s.label_ = std::move(label);
    return s;
}

DiscreteSpace DiscreteSpace::with_matrix(Eigen::SparseMatrix<double> inner_op, std::string label) {
    if (inner_op.rows() == 0 || inner_op.rows() != inner_op.cols()) {
        throw InvalidInputError("space: inner operator must be square and nonempty");
    }
    const double scale =
        inner_op.nonZeros() > 0 ? inner_op.coeffs().abs().maxCoeff() : 0.0;
    const Eigen::SparseMatrix<double> skew =
        inner_op - Eigen::SparseMatrix<double>(inner_op.transpose());
    const double asym = skew.nonZeros() > 0 ? skew.coeffs().abs().maxCoeff() : 0.0;
    if (asym > 1e-12 * scale) {
        throw InvalidInputError("space: inner operator must be symmetric (asymmetry " +
                                std::to_string(asym / scale) + " relative)");
    }
    DiscreteSpace s;
    s.dim_ = inner_op.rows();
    s.diagonal_ = false;
    s.matrix_ = std::move(inner_op);
    s.matrix_.makeCompressed();
    s.label_ = std::move(label);
    return s;
}

double DiscreteSpace::inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
    check_same_dim(*this, u, "inner");
    check_same_dim(*this, v, "inner");
    if (diagonal_) return (u.array() * weights_.array() * v.array()).sum();
    return u.dot(matrix_ * v);
}

double DiscreteSpace::norm(const Eigen::VectorXd& u) const {
    return std::sqrt(std::max(0.0, inner(u, u)));
}

Eigen::VectorXd DiscreteSpace::apply(const Eigen::VectorXd& u) const {
    check_same_dim(*this, u, "apply");
    if (diagonal_) return weights_.asDiagonal() * u;
    return matrix_ * u;
}

Eigen::MatrixXd DiscreteSpace::apply(const Eigen::MatrixXd& block) const {
    if (block.rows() != dim_) {
        throw DimensionError("apply: block row count does not match space dim");
    }
    if (diagonal_) return weights_.asDiagonal() * block;
    return matrix_ * block;
}

void SnapshotSet::reserve(Eigen::Index count) {
    if (!space_) throw InvalidInputError("snapshot set: no space attached");
    if (data_.cols() < count) {
        Eigen::MatrixXd grown(space_->dim(), count);
        if (count_ > 0) grown.leftCols(count_) = data_.leftCols(count_);
        data_.swap(grown);
    }
    tags_.reserve(static_cast<size_t>(count));
}

void SnapshotSet::append(const Eigen::VectorXd& coeffs, std::string tag) {
    if (!space_) throw InvalidInputError("snapshot set: no space attached");
    if (coeffs.size() != space_->dim()) {
        throw DimensionError("snapshot set: snapshot dim does not match space");
    }
    if (!coeffs.allFinite()) {
        throw InvalidInputError("snapshot set: non-finite entries in snapshot \"" + tag + "\"");
    }
    if (count_ == data_.cols()) {
        reserve(std::max<Eigen::Index>(8, 2 * data_.cols()));
    }
    data_.col(count_) = coeffs;
    ++count_;
    tags_.push_back(std::move(tag));
}

void SnapshotSet::append(const Field& field, std::string tag) {
    if (field.space && space_ && field.space->dim() != space_->dim()) {
        throw DimensionError("snapshot set: field from a different space");
    }
    append(field.coeffs, std::move(tag));
}

void SnapshotSet::append_set(const SnapshotSet& other) {
    reserve(count_ + other.size());
    for (Eigen::Index k = 0; k < other.size(); ++k) {
        append(other.column(k), other.tag(k));
    }
}

double inner(const DiscreteSpace& space, const Field& u, const Field& v) {
    return space.inner(u.coeffs, v.coeffs);
}

namespace {

// S^T (X S), symmetrized; the diagonal-weight case runs as a rank update
// on sqrt(w)-scaled columns (half the flops of the general product).
Eigen::MatrixXd x_gram(const DiscreteSpace& space, const Eigen::MatrixXd& S,
                       const Eigen::MatrixXd& XS) {
    Eigen::MatrixXd C;
    if (space.is_diagonal()) {
        const Eigen::MatrixXd B =
            space.weights().cwiseSqrt().asDiagonal() * S;
        C = Eigen::MatrixXd::Zero(S.cols(), S.cols());
        C.selfadjointView<Eigen::Lower>().rankUpdate(B.transpose());
        C.triangularView<Eigen::StrictlyUpper>() = C.transpose();
        return C;
    }
    C = S.transpose() * XS;
    C = 0.5 * (C + C.transpose()).eval();
    return C;
}

}  // namespace

Eigen::MatrixXd gram(const DiscreteSpace& space, const SnapshotSet& snapshots) {
    if (snapshots.empty()) throw InvalidInputError("gram: empty snapshot set");
    if (snapshots.dim() != space.dim()) throw DimensionError("gram: snapshot dim mismatch");
    const Eigen::MatrixXd S = snapshots.matrix();
    return x_gram(space, S, space.apply(S));
}

namespace {

Basis pod_impl(const DiscreteSpace& space, const SnapshotSet& snapshots,
               int max_modes, double energy_tol, bool by_energy) {
    if (snapshots.empty()) throw InvalidInputError("pod: empty snapshot set");
    if (!by_energy && (max_modes < 1 || max_modes > snapshots.size())) {
        throw InvalidInputError("pod: requested " + std::to_string(max_modes) +
                                " modes from " + std::to_string(snapshots.size()) + " snapshots");
    }

    // Exclude degenerate-norm snapshots before Gram assembly.
    const Eigen::MatrixXd all = snapshots.matrix();
    Eigen::MatrixXd XS_all = space.apply(all);
    std::vector<Eigen::Index> keep;
    keep.reserve(static_cast<size_t>(all.cols()));
    for (Eigen::Index k = 0; k < all.cols(); ++k) {
        if (std::sqrt(std::max(0.0, all.col(k).dot(XS_all.col(k)))) >= kDegenerateNorm) {
            keep.push_back(k);
        }
    }
    if (keep.empty()) throw InvalidInputError("pod: all snapshots have zero X-norm");

    Eigen::MatrixXd S(all.rows(), static_cast<Eigen::Index>(keep.size()));
    Eigen::MatrixXd XS(all.rows(), static_cast<Eigen::Index>(keep.size()));
    for (size_t j = 0; j < keep.size(); ++j) {
        S.col(static_cast<Eigen::Index>(j)) = all.col(keep[j]);
        XS.col(static_cast<Eigen::Index>(j)) = XS_all.col(keep[j]);
    }
    const Eigen::Index K = S.cols();

    const Eigen::MatrixXd C = x_gram(space, S, XS);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C);
    if (eig.info() != Eigen::Success) throw SolverError("pod: Gram eigendecomposition failed");

    // Eigen returns ascending order; read from the back.
    Eigen::VectorXd lambda(K);
    Eigen::MatrixXd vecs(K, K);
    for (Eigen::Index m = 0; m < K; ++m) {
        lambda(m) = std::max(0.0, eig.eigenvalues()(K - 1 - m));
        vecs.col(m) = eig.eigenvectors().col(K - 1 - m);
    }
    const double lambda1 = lambda(0);
    if (lambda1 <= 0.0) throw InvalidInputError("pod: snapshot set has zero energy");

    Eigen::Index rank = 0;
    while (rank < K && lambda(rank) >= lambda1 * kRankCutoff) ++rank;

    Eigen::Index m_keep;
    if (by_energy) {
        const double total = lambda.sum();
        double acc = 0.0;
        m_keep = 0;
        while (m_keep < rank) {
            acc += lambda(m_keep);
            ++m_keep;
            if (acc >= (1.0 - energy_tol) * total) break;
        }
    } else {
        m_keep = std::min<Eigen::Index>(max_modes, rank);
    }

    const Eigen::Index capacity = by_energy ? K : std::min<Eigen::Index>(max_modes, K);
    Eigen::MatrixXd modes(S.rows(), capacity);
    // X * mode columns, maintained incrementally: one operator apply per
    // candidate instead of one per orthogonalization pair.
    Eigen::MatrixXd x_modes(S.rows(), capacity);
    Eigen::VectorXd kept_lambda(capacity);
    Eigen::Index out = 0;

    // Orthogonalizes v against the accepted modes (modified Gram-Schmidt
    // in the X inner product) and appends it unless it collapses below
    // drop_tol; xv must be X*v on entry and is updated alongside v.
    auto orthogonalize_and_push = [&](Eigen::VectorXd v, Eigen::VectorXd xv, double drop_tol,
                                      double energy) {
        // classical Gram-Schmidt run twice (CGS2): one pass leaves
        // O(eps * amplification) residue on the near-cutoff directions
        // of collinear sets; X*v is recomputed exactly per sweep because
        // incremental updates drift once v has cancelled away.
        for (int sweep = 0; sweep < 2; ++sweep) {
            if (out > 0) {
                const Eigen::VectorXd proj = x_modes.leftCols(out).transpose() * v;
                v.noalias() -= modes.leftCols(out) * proj;
            }
            xv = space.apply(v);
        }
        const double nrm = std::sqrt(std::max(0.0, v.dot(xv)));
        if (!(nrm > std::max(drop_tol, 1e-300))) return false;
        modes.col(out) = v / nrm;
        x_modes.col(out) = xv / nrm;
        kept_lambda(out) = energy < 0.0 ? nrm * nrm : energy;
        ++out;
        return true;
    };

    // Modified Gram-Schmidt cleanup in the X inner product; generated
    // snapshot sets are highly collinear and the raw eigenvector combos
    // can drift from orthonormality.
    for (Eigen::Index m = 0; m < m_keep; ++m) {
        const Eigen::VectorXd coeff = vecs.col(m) / std::sqrt(lambda(m));
        // a mode losing all but 1e-8 of itself to the earlier ones is
        // numerically dependent
        orthogonalize_and_push(S * coeff, XS * coeff, 1e-8, lambda(m));
    }

    // Untruncated requests promise span coverage of the inputs, but the
    // Gram eigenproblem cannot resolve components below sqrt(eps) of the
    // dominant energy. Extend the Gram-Schmidt pass over the snapshots
    // and keep whatever residual directions survive, up to the cap.
    if (m_keep >= rank) {
        const Eigen::Index augment_begin = out;
        for (Eigen::Index k = 0; k < K && out < capacity; ++k) {
            const Eigen::VectorXd xv = XS.col(k);
            const double input_norm = std::sqrt(std::max(0.0, S.col(k).dot(xv)));
            const Eigen::Index before = out;
            // below 1e-9 of the input the residual direction is mostly
            // rounding noise and every stated coverage gate is already met
            if (orthogonalize_and_push(S.col(k), xv, 1e-9 * input_norm, -1.0) &&
                before > 0) {
                // fill entries stay below the kept spectrum
                kept_lambda(before) = std::min(kept_lambda(before), kept_lambda(before - 1));
            }
        }
        // keep the eigenvalue column nonincreasing among the fills
        if (out > augment_begin + 1) {
            std::vector<Eigen::Index> order;
            for (Eigen::Index i = augment_begin; i < out; ++i) order.push_back(i);
            std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
                return kept_lambda(a) > kept_lambda(b);
            });
            Eigen::MatrixXd sorted_modes(S.rows(), out - augment_begin);
            Eigen::VectorXd sorted_lambda(out - augment_begin);
            for (Eigen::Index i = 0; i < out - augment_begin; ++i) {
                sorted_modes.col(i) = modes.col(order[static_cast<size_t>(i)]);
                sorted_lambda(i) = kept_lambda(order[static_cast<size_t>(i)]);
            }
            modes.middleCols(augment_begin, out - augment_begin) = sorted_modes;
            kept_lambda.segment(augment_begin, out - augment_begin) = sorted_lambda;
        }
    }
    modes.conservativeResize(Eigen::NoChange, out);
    kept_lambda.conservativeResize(out);

    // Deterministic sign: largest-magnitude entry of each mode positive.
    for (Eigen::Index m = 0; m < out; ++m) {
        Eigen::Index imax;
        modes.col(m).cwiseAbs().maxCoeff(&imax);
        if (modes(imax, m) < 0.0) modes.col(m) = -modes.col(m);
    }

    Basis basis;
    basis.modes = std::move(modes);
    basis.eigenvalues = std::move(kept_lambda);
    basis.source_count = snapshots.size();
    basis.space = snapshots.space();
    return basis;
}

}  // namespace

Basis pod(const DiscreteSpace& space, const SnapshotSet& snapshots, int max_modes) {
    return pod_impl(space, snapshots, max_modes, 0.0, false);
}

Basis pod_by_energy(const DiscreteSpace& space, const SnapshotSet& snapshots, double energy_tol) {
    if (!(energy_tol >= 0.0)) throw InvalidInputError("pod: energy tolerance must be >= 0");
    return pod_impl(space, snapshots, 0, energy_tol, true);
}

Projection project(const DiscreteSpace& space, const Basis& basis, const Field& u) {
    if (basis.empty()) throw InvalidInputError("project: empty basis");
    check_same_dim(space, u.coeffs, "project");
    if (basis.modes.rows() != space.dim()) throw DimensionError("project: basis dim mismatch");

    const Eigen::VectorXd Xu = space.apply(u.coeffs);
    Projection p;
    p.coeffs = basis.modes.transpose() * Xu;
    // The Pythagorean form sqrt(||u||^2 - sum c^2) floors out at
    // sqrt(eps)*||u|| from cancellation; the explicit difference gives
    // the same best-approximation error without that floor.
    const Eigen::VectorXd diff = u.coeffs - basis.modes * p.coeffs;
    p.residual_norm = space.norm(diff);
    return p;
}

double error_metric(const DiscreteSpace& space, const Basis& basis,
                    const SnapshotSet& manifold, ErrorMode mode) {
    if (manifold.empty()) throw InvalidInputError("error_metric: empty manifold");
    if (manifold.dim() != space.dim()) throw DimensionError("error_metric: manifold dim mismatch");

    const Eigen::MatrixXd U = manifold.matrix();
    const Eigen::MatrixXd XU = space.apply(U);
    // coeffs: M x K, all best-approximation coefficients at once
    Eigen::MatrixXd coeffs;
    if (!basis.empty()) coeffs = basis.modes.transpose() * XU;

    double worst = 0.0;
    for (Eigen::Index k = 0; k < U.cols(); ++k) {
        const double norm2 = std::max(0.0, U.col(k).dot(XU.col(k)));
        const double proj2 = basis.empty() ? 0.0 : coeffs.col(k).squaredNorm();
        double res = std::sqrt(std::max(0.0, norm2 - proj2));
        // Cancellation floor: recompute tiny residuals explicitly.
        if (!basis.empty() && res * res <= 1e-12 * norm2) {
            const Eigen::VectorXd diff = U.col(k) - basis.modes * coeffs.col(k);
            res = space.norm(diff);
        }
        if (mode == ErrorMode::relative) {
            const double nrm = std::sqrt(norm2);
            if (nrm < kDegenerateNorm) continue;
            res /= nrm;
        }
        worst = std::max(worst, res);
    }
    return worst;
}

}  // namespace grb
