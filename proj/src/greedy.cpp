#include "grb/greedy.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace grb {

namespace {

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

}  // namespace

std::vector<Eigen::VectorXd> make_training_grid(const ParamBox& box,
                                                const std::vector<int>& dims) {
    const int p = box.dim();
    if (static_cast<int>(dims.size()) != p) {
        throw DimensionError("training grid: dims length must match the box dimension");
    }
    long total = 1;
    for (int d : dims) {
        if (d < 1) throw InvalidInputError("training grid: each dim must be >= 1");
        total *= d;
    }
    std::vector<Eigen::VectorXd> grid;
    grid.reserve(static_cast<size_t>(total));
    std::vector<int> idx(static_cast<size_t>(p), 0);
    for (long flat = 0; flat < total; ++flat) {
        long rem = flat;
        for (int d = p - 1; d >= 0; --d) {
            idx[static_cast<size_t>(d)] = static_cast<int>(rem % dims[static_cast<size_t>(d)]);
            rem /= dims[static_cast<size_t>(d)];
        }
        Eigen::VectorXd mu(p);
        for (int d = 0; d < p; ++d) {
            const int nd = dims[static_cast<size_t>(d)];
            const int i = idx[static_cast<size_t>(d)];
            // exact endpoints; interior points uniformly spaced
            mu(d) = nd == 1 ? box.lo(d)
                    : i == nd - 1
                        ? box.hi(d)
                        : box.lo(d) + i * ((box.hi(d) - box.lo(d)) / (nd - 1));
        }
        grid.push_back(std::move(mu));
    }
    return grid;
}

ParamSample default_initial_sample(const ParamBox& box) {
    const int p = box.dim();
    ParamSample sample(box);
    if (p == 1) {
        sample.append(box.lo);
        sample.append(box.hi);
        return sample;
    }
    if (p == 2) {
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                Eigen::VectorXd mu(2);
                mu << (a ? box.hi(0) : box.lo(0)), (b ? box.hi(1) : box.lo(1));
                sample.append(mu);
            }
        return sample;
    }
    if (p == 4) {
        // (lo,lo,lo,lo), (hi,hi,hi,hi), (hi,lo,lo,hi), (lo,hi,hi,lo)
        const int patterns[4][4] = {{0, 0, 0, 0}, {1, 1, 1, 1}, {1, 0, 0, 1}, {0, 1, 1, 0}};
        for (const auto& pat : patterns) {
            Eigen::VectorXd mu(4);
            for (int d = 0; d < 4; ++d) mu(d) = pat[d] ? box.hi(d) : box.lo(d);
            sample.append(mu);
        }
        return sample;
    }
    // Generic fallback: the two extreme corners.
    sample.append(box.lo);
    sample.append(box.hi);
    return sample;
}

GreedyResult greedy_sample(const FullOrderModel& fom, const GreedyConfig& cfg) {
    if (cfg.initial.size() < 1) throw InvalidInputError("greedy: empty initial sample");
    if (cfg.training.empty()) throw InvalidInputError("greedy: empty training set");
    if (!(cfg.eps_tol > 0.0)) throw InvalidInputError("greedy: tolerance must be positive");

    ParamSample sample = cfg.initial;
    std::vector<Field> solutions;
    solutions.reserve(static_cast<size_t>(sample.size()) + 16);
    for (int n = 0; n < sample.size(); ++n) {
        solutions.push_back(fom.solve(sample.point(n)));
    }

    GreedyTrace trace;
    std::optional<ReducedModel> model;
    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        const int n = sample.size();
        const int m1 = cfg.m1.eval(n);
        const int m2 = std::max(cfg.m2.eval(n), m1);

        const double t_off = now_seconds();
        OfflineOptions opts;
        opts.store_bases = cfg.store_bases;
        opts.solutions = &solutions;
        try {
            model.emplace(offline_build(fom, sample, cfg.activation, std::min(cfg.L_max, n),
                                        m1, m2, opts));
        } catch (const Error& e) {
            throw SolverError("greedy: offline build failed at N = " + std::to_string(n) + ": " +
                              e.what());
        }
        const double offline_seconds = now_seconds() - t_off;

        // Sweep the configured criterion over training points not yet sampled.
        const double t_sweep = now_seconds();
        double best = -1.0;
        long best_index = -1;
        bool flagged = false;
        for (size_t k = 0; k < cfg.training.size(); ++k) {
            const Eigen::VectorXd& mu = cfg.training[k];
            if (sample.contains_point(mu)) continue;
            const ErrorEstimates est = model->estimate_errors(mu);
            double value = cfg.criterion == GreedyCriterion::relative_output ? est.output_rel
                                                                             : est.output_est;
            if (!std::isfinite(value)) {
                flagged = true;
                value = std::numeric_limits<double>::infinity();
            }
            if (value > best) {  // ties keep the smaller training index
                best = value;
                best_index = static_cast<long>(k);
            }
        }
        const double sweep_seconds = now_seconds() - t_sweep;

        GreedyIterationRecord rec;
        rec.n = n;
        rec.max_estimate = std::max(best, 0.0);
        rec.offline_seconds = offline_seconds;
        rec.sweep_seconds = sweep_seconds;
        rec.nonfinite_flagged = flagged;
        if (best_index >= 0) rec.chosen = cfg.training[static_cast<size_t>(best_index)];
        trace.rows.push_back(rec);

        // Empty complement or tolerance reached: done.
        if (best_index < 0 || rec.max_estimate <= cfg.eps_tol) {
            trace.converged = true;
            break;
        }
        if (iter == cfg.max_iterations - 1) break;

        const Eigen::VectorXd& next = cfg.training[static_cast<size_t>(best_index)];
        sample.append(next);
        solutions.push_back(fom.solve(next));
    }

    return GreedyResult{std::move(sample), std::move(*model), std::move(trace)};
}

}  // namespace grb
