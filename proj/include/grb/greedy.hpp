#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "grb/rom.hpp"

namespace grb {

// Integer schedule round(slope * N + offset), e.g. M1 = 3N.
struct Schedule {
    double slope = 1.0;
    double offset = 0.0;

    int eval(int n) const { return static_cast<int>(std::llround(slope * n + offset)); }
};

enum class GreedyCriterion { relative_output, absolute_output };

struct GreedyConfig {
    ParamSample initial;
    std::vector<Eigen::VectorXd> training;
    double eps_tol = 1e-5;
    Schedule m1{3.0, 0.0};
    Schedule m2{4.0, 0.0};
    int L_max = 4;
    int max_iterations = 100;
    GreedyCriterion criterion = GreedyCriterion::relative_output;
    Activation activation{ActivationKind::exp};
    bool store_bases = true;
};

struct GreedyIterationRecord {
    int n = 0;                  // sample size the model was built with
    Eigen::VectorXd chosen;     // argmax of the criterion over the sweep
    double max_estimate = 0.0;  // criterion value at the chosen point
    double offline_seconds = 0.0;
    double sweep_seconds = 0.0;
    bool nonfinite_flagged = false;
};

struct GreedyTrace {
    std::vector<GreedyIterationRecord> rows;
    bool converged = false;
};

struct GreedyResult {
    ParamSample sample;
    ReducedModel model;
    GreedyTrace trace;
};

// Tensor grid of uniformly spaced points including both endpoints,
// lexicographic order with the last dimension varying fastest.
std::vector<Eigen::VectorXd> make_training_grid(const ParamBox& box, const std::vector<int>& dims);

// Endpoints for P=1, the four corners for P=2, and four alternating
// corners for P=4; the standard initializations for these problems.
ParamSample default_initial_sample(const ParamBox& box);

// Iterative sampling driven by the two-level output error estimate:
// rebuild the reduced model on the current sample, sweep the estimate
// over the unused training points, append the argmax, stop at tolerance.
GreedyResult greedy_sample(const FullOrderModel& fom, const GreedyConfig& cfg);

}  // namespace grb
