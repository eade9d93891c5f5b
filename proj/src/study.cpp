#include "grb/study.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "grb/fom.hpp"

namespace grb {

using json = nlohmann::json;

namespace {

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

Schedule schedule_from_json(const json& j, Schedule fallback) {
    if (j.is_null()) return fallback;
    if (j.is_number()) return Schedule{j.get<double>(), 0.0};
    Schedule s;
    s.slope = j.value("slope", 1.0);
    s.offset = j.value("offset", 0.0);
    return s;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    ExperimentConfig cfg;
    cfg.problem = j.at("problem").get<std::string>();
    if (j.contains("activations")) {
        cfg.activations = j.at("activations").get<std::vector<std::string>>();
    } else if (j.contains("activation")) {
        cfg.activations = {j.at("activation").get<std::string>()};
    }
    if (j.contains("n_values")) cfg.n_values = j.at("n_values").get<std::vector<int>>();
    cfg.l_max = j.value("l_max", cfg.l_max);
    cfg.m1 = schedule_from_json(j.contains("m1") ? j.at("m1") : json(), cfg.m1);
    cfg.m2 = schedule_from_json(j.contains("m2") ? j.at("m2") : json(), cfg.m2);
    if (j.contains("manifold_dims")) {
        cfg.manifold_dims = j.at("manifold_dims").get<std::vector<int>>();
    }
    if (j.contains("test_dims")) cfg.test_dims = j.at("test_dims").get<std::vector<int>>();
    if (j.contains("training_dims")) {
        cfg.training_dims = j.at("training_dims").get<std::vector<int>>();
    }
    cfg.eps_tol = j.value("eps_tol", cfg.eps_tol);
    cfg.max_iterations = j.value("max_iterations", cfg.max_iterations);
    cfg.criterion = j.value("criterion", cfg.criterion);
    if (j.contains("initial_sample")) {
        cfg.initial_sample = j.at("initial_sample").get<std::vector<std::vector<double>>>();
    }
    cfg.grid_points = j.value("grid_points", cfg.grid_points);
    if (j.contains("mesh")) {
        const json& m = j.at("mesh");
        cfg.mesh_nx = m.value("nx", cfg.mesh_nx);
        cfg.mesh_ny = m.value("ny", cfg.mesh_ny);
        cfg.mesh_resolution = m.value("resolution", cfg.mesh_resolution);
        cfg.degree = m.value("degree", cfg.degree);
    }
    cfg.store_bases = j.value("store_bases", cfg.store_bases);
    cfg.baseline = j.value("baseline", cfg.baseline);
    cfg.artifact = j.value("artifact", cfg.artifact);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();

    const bool known = cfg.problem == "manifold-1d" || cfg.problem == "manifold-2d" ||
                       cfg.problem == "manifold-3d" || cfg.problem == "convdiff" ||
                       cfg.problem == "reacdiff";
    if (!known) throw InvalidInputError("config: unknown problem \"" + cfg.problem + "\"");
    if (cfg.criterion != "relative-output" && cfg.criterion != "absolute-output") {
        throw InvalidInputError("config: unknown criterion \"" + cfg.criterion + "\"");
    }
    for (const auto& name : cfg.activations) Activation::from_name(name);
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("config: cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InvalidInputError(std::string("config: JSON parse failure: ") + e.what());
    }
    return from_json(j);
}

json ExperimentConfig::to_json() const {
    json j;
    j["problem"] = problem;
    j["activations"] = activations;
    j["n_values"] = n_values;
    j["l_max"] = l_max;
    j["m1"] = {{"slope", m1.slope}, {"offset", m1.offset}};
    j["m2"] = {{"slope", m2.slope}, {"offset", m2.offset}};
    j["manifold_dims"] = manifold_dims;
    j["test_dims"] = test_dims;
    j["training_dims"] = training_dims;
    j["eps_tol"] = eps_tol;
    j["max_iterations"] = max_iterations;
    j["criterion"] = criterion;
    j["initial_sample"] = initial_sample;
    j["grid_points"] = grid_points;
    j["mesh"] = {{"nx", mesh_nx}, {"ny", mesh_ny}, {"resolution", mesh_resolution},
                 {"degree", degree}};
    j["store_bases"] = store_bases;
    j["baseline"] = baseline;
    j["artifact"] = artifact;
    j["seed"] = seed;
    j["out_dir"] = out_dir.string();
    return j;
}

std::string ExperimentConfig::hash() const { return fnv1a_hex(to_json().dump()); }

StudyResult::StudyResult()
    : table({"study", "problem", "activation", "N", "L", "M1", "M2", "metric", "value",
             "seconds", "config_hash"}) {}

void StudyResult::add(const std::string& study, const std::string& problem,
                      const std::string& activation, int n, int l, int m1, int m2,
                      const std::string& metric, double value, double seconds,
                      const std::string& config_hash) {
    table.add_row({study, problem, activation, CsvTable::format(n), CsvTable::format(l),
                   CsvTable::format(m1), CsvTable::format(m2), metric, CsvTable::format(value),
                   CsvTable::format(seconds), config_hash});
}

double StudyResult::value_of(const std::string& activation, int n,
                             const std::string& metric) const {
    for (const auto& row : table.rows()) {
        if (row[2] == activation && row[3] == CsvTable::format(n) && row[7] == metric) {
            return std::stod(row[8]);
        }
    }
    throw InvalidInputError("study result: no row for activation=" + activation + " N=" +
                            std::to_string(n) + " metric=" + metric);
}

namespace {

struct ManifoldProblem {
    AnalyticGrid grid;
    std::string name;

    Field at(const Eigen::VectorXd& mu) const {
        if (name == "manifold-1d") return analytic_manifold_1d(mu(0), grid);
        if (name == "manifold-2d") return analytic_manifold_2d(mu.head<2>(), grid);
        return analytic_manifold_3d(mu(0), grid);
    }
};

ManifoldProblem make_manifold(const ExperimentConfig& cfg) {
    ManifoldProblem mp;
    mp.name = cfg.problem;
    if (cfg.problem == "manifold-1d") {
        mp.grid = make_grid_1d(cfg.grid_points > 0 ? cfg.grid_points : 2001);
    } else if (cfg.problem == "manifold-2d") {
        mp.grid = make_grid_2d(cfg.grid_points > 0 ? cfg.grid_points : 201);
    } else if (cfg.problem == "manifold-3d") {
        mp.grid = make_grid_3d(cfg.grid_points > 0 ? cfg.grid_points : 41);
    } else {
        throw InvalidInputError("approx study requires a manifold problem, got " + cfg.problem);
    }
    return mp;
}

std::vector<int> default_manifold_dims(const std::string& problem) {
    if (problem == "manifold-1d") return {200};
    if (problem == "manifold-2d") return {40, 40};
    return {100};
}

// Extended-Chebyshev parameter sample; tensorized per dimension for the
// two-parameter manifold (N must be a perfect square there).
ParamSample manifold_sample(const ManifoldProblem& mp, int n) {
    const ParamBox& box = mp.grid.box;
    ParamSample sample(box);
    if (box.dim() == 1) {
        for (double v : chebyshev_extended(n, box.lo(0), box.hi(0))) {
            Eigen::VectorXd mu(1);
            mu << v;
            sample.append(mu);
        }
        return sample;
    }
    const int side = static_cast<int>(std::llround(std::sqrt(double(n))));
    if (side * side != n) {
        throw InvalidInputError("manifold-2d sample: N must be a perfect square, got " +
                                std::to_string(n));
    }
    const auto xs = chebyshev_extended(side, box.lo(0), box.hi(0));
    const auto ys = chebyshev_extended(side, box.lo(1), box.hi(1));
    for (double x : xs) {
        for (double y : ys) {
            Eigen::VectorXd mu(2);
            mu << x, y;
            sample.append(mu);
        }
    }
    return sample;
}

SnapshotSet snapshots_at(const ManifoldProblem& mp, const ParamSample& sample) {
    SnapshotSet set(mp.grid.space);
    set.reserve(sample.size());
    for (int i = 0; i < sample.size(); ++i) {
        set.append(mp.at(sample.point(i)), "solution " + std::to_string(i));
    }
    return set;
}

}  // namespace

StudyResult run_approx_study(const ExperimentConfig& cfg) {
    const ManifoldProblem mp = make_manifold(cfg);
    const std::string hash = cfg.hash();
    StudyResult result;
    result.spectra.emplace(std::vector<std::string>{"problem", "activation", "N", "space",
                                                    "mode", "eigenvalue", "config_hash"});
    auto add_spectrum = [&](const std::string& activation, int n, const std::string& space_name,
                            const Basis& basis) {
        for (Eigen::Index m = 0; m < basis.size(); ++m) {
            result.spectra->add_row({cfg.problem, activation, CsvTable::format(n), space_name,
                                     CsvTable::format(static_cast<int>(m + 1)),
                                     CsvTable::format(basis.eigenvalues(m)), hash});
        }
    };

    const auto dims = cfg.manifold_dims.empty() ? default_manifold_dims(cfg.problem)
                                                : cfg.manifold_dims;
    SnapshotSet manifold(mp.grid.space);
    {
        const auto grid_points = make_training_grid(mp.grid.box, dims);
        manifold.reserve(static_cast<Eigen::Index>(grid_points.size()));
        for (size_t k = 0; k < grid_points.size(); ++k) {
            manifold.append(mp.at(grid_points[k]), "manifold " + std::to_string(k));
        }
    }
    const DiscreteSpace& space = *mp.grid.space;

    for (int n : cfg.n_values) {
        const ParamSample sample = manifold_sample(mp, n);
        const SnapshotSet snaps = snapshots_at(mp, sample);
        const int l = std::min(cfg.l_max, n);

        double t0 = now_seconds();
        const Basis w_basis = pod(space, snaps, n);
        add_spectrum("none", n, "W", w_basis);
        result.add("approx", cfg.problem, "none", n, l, n, n, "d_abs_W",
                   error_metric(space, w_basis, manifold, ErrorMode::absolute),
                   now_seconds() - t0, hash);
        result.add("approx", cfg.problem, "none", n, l, n, n, "d_rel_W",
                   error_metric(space, w_basis, manifold, ErrorMode::relative), 0.0, hash);

        for (const auto& act_name : cfg.activations) {
            const Activation act = Activation::from_name(act_name);
            t0 = now_seconds();
            const GenerativeSpaces spaces = build_generative_spaces(
                space, snaps, sample, act, l, cfg.m1.eval(n), cfg.m2.eval(n));
            const double build_seconds = now_seconds() - t0;
            add_spectrum(act_name, n, "phi", spaces.phi);
            add_spectrum(act_name, n, "psi", spaces.psi);
            result.add("approx", cfg.problem, act_name, n, l,
                       static_cast<int>(spaces.phi.size()), static_cast<int>(spaces.psi.size()),
                       "d_abs_phi",
                       error_metric(space, spaces.phi, manifold, ErrorMode::absolute),
                       build_seconds, hash);
            result.add("approx", cfg.problem, act_name, n, l,
                       static_cast<int>(spaces.phi.size()), static_cast<int>(spaces.psi.size()),
                       "d_rel_phi",
                       error_metric(space, spaces.phi, manifold, ErrorMode::relative), 0.0, hash);
            result.add("approx", cfg.problem, act_name, n, l,
                       static_cast<int>(spaces.phi.size()), static_cast<int>(spaces.psi.size()),
                       "d_abs_psi",
                       error_metric(space, spaces.psi, manifold, ErrorMode::absolute), 0.0, hash);
            result.add("approx", cfg.problem, act_name, n, l,
                       static_cast<int>(spaces.phi.size()), static_cast<int>(spaces.psi.size()),
                       "d_rel_psi",
                       error_metric(space, spaces.psi, manifold, ErrorMode::relative), 0.0, hash);
        }
    }
    return result;
}

FullOrderModel build_fom_from_config(const ExperimentConfig& cfg) {
    if (cfg.problem == "convdiff") {
        return build_convdiff_fom(cfg.mesh_nx, cfg.mesh_ny, cfg.degree);
    }
    if (cfg.problem == "reacdiff") {
        return build_reacdiff_fom(cfg.mesh_resolution, cfg.degree);
    }
    throw InvalidInputError("problem \"" + cfg.problem + "\" is not a finite element model");
}

GreedyRunOutput run_greedy(const ExperimentConfig& cfg) {
    const FullOrderModel fom = build_fom_from_config(cfg);
    const std::string hash = cfg.hash();

    GreedyConfig gcfg;
    gcfg.activation = Activation::from_name(cfg.activations.front());
    gcfg.eps_tol = cfg.eps_tol;
    gcfg.m1 = cfg.m1;
    gcfg.m2 = cfg.m2;
    gcfg.L_max = cfg.l_max;
    gcfg.max_iterations = cfg.max_iterations;
    gcfg.criterion = cfg.criterion == "absolute-output" ? GreedyCriterion::absolute_output
                                                        : GreedyCriterion::relative_output;
    gcfg.store_bases = cfg.store_bases;
    gcfg.training = make_training_grid(
        fom.box(), cfg.training_dims.empty()
                       ? (cfg.problem == "convdiff" ? std::vector<int>{40, 40}
                                                    : std::vector<int>{8, 8, 8, 8})
                       : cfg.training_dims);
    if (cfg.initial_sample.empty()) {
        gcfg.initial = default_initial_sample(fom.box());
    } else {
        gcfg.initial = ParamSample(fom.box());
        for (const auto& p : cfg.initial_sample) {
            gcfg.initial.append(Eigen::Map<const Eigen::VectorXd>(
                p.data(), static_cast<Eigen::Index>(p.size())));
        }
    }

    GreedyResult result = greedy_sample(fom, gcfg);

    std::filesystem::create_directories(cfg.out_dir);
    const int p = fom.box().dim();
    std::vector<std::string> cols{"N"};
    for (int d = 1; d <= p; ++d) cols.push_back("mu" + std::to_string(d));
    cols.insert(cols.end(), {"max_estimate", "offline_seconds", "sweep_seconds", "config_hash"});
    CsvTable trace(cols);
    for (const auto& row : result.trace.rows) {
        std::vector<std::string> cells{CsvTable::format(row.n)};
        for (int d = 0; d < p; ++d) {
            cells.push_back(row.chosen.size() == p ? CsvTable::format(row.chosen(d)) : "");
        }
        cells.push_back(CsvTable::format(row.max_estimate));
        cells.push_back(CsvTable::format(row.offline_seconds));
        cells.push_back(CsvTable::format(row.sweep_seconds));
        cells.push_back(hash);
        trace.add_row(std::move(cells));
    }

    GreedyRunOutput out{std::move(result), cfg.out_dir / (cfg.problem + "_greedy_trace.csv"),
                        cfg.out_dir / (cfg.artifact.empty()
                                           ? cfg.problem + "_" + cfg.activations.front() + ".grb"
                                           : cfg.artifact)};
    trace.write(out.trace_csv);
    save_rom(out.result.model, out.artifact);
    return out;
}

namespace {

struct ErrorAccumulator {
    double max_u = 0.0, max_s = 0.0;
    double sum_u = 0.0, sum_s = 0.0;
    long count = 0;

    void add(double u_rel, double s_rel) {
        max_u = std::max(max_u, u_rel);
        max_s = std::max(max_s, s_rel);
        sum_u += u_rel;
        sum_s += s_rel;
        ++count;
    }
    double mean_u() const { return count ? sum_u / count : 0.0; }
    double mean_s() const { return count ? sum_s / count : 0.0; }
};

}  // namespace

StudyResult run_rom_eval(const ExperimentConfig& cfg, const ReducedModel& model,
                         const FullOrderModel& fom) {
    const std::string hash = cfg.hash();
    const auto dims = cfg.test_dims.empty()
                          ? (cfg.problem == "convdiff" ? std::vector<int>{30, 30}
                                                       : std::vector<int>{6, 6, 6, 6})
                          : cfg.test_dims;
    const auto test_points = make_training_grid(fom.box(), dims);

    // Standard-RB baseline rebuilt from the stored sample.
    std::optional<ReducedModel> baseline;
    if (cfg.baseline) {
        ParamSample sample(fom.box());
        SnapshotSet snaps(fom.space_ptr());
        snaps.reserve(static_cast<Eigen::Index>(model.meta().sample.size()));
        for (const auto& mu : model.meta().sample) {
            sample.append(mu);
            snaps.append(fom.solve(mu), "solution");
        }
        const Basis w_basis = pod(fom.space(), snaps, sample.size());
        baseline.emplace(build_reduced_from_bases(fom, sample, w_basis, w_basis, "none", 0,
                                                  /*store_bases=*/true));
    }

    ErrorAccumulator gen_true, gen_est, std_true;
    long failed = 0;
    const double t0 = now_seconds();
    for (const auto& mu : test_points) {
        try {
            const Field truth = fom.solve(mu);
            const double s_true = fom.output(truth);
            const double u_norm = std::max(fom.space().norm(truth.coeffs), 1e-14);
            const double s_denom = std::max(std::abs(s_true), 1e-14);

            const ErrorEstimates est = model.estimate_errors(mu);
            double eps_u_rel = 0.0;
            if (model.has_bases()) {
                const Eigen::VectorXd rec = model.reconstruct(est.level1);
                eps_u_rel = fom.space().norm(truth.coeffs - rec) / u_norm;
            }
            const double eps_s_rel = std::abs(s_true - est.level1.s) / s_denom;
            gen_true.add(eps_u_rel, eps_s_rel);
            gen_est.add(est.solution_rel, est.output_rel);

            if (baseline) {
                const OnlineResult std_res = baseline->online_solve(mu, 1);
                const Eigen::VectorXd rec = baseline->reconstruct(std_res);
                std_true.add(fom.space().norm(truth.coeffs - rec) / u_norm,
                             std::abs(s_true - std_res.s) / s_denom);
            }
        } catch (const Error&) {
            ++failed;
        }
    }
    const double seconds = now_seconds() - t0;

    StudyResult result;
    const auto& meta = model.meta();
    auto emit = [&](const std::string& metric, double value) {
        result.add("rom-eval", cfg.problem, meta.activation, meta.n, meta.l, model.m1(),
                   model.m2(), metric, value, seconds, hash);
    };
    emit("gen_eps_u_max_rel", gen_true.max_u);
    emit("gen_eps_s_max_rel", gen_true.max_s);
    emit("gen_eps_u_mean_rel", gen_true.mean_u());
    emit("gen_eps_s_mean_rel", gen_true.mean_s());
    emit("gen_est_u_max_rel", gen_est.max_u);
    emit("gen_est_s_max_rel", gen_est.max_s);
    emit("gen_est_u_mean_rel", gen_est.mean_u());
    emit("gen_est_s_mean_rel", gen_est.mean_s());
    if (baseline) {
        emit("std_eps_u_max_rel", std_true.max_u);
        emit("std_eps_s_max_rel", std_true.max_s);
        emit("std_eps_u_mean_rel", std_true.mean_u());
        emit("std_eps_s_mean_rel", std_true.mean_s());
    }
    emit("failed_points", static_cast<double>(failed));
    return result;
}

StudyResult run_rom_eval(const ExperimentConfig& cfg) {
    if (cfg.artifact.empty()) {
        throw InvalidInputError("rom-eval: config must name an artifact");
    }
    const FullOrderModel fom = build_fom_from_config(cfg);
    std::filesystem::path path = cfg.artifact;
    if (!std::filesystem::exists(path)) path = cfg.out_dir / cfg.artifact;
    const ReducedModel model = load_rom(path);
    if (model.meta().fom_label != fom.label()) {
        throw InvalidInputError("rom-eval: artifact was built for FOM \"" +
                                model.meta().fom_label + "\", config names \"" + fom.label() +
                                "\"");
    }
    return run_rom_eval(cfg, model, fom);
}

int online_query(const std::filesystem::path& artifact, const Eigen::VectorXd& mu,
                 std::ostream& out) {
    std::optional<ReducedModel> model;
    try {
        model.emplace(load_rom(artifact));
    } catch (const ArtifactError& e) {
        out << "error: " << e.what() << "\n";
        return 3;
    }
    if (mu.size() != model->box().dim() || !model->box().contains(mu)) {
        out << "error: parameter outside the stored domain ["
            << model->box().lo.transpose() << "] .. [" << model->box().hi.transpose() << "]\n";
        return 2;
    }
    const double t0 = now_seconds();
    const ErrorEstimates est = model->estimate_errors(mu);
    const double seconds = now_seconds() - t0;
    out << "s_m1= " << CsvTable::format(est.level1.s) << "\n"
        << "s_m2= " << CsvTable::format(est.level2.s) << "\n"
        << "est_s_abs= " << CsvTable::format(est.output_est) << "\n"
        << "est_s_rel= " << CsvTable::format(est.output_rel) << "\n"
        << "est_u_abs= " << CsvTable::format(est.solution_est) << "\n"
        << "est_u_rel= " << CsvTable::format(est.solution_rel) << "\n"
        << "online_seconds= " << CsvTable::format(seconds) << "\n";
    return 0;
}

int inspect_artifact(const std::filesystem::path& artifact, std::ostream& out) {
    try {
        const json header = json::parse(read_rom_header_json(artifact));
        out << header.dump(2) << "\n";
    } catch (const ArtifactError& e) {
        out << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

}  // namespace grb
