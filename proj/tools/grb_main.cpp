#include <CLI11.hpp>
#include <Eigen/Dense>
#include <iostream>
#include <sstream>
#include <string>

#include "grb/study.hpp"

namespace {

Eigen::VectorXd parse_mu(const std::string& text) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        values.push_back(std::stod(item));
    }
    if (values.empty()) throw grb::InvalidInputError("--mu expects comma-separated reals");
    return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                             static_cast<Eigen::Index>(values.size()));
}

grb::ExperimentConfig load_config(const std::string& config_path, const std::string& out_dir,
                                  bool no_basis, int seed) {
    grb::ExperimentConfig cfg = grb::ExperimentConfig::from_file(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (no_basis) cfg.store_bases = false;
    if (seed >= 0) cfg.seed = static_cast<unsigned>(seed);
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generative reduced basis toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_dir, artifact, mu_text;
    bool no_basis = false;
    int threads = 0, seed = -1;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        if (needs_config) {
            sub->add_option("--config", config_path, "JSON experiment config")->required();
        }
        sub->add_option("--out", out_dir, "output directory override");
        sub->add_option("--threads", threads, "worker thread count (advisory)");
        sub->add_flag("--no-basis", no_basis, "do not store bases in artifacts");
        sub->add_option("--seed", seed, "seed override");
    };

    CLI::App* approx = app.add_subcommand("approx-study",
                                          "manifold approximation error convergence study");
    add_common(approx, true);

    CLI::App* greedy = app.add_subcommand("greedy",
                                          "greedy sampling; writes trace CSV and ROM artifact");
    add_common(greedy, true);

    CLI::App* rom_eval = app.add_subcommand("rom-eval",
                                            "true errors and estimates over a test grid");
    add_common(rom_eval, true);

    CLI::App* online = app.add_subcommand("online", "single online query from an artifact");
    online->add_option("--artifact", artifact, "ROM artifact path")->required();
    online->add_option("--mu", mu_text, "comma-separated parameter values")->required();

    CLI::App* inspect = app.add_subcommand("inspect", "dump an artifact header");
    inspect->add_option("--artifact", artifact, "ROM artifact path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;  // usage errors
    }

    try {
        if (approx->parsed()) {
            const auto cfg = load_config(config_path, out_dir, no_basis, seed);
            const grb::StudyResult result = grb::run_approx_study(cfg);
            std::filesystem::create_directories(cfg.out_dir);
            const auto path = cfg.out_dir / (cfg.problem + "_approx.csv");
            result.write(path);
            std::cout << "wrote " << path.string() << " (" << result.table.rows().size()
                      << " rows)\n";
            if (result.spectra) {
                const auto spectra_path = cfg.out_dir / (cfg.problem + "_approx_spectra.csv");
                result.spectra->write(spectra_path);
                std::cout << "wrote " << spectra_path.string() << "\n";
            }
        } else if (greedy->parsed()) {
            const auto cfg = load_config(config_path, out_dir, no_basis, seed);
            const grb::GreedyRunOutput out = grb::run_greedy(cfg);
            std::cout << "wrote " << out.trace_csv.string() << "\n"
                      << "wrote " << out.artifact.string() << "\n"
                      << "final N = " << out.result.sample.size()
                      << (out.result.trace.converged ? " (converged)" : " (iteration cap)")
                      << "\n";
        } else if (rom_eval->parsed()) {
            const auto cfg = load_config(config_path, out_dir, no_basis, seed);
            const grb::StudyResult result = grb::run_rom_eval(cfg);
            std::filesystem::create_directories(cfg.out_dir);
            const auto path = cfg.out_dir / (cfg.problem + "_rom_eval.csv");
            result.write(path);
            std::cout << "wrote " << path.string() << " (" << result.table.rows().size()
                      << " rows)\n";
        } else if (online->parsed()) {
            return grb::online_query(artifact, parse_mu(mu_text), std::cout);
        } else if (inspect->parsed()) {
            return grb::inspect_artifact(artifact, std::cout);
        }
    } catch (const grb::ArtifactError& e) {
        std::cerr << "artifact error: " << e.what() << "\n";
        return 3;
    } catch (const grb::OutOfRangeError& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
