#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "beamlab/config.hpp"
#include "beamlab/errors.hpp"
#include "beamlab/pipeline.hpp"

namespace fs = std::filesystem;
using namespace beamlab;

namespace {

enum Exit { ok = 0, config_error = 2, assumption_error = 3, numerical_error = 4 };

void print_validation(const ExperimentConfig& cfg, std::ostream& os) {
    const DerivedParams d = derive_params(cfg.model);
    os << std::setprecision(10);
    os << "alpha = " << cfg.model.alpha << "  beta = " << cfg.model.beta << "  b0 = " << cfg.model.b0
       << "  p = " << cfg.model.p << "\n";
    os << "kappa = " << d.kappa << "\n";
    os << "theta = " << d.theta << "\n";
    os << "p_crit = " << d.p_crit << "\n";
    os << "nu = " << d.nu << "\n";
    os << "varsigma = " << d.varsigma << "\n";
    os << "mu = " << d.mu << "\n";
    os << "A0 = " << d.A0 << "\n";
    os << "assumption I: " << (d.assumption_I ? "true" : "false") << "\n";
    os << "assumption II: " << (d.assumption_II ? "true" : "false") << "\n";
    os << "assumption III: " << (d.assumption_III ? "true" : "false") << "\n";
    if (!d.all_assumptions()) os << d.violation() << "\n";
    os << "t_final = " << cfg.t_final() << "\n";
}

int run_one(const std::string& sub, const std::string& config_path, const fs::path& out_override, bool nested,
            std::ostream& os) {
    ExperimentConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const ConfigError& e) {
        os << "config error: " << e.what() << "\n";
        return config_error;
    }
    fs::path dir = out_override.empty() ? fs::path(cfg.output_dir) : out_override;
    if (nested) dir /= fs::path(config_path).stem();

    try {
        if (sub == "validate") {
            print_validation(cfg, os);
            return ok;
        }
        require_assumptions(cfg);
        fs::create_directories(dir);
        if (sub == "analyze" || sub == "report") {
            if (sub == "analyze") {
                const auto energy = read_energy_csv(dir / "energy.csv");
                const auto traj = read_trajectory_csv(dir / "trajectory.csv");
                const Analysis a = analyze(cfg, energy, traj);
                write_analysis(cfg, a, dir);
                os << "mu0 = " << a.decay.mu0 << " (rms " << a.decay.rms_residual << ")\n";
                os << "t2 slope = " << a.t2_slope << "\n";
            } else {
                os << write_report(dir) << "\n";
            }
            write_manifest(cfg, dir, sub);
            return ok;
        }

        const ProfileStage prof = run_profile(cfg);
        write_profile_outputs(cfg, prof, dir);
        os << "profile: omega0 = " << std::setprecision(15) << prof.solution->omega0
           << "  residual = " << prof.residual << "\n";
        if (sub != "profile") {
            const WeightStage w = run_weight(cfg, *prof.solution);
            write_weight_outputs(cfg, w, dir);
            os << "weight: margin = " << w.margin << "  identity = " << w.identity.max_relative << "\n";
            if (sub == "simulate" || sub == "all") {
                const SimulationStage sim = run_simulation(cfg, *prof.solution, w.weight, dir / "snapshots");
                write_simulation_outputs(cfg, sim, dir);
                os << "simulate: " << sim.steps << " steps, " << sim.energy.size() << " samples, "
                   << sim.seconds << " s\n";
                if (sub == "all") {
                    const Analysis a = analyze(cfg, sim.energy, sim.trajectory);
                    write_analysis(cfg, a, dir);
                    if (cfg.write_json) write_report(dir);
                    os << "mu0 = " << a.decay.mu0 << "  t2 slope = " << a.t2_slope << "  identity E2 "
                       << a.e2_mismatch << " E1 " << a.e1_mismatch << "\n";
                }
            }
        }
        write_manifest(cfg, dir, sub);
        return ok;
    } catch (const AssumptionError& e) {
        os << "assumption violated: " << e.what() << "\n";
        return assumption_error;
    } catch (const ConfigError& e) {
        os << "config error: " << e.what() << "\n";
        return config_error;
    } catch (const std::exception& e) {
        os << "numerical failure: " << e.what() << "\n";
        std::error_code ec;
        fs::create_directories(dir, ec);
        std::ofstream diag(dir / "failure.txt");
        diag << "subcommand: " << sub << "\n";
        diag << "config: " << config_path << "\n";
        diag << "error: " << e.what() << "\n";
        diag << "\n" << config_to_ini(cfg);
        return numerical_error;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Damped-beam self-similar asymptotics experiments"};
    app.require_subcommand(1, 1);
    std::vector<std::string> configs;
    std::string out;
    unsigned jobs = 1;

    const char* subs[][2] = {
        {"validate", "Print derived constants and assumption verdicts"},
        {"profile", "Solve the profile equation and write profile.csv"},
        {"weight", "Build the weight function and write weight.csv"},
        {"simulate", "Run the beam solver with streaming energy evaluation"},
        {"analyze", "Fit decay rates and check identities on a run directory"},
        {"report", "Aggregate stage outputs into report.json"},
        {"all", "Run every stage"},
    };
    for (const auto& s : subs) {
        auto* sc = app.add_subcommand(s[0], s[1]);
        sc->add_option("--config", configs, "Experiment config file (repeatable)")->required()->check(CLI::ExistingFile);
        sc->add_option("--out", out, "Output directory (default: output.directory of the config)");
        sc->add_option("--jobs", jobs, "Independent configs to run in parallel")->check(CLI::PositiveNumber);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : config_error;
    }
    const std::string sub = app.get_subcommands().front()->get_name();
    const bool nested = configs.size() > 1;

    std::vector<std::string> logs(configs.size());
    std::vector<int> codes(configs.size(), ok);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < configs.size(); i = next++) {
            std::ostringstream os;
            codes[i] = run_one(sub, configs[i], out, nested, os);
            logs[i] = os.str();
        }
    };
    const unsigned n_threads = std::min<unsigned>(jobs, static_cast<unsigned>(configs.size()));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned k = 0; k < n_threads; ++k) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    int worst = ok;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        if (nested) std::cout << "== " << configs[i] << "\n";
        (codes[i] == ok ? std::cout : std::cerr) << logs[i];
        worst = std::max(worst, codes[i]);
    }
    return worst;
}
