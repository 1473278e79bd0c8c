#include "beamlab/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "beamlab/beam_solver.hpp"
#include "beamlab/errors.hpp"
#include "beamlab/gamma.hpp"
#include "beamlab/io.hpp"
#include "beamlab/selfsim.hpp"

namespace beamlab {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// JSON cannot hold inf or nan; write them as strings.
json num(double v) {
    if (std::isfinite(v)) return v;
    return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("missing " + path.string());
    return json::parse(in);
}

double domain_half_width(const ExperimentConfig& cfg) {
    if (cfg.grid.L > 0.0) return cfg.grid.L;
    const double s_end = s_of_t(cfg.model, cfg.t_final());
    return cfg.grid.margin * cfg.selfsim.y_max * std::exp(0.5 * s_end);
}

}  // namespace

void require_assumptions(const ExperimentConfig& cfg) {
    const DerivedParams d = derive_params(cfg.model);
    if (!d.all_assumptions()) throw AssumptionError(d.violation());
}

ProfileStage run_profile(const ExperimentConfig& cfg) {
    const auto start = Clock::now();
    const DerivedParams d = derive_params(cfg.model);
    ProfileStage st;
    auto sol = std::make_shared<ProfileSolution>(
        solve_profile(cfg.model.p, d.theta, d.varsigma, cfg.target, cfg.profile));
    st.seconds = seconds_since(start);
    st.residual = sol->residual_max;
    const double lo = cfg.fit_window_hi > 0.0 ? cfg.fit_window_lo : 0.5 * sol->z_max;
    const double hi = cfg.fit_window_hi > 0.0 ? cfg.fit_window_hi : sol->z_max;
    st.asymptotics = fit_asymptotics(*sol, lo, hi);
    const double zr = std::min(20.0, sol->z_max);
    const double c0 = cfg.target.kind == ProfileTarget::Kind::c0 ? cfg.target.value : sol->c0;
    st.tail_error = (std::pow(zr, 2.0 * d.theta) * sol->omega_at(zr) - c0) / c0;
    st.combo_target = -(2.0 * d.theta + 2.0 * d.varsigma);
    st.solution = std::move(sol);
    return st;
}

WeightStage run_weight(const ExperimentConfig& cfg, const ProfileSolution& profile) {
    const auto start = Clock::now();
    WeightStage st;
    st.weight = build_weight(profile, cfg.weight.y_max, cfg.weight.nodes, cfg.weight.options);
    st.seconds = seconds_since(start);
    st.margin = weight_inequality_margin(st.weight, profile);
    st.asymptotics = weight_asymptotics(st.weight, profile);
    st.identity = weight_identity_error(st.weight, profile, cfg.weight.options);
    st.bounds = weight_bound_constants(st.weight, profile.theta);
    return st;
}

SimulationStage run_simulation(const ExperimentConfig& cfg, const ProfileSolution& profile,
                               const WeightFunction& weight, const fs::path& snapshot_dir) {
    const auto start = Clock::now();
    const ModelParams& mp = cfg.model;
    const DerivedParams d = derive_params(mp);
    SimulationStage out;
    out.s0 = s_of_t(mp, cfg.run.t0);
    out.t_end = cfg.t_final();
    const double s_end = s_of_t(mp, out.t_end);

    double L = domain_half_width(cfg);
    out.n = 2 * static_cast<std::size_t>(std::ceil(L / cfg.grid.dx)) + 1;
    L = cfg.grid.dx * static_cast<double>(out.n - 1) / 2.0;
    out.L = L;
    out.dt = cfg.grid.dt_factor * cfg.grid.dx;

    const double z_need = 1.05 * L / std::sqrt(R0_eval(mp, cfg.run.t0).R0);
    auto prof = std::make_shared<const ProfileSolution>(
        z_need > profile.z_max ? extend_profile(profile, z_need) : profile);
    auto gamma = std::make_shared<const GammaField>(mp, prof, 1.0);
    const SpatialGrid grid = SpatialGrid::symmetric(L, out.n);
    const PhysicalState init = initialize(*gamma, cfg.run.t0, grid, cfg.perturbation);

    SolverOptions so;
    so.dt = out.dt;
    so.nonlinear = cfg.run.nonlinear;
    so.blowup_factor = cfg.run.blowup_factor;
    BeamSolver solver(mp, gamma, so);

    std::vector<double> times;
    const auto K = static_cast<std::size_t>(std::floor((s_end - out.s0) / cfg.run.snapshot_ds + 1e-9));
    times.push_back(cfg.run.t0);
    for (std::size_t k = 1; k <= K; ++k) {
        times.push_back(t_of_s(mp, out.s0 + static_cast<double>(k) * cfg.run.snapshot_ds));
    }

    // The last sample lands on t_end up to rounding of the time maps.
    if (std::fabs(times.back() - out.t_end) <= 1e-9 * out.t_end) times.back() = out.t_end;

    SelfSimilarMap map(mp, prof, YGrid::symmetric(cfg.selfsim.y_max, cfg.selfsim.nodes), gamma);
    const bool exporting = !snapshot_dir.empty() && cfg.run.export_every > 0;
    if (exporting) fs::create_directories(snapshot_dir);
    std::size_t index = 0;

    auto record = [&](const PhysicalState& ps) {
        const SelfSimilarState ss = map.transform(ps);
        const StructuralTerms tt = map.structural(ss);
        out.energy.push_back(energy_suite(ss, mp, weight, cfg.energy.weights, ss.s));
        TrajectoryRow row;
        row.s = ss.s;
        row.t = ss.t;
        const auto e2 = identity_sample(ss, tt, mp, Functional::E2, 0, d.theta, d.theta + 1.0);
        const auto e1 = identity_sample(ss, tt, mp, Functional::E1, 0, d.theta, d.theta + 1.0);
        row.e2_value = e2.value;
        row.e2_rhs = e2.rhs;
        row.e1_value = e1.value;
        row.e1_rhs = e1.rhs;
        row.nk_error = nonlinearity_identity_error(map, ss, tt);
        const std::span<const double> hs[] = {tt.h};
        row.h_norm = weighted_norm(hs, ss.y, ss.dy, 0, 1);
        out.trajectory.push_back(row);
        if (exporting && index % cfg.run.export_every == 0) {
            char name[64];
            std::snprintf(name, sizeof name, "selfsim_%05zu.csv", index);
            write_selfsim_csv(ss, tt, (snapshot_dir / name).string());
            std::snprintf(name, sizeof name, "physical_%05zu.csv", index);
            write_physical_csv(ps, (snapshot_dir / name).string());
        }
        ++index;
    };

    record(init);
    const std::span<const double> later(times.data() + 1, times.size() - 1);
    const EvolveResult res = solver.evolve(init, out.t_end, later, record, false);
    out.steps = res.steps;
    out.seconds = seconds_since(start);
    return out;
}

Analysis analyze(const ExperimentConfig& cfg, std::span<const EnergySample> energy,
                 std::span<const TrajectoryRow> trajectory) {
    if (energy.size() != trajectory.size() || energy.size() < 3) {
        throw NumericalError("analysis needs at least 3 matching energy and trajectory samples");
    }
    const DerivedParams d = derive_params(cfg.model);
    const double s0 = energy.front().s;
    const double s_last = energy.back().s;
    Analysis a;
    a.mu = d.mu;

    a.phi_window_lo = s0 + cfg.energy.fit_lo;
    a.phi_window_hi = cfg.energy.fit_hi ? s0 + *cfg.energy.fit_hi : s_last;
    std::vector<double> s, phi;
    for (const auto& e : energy) {
        if (e.s >= a.phi_window_lo - 1e-9 && e.s <= a.phi_window_hi + 1e-9) {
            s.push_back(e.s);
            phi.push_back(e.phi);
        }
    }
    a.phi_decreasing = s.size() >= 2;
    for (std::size_t i = 1; i < phi.size(); ++i) {
        if (!(phi[i] < phi[i - 1])) a.phi_decreasing = false;
    }
    a.decay = fit_decay(s, phi, a.phi_window_lo - 1e-9, a.phi_window_hi + 1e-9);

    // Final decade of R + 1 = e^s.
    const double floor_s = s_last - std::log(10.0);
    std::vector<double> R1, err;
    for (const auto& e : energy) {
        if (e.s >= floor_s - 1e-12) {
            R1.push_back(std::exp(e.s));
            err.push_back(e.sup_error);
        }
    }
    a.t2_slope = loglog_slope(R1, err);
    a.t2_threshold = -d.theta - 0.02;

    std::vector<IdentitySample> e2, e1;
    double hmin = INFINITY, hmax = 0.0;
    for (const auto& r : trajectory) {
        e2.push_back({r.s, r.e2_value, r.e2_rhs});
        e1.push_back({r.s, r.e1_value, r.e1_rhs});
        a.nk_max = std::max(a.nk_max, r.nk_error);
        if (r.s >= s0 + cfg.energy.h_window_lo - 1e-9) {
            const double v = r.h_norm * std::exp(d.mu * r.s);
            hmin = std::min(hmin, v);
            hmax = std::max(hmax, v);
        }
    }
    a.e2_mismatch = identity_check(e2, 0.0, cfg.energy.identity_value_scale).max_mismatch;
    a.e1_mismatch = identity_check(e1, 0.0, cfg.energy.identity_value_scale).max_mismatch;
    a.h_ratio = hmax > 0.0 ? hmax / hmin : INFINITY;
    a.M = cfg.energy.M ? *cfg.energy.M : minimal_M(d.theta);
    a.m_condition = m_condition(d.theta, a.M);
    return a;
}

void write_profile_outputs(const ExperimentConfig& cfg, const ProfileStage& st, const fs::path& dir) {
    fs::create_directories(dir);
    if (cfg.write_csv) write_profile_csv(*st.solution, (dir / "profile.csv").string());
    if (!cfg.write_json) return;
    const auto& s = *st.solution;
    const auto& fa = st.asymptotics;
    json j;
    j["omega0"] = num(s.omega0);
    j["c0_tail"] = num(s.c0);
    j["c1_tail"] = num(s.tail_c1);
    j["z_max"] = num(s.z_max);
    j["nodes"] = s.size();
    j["residual_max"] = num(st.residual);
    j["tail_relative_error_z20"] = num(st.tail_error);
    j["fit_window"] = {num(fa.window_lo), num(fa.window_hi)};
    j["c0_fit"] = num(fa.c0_fit);
    j["rate_omega"] = num(fa.tail_rate_omega);
    j["rate_combo"] = num(fa.rate_combo);
    j["rate_combo_target"] = num(st.combo_target);
    j["ratio_d2"] = num(fa.ratio_d2);
    j["ratio_d3"] = num(fa.ratio_d3);
    j["ratio_d4"] = num(fa.ratio_d4);
    j["seconds"] = num(st.seconds);
    write_json(dir / "profile.json", j);
}

void write_weight_outputs(const ExperimentConfig& cfg, const WeightStage& st, const fs::path& dir) {
    fs::create_directories(dir);
    if (cfg.write_csv) write_weight_csv(st.weight, (dir / "weight.csv").string());
    if (!cfg.write_json) return;
    const auto& wa = st.asymptotics;
    json j;
    j["y_max"] = num(st.weight.y_max);
    j["nodes"] = st.weight.size();
    j["inequality_margin"] = num(st.margin);
    j["leading_ratio"] = num(wa.leading_ratio);
    j["loglog_slope"] = num(wa.loglog_slope);
    j["loglog_slope_target"] = num(4.0 * st.weight.theta - 1.0);
    j["correction_exponent_2"] = {{"K", num(wa.model_2.K)}, {"rms", num(wa.model_2.rms)}};
    j["correction_exponent_2varsigma"] = {{"exponent", num(wa.model_2varsigma.exponent)},
                                          {"K", num(wa.model_2varsigma.K)},
                                          {"rms", num(wa.model_2varsigma.rms)}};
    j["free_exponent"] = num(wa.free_exponent);
    j["identity_max_relative"] = num(st.identity.max_relative);
    j["identity_origin"] = num(st.identity.origin_abs);
    j["quad_error_max"] = num(st.weight.quad_error_max);
    j["bounds"] = {{"c_lower", num(st.bounds.c_lower)},
                   {"c_upper", num(st.bounds.c_upper)},
                   {"c_d1", num(st.bounds.c_d1)},
                   {"c_d2", num(st.bounds.c_d2)}};
    j["seconds"] = num(st.seconds);
    write_json(dir / "weight.json", j);
}

void write_simulation_outputs(const ExperimentConfig& cfg, const SimulationStage& st, const fs::path& dir) {
    fs::create_directories(dir);
    write_energy_csv(st.energy, (dir / "energy.csv").string());
    {
        CsvWriter w((dir / "trajectory.csv").string(),
                    {"s", "t", "e2_value", "e2_rhs", "e1_value", "e1_rhs", "nk_error", "h_norm"});
        for (const auto& r : st.trajectory) {
            w.row({r.s, r.t, r.e2_value, r.e2_rhs, r.e1_value, r.e1_rhs, r.nk_error, r.h_norm});
        }
    }
    if (!cfg.write_json) return;
    json j;
    j["s0"] = num(st.s0);
    j["t_end"] = num(st.t_end);
    j["L"] = num(st.L);
    j["n"] = st.n;
    j["dt"] = num(st.dt);
    j["steps"] = st.steps;
    j["samples"] = st.energy.size();
    j["seconds"] = num(st.seconds);
    write_json(dir / "simulation.json", j);
}

void write_analysis(const ExperimentConfig& cfg, const Analysis& a, const fs::path& dir) {
    fs::create_directories(dir);
    if (!cfg.write_json) return;
    json j;
    j["mu0"] = num(a.decay.mu0);
    j["mu0_rms"] = num(a.decay.rms_residual);
    j["phi_window"] = {num(a.phi_window_lo), num(a.phi_window_hi)};
    j["phi_decreasing"] = a.phi_decreasing;
    j["t2_slope"] = num(a.t2_slope);
    j["t2_threshold"] = num(a.t2_threshold);
    j["identity_e2_mismatch"] = num(a.e2_mismatch);
    j["identity_e1_mismatch"] = num(a.e1_mismatch);
    j["h_ratio"] = num(a.h_ratio);
    j["mu"] = num(a.mu);
    j["nk_identity_max"] = num(a.nk_max);
    j["M"] = num(a.M);
    j["M_condition"] = num(a.m_condition);
    write_json(dir / "analysis.json", j);
}

void write_manifest(const ExperimentConfig& cfg, const fs::path& dir, const std::string& subcommand) {
    fs::create_directories(dir);
    const DerivedParams d = derive_params(cfg.model);
    json j;
    j["program"] = "beamlab";
    j["subcommand"] = subcommand;
    j["config_source"] = cfg.source;
    j["config"] = config_to_ini(cfg);
    j["derived"] = {{"kappa", num(d.kappa)}, {"theta", num(d.theta)},       {"p_crit", num(d.p_crit)},
                    {"nu", num(d.nu)},       {"varsigma", num(d.varsigma)}, {"mu", num(d.mu)},
                    {"A0", num(d.A0)}};
    j["assumptions"] = {{"I", d.assumption_I}, {"II", d.assumption_II}, {"III", d.assumption_III}};
    j["t_final"] = num(cfg.t_final());
    j["seed"] = nullptr;  // no stochastic inputs
    json files = json::array();
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().filename() != "manifest.json") {
            files.push_back(entry.path().filename().string());
        }
    }
    std::sort(files.begin(), files.end());
    j["files"] = files;
    write_json(dir / "manifest.json", j);
}

std::vector<EnergySample> read_energy_csv(const fs::path& path) {
    const CsvTable t = read_csv(path.string());
    const auto col = [&](const char* n) { return t.column(n); };
    const std::size_t cs = col("s"), ct = col("t"), cphi = col("phi"), c201 = col("e2_01"), cq = col("e_q"),
                      cr = col("e_rho"), c101 = col("e1_01"), c210 = col("e2_1_0"), c110 = col("e1_1_0"),
                      cf = col("e_full"), cg = col("norm_g_L21"), cyy = col("norm_fyy_L2"),
                      cgy = col("norm_gy_L2"), cse = col("sup_error");
    std::vector<EnergySample> out;
    for (const auto& r : t.rows) {
        EnergySample e;
        e.s = r[cs];
        e.t = r[ct];
        e.phi = r[cphi];
        e.e2_01 = r[c201];
        e.e_q = r[cq];
        e.e_rho = r[cr];
        e.e1_01 = r[c101];
        e.e2_1_0 = r[c210];
        e.e1_1_0 = r[c110];
        e.e_full = r[cf];
        e.norm_g_L21 = r[cg];
        e.norm_fyy_L2 = r[cyy];
        e.norm_gy_L2 = r[cgy];
        e.sup_error = r[cse];
        out.push_back(e);
    }
    return out;
}

std::vector<TrajectoryRow> read_trajectory_csv(const fs::path& path) {
    const CsvTable t = read_csv(path.string());
    const std::size_t cs = t.column("s"), ct = t.column("t"), c2v = t.column("e2_value"), c2r = t.column("e2_rhs"),
                      c1v = t.column("e1_value"), c1r = t.column("e1_rhs"), cnk = t.column("nk_error"),
                      ch = t.column("h_norm");
    std::vector<TrajectoryRow> out;
    for (const auto& r : t.rows) {
        out.push_back({r[cs], r[ct], r[c2v], r[c2r], r[c1v], r[c1r], r[cnk], r[ch]});
    }
    return out;
}

std::string write_report(const fs::path& dir) {
    json j;
    for (const char* stage : {"profile", "weight", "simulation", "analysis"}) {
        const fs::path p = dir / (std::string(stage) + ".json");
        if (fs::exists(p)) j[stage] = read_json(p);
    }
    if (j.empty()) throw std::runtime_error("no stage outputs in " + dir.string());
    json summary;
    if (j.contains("analysis")) {
        const auto& a = j["analysis"];
        summary["mu0"] = a["mu0"];
        summary["t2_slope"] = a["t2_slope"];
        summary["identity_e2_mismatch"] = a["identity_e2_mismatch"];
        summary["identity_e1_mismatch"] = a["identity_e1_mismatch"];
    }
    if (j.contains("weight")) summary["weight_inequality_margin"] = j["weight"]["inequality_margin"];
    j["summary"] = summary;
    write_json(dir / "report.json", j);
    return j.dump(2);
}

}  // namespace beamlab
