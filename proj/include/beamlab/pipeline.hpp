#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "beamlab/config.hpp"
#include "beamlab/energy.hpp"
#include "beamlab/profile.hpp"
#include "beamlab/weight.hpp"

namespace beamlab {

struct ProfileStage {
    std::shared_ptr<const ProfileSolution> solution;
    FittedAsymptotics asymptotics;
    double residual = 0.0;     // max of the stored-field and finite-difference residuals
    double tail_error = 0.0;   // (z^{2 theta} Omega(z) - c0) / c0 at z = min(20, z_max)
    double combo_target = 0.0; // -(2 theta + 2 varsigma)
    double seconds = 0.0;
};

struct WeightStage {
    WeightFunction weight;
    double margin = 0.0;  // max of the inequality left-hand side, <= 0 when it holds
    WeightAsymptotics asymptotics;
    WeightIdentityError identity;
    WeightBounds bounds;
    double seconds = 0.0;
};

// One sampled time of the simulation.
struct TrajectoryRow {
    double s = 0.0;
    double t = 0.0;
    double e2_value = 0.0, e2_rhs = 0.0;
    double e1_value = 0.0, e1_rhs = 0.0;
    double nk_error = 0.0;  // relative defect of N(f) - k = p Omega^{p-1} f
    double h_norm = 0.0;    // ||h||_{H^{0,1}}
};

struct SimulationStage {
    std::vector<EnergySample> energy;
    std::vector<TrajectoryRow> trajectory;
    double s0 = 0.0;
    double t_end = 0.0;
    double L = 0.0;
    std::size_t n = 0;
    double dt = 0.0;
    std::size_t steps = 0;
    double seconds = 0.0;
};

struct Analysis {
    DecayReport decay;
    bool phi_decreasing = false;
    double phi_window_lo = 0.0, phi_window_hi = 0.0;
    double t2_slope = 0.0;
    double t2_threshold = 0.0;  // -theta - 0.02
    double e2_mismatch = 0.0;
    double e1_mismatch = 0.0;
    double h_ratio = 0.0;  // max/min of ||h|| e^{mu s} on the h window
    double nk_max = 0.0;
    double mu = 0.0;
    double M = 0.0;
    double m_condition = 0.0;
};

ProfileStage run_profile(const ExperimentConfig& cfg);
WeightStage run_weight(const ExperimentConfig& cfg, const ProfileSolution& profile);

// Evolves from t0 to cfg.t_final(), sampling every snapshot_ds in s. When
// snapshot_dir is non-empty every export_every-th sample is written there.
SimulationStage run_simulation(const ExperimentConfig& cfg, const ProfileSolution& profile,
                               const WeightFunction& weight, const std::filesystem::path& snapshot_dir = {});

Analysis analyze(const ExperimentConfig& cfg, std::span<const EnergySample> energy,
                 std::span<const TrajectoryRow> trajectory);

// Artifact writers and readers for a run directory.
void write_profile_outputs(const ExperimentConfig& cfg, const ProfileStage& st, const std::filesystem::path& dir);
void write_weight_outputs(const ExperimentConfig& cfg, const WeightStage& st, const std::filesystem::path& dir);
void write_simulation_outputs(const ExperimentConfig& cfg, const SimulationStage& st,
                              const std::filesystem::path& dir);
void write_analysis(const ExperimentConfig& cfg, const Analysis& a, const std::filesystem::path& dir);
void write_manifest(const ExperimentConfig& cfg, const std::filesystem::path& dir, const std::string& subcommand);

std::vector<EnergySample> read_energy_csv(const std::filesystem::path& path);
std::vector<TrajectoryRow> read_trajectory_csv(const std::filesystem::path& path);

// Merges the stage JSON files of a run directory into report.json and returns its text.
std::string write_report(const std::filesystem::path& dir);

// Checks the assumptions and throws AssumptionError naming the first failure.
void require_assumptions(const ExperimentConfig& cfg);

}  // namespace beamlab
