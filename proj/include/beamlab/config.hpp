#pragma once

#include <optional>
#include <string>

#include "beamlab/beam_solver.hpp"
#include "beamlab/energy.hpp"
#include "beamlab/model.hpp"
#include "beamlab/profile.hpp"
#include "beamlab/weight.hpp"

namespace beamlab {

struct GridConfig {
    // Half-width of the physical domain; 0 selects it from the final time so
    // that y_max e^{s/2} stays inside with the given margin.
    double L = 0.0;
    double dx = 0.2;
    double dt_factor = 0.25;  // dt = dt_factor * dx
    double margin = 1.2;
};

struct SelfSimConfig {
    double y_max = 20.0;
    std::size_t nodes = 2001;
};

struct RunConfig {
    double t0 = 10.0;
    // Exactly one of span (in s) and t_end is used; t_end wins when set.
    double span = 4.0;
    std::optional<double> t_end;
    double snapshot_ds = 0.01;
    std::size_t export_every = 0;  // write a y-grid snapshot every k samples; 0 disables
    bool nonlinear = true;
    double blowup_factor = 2.0;
};

struct EnergyConfig {
    EnergyWeights weights;
    double fit_lo = 1.0;  // decay-fit window as offsets from s0
    std::optional<double> fit_hi;
    double h_window_lo = 0.5;
    double identity_value_scale = 1.0;
    std::optional<double> M;
};

struct WeightConfig {
    double y_max = 20.0;
    std::size_t nodes = 1001;
    WeightOptions options;
};

struct ExperimentConfig {
    std::string source;  // path the config was read from, empty if built in code
    ModelParams model;
    ProfileTarget target = ProfileTarget::from_c0(1.0);
    ProfileOptions profile;
    double fit_window_lo = 0.0;  // 0 means z_max/2 and z_max
    double fit_window_hi = 0.0;
    WeightConfig weight;
    GridConfig grid;
    SelfSimConfig selfsim;
    RunConfig run;
    PerturbationSpec perturbation{1e-3, 1.0, 0.0, PerturbTarget::u};
    EnergyConfig energy;
    std::string output_dir = "out";
    bool write_csv = true;
    bool write_json = true;

    // Time at which the run stops.
    double t_final() const;
    void validate() const;
};

// Parses a sectioned key = value file. Throws ConfigError naming the
// offending section.key for missing, unknown or malformed entries.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text, const std::string& source = "");

// Inverse of parse_config, used to write the run manifest.
std::string config_to_ini(const ExperimentConfig& cfg);

}  // namespace beamlab
