#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "beamlab/gamma.hpp"
#include "beamlab/kernels.hpp"
#include "beamlab/model.hpp"

namespace beamlab {

struct SpatialGrid {
    double x_min = 0.0;
    double x_max = 0.0;
    std::size_t n = 0;
    double dx = 0.0;

    // Uniform grid on [-L, L]; requires n >= 257.
    static SpatialGrid symmetric(double L, std::size_t n);
    double x(std::size_t i) const { return x_min + dx * static_cast<double>(i); }
    std::vector<double> nodes() const;
    double L() const { return x_max; }
};

struct PhysicalState {
    double t = 0.0;
    SpatialGrid grid;
    std::vector<double> u;
    std::vector<double> ut;
    // u - Gamma and ut - Gamma_t when the run carries a background; empty
    // otherwise. Kept alongside u so the difference is not recomputed by
    // cancellation.
    std::vector<double> du;
    std::vector<double> dut;

    bool has_perturbation() const { return !du.empty(); }
};

enum class PerturbTarget { u, ut, both };

struct PerturbationSpec {
    double amplitude = 0.0;
    double width = 1.0;
    double center = 0.0;
    PerturbTarget applies_to = PerturbTarget::u;
};

// Unit-peak gaussian exp(-(x-center)^2 / (2 width^2)).
double perturbation_shape(const PerturbationSpec& pert, double x);

// u = Gamma(t0) + delta phi, ut = Gamma_t(t0) (+ delta phi). The perturbation
// vanishes at the end nodes, where u equals Gamma.
PhysicalState initialize(const GammaField& gamma, double t0, const SpatialGrid& grid, const PerturbationSpec& pert);

// State without a background: u = u0, ut = ut0 with the end values zeroed.
PhysicalState initialize_plain(double t0, const SpatialGrid& grid, std::vector<double> u0, std::vector<double> ut0);

struct SpatialDerivatives {
    std::vector<double> uxx;
    std::vector<double> uxxxx;
};

SpatialDerivatives apply_spatial_operator(const PhysicalState& state, Exec exec = Exec::parallel);

struct SolverOptions {
    double dt = 0.025;
    bool nonlinear = true;
    // Abort if max|u| exceeds this multiple of its initial value at a sample
    // time; 0 disables the guard.
    double blowup_factor = 2.0;
    Exec exec = Exec::parallel;
};

using Observer = std::function<void(const PhysicalState&)>;

struct EvolveResult {
    PhysicalState final_state;
    std::vector<PhysicalState> snapshots;
    std::size_t steps = 0;
};

// Symmetric positive definite pentadiagonal system with diagonal d, first
// off-diagonal e and second off-diagonal f, solved by LDL^T.
void solve_pentadiagonal(std::span<const double> d, std::span<const double> e, std::span<const double> f,
                         std::span<double> rhs);

// Crank-Nicolson integration of
//   u_tt + b(t) u_t - a(t) u_xx + u_xxxx = -|u|^{p-1} u
// with simply supported ends. With a background Gamma the unknown is the
// perturbation w = u - Gamma, which satisfies
//   w_tt + b w_t - a w_xx + w_xxxx = -(F(Gamma + w) - F(Gamma)) + S
// where S is the defect of Gamma; w = 0 at the ends.
class BeamSolver {
public:
    BeamSolver(ModelParams params, std::shared_ptr<const GammaField> background, SolverOptions opts);

    PhysicalState step(const PhysicalState& state, double dt) const;

    EvolveResult evolve(const PhysicalState& state, double t_end, std::span<const double> sample_times,
                        const Observer& observer = {}, bool keep_snapshots = true) const;

    const SolverOptions& options() const { return opts_; }
    const GammaField* background() const { return background_.get(); }

private:
    struct Work;
    void advance(Work& work, double t, double dt) const;
    PhysicalState snapshot(const Work& work, double t) const;

    ModelParams params_;
    std::shared_ptr<const GammaField> background_;
    SolverOptions opts_;
};

// CSV with columns x, u, ut.
void write_physical_csv(const PhysicalState& state, const std::string& path);

// Discrete energy 1/2 sum (ut^2 + a (D+ u)^2 + (D2 u)^2) dx.
double discrete_energy(const PhysicalState& state, double a);

}  // namespace beamlab
