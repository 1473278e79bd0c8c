#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "beamlab/beam_solver.hpp"
#include "beamlab/gamma.hpp"
#include "beamlab/model.hpp"
#include "beamlab/profile.hpp"

namespace beamlab {

struct YGrid {
    double y_max = 20.0;
    std::size_t n = 2001;
    double dy = 0.0;
    std::vector<double> y;

    // Uniform grid on [-y_max, y_max].
    static YGrid symmetric(double y_max, std::size_t n);
};

struct SelfSimilarState {
    double s = 0.0;
    double t = 0.0;
    double dy = 0.0;
    std::vector<double> y;
    std::vector<double> f, fy, fyy, fyyy, fyyyy, g, gy;
    // max |u - Gamma| over the physical grid of the source snapshot
    double sup_error = 0.0;
};

struct StructuralTerms {
    std::vector<double> L_of_f, N_of_f, k, h1, h2, h;
    // y-derivatives of h and k
    std::vector<double> h_y, k_y;
};

// Transform into (s, y) variables. Profile values on the y-grid are computed
// once and reused for every snapshot.
class SelfSimilarMap {
public:
    SelfSimilarMap(ModelParams params, std::shared_ptr<const ProfileSolution> profile, YGrid grid,
                   std::shared_ptr<const GammaField> background = nullptr);

    SelfSimilarState transform(const PhysicalState& state, Exec exec = Exec::parallel) const;
    StructuralTerms structural(const SelfSimilarState& st) const;

    const YGrid& grid() const { return grid_; }
    // Omega^{(k)} on the y-grid, k = 0..5.
    const std::vector<double>& omega(int k) const { return omega_[static_cast<std::size_t>(k)]; }
    const ModelParams& params() const { return params_; }
    const DerivedParams& derived() const { return derived_; }

private:
    ModelParams params_;
    DerivedParams derived_;
    std::shared_ptr<const ProfileSolution> profile_;
    YGrid grid_;
    std::shared_ptr<const GammaField> background_;
    std::array<std::vector<double>, 6> omega_;
};

SelfSimilarState to_selfsimilar(const ModelParams& params, const ProfileSolution& profile, const PhysicalState& state,
                                const YGrid& y_grid, std::shared_ptr<const GammaField> background = nullptr);

StructuralTerms structural_terms(const ModelParams& params, const ProfileSolution& profile,
                                 const SelfSimilarState& state);

// Largest |N(f) - k - p Omega^{p-1} f| relative to max(|p Omega^{p-1} f|, |k|).
double nonlinearity_identity_error(const SelfSimilarMap& map, const SelfSimilarState& st,
                                   const StructuralTerms& terms);

// -Omega^p [(1+x)^p - 1 - p x] with x = f/Omega, accurate for small x.
double quadratic_remainder(double omega, double f, double p);

void write_selfsim_csv(const SelfSimilarState& st, const StructuralTerms& terms, const std::string& path);

}  // namespace beamlab
