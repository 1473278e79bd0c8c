#pragma once

#include <memory>
#include <span>
#include <vector>

#include "beamlab/kernels.hpp"
#include "beamlab/model.hpp"
#include "beamlab/profile.hpp"

namespace beamlab {

struct GammaFields {
    double t = 0.0;
    std::vector<double> gamma, gamma_t, gamma_x, gamma_xx, gamma_xxx, gamma_xxxx, gamma_tt, gamma_xt;
    // -Gamma_tt - (b - b0(1+t)^beta) Gamma_t + (a - (1+t)^alpha) Gamma_xx - Gamma_xxxx
    std::vector<double> remainder;
    // Exact source term: -(Gamma_tt + b Gamma_t - a Gamma_xx + Gamma_xxxx + Gamma^p).
    std::vector<double> defect;

    void resize(std::size_t n);
};

// Gamma(t,x) = A0 R0(t)^{-theta} Omega(x / sqrt(R0(t))) with its derivatives.
class GammaField {
public:
    GammaField(ModelParams params, std::shared_ptr<const ProfileSolution> profile, double t_min = 1.0);

    GammaFields eval(double t, std::span<const double> xs, Exec exec = Exec::parallel) const;
    void eval_into(double t, std::span<const double> xs, GammaFields& out, Exec exec = Exec::parallel) const;

    // Only Gamma and the defect, for the solver's half-step source.
    void background_into(double t, std::span<const double> xs, std::span<double> gamma, std::span<double> defect,
                         Exec exec = Exec::parallel) const;

    const ModelParams& params() const { return params_; }
    const DerivedParams& derived() const { return derived_; }
    const ProfileSolution& profile() const { return *profile_; }
    std::shared_ptr<const ProfileSolution> profile_ptr() const { return profile_; }
    double t_min() const { return t_min_; }

private:
    ModelParams params_;
    DerivedParams derived_;
    std::shared_ptr<const ProfileSolution> profile_;
    double t_min_;
};

GammaFields gamma_eval(const ModelParams& params, const ProfileSolution& profile, double t,
                       std::span<const double> xs, double t_min = 1.0);

}  // namespace beamlab
