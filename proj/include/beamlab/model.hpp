#pragma once

#include <string>
#include <vector>

namespace beamlab {

// Coefficients a(t) = (1+t)^alpha, b(t) = b0 (1+t)^beta and the power p of
// the absorption term |u|^{p-1} u.
struct ModelParams {
    double alpha = 0.0;
    double beta = 0.0;
    double b0 = 1.0;
    double p = 2.5;

    // Throws std::invalid_argument unless b0 > 0 and p > 1.
    void validate() const;
};

struct DerivedParams {
    double kappa = 0.0;  // alpha - beta + 1
    double theta = 0.0;
    double p_crit = 0.0;
    double nu = 0.0;
    double varsigma = 0.0;
    double mu = 0.0;
    double A0 = 0.0;
    double theta_times_pm1 = 0.0;
    // Bounds on p from the third assumption; p_upper_III is +inf on the
    // branch theta(p-1) >= 1/4.
    double p_lower_III = 0.0;
    double p_upper_III = 0.0;
    bool assumption_I = false;
    bool assumption_II = false;
    bool assumption_III = false;

    bool all_assumptions() const { return assumption_I && assumption_II && assumption_III; }
    // Human-readable reason for the first failing assumption, empty if none.
    std::string violation() const;
};

struct CoefficientSample {
    double t = 0.0;
    double a = 0.0;
    double b = 0.0;
    double a_prime = 0.0;
    double b_prime = 0.0;
    double r = 0.0;
    double r_prime = 0.0;
    double R = 0.0;
    double R0 = 0.0;
    double s = 0.0;
    double epsilon = 0.0;
};

struct SmallRates {
    double s = 0.0;
    double t = 0.0;
    double c1 = 0.0;  // r^2 e^{-s} / a
    double c2 = 0.0;  // r' / a
    double c3 = 0.0;  // e^{-s} / a
    double bprime_over_b2 = 0.0;
    double r_aprime_over_a2 = 0.0;
    double c1_prime = 0.0;  // dc1/ds
    double c3_prime = 0.0;  // dc3/ds
};

DerivedParams derive_params(const ModelParams& params);
CoefficientSample coeff_eval(const ModelParams& params, double t);
SmallRates small_rates(const ModelParams& params, double s);

// Time maps for the power-law coefficients.
double R_of_t(const ModelParams& params, double t);
double t_of_R(const ModelParams& params, double R);
double s_of_t(const ModelParams& params, double t);
double t_of_s(const ModelParams& params, double s);

// R0(t) = t^kappa / (b0 kappa) together with its first two t-derivatives.
struct R0Sample {
    double R0 = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};
R0Sample R0_eval(const ModelParams& params, double t);

}  // namespace beamlab
