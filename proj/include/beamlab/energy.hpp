#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "beamlab/model.hpp"
#include "beamlab/profile.hpp"
#include "beamlab/selfsim.hpp"
#include "beamlab/weight.hpp"

namespace beamlab {

struct EnergyWeights {
    double rho = 10.0;
    double vartheta = 0.1;
    double zeta = 0.1;
    double omega_w = 0.1;

    void validate() const;
};

struct EnergySample {
    double s = 0.0;
    double t = 0.0;
    double phi = 0.0;
    double e2_01 = 0.0;
    double e_q = 0.0;
    double e_rho = 0.0;
    double e1_01 = 0.0;
    double e2_1_0 = 0.0;
    double e1_1_0 = 0.0;
    double e_full = 0.0;
    double norm_g_L21 = 0.0;
    double norm_fyy_L2 = 0.0;
    double norm_gy_L2 = 0.0;
    double sup_error = 0.0;
};

// Trapezoidal weights on a uniform grid.
std::vector<double> trapezoid_weights(std::size_t n, double dy);

// sqrt of sum_{i<=k} int (1 + |y|^{2 ell}) (d^i field)^2, with weight 1 when
// ell = 0. derivs[i] holds the i-th derivative.
double weighted_norm(std::span<const std::span<const double>> derivs, std::span<const double> y, double dy, int k,
                     int ell);

double phi(const SelfSimilarState& state, const ModelParams& params, double s);

EnergySample energy_suite(const SelfSimilarState& state, const ModelParams& params, const WeightFunction& weight,
                          const EnergyWeights& weights, double s);

enum class Functional { E1, E2 };

// One sample of the functional E^{(n)} and of the right-hand side of its
// evolution identity. l and m enter the right-hand side only.
struct IdentitySample {
    double s = 0.0;
    double value = 0.0;
    double rhs = 0.0;
};

// E2^{(n)} = 1/2 int y^{2n} f^2 + c1 int y^{2n} f g
// E1^{(n)} = 1/2 int y^{2n} (f_y^2 + c3 f_yy^2 + c1 g^2)
double identity_functional(const SelfSimilarState& st, const SmallRates& c, Functional which, int n);

// Right-hand side with H = h + k as the source of the second equation.
double identity_rhs(const SelfSimilarState& st, const StructuralTerms& terms, const SmallRates& c, Functional which,
                 int n, double l, double m);

IdentitySample identity_sample(const SelfSimilarState& st, const StructuralTerms& terms, const ModelParams& params,
                               Functional which, int n, double l, double m);

struct IdentityCheck {
    double max_mismatch = 0.0;
    std::vector<double> s, lhs, rhs, mismatch;
};

// Centered three-point difference of value against rhs at interior samples;
// mismatch = |lhs - rhs| / (|rhs| + floor + value_scale*|E|). With value_scale = 1 the
// functional itself sets the rate scale, so zero crossings of dE/ds stay well posed.
IdentityCheck identity_check(std::span<const IdentitySample> samples, double floor = 0.0, double value_scale = 0.0);

struct TrajectoryPoint {
    const SelfSimilarState* state;
    const StructuralTerms* terms;
};

double identity_check(std::span<const TrajectoryPoint> trajectory, const ModelParams& params, Functional which,
                      int n, double l, double m, double floor = 0.0, double value_scale = 0.0);

struct DecayReport {
    double mu0 = 0.0;
    double intercept = 0.0;
    double rms_residual = 0.0;
    double window_lo = 0.0;
    double window_hi = 0.0;
    std::size_t samples = 0;
};

// Least squares of log(value) against s on samples inside [lo, hi].
DecayReport fit_decay(std::span<const double> s, std::span<const double> value, double lo, double hi);

// Slope of log(y) against log(x) over all points.
double loglog_slope(std::span<const double> x, std::span<const double> y);

// (theta + 3/4)/M^2 + (theta - 3/4)/2; the weighted estimate needs it <= 0.
double m_condition(double theta, double M);
double minimal_M(double theta);
// rho_0 with theta + 3/4 - rho_0 (p-1) inf q Omega^{p-1}(M) = -(3/4 - theta)/2.
double rho0_estimate(double theta, double p, double inf_q, double omega_at_M);

void write_energy_csv(const std::vector<EnergySample>& samples, const std::string& path);

}  // namespace beamlab
