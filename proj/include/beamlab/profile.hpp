#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace beamlab {

// Omega and its derivatives of order 0..5 at one point.
using ProfileDerivs = std::array<double, 6>;

// Even positive solution of  O'' + (z/2) O' + theta O - |O|^{p-1} O = 0  on a
// uniform grid over [0, z_max]. Off-grid values use cubic Hermite
// interpolation with the next derivative as slope; beyond z_max the two-term
// algebraic tail tail_c0 z^{-2 theta} + tail_c1 z^{-2 theta - 2 varsigma} is
// used and differentiated analytically.
struct ProfileSolution {
    double p = 0.0;
    double theta = 0.0;
    double varsigma = 0.0;
    double omega0 = 0.0;
    double c0 = 0.0;       // tail constant fitted on [z_max/2, z_max]
    double tail_c1 = 0.0;  // subleading tail coefficient from the same fit
    double z_max = 0.0;
    double dz = 0.0;
    std::vector<double> z;
    std::vector<double> omega, omega1, omega2, omega3, omega4;
    double residual_max = 0.0;
    std::size_t turning_index = 0;

    std::size_t size() const { return z.size(); }
    // Derivatives up to max_order (at most 5); higher entries are left 0.
    ProfileDerivs eval(double zz, int max_order = 5) const;
    double omega_at(double zz) const;
};

struct ProfileTarget {
    enum class Kind { omega0, c0 };
    Kind kind = Kind::c0;
    double value = 1.0;

    static ProfileTarget from_omega0(double a) { return {Kind::omega0, a}; }
    static ProfileTarget from_c0(double c) { return {Kind::c0, c}; }
};

struct ProfileOptions {
    double z_max = 25.0;
    std::size_t n_nodes = 4001;
    double tol = 1e-8;
    // Bisection bracket for Omega(0), as fractions of theta^{1/(p-1)}.
    double bracket_lo = 1e-3;
    double bracket_hi = 1.0;
    int max_bisections = 200;
};

ProfileSolution solve_profile(double p, double theta, double varsigma, const ProfileTarget& target,
                              const ProfileOptions& opts = {});

// Re-integrates the same initial value Omega(0) out to z_max_new on the same
// spacing. Used to cover the physical domain without relying on the tail.
ProfileSolution extend_profile(const ProfileSolution& sol, double z_max_new);

// Max-norm of the ODE residual evaluated from the stored fields.
double profile_residual(const ProfileSolution& sol);

// Residual of the ODE with O' and O'' taken from fourth-order finite
// differences of omega and omega1 instead of the stored fields. This measures
// the accuracy of the integration itself.
double profile_fd_residual(const ProfileSolution& sol);

// Max |D omega - omega1| with D the centered second-order difference.
double profile_derivative_consistency(const ProfileSolution& sol);

struct FittedAsymptotics {
    double c0_fit = 0.0;
    double c1_fit = 0.0;
    double tail_rate_omega = 0.0;
    double rate_combo = 0.0;
    double ratio_d2 = 0.0;
    double ratio_d3 = 0.0;
    double ratio_d4 = 0.0;
    // Omega'' z^{2 theta + 2} / (2 theta (1 + 2 theta)) without the c0 factor.
    double ratio_d2_unscaled = 0.0;
    double window_lo = 0.0;
    double window_hi = 0.0;
};

FittedAsymptotics fit_asymptotics(const ProfileSolution& sol, double window_lo, double window_hi);

// Value of O''' , O'''' and O^{(5)} from lower derivatives via the
// differentiated ODE.
double profile_d3(double p, double theta, double zz, double o, double o1, double o2);
double profile_d4(double p, double theta, double zz, double o, double o1, double o2, double o3);
double profile_d5(double p, double theta, double zz, double o, double o1, double o2, double o3, double o4);

void write_profile_csv(const ProfileSolution& sol, const std::string& path);

}  // namespace beamlab
