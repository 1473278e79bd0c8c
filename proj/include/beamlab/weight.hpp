#pragma once

#include <string>
#include <vector>

#include "beamlab/profile.hpp"

namespace beamlab {

// q(y) = e^{y^2/4} int_y^inf e^{-r^2/4} (Omega^{-2}(r) - Omega^{-2}(0)) dr
// on a uniform grid over [0, y_max], with q' and q'' from the first and
// second derivative identities.
struct WeightFunction {
    double theta = 0.0;
    double y_max = 0.0;
    double dy = 0.0;
    std::vector<double> y, q, q1, q2;
    double c_lower = 0.0, c_upper = 0.0, c_d1 = 0.0, c_d2 = 0.0;
    double quad_error_max = 0.0;  // largest estimated quadrature error relative to q

    std::size_t size() const { return y.size(); }
    // q at any |y| <= y_max (even extension), cubic Hermite with q1 slopes.
    double q_at(double yy) const;
};

struct WeightOptions {
    double quad_tol = 1e-13;
    // The u-integral is cut where the Gaussian factor drops below e^{-cutoff}.
    double cutoff = 45.0;
};

WeightFunction build_weight(const ProfileSolution& profile, double y_max = 20.0, std::size_t n_nodes = 1001,
                            const WeightOptions& opts = {});

// Left-hand side of q'' + (2 O'/O - y/2) q' - (y O'/O + 1/2) q <= 0 at each node.
std::vector<double> weight_inequality_lhs(const WeightFunction& w, const ProfileSolution& profile);
double weight_inequality_margin(const WeightFunction& w, const ProfileSolution& profile);

struct WeightBounds {
    double c_lower = 0.0, c_upper = 0.0, c_d1 = 0.0, c_d2 = 0.0;
};

// c_lower = min q/(1+|y|^{4 theta-1}), c_upper = max of the same ratio,
// c_d1 = max |y q'|/(1+|y|^{4 theta-1}), c_d2 = max |q''|/(1+|y|^{4 theta-1}).
WeightBounds weight_bound_constants(const WeightFunction& w, double theta);

struct WeightIdentityError {
    double max_relative = 0.0;  // over nodes y > 0
    double origin_abs = 0.0;    // |q'(0)| from the independent quadrature, relative to q(0)
};

// Checks q' = (y/2) q - (Omega^{-2}(y) - Omega^{-2}(0)) against q' computed by
// an independent quadrature of the differentiated integral.
WeightIdentityError weight_identity_error(const WeightFunction& w, const ProfileSolution& profile,
                                          const WeightOptions& opts = {});

// Least-squares fits of q(y) y^{1-4 theta} - 2/c0^2 = K y^{-e} on
// [y_max/2, y_max] for the two candidate correction exponents
// e = 2 and e = 2 varsigma.
struct WeightCorrectionFit {
    double exponent = 0.0;
    double K = 0.0;
    double rms = 0.0;
};
struct WeightAsymptotics {
    double leading_ratio = 0.0;  // q(y_max) y_max^{1-4 theta} / (2/c0^2)
    double loglog_slope = 0.0;   // slope of log q against log y on [y_max/2, y_max]
    WeightCorrectionFit model_2;
    WeightCorrectionFit model_2varsigma;
    double free_exponent = 0.0;  // exponent fitted without constraint
};
WeightAsymptotics weight_asymptotics(const WeightFunction& w, const ProfileSolution& profile);

void write_weight_csv(const WeightFunction& w, const std::string& path);

}  // namespace beamlab
