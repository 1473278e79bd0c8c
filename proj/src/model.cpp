#include "beamlab/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace beamlab {

void ModelParams::validate() const {
    if (!(b0 > 0.0) || !std::isfinite(b0)) {
        throw std::invalid_argument("b0 must be positive");
    }
    if (!(p > 1.0) || !std::isfinite(p)) {
        throw std::invalid_argument("p must exceed 1");
    }
    if (!std::isfinite(alpha) || !std::isfinite(beta)) {
        throw std::invalid_argument("alpha and beta must be finite");
    }
}

std::string DerivedParams::violation() const {
    std::ostringstream os;
    if (!assumption_I) {
        os << "Assumption I violated: need -1 < beta < min(2 alpha + 1, alpha + 1)";
    } else if (!assumption_II) {
        os << "Assumption II violated: need 1 < p < p_crit = " << p_crit;
    } else if (!assumption_III) {
        os << "Assumption III violated: need " << p_lower_III << " < p";
        if (std::isfinite(p_upper_III)) os << " < " << p_upper_III;
    }
    return os.str();
}

DerivedParams derive_params(const ModelParams& params) {
    params.validate();
    const double alpha = params.alpha;
    const double beta = params.beta;
    const double p = params.p;
    DerivedParams d;
    d.kappa = alpha - beta + 1.0;
    d.assumption_I = (-1.0 < beta) && (beta < std::min(2.0 * alpha + 1.0, alpha + 1.0));

    const double k = d.kappa;
    d.theta = (1.0 - beta) / (k * (p - 1.0));
    d.theta_times_pm1 = (1.0 - beta) / k;
    d.p_crit = 1.0 + 2.0 * (1.0 - beta) / k;
    d.nu = 2.0 / k;
    d.varsigma = std::min(1.0, d.theta_times_pm1);
    d.mu = std::min({beta + 1.0, 1.0, 2.0 * alpha - beta + 1.0}) / k;
    d.A0 = std::pow(params.b0 * k, alpha / (k * (p - 1.0)));
    d.assumption_II = (1.0 < p) && (p < d.p_crit);

    const double gap = 4.0 * (1.0 - beta) / (3.0 * k);
    d.p_lower_III = 1.0 + gap;
    if (d.theta_times_pm1 < 0.25) {
        d.p_upper_III = (1.0 - gap > 0.0) ? 1.0 / (1.0 - gap) : std::numeric_limits<double>::infinity();
    } else {
        d.p_upper_III = std::numeric_limits<double>::infinity();
    }
    d.assumption_III = (d.p_lower_III < p) && (p < d.p_upper_III);
    return d;
}

double R_of_t(const ModelParams& params, double t) {
    const double k = params.alpha - params.beta + 1.0;
    return std::expm1(k * std::log1p(t)) / (params.b0 * k);
}

double t_of_R(const ModelParams& params, double R) {
    const double k = params.alpha - params.beta + 1.0;
    return std::expm1(std::log1p(params.b0 * k * R) / k);
}

double s_of_t(const ModelParams& params, double t) { return std::log1p(R_of_t(params, t)); }

double t_of_s(const ModelParams& params, double s) { return t_of_R(params, std::expm1(s)); }

R0Sample R0_eval(const ModelParams& params, double t) {
    const double k = params.alpha - params.beta + 1.0;
    R0Sample r;
    r.R0 = std::pow(t, k) / (params.b0 * k);
    r.d1 = std::pow(t, k - 1.0) / params.b0;
    r.d2 = (k - 1.0) * std::pow(t, k - 2.0) / params.b0;
    return r;
}

CoefficientSample coeff_eval(const ModelParams& params, double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("coeff_eval requires t >= 0");
    const double alpha = params.alpha;
    const double beta = params.beta;
    const double k = alpha - beta + 1.0;
    const double lt = std::log1p(t);
    CoefficientSample c;
    c.t = t;
    c.a = std::exp(alpha * lt);
    c.b = params.b0 * std::exp(beta * lt);
    c.a_prime = alpha * std::exp((alpha - 1.0) * lt);
    c.b_prime = params.b0 * beta * std::exp((beta - 1.0) * lt);
    c.r = c.a / c.b;
    c.r_prime = (k - 1.0) * std::exp((k - 2.0) * lt) / params.b0;
    c.R = R_of_t(params, t);
    c.R0 = std::pow(t, k) / (params.b0 * k);
    c.s = std::log1p(c.R);
    // (b0 kappa)^{alpha/kappa} (1+R)^{alpha/kappa} / a; the ratio is exactly 1
    // when alpha = 0.
    const double log_ratio = (alpha / k) * (std::log(params.b0 * k) + std::log1p(c.R)) - alpha * lt;
    c.epsilon = (alpha == 0.0) ? 0.0 : -std::expm1(log_ratio);
    return c;
}

SmallRates small_rates(const ModelParams& params, double s) {
    if (!(s >= 0.0)) throw std::invalid_argument("small_rates requires s >= 0");
    const double t = t_of_s(params, s);
    const CoefficientSample c = coeff_eval(params, t);
    SmallRates r;
    r.s = s;
    r.t = t;
    const double es = std::exp(-s);
    r.c1 = c.r * c.r * es / c.a;
    r.c2 = c.r_prime / c.a;
    r.c3 = es / c.a;
    r.bprime_over_b2 = c.b_prime / (c.b * c.b);
    r.r_aprime_over_a2 = c.r * c.a_prime / (c.a * c.a);
    r.c1_prime = r.c2 - r.c1 - r.bprime_over_b2;
    r.c3_prime = -c.a_prime / (c.r * c.a * c.a) - r.c3;
    return r;
}

}  // namespace beamlab
