#include "beamlab/weight.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "beamlab/errors.hpp"
#include "beamlab/io.hpp"

namespace beamlab {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

double u_cutoff(double y, double K) { return -y + std::sqrt(y * y + 4.0 * K); }

double linear_fit_slope(const std::vector<double>& x, const std::vector<double>& y, double* intercept = nullptr) {
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    const double slope = sxy / sxx;
    if (intercept) *intercept = my - slope * mx;
    return slope;
}

}  // namespace

double WeightFunction::q_at(double yy) const {
    const double a = std::fabs(yy);
    if (a > y_max * (1.0 + 1e-12)) throw std::out_of_range("weight evaluated beyond y_max");
    std::size_t i = static_cast<std::size_t>(a / dy);
    if (i > y.size() - 2) i = y.size() - 2;
    const double h = y[i + 1] - y[i];
    const double t = (a - y[i]) / h;
    const double mt = 1.0 - t;
    return (1.0 + 2.0 * t) * mt * mt * q[i] + t * mt * mt * h * q1[i] + t * t * (3.0 - 2.0 * t) * q[i + 1] +
           t * t * (t - 1.0) * h * q1[i + 1];
}

WeightFunction build_weight(const ProfileSolution& profile, double y_max, std::size_t n_nodes,
                            const WeightOptions& opts) {
    if (n_nodes < 16) throw std::invalid_argument("build_weight needs at least 16 nodes");
    WeightFunction w;
    w.theta = profile.theta;
    w.y_max = y_max;
    w.dy = y_max / static_cast<double>(n_nodes - 1);
    w.y.resize(n_nodes);
    w.q.resize(n_nodes);
    w.q1.resize(n_nodes);
    w.q2.resize(n_nodes);
    const double inv0 = 1.0 / (profile.omega0 * profile.omega0);
    std::vector<double> errs(n_nodes, 0.0);
    int failed = 0;

#pragma omp parallel for schedule(dynamic, 8) reduction(| : failed)
    for (std::size_t i = 0; i < n_nodes; ++i) {
        const double yy = (i + 1 == n_nodes) ? y_max : w.dy * static_cast<double>(i);
        w.y[i] = yy;
        auto integrand = [&](double u) {
            const double o = profile.omega_at(yy + u);
            return std::exp(-(0.25 * u * u + 0.5 * u * yy)) * (1.0 / (o * o) - inv0);
        };
        double err = 0.0;
        const double val = GK::integrate(integrand, 0.0, u_cutoff(yy, opts.cutoff), 15, opts.quad_tol, &err);
        w.q[i] = val;
        errs[i] = (val != 0.0) ? err / std::fabs(val) : err;
        if (!std::isfinite(val)) failed |= 1;
    }
    if (failed) throw NumericalError("weight quadrature produced a non-finite value");
    for (std::size_t i = 0; i < n_nodes; ++i) {
        if (!(w.q[i] > 0.0)) {
            std::ostringstream os;
            os << "weight q is not positive at y = " << w.y[i] << " (q = " << w.q[i] << ")";
            throw NumericalError(os.str());
        }
        if (errs[i] > 1e-9) {
            std::ostringstream os;
            os << "weight quadrature did not converge at y = " << w.y[i] << " (relative error " << errs[i] << ")";
            throw NumericalError(os.str());
        }
        w.quad_error_max = std::max(w.quad_error_max, errs[i]);
        const ProfileDerivs d = profile.eval(w.y[i]);
        const double D = 1.0 / (d[0] * d[0]) - inv0;
        w.q1[i] = 0.5 * w.y[i] * w.q[i] - D;
        w.q2[i] = 0.5 * w.y[i] * w.q1[i] + 0.5 * w.q[i] + 2.0 * d[1] / (d[0] * d[0] * d[0]);
    }
    w.q1[0] = 0.0;
    const WeightBounds b = weight_bound_constants(w, w.theta);
    w.c_lower = b.c_lower;
    w.c_upper = b.c_upper;
    w.c_d1 = b.c_d1;
    w.c_d2 = b.c_d2;
    return w;
}

std::vector<double> weight_inequality_lhs(const WeightFunction& w, const ProfileSolution& profile) {
    std::vector<double> out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double yy = w.y[i];
        const ProfileDerivs d = profile.eval(yy);
        const double lg = d[1] / d[0];
        out[i] = w.q2[i] + (2.0 * lg - 0.5 * yy) * w.q1[i] - (yy * lg + 0.5) * w.q[i];
    }
    return out;
}

double weight_inequality_margin(const WeightFunction& w, const ProfileSolution& profile) {
    const auto lhs = weight_inequality_lhs(w, profile);
    return *std::max_element(lhs.begin(), lhs.end());
}

WeightBounds weight_bound_constants(const WeightFunction& w, double theta) {
    WeightBounds b;
    b.c_lower = INFINITY;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double m = 1.0 + std::pow(std::fabs(w.y[i]), 4.0 * theta - 1.0);
        const double r = w.q[i] / m;
        b.c_lower = std::min(b.c_lower, r);
        b.c_upper = std::max(b.c_upper, r);
        b.c_d1 = std::max(b.c_d1, std::fabs(w.y[i] * w.q1[i]) / m);
        b.c_d2 = std::max(b.c_d2, std::fabs(w.q2[i]) / m);
    }
    return b;
}

WeightIdentityError weight_identity_error(const WeightFunction& w, const ProfileSolution& profile,
                                          const WeightOptions& opts) {
    const double inv0 = 1.0 / (profile.omega0 * profile.omega0);
    const std::size_t n = w.size();
    std::vector<double> rel(n, 0.0);
    double origin = 0.0;
#pragma omp parallel for schedule(dynamic, 8)
    for (std::size_t i = 0; i < n; ++i) {
        const double yy = w.y[i];
        // d/dy of the u-integral: -(u/2) D(y+u) + D'(y+u) under the Gaussian factor.
        auto integrand = [&](double u) {
            const ProfileDerivs d = profile.eval(yy + u);
            const double D = 1.0 / (d[0] * d[0]) - inv0;
            const double Dp = -2.0 * d[1] / (d[0] * d[0] * d[0]);
            return std::exp(-(0.25 * u * u + 0.5 * u * yy)) * (-0.5 * u * D + Dp);
        };
        const double q1_quad = GK::integrate(integrand, 0.0, u_cutoff(yy, opts.cutoff), 15, opts.quad_tol);
        if (i == 0) {
            origin = std::fabs(q1_quad) / w.q[0];
        } else {
            const double D = 1.0 / std::pow(profile.omega_at(yy), 2) - inv0;
            const double scale = std::fabs(0.5 * yy * w.q[i]) + std::fabs(D);
            rel[i] = std::fabs(w.q1[i] - q1_quad) / scale;
        }
    }
    WeightIdentityError e;
    e.origin_abs = origin;
    e.max_relative = *std::max_element(rel.begin(), rel.end());
    return e;
}

WeightAsymptotics weight_asymptotics(const WeightFunction& w, const ProfileSolution& profile) {
    WeightAsymptotics a;
    const double th = w.theta;
    const double lead = 2.0 / (profile.c0 * profile.c0);
    a.leading_ratio = w.q.back() * std::pow(w.y_max, 1.0 - 4.0 * th) / lead;
    std::vector<double> ly, lq, ys, resid;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w.y[i] < 0.5 * w.y_max) continue;
        ly.push_back(std::log(w.y[i]));
        lq.push_back(std::log(w.q[i]));
        ys.push_back(w.y[i]);
        resid.push_back(w.q[i] * std::pow(w.y[i], 1.0 - 4.0 * th) - lead);
    }
    a.loglog_slope = linear_fit_slope(ly, lq);
    auto fit_model = [&](double e) {
        double num = 0, den = 0;
        for (std::size_t i = 0; i < ys.size(); ++i) {
            const double b = std::pow(ys[i], -e);
            num += b * resid[i];
            den += b * b;
        }
        WeightCorrectionFit f;
        f.exponent = e;
        f.K = num / den;
        double ss = 0;
        for (std::size_t i = 0; i < ys.size(); ++i) {
            const double r = resid[i] - f.K * std::pow(ys[i], -e);
            ss += r * r;
        }
        f.rms = std::sqrt(ss / static_cast<double>(ys.size())) / lead;
        return f;
    };
    a.model_2 = fit_model(2.0);
    a.model_2varsigma = fit_model(2.0 * profile.varsigma);
    bool same_sign = true;
    for (double r : resid) same_sign = same_sign && (r * resid.front() > 0.0);
    if (same_sign) {
        std::vector<double> lr;
        for (double r : resid) lr.push_back(std::log(std::fabs(r)));
        a.free_exponent = -linear_fit_slope(ly, lr);
    } else {
        a.free_exponent = NAN;
    }
    return a;
}

void write_weight_csv(const WeightFunction& w, const std::string& path) {
    write_columns(path, {"y", "q", "q1", "q2"}, {&w.y, &w.q, &w.q1, &w.q2});
}

}  // namespace beamlab
