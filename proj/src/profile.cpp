#include "beamlab/profile.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "beamlab/errors.hpp"
#include "beamlab/io.hpp"

namespace beamlab {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::array<double, 2>;

double spow(double x, double e) { return std::copysign(std::pow(std::fabs(x), e), x); }

enum class Shot { positive, zero_crossing, growth };

struct StopShot {
    Shot outcome;
};

struct ShotResult {
    Shot outcome = Shot::positive;
    std::vector<double> omega, omega1;
};

ShotResult shoot(double p, double theta, double A, const std::vector<double>& z, double tol) {
    const double rel = std::min(1e-10, tol * 1e-2);
    const double abs = rel * 1e-2;
    auto rhs = [p, theta](const State& y, State& dy, double zz) {
        dy[0] = y[1];
        dy[1] = -0.5 * zz * y[1] - theta * y[0] + spow(y[0], p);
    };
    ShotResult res;
    res.omega.reserve(z.size());
    res.omega1.reserve(z.size());
    auto observer = [&](const State& y, double) {
        res.omega.push_back(y[0]);
        res.omega1.push_back(y[1]);
        const std::size_t i = res.omega.size() - 1;
        if (!(std::isfinite(y[0]) && std::isfinite(y[1]))) throw StopShot{Shot::growth};
        if (y[0] <= 0.0) throw StopShot{Shot::zero_crossing};
        if (i > 0 && (y[1] > 0.0 || y[0] > 10.0 * A)) throw StopShot{Shot::growth};
    };
    State y0{A, 0.0};
    auto stepper = odeint::make_controlled(abs, rel, odeint::runge_kutta_dopri5<State>());
    try {
        odeint::integrate_times(stepper, rhs, y0, z.begin(), z.end(), z[1] - z[0], observer);
    } catch (const StopShot& stop) {
        res.outcome = stop.outcome;
    }
    return res;
}

// Least-squares fit of z^{2 theta} omega = c0 + c1 z^{-2 varsigma} on nodes
// inside [lo, hi].
std::pair<double, double> fit_tail(const std::vector<double>& z, const std::vector<double>& omega,
                                   double theta, double varsigma, double lo, double hi) {
    double s00 = 0, s01 = 0, s11 = 0, r0 = 0, r1 = 0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < z.size() && i < omega.size(); ++i) {
        if (z[i] < lo || z[i] > hi) continue;
        const double yv = std::pow(z[i], 2.0 * theta) * omega[i];
        const double b = std::pow(z[i], -2.0 * varsigma);
        s00 += 1.0;
        s01 += b;
        s11 += b * b;
        r0 += yv;
        r1 += b * yv;
        ++count;
    }
    if (count < 10) throw NumericalError("tail fit window holds fewer than 10 nodes");
    const double det = s00 * s11 - s01 * s01;
    if (!(std::fabs(det) > 0.0)) throw NumericalError("tail fit is singular");
    const double c0 = (r0 * s11 - r1 * s01) / det;
    const double c1 = (s00 * r1 - s01 * r0) / det;
    if (!std::isfinite(c0) || !std::isfinite(c1)) throw NumericalError("tail fit did not converge");
    return {c0, c1};
}

std::vector<double> uniform_grid(double z_max, std::size_t n) {
    std::vector<double> z(n);
    const double dz = z_max / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) z[i] = dz * static_cast<double>(i);
    z.back() = z_max;
    return z;
}

ProfileSolution assemble(double p, double theta, double varsigma, double A, std::vector<double> z,
                         ShotResult shot) {
    ProfileSolution sol;
    sol.p = p;
    sol.theta = theta;
    sol.varsigma = varsigma;
    sol.omega0 = A;
    sol.z_max = z.back();
    sol.dz = z[1] - z[0];
    sol.z = std::move(z);
    sol.omega = std::move(shot.omega);
    sol.omega1 = std::move(shot.omega1);
    sol.omega1[0] = 0.0;
    const std::size_t n = sol.z.size();
    sol.omega2.resize(n);
    sol.omega3.resize(n);
    sol.omega4.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double zz = sol.z[i];
        const double o = sol.omega[i];
        const double o1 = sol.omega1[i];
        const double o2 = -0.5 * zz * o1 - theta * o + std::pow(o, p);
        const double o3 = profile_d3(p, theta, zz, o, o1, o2);
        sol.omega2[i] = o2;
        sol.omega3[i] = o3;
        sol.omega4[i] = profile_d4(p, theta, zz, o, o1, o2, o3);
    }
    std::size_t turn = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (!(sol.omega[i] < sol.omega[i - 1])) turn = i;
    }
    sol.turning_index = turn;
    const auto [c0, c1] = fit_tail(sol.z, sol.omega, theta, varsigma, 0.5 * sol.z_max, sol.z_max);
    sol.c0 = c0;
    sol.tail_c1 = c1;
    sol.residual_max = std::max(profile_residual(sol), profile_fd_residual(sol));
    return sol;
}

const char* outcome_name(Shot s) {
    switch (s) {
        case Shot::positive: return "positive";
        case Shot::zero_crossing: return "zero crossing";
        case Shot::growth: return "growth";
    }
    return "?";
}

// Product e (e+1) ... (e+k-1) with sign, i.e. d^k/dz^k z^{-e} = falling(-e,k) z^{-e-k}.
double falling(double base, int k) {
    double r = 1.0;
    for (int j = 0; j < k; ++j) r *= base - j;
    return r;
}

}  // namespace

double profile_d3(double p, double theta, double zz, double o, double o1, double o2) {
    return -((theta + 0.5) * o1 + 0.5 * zz * o2) + p * std::pow(o, p - 1.0) * o1;
}

double profile_d4(double p, double theta, double zz, double o, double o1, double o2, double o3) {
    return -((theta + 1.0) * o2 + 0.5 * zz * o3) + p * std::pow(o, p - 1.0) * o2 +
           p * (p - 1.0) * std::pow(o, p - 2.0) * o1 * o1;
}

double profile_d5(double p, double theta, double zz, double o, double o1, double o2, double o3,
                  double o4) {
    return -((theta + 1.5) * o3 + 0.5 * zz * o4) + p * std::pow(o, p - 1.0) * o3 +
           3.0 * p * (p - 1.0) * std::pow(o, p - 2.0) * o1 * o2 +
           p * (p - 1.0) * (p - 2.0) * std::pow(o, p - 3.0) * o1 * o1 * o1;
}

ProfileDerivs ProfileSolution::eval(double zz, int max_order) const {
    const double az = std::fabs(zz);
    ProfileDerivs d{};
    if (az <= z_max) {
        const std::size_t n = z.size();
        std::size_t i = static_cast<std::size_t>(az / dz);
        if (i > n - 2) i = n - 2;
        const double h = z[i + 1] - z[i];
        const double t = (az - z[i]) / h;
        const double t2 = t * t;
        const double mt = 1.0 - t;
        const double h00 = (1.0 + 2.0 * t) * mt * mt;
        const double h10 = t * mt * mt;
        const double h01 = t2 * (3.0 - 2.0 * t);
        const double h11 = t2 * (t - 1.0);
        const std::vector<double>* f[5] = {&omega, &omega1, &omega2, &omega3, &omega4};
        for (int k = 0; k < 4; ++k) {
            const auto& F = *f[k];
            const auto& S = *f[k + 1];
            d[k] = h00 * F[i] + h10 * h * S[i] + h01 * F[i + 1] + h11 * h * S[i + 1];
        }
        // Omega'''' and Omega^(5) from the differentiated ODE; no sixth
        // derivative is stored for a Hermite slope.
        d[4] = profile_d4(p, theta, az, d[0], d[1], d[2], d[3]);
        if (max_order >= 5) d[5] = profile_d5(p, theta, az, d[0], d[1], d[2], d[3], d[4]);
    } else {
        const double e0 = 2.0 * theta;
        const double e1 = 2.0 * theta + 2.0 * varsigma;
        for (int k = 0; k <= std::min(max_order, 5); ++k) {
            d[k] = c0 * falling(-e0, k) * std::pow(az, -e0 - k) + tail_c1 * falling(-e1, k) * std::pow(az, -e1 - k);
        }
    }
    if (zz < 0.0) {
        d[1] = -d[1];
        d[3] = -d[3];
        d[5] = -d[5];
    }
    return d;
}

double ProfileSolution::omega_at(double zz) const { return eval(zz)[0]; }

ProfileSolution solve_profile(double p, double theta, double varsigma, const ProfileTarget& target,
                              const ProfileOptions& opts) {
    if (!(p > 1.0) || !(theta > 0.0)) throw std::invalid_argument("solve_profile needs p > 1, theta > 0");
    if (opts.n_nodes < 64) throw std::invalid_argument("solve_profile needs at least 64 nodes");
    if (!(opts.z_max > 0.0)) throw std::invalid_argument("solve_profile needs z_max > 0");
    const std::vector<double> z = uniform_grid(opts.z_max, opts.n_nodes);

    if (target.kind == ProfileTarget::Kind::omega0) {
        ShotResult shot = shoot(p, theta, target.value, z, opts.tol);
        if (shot.outcome != Shot::positive) {
            std::ostringstream os;
            os << "profile shot from Omega(0) = " << target.value << " ends in " << outcome_name(shot.outcome);
            throw NumericalError(os.str());
        }
        return assemble(p, theta, varsigma, target.value, z, std::move(shot));
    }

    const double c_target = target.value;
    if (!(c_target > 0.0)) throw std::invalid_argument("target c0 must be positive");
    const double a_eq = std::pow(theta, 1.0 / (p - 1.0));
    // Sign of c0(A) - c0_target, with crossings counted as too small and
    // growth as too large.
    auto score = [&](double A) {
        ShotResult shot = shoot(p, theta, A, z, opts.tol);
        if (shot.outcome == Shot::zero_crossing) return -1.0;
        if (shot.outcome == Shot::growth) return 1.0;
        const auto [c0, c1] = fit_tail(z, shot.omega, theta, varsigma, 0.5 * opts.z_max, opts.z_max);
        (void)c1;
        return c0 - c_target;
    };
    double lo = opts.bracket_lo * a_eq;
    double hi = opts.bracket_hi * a_eq;
    const double s_lo = score(lo);
    const double s_hi = score(hi);
    if (!(s_lo < 0.0 && s_hi > 0.0)) {
        std::ostringstream os;
        os << "profile bisection bracket not found on [" << lo << ", " << hi << "] (scores " << s_lo << ", "
           << s_hi << ")";
        throw NumericalError(os.str());
    }
    for (int it = 0; it < opts.max_bisections && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (score(mid) < 0.0) lo = mid;
        else hi = mid;
    }
    ShotResult best;
    double A = 0.5 * (lo + hi);
    for (double cand : {A, hi}) {
        best = shoot(p, theta, cand, z, opts.tol);
        A = cand;
        if (best.outcome == Shot::positive) break;
    }
    if (best.outcome != Shot::positive) throw NumericalError("zero crossing for every trial Omega(0)");
    return assemble(p, theta, varsigma, A, z, std::move(best));
}

ProfileSolution extend_profile(const ProfileSolution& sol, double z_max_new) {
    if (z_max_new <= sol.z_max) return sol;
    const auto n = static_cast<std::size_t>(std::ceil(z_max_new / sol.dz - 1e-9)) + 1;
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = sol.dz * static_cast<double>(i);
    ShotResult shot = shoot(sol.p, sol.theta, sol.omega0, z, 1e-8);
    if (shot.outcome != Shot::positive) {
        throw NumericalError(std::string("profile extension ends in ") + outcome_name(shot.outcome));
    }
    return assemble(sol.p, sol.theta, sol.varsigma, sol.omega0, std::move(z), std::move(shot));
}

double profile_residual(const ProfileSolution& sol) {
    double m = 0.0;
    for (std::size_t i = 0; i < sol.size(); ++i) {
        const double o = sol.omega[i];
        const double r = sol.omega2[i] + 0.5 * sol.z[i] * sol.omega1[i] + sol.theta * o - spow(o, sol.p);
        m = std::max(m, std::fabs(r));
    }
    return m;
}

double profile_fd_residual(const ProfileSolution& sol) {
    const std::size_t n = sol.size();
    // Even extension of omega and odd extension of omega1 across z = 0.
    auto om = [&](long i) { return sol.omega[static_cast<std::size_t>(std::labs(i))]; };
    auto om1 = [&](long i) {
        const double v = sol.omega1[static_cast<std::size_t>(std::labs(i))];
        return i < 0 ? -v : v;
    };
    const double h = sol.dz;
    double m = 0.0;
    for (long i = 0; i + 2 < static_cast<long>(n); ++i) {
        const double d1 = (-om(i + 2) + 8.0 * om(i + 1) - 8.0 * om(i - 1) + om(i - 2)) / (12.0 * h);
        const double d2 = (-om1(i + 2) + 8.0 * om1(i + 1) - 8.0 * om1(i - 1) + om1(i - 2)) / (12.0 * h);
        const double o = om(i);
        const double r = d2 + 0.5 * sol.z[static_cast<std::size_t>(i)] * d1 + sol.theta * o - spow(o, sol.p);
        m = std::max(m, std::fabs(r));
    }
    return m;
}

double profile_derivative_consistency(const ProfileSolution& sol) {
    double m = 0.0;
    for (std::size_t i = 1; i + 1 < sol.size(); ++i) {
        const double d = (sol.omega[i + 1] - sol.omega[i - 1]) / (2.0 * sol.dz);
        m = std::max(m, std::fabs(d - sol.omega1[i]));
    }
    return m;
}

namespace {

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

}  // namespace

FittedAsymptotics fit_asymptotics(const ProfileSolution& sol, double window_lo, double window_hi) {
    if (!(window_hi <= sol.z_max * (1.0 + 1e-12)) || !(window_lo > 0.0) || !(window_lo < window_hi)) {
        throw std::invalid_argument("fit window must lie inside (0, z_max]");
    }
    std::vector<double> zs, om, combo;
    double sum_d2 = 0, sum_d3 = 0, sum_d4 = 0, sum_d2u = 0;
    const double th = sol.theta;
    const double k2 = 2.0 * th * (2.0 * th + 1.0);
    const double k3 = -k2 * (2.0 * th + 2.0);
    const double k4 = -k3 * (2.0 * th + 3.0);
    for (std::size_t i = 0; i < sol.size(); ++i) {
        const double zz = sol.z[i];
        if (zz < window_lo || zz > window_hi) continue;
        zs.push_back(zz);
        om.push_back(sol.omega[i]);
        combo.push_back(std::fabs(th * sol.omega[i] + 0.5 * zz * sol.omega1[i]));
        sum_d2 += sol.omega2[i] * std::pow(zz, 2.0 * th + 2.0) / (sol.c0 * k2);
        sum_d2u += sol.omega2[i] * std::pow(zz, 2.0 * th + 2.0) / k2;
        sum_d3 += sol.omega3[i] * std::pow(zz, 2.0 * th + 3.0) / (sol.c0 * k3);
        sum_d4 += sol.omega4[i] * std::pow(zz, 2.0 * th + 4.0) / (sol.c0 * k4);
    }
    if (zs.size() < 10) throw std::invalid_argument("fit window holds fewer than 10 nodes");
    FittedAsymptotics fa;
    fa.window_lo = window_lo;
    fa.window_hi = window_hi;
    const auto [c0, c1] = fit_tail(sol.z, sol.omega, th, sol.varsigma, window_lo, window_hi);
    fa.c0_fit = c0;
    fa.c1_fit = c1;
    fa.tail_rate_omega = loglog_slope(zs, om);
    fa.rate_combo = loglog_slope(zs, combo);
    const double n = static_cast<double>(zs.size());
    fa.ratio_d2 = sum_d2 / n;
    fa.ratio_d2_unscaled = sum_d2u / n;
    fa.ratio_d3 = sum_d3 / n;
    fa.ratio_d4 = sum_d4 / n;
    return fa;
}

void write_profile_csv(const ProfileSolution& sol, const std::string& path) {
    write_columns(path, {"z", "omega", "omega1", "omega2", "omega3", "omega4"},
                  {&sol.z, &sol.omega, &sol.omega1, &sol.omega2, &sol.omega3, &sol.omega4});
}

}  // namespace beamlab
