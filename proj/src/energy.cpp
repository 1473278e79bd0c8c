#include "beamlab/energy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "beamlab/io.hpp"

namespace beamlab {

void EnergyWeights::validate() const {
    if (!(rho > 0.0 && vartheta > 0.0 && zeta > 0.0 && omega_w > 0.0)) {
        throw std::invalid_argument("energy weights must be positive");
    }
}

std::vector<double> trapezoid_weights(std::size_t n, double dy) {
    std::vector<double> w(n, dy);
    if (n > 0) {
        w.front() *= 0.5;
        w.back() *= 0.5;
    }
    return w;
}

namespace {

// Trapezoid on a uniform grid of sum_i weight(y_i) a_i b_i.
template <class Wt>
double integrate(const std::vector<double>& y, double dy, const std::vector<double>& a, const std::vector<double>& b,
                 Wt weight) {
    const std::size_t n = y.size();
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double c = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
        sum += c * weight(y[i]) * a[i] * b[i];
    }
    return sum * dy;
}

const auto one = [](double) { return 1.0; };
const auto w1 = [](double y) { return 1.0 + y * y; };
const auto y2 = [](double y) { return y * y; };

void require(const SelfSimilarState& st) {
    const std::size_t n = st.y.size();
    for (const auto* v : {&st.f, &st.fy, &st.fyy, &st.fyyy, &st.g, &st.gy}) {
        if (v->size() != n) throw std::invalid_argument("self-similar state is missing derivative arrays");
    }
}

}  // namespace

double weighted_norm(std::span<const std::span<const double>> derivs, std::span<const double> y, double dy, int k,
                     int ell) {
    if (k < 0 || k > 3) throw std::invalid_argument("derivative order must be 0..3");
    if (static_cast<int>(derivs.size()) < k + 1) throw std::invalid_argument("missing derivative order");
    const std::size_t n = y.size();
    double sum = 0.0;
    for (int j = 0; j <= k; ++j) {
        const auto d = derivs[static_cast<std::size_t>(j)];
        if (d.size() != n) throw std::invalid_argument("missing derivative order");
        for (std::size_t i = 0; i < n; ++i) {
            const double c = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
            const double w = ell == 0 ? 1.0 : 1.0 + std::pow(std::fabs(y[i]), 2.0 * ell);
            sum += c * w * d[i] * d[i];
        }
    }
    return std::sqrt(sum * dy);
}

double phi(const SelfSimilarState& st, const ModelParams& params, double s) {
    require(st);
    const SmallRates c = small_rates(params, s);
    const auto& y = st.y;
    const double dy = st.dy;
    return integrate(y, dy, st.f, st.f, w1) + integrate(y, dy, st.fy, st.fy, w1) +
           integrate(y, dy, st.fyy, st.fyy, one) +
           c.c3 * (integrate(y, dy, st.fyy, st.fyy, y2) + integrate(y, dy, st.fyyy, st.fyyy, one)) +
           c.c1 * integrate(y, dy, st.g, st.g, w1) + c.c1 * integrate(y, dy, st.gy, st.gy, one);
}

EnergySample energy_suite(const SelfSimilarState& st, const ModelParams& params, const WeightFunction& weight,
                          const EnergyWeights& weights, double s) {
    require(st);
    weights.validate();
    const SmallRates c = small_rates(params, s);
    const auto& y = st.y;
    const double dy = st.dy;
    std::vector<double> qf(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) qf[i] = weight.q_at(y[i]) * st.f[i];

    EnergySample e;
    e.s = s;
    e.t = st.t;
    e.phi = phi(st, params, s);
    e.e2_01 = 0.5 * integrate(y, dy, st.f, st.f, w1) + c.c1 * integrate(y, dy, st.f, st.g, w1);
    e.e_q = 0.5 * integrate(y, dy, qf, st.f, one) + c.c1 * integrate(y, dy, qf, st.g, one);
    e.e_rho = e.e2_01 + weights.rho * e.e_q;
    e.e1_01 = 0.5 * integrate(y, dy, st.fy, st.fy, w1) + 0.5 * c.c3 * integrate(y, dy, st.fyy, st.fyy, w1) +
              0.5 * c.c1 * integrate(y, dy, st.g, st.g, w1);
    e.e2_1_0 = 0.5 * integrate(y, dy, st.fy, st.fy, one) + c.c1 * integrate(y, dy, st.fy, st.gy, one);
    e.e1_1_0 = 0.5 * integrate(y, dy, st.fyy, st.fyy, one) + 0.5 * c.c3 * integrate(y, dy, st.fyyy, st.fyyy, one) +
               0.5 * c.c1 * integrate(y, dy, st.gy, st.gy, one);
    e.e_full = e.e_rho + weights.vartheta * e.e1_01 + weights.zeta * e.e2_1_0 + weights.omega_w * e.e1_1_0;
    e.norm_g_L21 = std::sqrt(integrate(y, dy, st.g, st.g, w1));
    e.norm_fyy_L2 = std::sqrt(integrate(y, dy, st.fyy, st.fyy, one));
    e.norm_gy_L2 = std::sqrt(integrate(y, dy, st.gy, st.gy, one));
    e.sup_error = st.sup_error;
    return e;
}

double identity_functional(const SelfSimilarState& st, const SmallRates& c, Functional which, int n) {
    require(st);
    if (n != 0 && n != 1) throw std::invalid_argument("identity order n must be 0 or 1");
    const auto& y = st.y;
    const double dy = st.dy;
    const auto wn = [n](double yy) { return n == 0 ? 1.0 : yy * yy; };
    if (which == Functional::E2) {
        return 0.5 * integrate(y, dy, st.f, st.f, wn) + c.c1 * integrate(y, dy, st.f, st.g, wn);
    }
    return 0.5 * (integrate(y, dy, st.fy, st.fy, wn) + c.c3 * integrate(y, dy, st.fyy, st.fyy, wn) +
                  c.c1 * integrate(y, dy, st.g, st.g, wn));
}

double identity_rhs(const SelfSimilarState& st, const StructuralTerms& terms, const SmallRates& c, Functional which,
                 int n, double l, double m) {
    require(st);
    if (n != 0 && n != 1) throw std::invalid_argument("identity order n must be 0 or 1");
    const auto& y = st.y;
    const double dy = st.dy;
    const double nn = static_cast<double>(n);
    const auto wn = [n](double yy) { return n == 0 ? 1.0 : yy * yy; };
    const auto wn1 = [n](double yy) { return n == 0 ? 0.0 : yy; };
    const auto wn2 = [n](double) { return n == 0 ? 0.0 : 1.0; };
    std::vector<double> H(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) H[i] = terms.h[i] + terms.k[i];

    if (which == Functional::E1) {
        const double gg = integrate(y, dy, st.g, st.g, wn);
        const double fyfy = integrate(y, dy, st.fy, st.fy, wn);
        const double fyy2 = integrate(y, dy, st.fyy, st.fyy, wn);
        return -gg + (l - (2.0 * nn - 1.0) / 4.0) * fyfy + (l - (2.0 * nn - 3.0) / 4.0) * c.c3 * fyy2 +
               (m - (2.0 * nn + 1.0) / 4.0) * c.c1 * gg + (0.5 * c.c1_prime - c.c2) * gg -
               2.0 * nn * integrate(y, dy, st.fy, st.g, wn1) -
               4.0 * nn * c.c3 * integrate(y, dy, st.fyy, st.gy, wn1) -
               2.0 * nn * (2.0 * nn - 1.0) * c.c3 * integrate(y, dy, st.fyy, st.g, wn2) + 0.5 * c.c3_prime * fyy2 +
               integrate(y, dy, H, st.g, wn);
    }
    const double fg = integrate(y, dy, st.f, st.g, wn);
    return -integrate(y, dy, st.fy, st.fy, wn) + (l - (2.0 * nn + 1.0) / 4.0) * integrate(y, dy, st.f, st.f, wn) +
           (m + l - (2.0 * nn + 1.0) / 2.0) * c.c1 * fg - c.c3 * integrate(y, dy, st.fyy, st.fyy, wn) +
           c.c1 * integrate(y, dy, st.g, st.g, wn) - c.c2 * fg -
           2.0 * nn * (2.0 * nn - 1.0) * c.c3 * integrate(y, dy, st.fyy, st.f, wn2) +
           2.0 * nn * (2.0 * nn - 1.0) * c.c3 * integrate(y, dy, st.fy, st.fy, wn2) +
           nn * (2.0 * nn - 1.0) * integrate(y, dy, st.f, st.f, wn2) + c.c1_prime * fg +
           integrate(y, dy, H, st.f, wn);
}

IdentitySample identity_sample(const SelfSimilarState& st, const StructuralTerms& terms, const ModelParams& params,
                               Functional which, int n, double l, double m) {
    const SmallRates c = small_rates(params, st.s);
    IdentitySample out;
    out.s = st.s;
    out.value = identity_functional(st, c, which, n);
    out.rhs = identity_rhs(st, terms, c, which, n, l, m);
    return out;
}

IdentityCheck identity_check(std::span<const IdentitySample> samples, double floor, double value_scale) {
    if (samples.size() < 3) throw std::invalid_argument("identity check needs at least 3 samples");
    IdentityCheck out;
    for (std::size_t i = 1; i + 1 < samples.size(); ++i) {
        const double h1 = samples[i].s - samples[i - 1].s;
        const double h2 = samples[i + 1].s - samples[i].s;
        if (!(h1 > 0.0 && h2 > 0.0)) throw std::invalid_argument("identity samples must increase in s");
        const double lhs = -h2 / (h1 * (h1 + h2)) * samples[i - 1].value + (h2 - h1) / (h1 * h2) * samples[i].value +
                           h1 / (h2 * (h1 + h2)) * samples[i + 1].value;
        const double rhs = samples[i].rhs;
        const double denom = std::fabs(rhs) + floor + value_scale * std::fabs(samples[i].value);
        const double mm = denom > 0.0 ? std::fabs(lhs - rhs) / denom : (lhs == rhs ? 0.0 : INFINITY);
        out.s.push_back(samples[i].s);
        out.lhs.push_back(lhs);
        out.rhs.push_back(rhs);
        out.mismatch.push_back(mm);
        out.max_mismatch = std::max(out.max_mismatch, mm);
    }
    return out;
}

double identity_check(std::span<const TrajectoryPoint> trajectory, const ModelParams& params, Functional which,
                      int n, double l, double m, double floor, double value_scale) {
    std::vector<IdentitySample> samples;
    samples.reserve(trajectory.size());
    for (const auto& pt : trajectory) samples.push_back(identity_sample(*pt.state, *pt.terms, params, which, n, l, m));
    return identity_check(samples, floor, value_scale).max_mismatch;
}

DecayReport fit_decay(std::span<const double> s, std::span<const double> value, double lo, double hi) {
    if (s.size() != value.size()) throw std::invalid_argument("fit_decay size mismatch");
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] < lo || s[i] > hi) continue;
        if (!(value[i] > 0.0)) throw std::invalid_argument("fit_decay needs positive values in the window");
        xs.push_back(s[i]);
        ys.push_back(std::log(value[i]));
    }
    if (xs.size() < 2) throw std::invalid_argument("fit_decay window holds fewer than 2 samples");
    const double nn = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= nn;
    my /= nn;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    const double slope = sxy / sxx;
    DecayReport r;
    r.mu0 = -slope;
    r.intercept = my - slope * mx;
    double ss = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double res = ys[i] - (r.intercept + slope * xs[i]);
        ss += res * res;
    }
    r.rms_residual = std::sqrt(ss / nn);
    r.window_lo = lo;
    r.window_hi = hi;
    r.samples = xs.size();
    return r;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope needs matching samples");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0 && y[i] > 0.0)) throw std::invalid_argument("loglog_slope needs positive data");
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    const double nn = static_cast<double>(lx.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= nn;
    my /= nn;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    return sxy / sxx;
}

double m_condition(double theta, double M) { return (theta + 0.75) / (M * M) + 0.5 * (theta - 0.75); }

double minimal_M(double theta) { return std::sqrt((theta + 0.75) / (0.5 * (0.75 - theta))); }

double rho0_estimate(double theta, double p, double inf_q, double omega_at_M) {
    return (theta + 0.75 + 0.5 * (0.75 - theta)) / ((p - 1.0) * inf_q * std::pow(omega_at_M, p - 1.0));
}

void write_energy_csv(const std::vector<EnergySample>& samples, const std::string& path) {
    CsvWriter w(path, {"s", "t", "phi", "e2_01", "e_q", "e_rho", "e1_01", "e2_1_0", "e1_1_0", "e_full", "norm_g_L21",
                       "norm_fyy_L2", "norm_gy_L2", "sup_error"});
    for (const auto& e : samples) {
        w.row({e.s, e.t, e.phi, e.e2_01, e.e_q, e.e_rho, e.e1_01, e.e2_1_0, e.e1_1_0, e.e_full, e.norm_g_L21,
               e.norm_fyy_L2, e.norm_gy_L2, e.sup_error});
    }
}

}  // namespace beamlab
