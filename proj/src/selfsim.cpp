#include "beamlab/selfsim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "beamlab/io.hpp"
#include "beamlab/kernels.hpp"

namespace beamlab {

YGrid YGrid::symmetric(double y_max, std::size_t n) {
    if (!(y_max > 0.0) || n < 5 || n % 2 == 0) throw std::invalid_argument("y-grid needs y_max > 0 and odd n >= 5");
    YGrid g;
    g.y_max = y_max;
    g.n = n;
    g.dy = 2.0 * y_max / static_cast<double>(n - 1);
    g.y.resize(n);
    const std::size_t mid = n / 2;
    for (std::size_t i = 0; i < n; ++i) {
        g.y[i] = g.dy * (static_cast<double>(i) - static_cast<double>(mid));
    }
    g.y.front() = -y_max;
    g.y.back() = y_max;
    return g;
}

namespace {

// Four-point Lagrange interpolation of samples on a uniform grid.
struct Stencil {
    std::size_t j = 0;
    double w[4] = {0, 0, 0, 0};
};

Stencil stencil(const SpatialGrid& g, double x) {
    const double pos = (x - g.x_min) / g.dx;
    long j = static_cast<long>(std::floor(pos));
    j = std::clamp(j, 1L, static_cast<long>(g.n) - 3);
    const double t = pos - static_cast<double>(j);
    Stencil s;
    s.j = static_cast<std::size_t>(j);
    s.w[0] = -t * (t - 1.0) * (t - 2.0) / 6.0;
    s.w[1] = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    s.w[2] = -(t + 1.0) * t * (t - 2.0) / 2.0;
    s.w[3] = (t + 1.0) * t * (t - 1.0) / 6.0;
    return s;
}

inline double interp(const Stencil& s, const std::vector<double>& v) {
    return s.w[0] * v[s.j - 1] + s.w[1] * v[s.j] + s.w[2] * v[s.j + 1] + s.w[3] * v[s.j + 2];
}

inline double fpow(double u, double p) { return std::copysign(std::pow(std::fabs(u), p), u); }

}  // namespace

double quadratic_remainder(double omega, double f, double p) {
    const double x = f / omega;
    const double op = std::pow(omega, p);
    if (std::fabs(x) < 0.05) {
        double coef = p * (p - 1.0) / 2.0;
        double xp = x * x;
        double sum = 0.0;
        for (int j = 2; j < 80; ++j) {
            const double term = coef * xp;
            sum += term;
            if (std::fabs(term) <= 1e-18 * std::fabs(sum)) break;
            coef *= (p - j) / (j + 1.0);
            xp *= x;
        }
        return -op * sum;
    }
    return -(fpow(omega + f, p) - op - p * std::pow(omega, p - 1.0) * f);
}

SelfSimilarMap::SelfSimilarMap(ModelParams params, std::shared_ptr<const ProfileSolution> profile, YGrid grid,
                               std::shared_ptr<const GammaField> background)
    : params_(params),
      derived_(derive_params(params)),
      profile_(std::move(profile)),
      grid_(std::move(grid)),
      background_(std::move(background)) {
    if (!profile_) throw std::invalid_argument("SelfSimilarMap needs a profile");
    for (auto& v : omega_) v.resize(grid_.n);
    for (std::size_t i = 0; i < grid_.n; ++i) {
        const ProfileDerivs d = profile_->eval(grid_.y[i]);
        for (std::size_t k = 0; k < 6; ++k) omega_[k][i] = d[k];
    }
}

SelfSimilarState SelfSimilarMap::transform(const PhysicalState& state, Exec exec) const {
    const double s = s_of_t(params_, state.t);
    const double e2 = std::exp(0.5 * s);
    const SpatialGrid& pg = state.grid;
    const double reach = grid_.y_max * e2;
    if (reach > pg.x_max * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "y_max = " << grid_.y_max << " maps to x = " << reach << " beyond the physical domain L = " << pg.x_max;
        throw std::out_of_range(os.str());
    }
    const double theta = derived_.theta;
    const double A0 = derived_.A0;
    const CoefficientSample c = coeff_eval(params_, state.t);
    const std::size_t nx = pg.n;
    const std::size_t ny = grid_.n;

    // Split u = Gamma + w; only w is differenced and interpolated.
    const bool split = background_ && state.has_perturbation();
    const std::vector<double>& w = split ? state.du : state.u;
    const std::vector<double>& wt = split ? state.dut : state.ut;
    std::vector<double> d1(nx), d2(nx), d3(nx), d4(nx), dt1(nx), dt2(nx), dt3(nx), dt4(nx);
    kernels::derivatives(w, pg.dx, d1, d2, d3, d4, exec);
    kernels::derivatives(wt, pg.dx, dt1, dt2, dt3, dt4, exec);

    std::vector<double> xs(ny);
    for (std::size_t i = 0; i < ny; ++i) xs[i] = grid_.y[i] * e2;
    GammaFields gam;
    if (split) background_->eval_into(state.t, xs, gam, exec);

    SelfSimilarState out;
    out.s = s;
    out.t = state.t;
    out.dy = grid_.dy;
    out.y = grid_.y;
    for (auto* v : {&out.f, &out.fy, &out.fyy, &out.fyyy, &out.fyyyy, &out.g, &out.gy}) v->resize(ny);
    double sc[5];
    for (int k = 0; k < 5; ++k) sc[k] = std::exp((theta + 0.5 * k) * s) / A0;
    const double scw = std::exp((theta + 1.0) * s) / (A0 * c.r);
    const double scwy = scw * e2;
    const auto& O = omega_;

    auto node = [&](std::size_t i) {
        const Stencil st = stencil(pg, xs[i]);
        double u0 = interp(st, w), u1 = interp(st, d1), u2 = interp(st, d2), u3 = interp(st, d3), u4 = interp(st, d4);
        double ut0 = interp(st, wt), ut1 = interp(st, dt1);
        if (split) {
            u0 += gam.gamma[i];
            u1 += gam.gamma_x[i];
            u2 += gam.gamma_xx[i];
            u3 += gam.gamma_xxx[i];
            u4 += gam.gamma_xxxx[i];
            ut0 += gam.gamma_t[i];
            ut1 += gam.gamma_xt[i];
        }
        const double yy = grid_.y[i];
        out.f[i] = sc[0] * u0 - O[0][i];
        out.fy[i] = sc[1] * u1 - O[1][i];
        out.fyy[i] = sc[2] * u2 - O[2][i];
        out.fyyy[i] = sc[3] * u3 - O[3][i];
        out.fyyyy[i] = sc[4] * u4 - O[4][i];
        out.g[i] = scw * ut0 + theta * O[0][i] + 0.5 * yy * O[1][i];
        out.gy[i] = scwy * ut1 + (theta + 0.5) * O[1][i] + 0.5 * yy * O[2][i];
    };
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (std::size_t i = 0; i < ny; ++i) node(i);
    } else {
        for (std::size_t i = 0; i < ny; ++i) node(i);
    }
    if (split) {
        out.sup_error = kernels::max_abs(state.du, exec);
    } else if (background_) {
        const GammaFields g = background_->eval(state.t, pg.nodes(), exec);
        double m = 0.0;
        for (std::size_t i = 0; i < nx; ++i) m = std::max(m, std::fabs(state.u[i] - g.gamma[i]));
        out.sup_error = m;
    }
    return out;
}

StructuralTerms SelfSimilarMap::structural(const SelfSimilarState& st) const {
    const std::size_t n = grid_.n;
    if (st.f.size() != n) throw std::invalid_argument("state does not live on this y-grid");
    const double theta = derived_.theta;
    const double p = params_.p;
    const SmallRates c = small_rates(params_, st.s);
    const double eps = coeff_eval(params_, st.t).epsilon;
    StructuralTerms T;
    for (auto* v : {&T.L_of_f, &T.N_of_f, &T.k, &T.h1, &T.h2, &T.h, &T.h_y, &T.k_y}) v->resize(n);
    const auto& O = omega_;
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
        const double yy = grid_.y[i];
        const double o = O[0][i], o1 = O[1][i], o2 = O[2][i], o3 = O[3][i], o4 = O[4][i], o5 = O[5][i];
        const double f = st.f[i];
        const double opm1 = std::pow(o, p - 1.0);
        T.L_of_f[i] = st.fyy[i] + 0.5 * yy * st.fy[i] + theta * f - p * opm1 * f;
        T.N_of_f[i] = quadratic_remainder(o, f, p);
        const double v = o + f;
        const double x = f / o;
        if (std::fabs(x) < 0.5) {
            T.k[i] = -std::pow(o, p) * std::expm1(p * std::log1p(x));
        } else {
            T.k[i] = -(fpow(v, p) - std::pow(o, p));
        }
        const double P = theta * o + 0.5 * yy * o1;
        const double Pd = (theta + 0.5) * o1 + 0.5 * yy * o2;    // dP/dy
        const double Pdd = (theta + 1.0) * o2 + 0.5 * yy * o3;   // d^2P/dy^2
        const double Q = 0.5 * yy * Pd;
        const double Qd = 0.5 * Pd + 0.5 * yy * Pdd;
        T.h1[i] = -c.c1 * ((theta + 1.0) * P + Q) + c.c2 * P - c.c3 * o4;
        T.h2[i] = eps * fpow(v, p);
        T.h[i] = T.h1[i] + T.h2[i];
        const double vpm1 = std::pow(std::fabs(v), p - 1.0);
        const double vy = st.fy[i] + o1;
        T.h_y[i] = -c.c1 * ((theta + 1.0) * Pd + Qd) + c.c2 * Pd - c.c3 * o5 + eps * p * vpm1 * vy;
        T.k_y[i] = -p * (vpm1 * vy - opm1 * o1);
    }
    return T;
}

SelfSimilarState to_selfsimilar(const ModelParams& params, const ProfileSolution& profile, const PhysicalState& state,
                                const YGrid& y_grid, std::shared_ptr<const GammaField> background) {
    auto shared = std::shared_ptr<const ProfileSolution>(&profile, [](const ProfileSolution*) {});
    return SelfSimilarMap(params, shared, y_grid, std::move(background)).transform(state);
}

StructuralTerms structural_terms(const ModelParams& params, const ProfileSolution& profile,
                                 const SelfSimilarState& state) {
    auto shared = std::shared_ptr<const ProfileSolution>(&profile, [](const ProfileSolution*) {});
    YGrid g = YGrid::symmetric(state.y.back(), state.y.size());
    return SelfSimilarMap(params, shared, g).structural(state);
}

double nonlinearity_identity_error(const SelfSimilarMap& map, const SelfSimilarState& st,
                                   const StructuralTerms& terms) {
    const double p = map.params().p;
    const auto& O = map.omega(0);
    double worst = 0.0;
    for (std::size_t i = 0; i < st.f.size(); ++i) {
        const double lin = p * std::pow(O[i], p - 1.0) * st.f[i];
        const double scale = std::max(std::fabs(lin), std::fabs(terms.k[i]));
        if (scale == 0.0) continue;
        worst = std::max(worst, std::fabs(terms.N_of_f[i] - terms.k[i] - lin) / scale);
    }
    return worst;
}

void write_selfsim_csv(const SelfSimilarState& st, const StructuralTerms& terms, const std::string& path) {
    write_columns(path, {"y", "f", "fy", "fyy", "fyyy", "fyyyy", "g", "gy", "h", "k"},
                  {&st.y, &st.f, &st.fy, &st.fyy, &st.fyyy, &st.fyyyy, &st.g, &st.gy, &terms.h, &terms.k});
}

}  // namespace beamlab
