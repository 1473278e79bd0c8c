#include "beamlab/gamma.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace beamlab {

void GammaFields::resize(std::size_t n) {
    for (auto* v : {&gamma, &gamma_t, &gamma_x, &gamma_xx, &gamma_xxx, &gamma_xxxx, &gamma_tt, &gamma_xt, &remainder,
                    &defect}) {
        v->resize(n);
    }
}

namespace {

// Time-dependent scalars shared by every node at one t.
struct Frame {
    double theta, p, R0, sqrtR0, sc0, q1, q2, b_mis, a_mis, res_scale;
};

Frame make_frame(const ModelParams& params, const DerivedParams& derived, double t) {
    Frame f{};
    f.theta = derived.theta;
    f.p = params.p;
    const R0Sample r0 = R0_eval(params, t);
    f.R0 = r0.R0;
    f.sqrtR0 = std::sqrt(r0.R0);
    f.sc0 = derived.A0 * std::pow(r0.R0, -derived.theta);
    f.q1 = r0.d1 / r0.R0;
    f.q2 = r0.d2 / r0.R0;
    // b - b0 t^beta and a - t^alpha, written to avoid cancellation for large t.
    const double ta = std::pow(t, params.alpha);
    f.b_mis = params.b0 * std::pow(t, params.beta) * std::expm1(params.beta * std::log1p(1.0 / t));
    f.a_mis = ta * std::expm1(params.alpha * std::log1p(1.0 / t));
    f.res_scale = ta * f.sc0 / r0.R0;
    return f;
}

struct NodeValues {
    double g, gt, gx, gxx, gxxx, gxxxx, gtt, gxt, remainder, defect;
};

inline NodeValues node_values(const Frame& f, const ProfileSolution& prof, double x) {
    const double z = x / f.sqrtR0;
    const ProfileDerivs d = prof.eval(z, 4);
    const double th = f.theta;
    const double P = th * d[0] + 0.5 * z * d[1];
    const double Pz = (th + 0.5) * d[1] + 0.5 * z * d[2];
    NodeValues v{};
    v.g = f.sc0 * d[0];
    v.gt = -f.sc0 * f.q1 * P;
    v.gtt = -f.sc0 * f.q2 * P + f.sc0 * f.q1 * f.q1 * ((th + 1.0) * P + 0.5 * z * Pz);
    v.gx = f.sc0 * d[1] / f.sqrtR0;
    v.gxx = f.sc0 * d[2] / f.R0;
    v.gxxx = f.sc0 * d[3] / (f.R0 * f.sqrtR0);
    v.gxxxx = f.sc0 * d[4] / (f.R0 * f.R0);
    v.gxt = -f.sc0 * f.q1 * Pz / f.sqrtR0;
    const double res = d[2] + 0.5 * z * d[1] + th * d[0] - std::copysign(std::pow(std::fabs(d[0]), f.p), d[0]);
    v.remainder = -v.gtt - v.gxxxx;
    v.defect = -v.gtt - v.gxxxx - f.b_mis * v.gt + f.a_mis * v.gxx + f.res_scale * res;
    return v;
}

}  // namespace

GammaField::GammaField(ModelParams params, std::shared_ptr<const ProfileSolution> profile, double t_min)
    : params_(params), derived_(derive_params(params)), profile_(std::move(profile)), t_min_(t_min) {
    if (!profile_) throw std::invalid_argument("GammaField needs a profile");
    if (!(t_min_ > 0.0)) throw std::invalid_argument("GammaField needs t_min > 0");
}

GammaFields GammaField::eval(double t, std::span<const double> xs, Exec exec) const {
    GammaFields out;
    eval_into(t, xs, out, exec);
    return out;
}

static void check_time(double t, double t_min) {
    if (!(t >= t_min)) {
        std::ostringstream os;
        os << "Gamma evaluated at t = " << t << " below the minimum start time " << t_min;
        throw std::domain_error(os.str());
    }
}

void GammaField::eval_into(double t, std::span<const double> xs, GammaFields& out, Exec exec) const {
    check_time(t, t_min_);
    const std::size_t n = xs.size();
    out.resize(n);
    out.t = t;
    const Frame f = make_frame(params_, derived_, t);
    const ProfileSolution& prof = *profile_;
    auto node = [&](std::size_t i) {
        const NodeValues v = node_values(f, prof, xs[i]);
        out.gamma[i] = v.g;
        out.gamma_t[i] = v.gt;
        out.gamma_x[i] = v.gx;
        out.gamma_xx[i] = v.gxx;
        out.gamma_xxx[i] = v.gxxx;
        out.gamma_xxxx[i] = v.gxxxx;
        out.gamma_tt[i] = v.gtt;
        out.gamma_xt[i] = v.gxt;
        out.remainder[i] = v.remainder;
        out.defect[i] = v.defect;
    };
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (std::size_t i = 0; i < n; ++i) node(i);
    } else {
        for (std::size_t i = 0; i < n; ++i) node(i);
    }
}

void GammaField::background_into(double t, std::span<const double> xs, std::span<double> gamma,
                                 std::span<double> defect, Exec exec) const {
    check_time(t, t_min_);
    const std::size_t n = xs.size();
    if (gamma.size() != n || defect.size() != n) throw std::invalid_argument("background_into size mismatch");
    const Frame f = make_frame(params_, derived_, t);
    const ProfileSolution& prof = *profile_;
    auto node = [&](std::size_t i) {
        const NodeValues v = node_values(f, prof, xs[i]);
        gamma[i] = v.g;
        defect[i] = v.defect;
    };
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (std::size_t i = 0; i < n; ++i) node(i);
    } else {
        for (std::size_t i = 0; i < n; ++i) node(i);
    }
}

GammaFields gamma_eval(const ModelParams& params, const ProfileSolution& profile, double t,
                       std::span<const double> xs, double t_min) {
    auto shared = std::shared_ptr<const ProfileSolution>(&profile, [](const ProfileSolution*) {});
    return GammaField(params, shared, t_min).eval(t, xs);
}

}  // namespace beamlab
