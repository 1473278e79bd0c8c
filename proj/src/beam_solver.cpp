#include "beamlab/beam_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "beamlab/errors.hpp"
#include "beamlab/io.hpp"

namespace beamlab {

SpatialGrid SpatialGrid::symmetric(double L, std::size_t n) {
    if (!(L > 0.0)) throw std::invalid_argument("grid half-width must be positive");
    if (n < 257) throw std::invalid_argument("grid needs at least 257 nodes");
    SpatialGrid g;
    g.x_min = -L;
    g.x_max = L;
    g.n = n;
    g.dx = 2.0 * L / static_cast<double>(n - 1);
    return g;
}

std::vector<double> SpatialGrid::nodes() const {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = this->x(i);
    x.front() = x_min;
    x.back() = x_max;
    return x;
}

double perturbation_shape(const PerturbationSpec& pert, double x) {
    const double d = (x - pert.center) / pert.width;
    return std::exp(-0.5 * d * d);
}

PhysicalState initialize(const GammaField& gamma, double t0, const SpatialGrid& grid, const PerturbationSpec& pert) {
    if (!(t0 >= 1.0)) throw std::invalid_argument("initial time must be at least 1");
    if (!(pert.amplitude >= 0.0) || !(pert.width > 0.0)) throw std::invalid_argument("invalid perturbation");
    const std::vector<double> x = grid.nodes();
    const GammaFields g = gamma.eval(t0, x);
    PhysicalState st;
    st.t = t0;
    st.grid = grid;
    st.du.assign(grid.n, 0.0);
    st.dut.assign(grid.n, 0.0);
    if (pert.amplitude > 0.0) {
        const double edge = std::max(perturbation_shape(pert, grid.x_min), perturbation_shape(pert, grid.x_max));
        if (edge > 1e-6) {
            std::ostringstream os;
            os << "grid too small: perturbation tail at the boundary is " << edge << " of its peak";
            throw std::invalid_argument(os.str());
        }
        for (std::size_t i = 1; i + 1 < grid.n; ++i) {
            const double phi = pert.amplitude * perturbation_shape(pert, x[i]);
            if (pert.applies_to != PerturbTarget::ut) st.du[i] = phi;
            if (pert.applies_to != PerturbTarget::u) st.dut[i] = phi;
        }
    }
    st.u.resize(grid.n);
    st.ut.resize(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) {
        st.u[i] = g.gamma[i] + st.du[i];
        st.ut[i] = g.gamma_t[i] + st.dut[i];
    }
    return st;
}

PhysicalState initialize_plain(double t0, const SpatialGrid& grid, std::vector<double> u0, std::vector<double> ut0) {
    if (u0.size() != grid.n || ut0.size() != grid.n) throw std::invalid_argument("initial data size mismatch");
    PhysicalState st;
    st.t = t0;
    st.grid = grid;
    st.u = std::move(u0);
    st.ut = std::move(ut0);
    st.u.front() = st.u.back() = 0.0;
    st.ut.front() = st.ut.back() = 0.0;
    return st;
}

SpatialDerivatives apply_spatial_operator(const PhysicalState& state, Exec exec) {
    SpatialDerivatives d;
    d.uxx.resize(state.u.size());
    d.uxxxx.resize(state.u.size());
    kernels::spatial_operator(state.u, state.grid.dx, d.uxx, d.uxxxx, exec);
    return d;
}

void solve_pentadiagonal(std::span<const double> d, std::span<const double> e, std::span<const double> f,
                         std::span<double> rhs) {
    const std::size_t m = d.size();
    if (m < 3 || e.size() != m - 1 || f.size() != m - 2 || rhs.size() != m) {
        throw std::invalid_argument("pentadiagonal band sizes are inconsistent");
    }
    std::vector<double> D(m), al(m, 0.0), be(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        if (i >= 2) be[i] = f[i - 2] / D[i - 2];
        if (i >= 1) {
            const double corr = i >= 2 ? be[i] * al[i - 1] * D[i - 2] : 0.0;
            al[i] = (e[i - 1] - corr) / D[i - 1];
        }
        double di = d[i];
        if (i >= 1) di -= al[i] * al[i] * D[i - 1];
        if (i >= 2) di -= be[i] * be[i] * D[i - 2];
        if (!(di > 0.0) || !std::isfinite(di)) {
            std::ostringstream os;
            os << "singular band in implicit solve at row " << i << " (pivot " << di << ")";
            throw NumericalError(os.str());
        }
        D[i] = di;
    }
    for (std::size_t i = 0; i < m; ++i) {
        double y = rhs[i];
        if (i >= 1) y -= al[i] * rhs[i - 1];
        if (i >= 2) y -= be[i] * rhs[i - 2];
        rhs[i] = y;
    }
    for (std::size_t i = 0; i < m; ++i) rhs[i] /= D[i];
    for (std::size_t k = m; k-- > 0;) {
        double x = rhs[k];
        if (k + 1 < m) x -= al[k + 1] * rhs[k + 1];
        if (k + 2 < m) x -= be[k + 2] * rhs[k + 2];
        rhs[k] = x;
    }
}

struct BeamSolver::Work {
    SpatialGrid grid;
    std::vector<double> x, w, z, B, S, wstar, N, wxx, wxxxx, d, e, f, rhs;

    explicit Work(const SpatialGrid& g) : grid(g), x(g.nodes()) {
        const std::size_t n = g.n;
        for (auto* v : {&w, &z, &B, &S, &wstar, &N, &wxx, &wxxxx}) v->assign(n, 0.0);
        d.resize(n - 2);
        e.resize(n - 3);
        f.resize(n - 4);
        rhs.resize(n - 2);
    }
};

BeamSolver::BeamSolver(ModelParams params, std::shared_ptr<const GammaField> background, SolverOptions opts)
    : params_(params), background_(std::move(background)), opts_(opts) {
    params_.validate();
    if (!(opts_.dt > 0.0)) throw std::invalid_argument("time step must be positive");
}

void BeamSolver::advance(Work& wk, double t, double dt) const {
    const std::size_t n = wk.grid.n;
    const double dx = wk.grid.dx;
    const double th = t + 0.5 * dt;
    const double a = std::pow(1.0 + th, params_.alpha);
    const double b = params_.b0 * std::pow(1.0 + th, params_.beta);
    const double p = params_.p;
    const Exec ex = opts_.exec;
    const bool par = ex == Exec::parallel;

#pragma omp parallel for schedule(static) if (par)
    for (std::size_t i = 0; i < n; ++i) wk.wstar[i] = wk.w[i] + 0.5 * dt * wk.z[i];

    if (background_) {
        background_->background_into(th, wk.x, wk.B, wk.S, ex);
        if (opts_.nonlinear) {
            kernels::nonlinear_increment(wk.B, wk.wstar, p, wk.N, ex);
#pragma omp parallel for schedule(static) if (par)
            for (std::size_t i = 0; i < n; ++i) wk.N[i] = wk.S[i] - wk.N[i];
        } else {
            std::copy(wk.S.begin(), wk.S.end(), wk.N.begin());
        }
    } else if (opts_.nonlinear) {
        kernels::power_nonlinearity(wk.wstar, p, wk.N, ex);
#pragma omp parallel for schedule(static) if (par)
        for (std::size_t i = 0; i < n; ++i) wk.N[i] = -wk.N[i];
    } else {
        std::fill(wk.N.begin(), wk.N.end(), 0.0);
    }

    kernels::spatial_operator(wk.w, dx, wk.wxx, wk.wxxxx, ex);
    const double h2 = 0.5 * dt * dt;
#pragma omp parallel for schedule(static) if (par)
    for (std::size_t i = 1; i < n - 1; ++i) {
        const double Kw = wk.wxxxx[i] - a * wk.wxx[i];
        wk.rhs[i - 1] = dt * wk.z[i] - h2 * Kw + h2 * wk.N[i];
    }

    const double i2 = 1.0 / (dx * dx);
    const double i4 = i2 * i2;
    const double c0 = 1.0 + 0.5 * b * dt;
    const double c4 = 0.25 * dt * dt;
    const double c2 = 0.25 * a * dt * dt;
    std::fill(wk.d.begin(), wk.d.end(), c0 + 6.0 * c4 * i4 + 2.0 * c2 * i2);
    wk.d.front() = wk.d.back() = c0 + 5.0 * c4 * i4 + 2.0 * c2 * i2;
    std::fill(wk.e.begin(), wk.e.end(), -4.0 * c4 * i4 - c2 * i2);
    std::fill(wk.f.begin(), wk.f.end(), c4 * i4);
    solve_pentadiagonal(wk.d, wk.e, wk.f, wk.rhs);

#pragma omp parallel for schedule(static) if (par)
    for (std::size_t i = 1; i < n - 1; ++i) {
        const double delta = wk.rhs[i - 1];
        wk.w[i] += delta;
        wk.z[i] = 2.0 * delta / dt - wk.z[i];
    }
    wk.w.front() = wk.w.back() = 0.0;
    wk.z.front() = wk.z.back() = 0.0;
    if (!kernels::all_finite(wk.w, ex) || !kernels::all_finite(wk.z, ex)) {
        std::ostringstream os;
        os << "non-finite values after the step from t = " << t << " with dt = " << dt;
        throw NumericalError(os.str());
    }
}

PhysicalState BeamSolver::snapshot(const Work& wk, double t) const {
    PhysicalState st;
    st.t = t;
    st.grid = wk.grid;
    if (background_) {
        const GammaFields g = background_->eval(t, wk.x, opts_.exec);
        st.u.resize(wk.grid.n);
        st.ut.resize(wk.grid.n);
        for (std::size_t i = 0; i < wk.grid.n; ++i) {
            st.u[i] = g.gamma[i] + wk.w[i];
            st.ut[i] = g.gamma_t[i] + wk.z[i];
        }
        st.du = wk.w;
        st.dut = wk.z;
    } else {
        st.u = wk.w;
        st.ut = wk.z;
    }
    return st;
}

namespace {

void load(const PhysicalState& s, const GammaField* bg, std::vector<double>& w, std::vector<double>& z) {
    if (!bg) {
        w = s.u;
        z = s.ut;
    } else if (s.has_perturbation()) {
        w = s.du;
        z = s.dut;
    } else {
        const GammaFields g = bg->eval(s.t, s.grid.nodes());
        for (std::size_t i = 0; i < s.grid.n; ++i) {
            w[i] = s.u[i] - g.gamma[i];
            z[i] = s.ut[i] - g.gamma_t[i];
        }
    }
    w.front() = w.back() = 0.0;
    z.front() = z.back() = 0.0;
}

}  // namespace

PhysicalState BeamSolver::step(const PhysicalState& state, double dt) const {
    if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
    Work wk(state.grid);
    load(state, background_.get(), wk.w, wk.z);
    advance(wk, state.t, dt);
    return snapshot(wk, state.t + dt);
}

EvolveResult BeamSolver::evolve(const PhysicalState& state, double t_end, std::span<const double> sample_times,
                                const Observer& observer, bool keep_snapshots) const {
    if (!(t_end > state.t)) throw std::invalid_argument("t_end must exceed the current time");
    std::vector<double> targets;
    for (double ts : sample_times) {
        if (ts > state.t && ts < t_end) targets.push_back(ts);
    }
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
    const bool final_is_sample = std::any_of(sample_times.begin(), sample_times.end(),
                                             [&](double ts) { return ts == t_end; });
    targets.push_back(t_end);

    Work wk(state.grid);
    load(state, background_.get(), wk.w, wk.z);
    const double ref = kernels::max_abs(state.u, opts_.exec);

    EvolveResult res;
    double t = state.t;
    for (std::size_t k = 0; k < targets.size(); ++k) {
        const double target = targets[k];
        // Equal substeps no longer than dt so that target is hit exactly.
        const auto nsteps = static_cast<std::size_t>(std::max(1.0, std::ceil((target - t) / opts_.dt - 1e-9)));
        const double h = (target - t) / static_cast<double>(nsteps);
        for (std::size_t j = 0; j < nsteps; ++j) {
            advance(wk, t, h);
            t = (j + 1 == nsteps) ? target : t + h;
            ++res.steps;
        }
        const bool last = k + 1 == targets.size();
        const bool is_sample = !last || final_is_sample;
        PhysicalState snap = snapshot(wk, t);
        if (opts_.blowup_factor > 0.0 && ref > 0.0) {
            const double m = kernels::max_abs(snap.u, opts_.exec);
            if (m > opts_.blowup_factor * ref) {
                std::ostringstream os;
                os << "blow-up guard: max|u| = " << m << " exceeds " << opts_.blowup_factor << " x " << ref
                   << " at t = " << t;
                throw NumericalError(os.str());
            }
        }
        if (is_sample) {
            if (observer) observer(snap);
            if (keep_snapshots) res.snapshots.push_back(snap);
        }
        if (last) res.final_state = std::move(snap);
    }
    return res;
}

double discrete_energy(const PhysicalState& state, double a) {
    const std::size_t n = state.grid.n;
    const double dx = state.grid.dx;
    double kin = 0, grad = 0, curv = 0;
    for (std::size_t i = 0; i < n; ++i) kin += state.ut[i] * state.ut[i];
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double g = (state.u[i + 1] - state.u[i]) / dx;
        grad += g * g;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double c = (state.u[i + 1] - 2.0 * state.u[i] + state.u[i - 1]) / (dx * dx);
        curv += c * c;
    }
    return 0.5 * dx * (kin + a * grad + curv);
}

void write_physical_csv(const PhysicalState& state, const std::string& path) {
    const std::vector<double> x = state.grid.nodes();
    write_columns(path, {"x", "u", "ut"}, {&x, &state.u, &state.ut});
}

}  // namespace beamlab
