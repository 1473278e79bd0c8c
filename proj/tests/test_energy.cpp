#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <memory>
#include <numbers>

#include "beamlab/beam_solver.hpp"
#include "beamlab/energy.hpp"

using namespace beamlab;

namespace {

const ModelParams kCanon{0, 0, 1, 2.5};
const double kSqrtPi = std::sqrt(std::numbers::pi);

const std::shared_ptr<const ProfileSolution>& canon_profile() {
    static const auto sol = [] {
        ProfileOptions o;
        o.z_max = 40;
        o.n_nodes = 6401;
        return std::make_shared<const ProfileSolution>(
            solve_profile(2.5, 2.0 / 3.0, 1.0, ProfileTarget::from_omega0(0.624773054161049), o));
    }();
    return sol;
}

const WeightFunction& canon_weight() {
    static const WeightFunction w = build_weight(*canon_profile(), 20.0, 1001);
    return w;
}

// f = c e^{-y^2/2} with exact derivatives, g = gamp e^{-y^2/2}.
SelfSimilarState gaussian_state(double y_max, std::size_t n, double c, double gamp, double s) {
    const YGrid yg = YGrid::symmetric(y_max, n);
    SelfSimilarState st;
    st.s = s;
    st.t = t_of_s(kCanon, s);
    st.dy = yg.dy;
    st.y = yg.y;
    for (double y : yg.y) {
        const double e = c * std::exp(-0.5 * y * y);
        st.f.push_back(e);
        st.fy.push_back(-y * e);
        st.fyy.push_back((y * y - 1) * e);
        st.fyyy.push_back((3 * y - y * y * y) * e);
        st.fyyyy.push_back((y * y * y * y - 6 * y * y + 3) * e);
        const double ge = gamp * std::exp(-0.5 * y * y);
        st.g.push_back(ge);
        st.gy.push_back(-y * ge);
    }
    return st;
}

struct ShortRun {
    std::vector<SelfSimilarState> states;
    std::vector<StructuralTerms> terms;
};

// A short perturbed canonical run sampled every 0.01 in s.
const ShortRun& short_run() {
    static const ShortRun run = [] {
        ShortRun out;
        const double t0 = 10.0, s0 = s_of_t(kCanon, t0), span = 0.3;
        const double dx = 0.2;
        const double L0 = 1.2 * 10.0 * std::exp(0.5 * (s0 + span));
        const std::size_t n = 2 * static_cast<std::size_t>(std::ceil(L0 / dx)) + 1;
        const double L = dx * static_cast<double>(n - 1) / 2;
        auto gamma = std::make_shared<const GammaField>(kCanon, canon_profile());
        const auto init = initialize(*gamma, t0, SpatialGrid::symmetric(L, n), {1e-3, 1.0, 0.0, PerturbTarget::u});
        SolverOptions so;
        so.dt = 0.25 * dx;
        BeamSolver solver(kCanon, gamma, so);
        SelfSimilarMap map(kCanon, canon_profile(), YGrid::symmetric(10.0, 1001), gamma);
        std::vector<double> times;
        for (int k = 1; k <= 30; ++k) times.push_back(t_of_s(kCanon, s0 + 0.01 * k));
        auto record = [&](const PhysicalState& ps) {
            out.states.push_back(map.transform(ps));
            out.terms.push_back(map.structural(out.states.back()));
        };
        record(init);
        solver.evolve(init, times.back(), times, record, false);
        return out;
    }();
    return run;
}

double run_mismatch(Functional which, double l, double m) {
    const auto& run = short_run();
    std::vector<TrajectoryPoint> pts;
    for (std::size_t i = 0; i < run.states.size(); ++i) pts.push_back({&run.states[i], &run.terms[i]});
    return identity_check(pts, kCanon, which, 0, l, m, 0.0, 1.0);
}

}  // namespace

TEST_CASE("weighted norm of a gaussian") {
    const auto st = gaussian_state(20.0, 4001, 1.0, 0.0, 1.0);
    const std::span<const double> d[] = {st.f, st.fy};
    CHECK(weighted_norm(std::span(d, 1), st.y, st.dy, 0, 1) == doctest::Approx(std::sqrt(1.5 * kSqrtPi)).epsilon(1e-10));
    CHECK(weighted_norm(std::span(d, 1), st.y, st.dy, 0, 1) == doctest::Approx(1.63056).epsilon(1e-5));
    CHECK(weighted_norm(std::span(d, 1), st.y, st.dy, 0, 0) == doctest::Approx(std::sqrt(kSqrtPi)).epsilon(1e-10));
    // k = 1, ell = 1: adds int (1+y^2) y^2 e^{-y^2} = (1/2 + 3/4) sqrt(pi)
    CHECK(weighted_norm(d, st.y, st.dy, 1, 1) == doctest::Approx(std::sqrt(2.75 * kSqrtPi)).epsilon(1e-10));
    CHECK_THROWS_AS(weighted_norm(std::span(d, 1), st.y, st.dy, 1, 1), std::invalid_argument);
}

TEST_CASE("phi") {
    SUBCASE("zero state") {
        const auto st = gaussian_state(20.0, 801, 0.0, 0.0, 1.0);
        CHECK(phi(st, kCanon, 1.0) == 0.0);
    }
    SUBCASE("quadratic homogeneity") {
        const auto a = gaussian_state(20.0, 801, 1.0, 0.7, 0.5);
        const auto b = gaussian_state(20.0, 801, 3.0, 2.1, 0.5);
        CHECK(phi(b, kCanon, 0.5) == doctest::Approx(9.0 * phi(a, kCanon, 0.5)).epsilon(1e-13));
    }
    SUBCASE("limit with vanishing rates") {
        const auto st = gaussian_state(20.0, 4001, 1.0, 0.0, 40.0);
        CHECK(phi(st, kCanon, 40.0) == doctest::Approx((1.5 + 1.25 + 0.75) * kSqrtPi).epsilon(1e-10));
    }
    SUBCASE("rate-weighted terms") {
        const double s = 0.5;
        const auto st = gaussian_state(20.0, 4001, 1.0, 1.0, s);
        const auto c = small_rates(kCanon, s);
        // c3 (int y^2 fyy^2 + int fyyy^2) + c1 (int (1+y^2) g^2 + int gy^2)
        const double ref = 3.5 * kSqrtPi + c.c3 * (0.875 + 1.875) * kSqrtPi + c.c1 * (1.5 + 0.5) * kSqrtPi;
        CHECK(phi(st, kCanon, s) == doctest::Approx(ref).epsilon(1e-10));
    }
}

TEST_CASE("energy suite composition") {
    const double s = 1.0;
    const auto st = gaussian_state(20.0, 1001, 0.2, 0.1, s);
    const EnergyWeights w;
    const auto e = energy_suite(st, kCanon, canon_weight(), w, s);
    CHECK(e.e_rho == doctest::Approx(e.e2_01 + w.rho * e.e_q));
    CHECK(e.e_full ==
          doctest::Approx(e.e_rho + w.vartheta * e.e1_01 + w.zeta * e.e2_1_0 + w.omega_w * e.e1_1_0).epsilon(1e-14));
    const auto c = small_rates(kCanon, s);
    CHECK(e.e2_01 == doctest::Approx(0.04 * (0.75 * kSqrtPi) + c.c1 * 0.02 * 1.5 * kSqrtPi).epsilon(1e-10));
    CHECK(e.norm_g_L21 == doctest::Approx(0.1 * std::sqrt(1.5 * kSqrtPi)).epsilon(1e-10));
    CHECK(e.phi == doctest::Approx(phi(st, kCanon, s)));

    SUBCASE("g = 0 leaves the q-weighted quadratic form") {
        const auto s0 = gaussian_state(20.0, 1001, 0.2, 0.0, s);
        const auto e0 = energy_suite(s0, kCanon, canon_weight(), w, s);
        double ref = 0;
        const auto tw = trapezoid_weights(s0.y.size(), s0.dy);
        for (std::size_t i = 0; i < s0.y.size(); ++i) ref += 0.5 * tw[i] * canon_weight().q_at(s0.y[i]) * s0.f[i] * s0.f[i];
        CHECK(e0.e_q == doctest::Approx(ref).epsilon(1e-12));
        CHECK(e0.e_q > 0.0);
    }
    SUBCASE("rejects non-positive weights") {
        EnergyWeights bad;
        bad.rho = 0;
        CHECK_THROWS_AS(energy_suite(st, kCanon, canon_weight(), bad, s), std::invalid_argument);
    }
}

TEST_CASE("quadrature converges under grid doubling") {
    const double s = 0.3;
    const EnergyWeights w;
    const auto a = energy_suite(gaussian_state(20.0, 401, 0.2, 0.1, s), kCanon, canon_weight(), w, s);
    const auto b = energy_suite(gaussian_state(20.0, 801, 0.2, 0.1, s), kCanon, canon_weight(), w, s);
    for (auto m : {&EnergySample::phi, &EnergySample::e_full, &EnergySample::e_q, &EnergySample::e1_1_0}) {
        CHECK(a.*m == doctest::Approx(b.*m).epsilon(1e-3));
    }
}

TEST_CASE("identity check") {
    SUBCASE("zero trajectory") {
        std::vector<IdentitySample> z;
        for (int k = 0; k < 5; ++k) z.push_back({0.1 * k, 0.0, 0.0});
        CHECK(identity_check(z).max_mismatch == 0.0);
    }
    SUBCASE("exact derivative on a non-uniform grid") {
        std::vector<IdentitySample> q;
        for (double s : {0.0, 0.1, 0.25, 0.3, 0.5}) q.push_back({s, s * s, 2 * s});
        const auto r = identity_check(q, 1e-12);
        CHECK(r.max_mismatch <= 1e-12);
        CHECK(r.lhs.size() == 3);
    }
    SUBCASE("short run satisfies the identities and rejects a wrong rate") {
        const double th = derive_params(kCanon).theta;
        const double good2 = run_mismatch(Functional::E2, th, th + 1);
        const double good1 = run_mismatch(Functional::E1, th, th + 1);
        CHECK(good2 <= 0.01);
        CHECK(good1 <= 0.01);
        CHECK(run_mismatch(Functional::E2, th + 0.25, th + 1) >= 0.05);
        CHECK(run_mismatch(Functional::E1, th + 0.25, th + 1) >= 0.05);
    }
    SUBCASE("validation") {
        std::vector<IdentitySample> two{{0, 1, 1}, {1, 1, 1}};
        CHECK_THROWS_AS(identity_check(two), std::invalid_argument);
        std::vector<IdentitySample> back{{0, 1, 1}, {1, 1, 1}, {0.5, 1, 1}};
        CHECK_THROWS_AS(identity_check(back), std::invalid_argument);
    }
}

TEST_CASE("decay fits") {
    std::vector<double> s, v, c, w;
    for (int i = 0; i <= 400; ++i) {
        const double x = 0.01 * i;
        s.push_back(x);
        v.push_back(3 * std::exp(-0.4 * x));
        c.push_back(2.0);
        w.push_back(3 * std::exp(-0.4 * x) * (1 + 0.01 * std::sin(7 * x)));
    }
    const auto r = fit_decay(s, v, 0, 4);
    CHECK(r.mu0 == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(std::exp(r.intercept) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(r.rms_residual <= 1e-12);
    CHECK(fit_decay(s, c, 0, 4).mu0 == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    const auto n = fit_decay(s, w, 0, 4);
    CHECK(n.mu0 >= 0.39);
    CHECK(n.mu0 <= 0.41);
    CHECK(fit_decay(s, v, 1, 2).samples == 101);
    CHECK_THROWS_AS(fit_decay(s, v, 10, 11), std::invalid_argument);

    std::vector<double> x{1, 10, 100}, y{1, 0.1, 0.01};
    CHECK(loglog_slope(x, y) == doctest::Approx(-1.0));
    std::vector<double> bad{1, -1, 2};
    CHECK_THROWS_AS(loglog_slope(x, bad), std::invalid_argument);
}

TEST_CASE("weight parameter conditions") {
    const double th = 2.0 / 3.0;
    const double M = minimal_M(th);
    CHECK(m_condition(th, M) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    CHECK(m_condition(th, 1.01 * M) < 0.0);
    CHECK(m_condition(th, 0.99 * M) > 0.0);
    CHECK(m_condition(th, 2.0) == doctest::Approx((th + 0.75) / 4 + (th - 0.75) / 2));
    const double o = 0.1, iq = 0.5, p = 2.5;
    const double rho0 = rho0_estimate(th, p, iq, o);
    CHECK(th + 0.75 - rho0 * (p - 1) * iq * std::pow(o, p - 1) == doctest::Approx(-(0.75 - th) / 2));
}
