#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <memory>

#include "beamlab/selfsim.hpp"

using namespace beamlab;

namespace {

std::shared_ptr<const ProfileSolution> profile_for(const ModelParams& m) {
    const auto d = derive_params(m);
    ProfileOptions o;
    o.z_max = 40;
    o.n_nodes = 6401;
    const double a = m.alpha == 0 ? 0.624773054161049 : 0.251641152631997;
    return std::make_shared<const ProfileSolution>(solve_profile(m.p, d.theta, d.varsigma, ProfileTarget::from_omega0(a), o));
}

const ModelParams kCanon{0, 0, 1, 2.5};
const ModelParams kCross{1, 0, 1, 1.8};

// Exact self-similar ansatz u = A0 (R+1)^{-theta} Omega(x / sqrt(R+1)).
PhysicalState ansatz_state(const ModelParams& m, const ProfileSolution& prof, double t, double L, std::size_t n) {
    const auto d = derive_params(m);
    const auto c = coeff_eval(m, t);
    const auto g = SpatialGrid::symmetric(L, n);
    std::vector<double> u(n), ut(n);
    const double T = c.R + 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double y = g.x(i) / std::sqrt(T);
        const auto o = prof.eval(y, 1);
        u[i] = d.A0 * std::pow(T, -d.theta) * o[0];
        ut[i] = d.A0 * c.r * std::pow(T, -d.theta - 1) * (-d.theta * o[0] - 0.5 * y * o[1]);
    }
    PhysicalState st;
    st.t = t;
    st.grid = g;
    st.u = u;
    st.ut = ut;
    return st;
}

SelfSimilarState blank_state(const YGrid& g, double s, const ModelParams& m) {
    SelfSimilarState st;
    st.s = s;
    st.t = t_of_s(m, s);
    st.dy = g.dy;
    st.y = g.y;
    for (auto* v : {&st.f, &st.fy, &st.fyy, &st.fyyy, &st.fyyyy, &st.g, &st.gy}) v->assign(g.n, 0.0);
    return st;
}

}  // namespace

TEST_CASE("transform inverts the self-similar ansatz") {
    for (const auto& m : {kCanon, kCross}) {
        const auto prof = profile_for(m);
        const double t = 10.0;
        const double s = s_of_t(m, t);
        const double L = 1.1 * 10 * std::exp(0.5 * s);
        SelfSimilarMap map(m, prof, YGrid::symmetric(10.0, 401));
        const auto st = map.transform(ansatz_state(m, *prof, t, L, 2 * static_cast<std::size_t>(L / 0.05) + 1));
        double ef = 0, eg = 0, efyy = 0;
        for (std::size_t i = 0; i < st.f.size(); ++i) {
            ef = std::max(ef, std::fabs(st.f[i]));
            eg = std::max(eg, std::fabs(st.g[i]));
            efyy = std::max(efyy, std::fabs(st.fyy[i]));
        }
        CHECK(ef + eg <= 1e-8);
        CHECK(efyy <= 1e-4);
        CHECK(st.s == doctest::Approx(s));
    }
}

TEST_CASE("interpolation error of a gaussian is fourth order") {
    const auto prof = profile_for(kCanon);
    const double t = 3.0, s = s_of_t(kCanon, t), e2 = std::exp(0.5 * s);
    auto err = [&](double dx) {
        const double L = 16.0 * e2;
        const auto g = SpatialGrid::symmetric(L, 2 * static_cast<std::size_t>(std::ceil(L / dx)) + 1);
        PhysicalState ps;
        ps.t = t;
        ps.grid = g;
        for (std::size_t i = 0; i < g.n; ++i) {
            const double x = g.x(i);
            ps.u.push_back(std::exp(-x * x / 3 + 0.3 * x));
            ps.ut.push_back(0.0);
        }
        SelfSimilarMap map(kCanon, prof, YGrid::symmetric(10.0, 2001));
        const auto st = map.transform(ps);
        double m = 0;
        for (std::size_t i = 0; i < st.y.size(); ++i) {
            const double x = st.y[i] * e2;
            const double ref = std::exp((2.0 / 3.0) * s) * std::exp(-x * x / 3 + 0.3 * x) - map.omega(0)[i];
            m = std::max(m, std::fabs(st.f[i] - ref));
        }
        return m;
    };
    const double r = err(0.2) / err(0.1);
    CHECK(r > 12.0);
    CHECK(r < 20.0);
}

TEST_CASE("split and direct transforms agree") {
    const auto prof = std::make_shared<const ProfileSolution>(extend_profile(*profile_for(kCanon), 120.0));
    auto gamma = std::make_shared<const GammaField>(kCanon, prof);
    const double L = 80.0;
    const auto g = SpatialGrid::symmetric(L, 1601);
    const auto st = initialize(*gamma, 10.0, g, {1e-3, 1.0, 0.0, PerturbTarget::both});
    PhysicalState plain = st;
    plain.du.clear();
    plain.dut.clear();
    const YGrid yg = YGrid::symmetric(20.0, 801);
    const auto a = SelfSimilarMap(kCanon, prof, yg, gamma).transform(st);
    const auto b = SelfSimilarMap(kCanon, prof, yg, gamma).transform(plain);
    double df = 0, dg = 0;
    for (std::size_t i = 0; i < a.f.size(); ++i) {
        df = std::max(df, std::fabs(a.f[i] - b.f[i]));
        dg = std::max(dg, std::fabs(a.g[i] - b.g[i]));
    }
    CHECK(df <= 1e-7);
    CHECK(dg <= 1e-7);
    CHECK(a.sup_error == doctest::Approx(1e-3));
    CHECK(b.sup_error == doctest::Approx(1e-3).epsilon(1e-9));
    const auto ss = SelfSimilarMap(kCanon, prof, yg, gamma).transform(st, Exec::serial);
    CHECK(ss.f == a.f);
    CHECK(ss.gy == a.gy);
}

TEST_CASE("domain condition") {
    const auto prof = profile_for(kCanon);
    SelfSimilarMap map(kCanon, prof, YGrid::symmetric(20.0, 401));
    const auto st = ansatz_state(kCanon, *prof, 10.0, 40.0, 801);
    CHECK_THROWS_AS(map.transform(st), std::out_of_range);
    CHECK_THROWS_AS(YGrid::symmetric(20.0, 400), std::invalid_argument);
}

TEST_CASE("structural terms at f = 0") {
    for (const auto& m : {kCanon, kCross}) {
        const auto prof = profile_for(m);
        const YGrid yg = YGrid::symmetric(20.0, 801);
        SelfSimilarMap map(m, prof, yg);
        const double s = 3.0;
        const auto st = blank_state(yg, s, m);
        const auto T = map.structural(st);
        const double eps = coeff_eval(m, st.t).epsilon;
        for (std::size_t i = 0; i < yg.n; ++i) {
            REQUIRE(T.L_of_f[i] == 0.0);
            REQUIRE(T.N_of_f[i] == 0.0);
            REQUIRE(T.k[i] == 0.0);
            REQUIRE(T.h2[i] == doctest::Approx(eps * std::pow(map.omega(0)[i], m.p)).epsilon(1e-14));
            REQUIRE(T.h[i] == T.h1[i] + T.h2[i]);
        }
        if (m.alpha == 0) CHECK(eps == 0.0);
        else CHECK(eps != 0.0);
    }
}

TEST_CASE("nonlinear identity N(f) - k = p Omega^{p-1} f") {
    for (const auto& m : {kCanon, kCross}) {
        const auto prof = profile_for(m);
        const YGrid yg = YGrid::symmetric(20.0, 801);
        SelfSimilarMap map(m, prof, yg);
        auto st = blank_state(yg, 2.0, m);
        for (std::size_t i = 0; i < yg.n; ++i) st.f[i] = 0.1 * std::exp(-yg.y[i] * yg.y[i]);
        const auto T = map.structural(st);
        CHECK(nonlinearity_identity_error(map, st, T) <= 1e-10);
        for (std::size_t i = 0; i < yg.n; ++i) {
            const double lin = m.p * std::pow(map.omega(0)[i], m.p - 1) * st.f[i];
            REQUIRE(std::fabs(T.N_of_f[i] - T.k[i] - lin) <= 1e-10 * std::max(std::fabs(lin), 1e-300) + 1e-300);
        }
    }
}

TEST_CASE("N is quadratic in f") {
    const auto prof = profile_for(kCanon);
    const YGrid yg = YGrid::symmetric(20.0, 801);
    SelfSimilarMap map(kCanon, prof, yg);
    auto peak = [&](double e) {
        auto st = blank_state(yg, 2.0, kCanon);
        for (std::size_t i = 0; i < yg.n; ++i) st.f[i] = e * map.omega(0)[i];
        const auto T = map.structural(st);
        double m = 0;
        for (double v : T.N_of_f) m = std::max(m, std::fabs(v));
        return m / (e * e);
    };
    CHECK(peak(1e-2) == doctest::Approx(peak(1e-3)).epsilon(0.01));
}

TEST_CASE("quadratic remainder is accurate on both branches") {
    for (double p : {1.8, 2.5}) {
        for (double x : {1e-6, 0.01, 0.049, 0.051, 0.3, -0.2}) {
            const double o = 0.7, f = x * o;
            const double direct = -(std::pow(o + f, p) - std::pow(o, p) - p * std::pow(o, p - 1) * f);
            CHECK(quadratic_remainder(o, f, p) == doctest::Approx(direct).epsilon(x < 1e-3 ? 1e-3 : 1e-9));
        }
    }
}

TEST_CASE("y-derivatives of h and k") {
    const auto prof = profile_for(kCross);
    const YGrid yg = YGrid::symmetric(20.0, 4001);
    SelfSimilarMap map(kCross, prof, yg);
    auto st = blank_state(yg, 2.0, kCross);
    for (std::size_t i = 0; i < yg.n; ++i) {
        const double y = yg.y[i];
        st.f[i] = 0.05 * std::exp(-y * y / 4);
        st.fy[i] = -0.5 * y * st.f[i];
    }
    const auto T = map.structural(st);
    const double h = yg.dy;
    auto d5 = [h](const std::vector<double>& v, std::size_t i) {
        return (v[i - 2] - 8 * v[i - 1] + 8 * v[i + 1] - v[i + 2]) / (12 * h);
    };
    double eh = 0, ek = 0;
    for (std::size_t i = 2; i + 2 < yg.n; ++i) {
        eh = std::max(eh, std::fabs(T.h_y[i] - d5(T.h, i)));
        ek = std::max(ek, std::fabs(T.k_y[i] - d5(T.k, i)));
    }
    CHECK(eh <= 1e-8);
    CHECK(ek <= 1e-8);
}
