#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <random>

#include "beamlab/model.hpp"

using namespace beamlab;

namespace {

// Composite Simpson rule for R(t) = int_0^t a/b.
double R_quadrature(const ModelParams& m, double t, int n = 20000) {
    auto r = [&](double tau) { return std::pow(1.0 + tau, m.alpha) / (m.b0 * std::pow(1.0 + tau, m.beta)); };
    const double h = t / n;
    double sum = r(0) + r(t);
    for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * r(i * h);
    return sum * h / 3.0;
}

}  // namespace

TEST_CASE("derived constants for the canonical parameters") {
    const auto d = derive_params({0, 0, 1, 2.5});
    CHECK(d.theta == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(d.p_crit == doctest::Approx(3.0));
    CHECK(d.nu == doctest::Approx(2.0));
    CHECK(d.varsigma == doctest::Approx(1.0));
    CHECK(d.mu == doctest::Approx(1.0));
    CHECK(d.A0 == doctest::Approx(1.0));
    CHECK(d.all_assumptions());
}

TEST_CASE("derived constants for alpha = 1, p = 1.8") {
    const auto d = derive_params({1, 0, 1, 1.8});
    CHECK(d.theta == doctest::Approx(0.625));
    CHECK(d.p_crit == doctest::Approx(2.0));
    CHECK(d.mu == doctest::Approx(0.5));
    CHECK(d.varsigma == doctest::Approx(0.5));
    CHECK(d.A0 == doctest::Approx(std::pow(2.0, 1.0 / 1.6)));
    CHECK(d.all_assumptions());
}

TEST_CASE("assumption flags") {
    SUBCASE("p above the critical power") {
        const auto d = derive_params({0, 0, 1, 3.5});
        CHECK_FALSE(d.assumption_II);
        CHECK(d.violation().find("Assumption II") != std::string::npos);
    }
    SUBCASE("beta on the boundary") {
        const auto d = derive_params({0, -1, 1, 2});
        CHECK_FALSE(d.assumption_I);
    }
    SUBCASE("p too small for the third assumption") {
        // 1 + 4/3 = 7/3 is the lower bound for alpha = beta = 0
        CHECK_FALSE(derive_params({0, 0, 1, 2.3}).assumption_III);
        CHECK(derive_params({0, 0, 1, 2.34}).assumption_III);
    }
}

TEST_CASE("invalid parameters are rejected") {
    CHECK_THROWS_AS(derive_params({0, 0, 0, 2.5}), std::invalid_argument);
    CHECK_THROWS_AS(derive_params({0, 0, 1, 1.0}), std::invalid_argument);
}

TEST_CASE("theta lies in (1/2, 3/4) whenever all assumptions hold") {
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> ua(-0.9, 3.0), ub(-0.99, 2.0), up(1.0001, 6.0), ubo(0.1, 5.0);
    int admissible = 0;
    for (int i = 0; admissible < 1000 && i < 2000000; ++i) {
        const ModelParams m{ua(rng), ub(rng), ubo(rng), up(rng)};
        const auto d = derive_params(m);
        if (!d.all_assumptions()) continue;
        ++admissible;
        REQUIRE(d.theta > 0.5);
        REQUIRE(d.theta < 0.75);
    }
    CHECK(admissible == 1000);
}

TEST_CASE("coefficients and time maps") {
    SUBCASE("unit coefficients") {
        const auto c = coeff_eval({0, 0, 1, 2.5}, 3.0);
        CHECK(c.a == 1.0);
        CHECK(c.b == 1.0);
        CHECK(c.r == 1.0);
        CHECK(c.R == doctest::Approx(3.0));
        CHECK(c.s == doctest::Approx(std::log(4.0)));
        CHECK(c.epsilon == 0.0);
    }
    SUBCASE("t = 0") {
        const auto c = coeff_eval({1, 0, 1, 1.8}, 0.0);
        CHECK(c.R == 0.0);
        CHECK(c.s == 0.0);
        CHECK(c.epsilon == doctest::Approx(1.0 - std::sqrt(2.0)).epsilon(1e-14));
    }
    SUBCASE("R matches quadrature of a/b") {
        for (const ModelParams m : {ModelParams{1, 0, 1, 1.8}, ModelParams{0.5, 0.3, 2.0, 2.0},
                                    ModelParams{2, -0.5, 0.7, 1.5}}) {
            for (double t : {0.5, 3.0, 40.0}) {
                CHECK(R_of_t(m, t) == doctest::Approx(R_quadrature(m, t)).epsilon(1e-10));
            }
        }
    }
    SUBCASE("inverse maps") {
        const ModelParams m{1, 0.2, 1.3, 1.8};
        double prev = -1;
        for (double t = 0.01; t < 1e4; t *= 1.7) {
            const double R = R_of_t(m, t);
            CHECK(R > prev);
            prev = R;
            CHECK(t_of_R(m, R) == doctest::Approx(t).epsilon(1e-12));
            CHECK(t_of_s(m, s_of_t(m, t)) == doctest::Approx(t).epsilon(1e-12));
        }
    }
    SUBCASE("epsilon against its defining ratio") {
        const ModelParams m{1, 0, 1, 1.8};
        for (double t : {1.0, 10.0, 1000.0}) {
            const double R = R_of_t(m, t);
            const double k = 2.0;
            const double ref = 1.0 - std::pow(k * (R + 1.0), 1.0 / k) / (1.0 + t);
            CHECK(coeff_eval(m, t).epsilon == doctest::Approx(ref).epsilon(1e-9));
        }
    }
    SUBCASE("epsilon (1+t) stays bounded") {
        const ModelParams m{1, 0, 1, 1.8};
        double lo = 1e300, hi = 0;
        for (double t = 1; t <= 1e4; t *= 1.1) {
            const double v = std::fabs(coeff_eval(m, t).epsilon) * (1.0 + t);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        CHECK(hi < 1.0);
        CHECK(lo > 0.0);
        // For alpha = 1 the product decays: epsilon ~ -1 / (2 (1+t)^2).
        const double t = 1e4;
        CHECK(coeff_eval(m, t).epsilon * (1 + t) * (1 + t) == doctest::Approx(-0.5).epsilon(1e-6));
    }
}

TEST_CASE("small rates") {
    SUBCASE("canonical values") {
        const ModelParams m{0, 0, 1, 2.5};
        const auto c = small_rates(m, 2.0);
        CHECK(c.c1 == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
        CHECK(c.c2 == 0.0);
        const auto c0 = small_rates(m, 0.0);
        CHECK(c0.c1 == doctest::Approx(1.0));
        CHECK(c0.c3 == doctest::Approx(1.0));
    }
    SUBCASE("closed form for alpha = 1") {
        const ModelParams m{1, 0, 1, 1.8};
        for (double s = 1; s <= 10; s += 0.5) {
            const double t = t_of_s(m, s);
            const auto c = small_rates(m, s);
            CHECK(c.c1 == doctest::Approx((1 + t) / (1 + t + t * t / 2)).epsilon(1e-12));
            const double scaled = c.c1 * std::exp(0.5 * s);
            CHECK(scaled > 0.5);
            CHECK(scaled < 2.0);
        }
    }
    SUBCASE("derivative identities against finite differences in s") {
        for (const ModelParams m : {ModelParams{1, 0, 1, 1.8}, ModelParams{0.5, 0.3, 2.0, 2.0}}) {
            for (double s : {1.0, 3.0, 6.0}) {
                const double h = 1e-4;
                const auto p = small_rates(m, s + h), q = small_rates(m, s - h), c = small_rates(m, s);
                CHECK(c.c1_prime == doctest::Approx((p.c1 - q.c1) / (2 * h)).epsilon(1e-6));
                CHECK(c.c3_prime == doctest::Approx((p.c3 - q.c3) / (2 * h)).epsilon(1e-6));
            }
        }
    }
    SUBCASE("decay envelopes") {
        const ModelParams m{1, 0.2, 1, 1.8};
        const auto d = derive_params(m);
        double lo1 = 1e300, hi1 = 0, lo3 = 1e300, hi3 = 0;
        for (double s = 1; s <= 12; s += 0.1) {
            const auto c = small_rates(m, s);
            const double v1 = c.c1 * std::exp(s * (m.beta + 1) / d.kappa);
            const double v3 = c.c3 * std::exp(s * (2 * m.alpha - m.beta + 1) / d.kappa);
            lo1 = std::min(lo1, v1), hi1 = std::max(hi1, v1);
            lo3 = std::min(lo3, v3), hi3 = std::max(hi3, v3);
        }
        CHECK(lo1 > 0.0);
        CHECK(hi1 / lo1 < 5.0);
        CHECK(lo3 > 0.0);
        CHECK(hi3 / lo3 < 5.0);
    }
}

TEST_CASE("R0 and its derivatives") {
    const ModelParams m{1, 0.2, 1.3, 1.8};
    const double t = 7.0, h = 1e-4;
    const auto r = R0_eval(m, t);
    const double k = 1.8;
    CHECK(r.R0 == doctest::Approx(std::pow(t, k) / (1.3 * k)));
    CHECK(r.d1 == doctest::Approx((R0_eval(m, t + h).R0 - R0_eval(m, t - h).R0) / (2 * h)).epsilon(1e-7));
    CHECK(r.d2 == doctest::Approx((R0_eval(m, t + h).d1 - R0_eval(m, t - h).d1) / (2 * h)).epsilon(1e-7));
}
