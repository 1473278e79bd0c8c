#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <filesystem>

#include "beamlab/errors.hpp"
#include "beamlab/io.hpp"
#include "beamlab/model.hpp"
#include "beamlab/profile.hpp"

using namespace beamlab;

namespace {

constexpr double kTheta = 2.0 / 3.0;
constexpr double kP = 2.5;
// Omega(0) of the c0 = 1 canonical profile, frozen from the first solve.
constexpr double kOmega0Canonical = 0.624773054161049;

const ProfileSolution& canonical() {
    static const ProfileSolution sol = solve_profile(kP, kTheta, 1.0, ProfileTarget::from_c0(1.0));
    return sol;
}

// Classical fixed-step RK4 for O'' = -(z/2) O' - theta O + O^p starting at the
// origin with the series O(z) = A + O''(0) z^2 / 2 over the first step.
std::vector<double> rk4_profile(double A, double z_end, double h) {
    auto rhs = [](double z, double o, double o1) {
        return -0.5 * z * o1 - kTheta * o + std::pow(o, kP);
    };
    std::vector<double> out;
    double z = 0, o = A, o1 = 0;
    out.push_back(o);
    const int n = static_cast<int>(std::lround(z_end / h));
    for (int i = 0; i < n; ++i) {
        const double k1o = o1, k1p = rhs(z, o, o1);
        const double k2o = o1 + 0.5 * h * k1p, k2p = rhs(z + 0.5 * h, o + 0.5 * h * k1o, o1 + 0.5 * h * k1p);
        const double k3o = o1 + 0.5 * h * k2p, k3p = rhs(z + 0.5 * h, o + 0.5 * h * k2o, o1 + 0.5 * h * k2p);
        const double k4o = o1 + h * k3p, k4p = rhs(z + h, o + h * k3o, o1 + h * k3p);
        o += h / 6 * (k1o + 2 * k2o + 2 * k3o + k4o);
        o1 += h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p);
        z += h;
        out.push_back(o);
    }
    return out;
}

ProfileSolution constant_profile() {
    ProfileSolution s;
    s.p = kP;
    s.theta = kTheta;
    s.varsigma = 1.0;
    s.z_max = 10;
    s.dz = 0.01;
    const std::size_t n = 1001;
    const double c = std::pow(kTheta, 1.0 / (kP - 1.0));
    for (std::size_t i = 0; i < n; ++i) s.z.push_back(s.dz * i);
    s.omega.assign(n, c);
    s.omega1.assign(n, 0.0);
    s.omega2.assign(n, 0.0);
    s.omega3.assign(n, 0.0);
    s.omega4.assign(n, 0.0);
    s.omega0 = c;
    return s;
}

}  // namespace

TEST_CASE("constant root of the profile equation has zero residual") {
    const auto s = constant_profile();
    CHECK(s.omega0 == doctest::Approx(0.76314).epsilon(1e-5));
    CHECK(profile_residual(s) <= 1e-15);
}

TEST_CASE("canonical profile") {
    const auto& s = canonical();
    CHECK(s.omega0 == doctest::Approx(kOmega0Canonical).epsilon(1e-10));
    CHECK(s.residual_max <= 1e-8);
    CHECK(profile_residual(s) <= 1e-8);
    CHECK(profile_fd_residual(s) <= 1e-8);
    CHECK(s.omega1[0] == 0.0);
    CHECK(s.turning_index == 0);
    for (std::size_t i = 0; i < s.size(); ++i) {
        REQUIRE(s.omega[i] > 0.0);
        if (i > 0) REQUIRE(s.omega[i] < s.omega[i - 1]);
    }
}

TEST_CASE("profile agrees with an independent RK4 integration") {
    const auto& s = canonical();
    const double h = 1e-3;
    const auto ref = rk4_profile(s.omega0, 10.0, h);
    double worst = 0;
    for (std::size_t k = 0; k < ref.size(); k += 250) {
        worst = std::max(worst, std::fabs(s.omega_at(k * h) - ref[k]));
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("evaluation honours parity and the ODE chain") {
    const auto& s = canonical();
    for (double z : {0.3, 4.7, 13.1, 24.9, 31.0}) {
        const auto a = s.eval(z), b = s.eval(-z);
        CHECK(a[0] == b[0]);
        CHECK(a[1] == -b[1]);
        CHECK(a[2] == b[2]);
        CHECK(a[3] == -b[3]);
        CHECK(a[4] == b[4]);
        CHECK(a[5] == -b[5]);
    }
    // Off-grid values still satisfy the ODE to interpolation accuracy.
    for (double z : {0.123, 7.7777, 19.4321}) {
        const auto d = s.eval(z);
        const double r = d[2] + 0.5 * z * d[1] + kTheta * d[0] - std::pow(d[0], kP);
        CHECK(std::fabs(r) < 1e-8);
        CHECK(d[3] == doctest::Approx(profile_d3(kP, kTheta, z, d[0], d[1], d[2])).epsilon(1e-6));
    }
}

TEST_CASE("higher derivatives match differences of lower ones") {
    const auto& s = canonical();
    const double h = 1e-3;
    for (double z : {1.0, 5.0, 12.0}) {
        const auto p = s.eval(z + h), m = s.eval(z - h), c = s.eval(z);
        for (int k = 0; k < 5; ++k) {
            const double fd = (p[k] - m[k]) / (2 * h);
            CHECK(fd == doctest::Approx(c[k + 1]).epsilon(1e-5).scale(1e-6));
        }
    }
}

TEST_CASE("corrupted second derivative is detected") {
    auto s = canonical();
    std::fill(s.omega2.begin(), s.omega2.end(), 0.0);
    double min_omega = *std::min_element(s.omega.begin(), s.omega.end());
    CHECK(profile_residual(s) >= kTheta * min_omega);
}

TEST_CASE("derivative consistency is second order in dz") {
    ProfileOptions coarse, fine;
    coarse.n_nodes = 1001;
    fine.n_nodes = 2001;
    const auto a = solve_profile(kP, kTheta, 1.0, ProfileTarget::from_omega0(kOmega0Canonical), coarse);
    const auto b = solve_profile(kP, kTheta, 1.0, ProfileTarget::from_omega0(kOmega0Canonical), fine);
    const double ratio = profile_derivative_consistency(a) / profile_derivative_consistency(b);
    CHECK(ratio > 3.6);
    CHECK(ratio < 4.4);
}

TEST_CASE("tail constant increases with Omega(0)") {
    double prev = 0;
    for (double a : {0.60, 0.62, 0.64}) {
        const auto s = solve_profile(kP, kTheta, 1.0, ProfileTarget::from_omega0(a));
        CHECK(s.c0 > prev);
        prev = s.c0;
    }
}

TEST_CASE("canonical asymptotics") {
    const auto& s = canonical();
    const auto fa = fit_asymptotics(s, 15, 25);
    CHECK(std::fabs(fa.tail_rate_omega + 2 * kTheta) <= 0.02);
    const double combo = -(2 * kTheta + 2.0);
    CHECK(std::fabs(fa.rate_combo - combo) <= 0.05 * std::fabs(combo));
    CHECK(fa.ratio_d2 >= 0.95);
    CHECK(fa.ratio_d2 <= 1.05);
    CHECK(fa.c0_fit == doctest::Approx(1.0).epsilon(2e-4));
    // Interpolated profile and leading tail agree at the grid end.
    const double tail = std::pow(s.z_max, -2 * kTheta);
    CHECK(std::fabs(s.omega.back() - tail) / s.omega.back() <= 0.02);
    CHECK_THROWS_AS(fit_asymptotics(s, 24.99, 25), std::invalid_argument);
    CHECK_THROWS_AS(fit_asymptotics(s, 15, 30), std::invalid_argument);
}

TEST_CASE("extension reproduces the solved range") {
    const auto& s = canonical();
    const auto e = extend_profile(s, 60.0);
    CHECK(e.z_max >= 60.0);
    CHECK(e.omega0 == s.omega0);
    double worst = 0;
    for (std::size_t i = 0; i < s.size(); i += 100) worst = std::max(worst, std::fabs(e.omega[i] - s.omega[i]));
    CHECK(worst < 1e-10);
    CHECK(profile_residual(e) <= 1e-8);
}

TEST_CASE("failures are reported") {
    CHECK_THROWS_AS(solve_profile(kP, kTheta, 1.0, ProfileTarget::from_c0(1e6)), NumericalError);
    CHECK_THROWS_AS(solve_profile(kP, kTheta, 1.0, ProfileTarget::from_omega0(0.1)), NumericalError);
}

TEST_CASE("profile CSV round trip") {
    const auto& s = canonical();
    const auto path = std::filesystem::temp_directory_path() / "beamlab_profile_test.csv";
    write_profile_csv(s, path.string());
    const auto t = read_csv(path.string());
    REQUIRE(t.rows.size() == s.size());
    CHECK(t.header == std::vector<std::string>{"z", "omega", "omega1", "omega2", "omega3", "omega4"});
    CHECK(t.rows[1234][1] == doctest::Approx(s.omega[1234]).epsilon(1e-15));
    std::filesystem::remove(path);
}
