#include "beamlab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace beamlab::kernels {

namespace {

inline double fpow(double u, double p) { return std::copysign(std::pow(std::fabs(u), p), u); }

inline double increment(double B, double w, double p) {
    const double aB = std::fabs(B);
    if (aB > 0.0 && std::fabs(w) < 0.5 * aB) {
        const double sB = B > 0.0 ? 1.0 : -1.0;
        return sB * std::pow(aB, p) * std::expm1(p * std::log1p(sB * w / aB));
    }
    return fpow(B + w, p) - fpow(B, p);
}

// Value at index i with odd reflection about the end nodes.
inline double reflected(std::span<const double> u, long i) {
    const long n = static_cast<long>(u.size());
    if (i < 0) return 2.0 * u[0] - u[static_cast<std::size_t>(-i)];
    if (i >= n) return 2.0 * u[static_cast<std::size_t>(n - 1)] - u[static_cast<std::size_t>(2 * (n - 1) - i)];
    return u[static_cast<std::size_t>(i)];
}

void check_sizes(std::size_t n, std::span<double> a, std::span<double> b) {
    if (a.size() != n || b.size() != n) throw std::invalid_argument("kernel output size mismatch");
}

}  // namespace

void spatial_operator(std::span<const double> u, double dx, std::span<double> uxx, std::span<double> uxxxx,
                      Exec exec) {
    const std::size_t n = u.size();
    check_sizes(n, uxx, uxxxx);
    if (n < 5) throw std::invalid_argument("spatial_operator needs at least 5 nodes");
    const double i2 = 1.0 / (dx * dx);
    const double i4 = i2 * i2;
    auto edge = [&](long i) {
        const double um2 = reflected(u, i - 2), um1 = reflected(u, i - 1), u0 = u[static_cast<std::size_t>(i)];
        const double up1 = reflected(u, i + 1), up2 = reflected(u, i + 2);
        uxx[static_cast<std::size_t>(i)] = (up1 - 2.0 * u0 + um1) * i2;
        uxxxx[static_cast<std::size_t>(i)] = (up2 - 4.0 * up1 + 6.0 * u0 - 4.0 * um1 + um2) * i4;
    };
    // The odd closure makes both differences vanish identically at the end nodes.
    auto end = [&](std::size_t i) { uxx[i] = uxxxx[i] = 0.0; };
    const long ln = static_cast<long>(n);
    edge(1);
    edge(ln - 2);
    end(0);
    end(n - 1);
    const double* v = u.data();
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (long i = 2; i < ln - 2; ++i) {
            uxx[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) * i2;
            uxxxx[i] = (v[i + 2] - 4.0 * v[i + 1] + 6.0 * v[i] - 4.0 * v[i - 1] + v[i - 2]) * i4;
        }
    } else {
        for (long i = 2; i < ln - 2; ++i) {
            uxx[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) * i2;
            uxxxx[i] = (v[i + 2] - 4.0 * v[i + 1] + 6.0 * v[i] - 4.0 * v[i - 1] + v[i - 2]) * i4;
        }
    }
}

void derivatives(std::span<const double> u, double dx, std::span<double> d1, std::span<double> d2,
                 std::span<double> d3, std::span<double> d4, Exec exec) {
    const std::size_t n = u.size();
    check_sizes(n, d1, d2);
    check_sizes(n, d3, d4);
    if (n < 5) throw std::invalid_argument("derivatives needs at least 5 nodes");
    const double i1 = 1.0 / dx;
    const double i2 = 1.0 / (dx * dx);
    const double i3 = i2 * i1;
    const double i4 = i2 * i2;
    auto node = [&](long i, double um2, double um1, double u0, double up1, double up2) {
        d1[i] = 0.5 * (up1 - um1) * i1;
        d2[i] = (up1 - 2.0 * u0 + um1) * i2;
        d3[i] = 0.5 * (up2 - 2.0 * up1 + 2.0 * um1 - um2) * i3;
        d4[i] = (up2 - 4.0 * up1 + 6.0 * u0 - 4.0 * um1 + um2) * i4;
    };
    const long ln = static_cast<long>(n);
    for (long i : {0L, 1L, ln - 2, ln - 1}) {
        node(i, reflected(u, i - 2), reflected(u, i - 1), u[i], reflected(u, i + 1), reflected(u, i + 2));
    }
    d2[0] = d4[0] = d2[n - 1] = d4[n - 1] = 0.0;
    const double* v = u.data();
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (long i = 2; i < ln - 2; ++i) node(i, v[i - 2], v[i - 1], v[i], v[i + 1], v[i + 2]);
    } else {
        for (long i = 2; i < ln - 2; ++i) node(i, v[i - 2], v[i - 1], v[i], v[i + 1], v[i + 2]);
    }
}

void nonlinear_increment(std::span<const double> B, std::span<const double> w, double p, std::span<double> out,
                         Exec exec) {
    const std::size_t n = B.size();
    if (w.size() != n || out.size() != n) throw std::invalid_argument("nonlinear_increment size mismatch");
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (std::size_t i = 0; i < n; ++i) out[i] = increment(B[i], w[i], p);
    } else {
        for (std::size_t i = 0; i < n; ++i) out[i] = increment(B[i], w[i], p);
    }
}

void power_nonlinearity(std::span<const double> u, double p, std::span<double> out, Exec exec) {
    const std::size_t n = u.size();
    if (out.size() != n) throw std::invalid_argument("power_nonlinearity size mismatch");
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (std::size_t i = 0; i < n; ++i) out[i] = fpow(u[i], p);
    } else {
        for (std::size_t i = 0; i < n; ++i) out[i] = fpow(u[i], p);
    }
}

double weighted_dot(std::span<const double> a, std::span<const double> b, std::span<const double> weight,
                    Exec exec) {
    const std::size_t n = a.size();
    if (b.size() != n || weight.size() != n) throw std::invalid_argument("weighted_dot size mismatch");
    double sum = 0.0;
    if (exec == Exec::parallel) {
#pragma omp parallel for reduction(+ : sum) schedule(static)
        for (std::size_t i = 0; i < n; ++i) sum += weight[i] * a[i] * b[i];
    } else {
        for (std::size_t i = 0; i < n; ++i) sum += weight[i] * a[i] * b[i];
    }
    return sum;
}

double max_abs(std::span<const double> a, Exec exec) {
    double m = 0.0;
    const std::size_t n = a.size();
    if (exec == Exec::parallel) {
#pragma omp parallel for reduction(max : m) schedule(static)
        for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(a[i]));
    } else {
        for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(a[i]));
    }
    return m;
}

bool all_finite(std::span<const double> a, Exec exec) {
    int bad = 0;
    const std::size_t n = a.size();
    if (exec == Exec::parallel) {
#pragma omp parallel for reduction(| : bad) schedule(static)
        for (std::size_t i = 0; i < n; ++i) bad |= !std::isfinite(a[i]);
    } else {
        for (std::size_t i = 0; i < n; ++i) bad |= !std::isfinite(a[i]);
    }
    return bad == 0;
}

}  // namespace beamlab::kernels
