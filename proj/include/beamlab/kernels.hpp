#pragma once

#include <span>

namespace beamlab {

enum class Exec { serial, parallel };

// Grid-node kernels shared by the solver, transform and energy code. Each has
// a plain serial reference and an OpenMP variant; elementwise kernels give
// bit-identical output in both modes, reductions agree to rounding.
namespace kernels {

// Second and fourth centered differences with the simply supported closure:
// ghost values are odd reflections about the end nodes, so end outputs are 0
// when the end values are 0.
void spatial_operator(std::span<const double> u, double dx, std::span<double> uxx,
                      std::span<double> uxxxx, Exec exec);

// out = |B+w|^{p-1}(B+w) - |B|^{p-1}B, evaluated without cancellation.
void nonlinear_increment(std::span<const double> B, std::span<const double> w, double p,
                         std::span<double> out, Exec exec);

// out = |u|^{p-1} u.
void power_nonlinearity(std::span<const double> u, double p, std::span<double> out, Exec exec);

// sum_i weight_i a_i b_i
double weighted_dot(std::span<const double> a, std::span<const double> b, std::span<const double> weight,
                    Exec exec);

double max_abs(std::span<const double> a, Exec exec);

bool all_finite(std::span<const double> a, Exec exec);

// Central first to fourth x-derivatives of u at interior nodes with the same
// odd-reflection closure; firsts and thirds use the 2nd-order centered stencils.
void derivatives(std::span<const double> u, double dx, std::span<double> d1, std::span<double> d2,
                 std::span<double> d3, std::span<double> d4, Exec exec);

}  // namespace kernels
}  // namespace beamlab
