#pragma once

#include <functional>
#include <vector>

namespace rwpm
{
/*!
 * Trapezoidal solver for u(t) = f(t) + int_0^t k(t - s) u(s) ds on t_n = n dt.
 *
 * u_0 = f_0 and, for n >= 1,
 *   u_n (1 - dt k_0 / 2) = f_n + dt (k_n u_0 / 2 + sum_{j=1}^{n-1} k_{n-j} u_j).
 * The history sum is accumulated by divide and conquer with FFT block
 * convolutions, O(n log^2 n); blocks below a few dozen points are summed
 * directly.
 */
std::vector<double> volterra_convolution(const std::vector<double>& f,
                                         const std::vector<double>& k, double dt);

// Plain O(n^2) version of the same recursion (reference and small grids).
std::vector<double> volterra_convolution_direct(const std::vector<double>& f,
                                                const std::vector<double>& k, double dt);

}  // namespace rwpm
