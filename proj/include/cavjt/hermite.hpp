// hermite.hpp - orthonormal harmonic-oscillator eigenfunctions
//   h_n(x) = (2^n n! sqrt(pi))^{-1/2} H_n(x) exp(-x^2 / 2)
// generated by the upward three-term recurrence with a running exponent so that
// large n at large |x| neither overflows nor loses the Gaussian factor early.

#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace cavjt {

/// h_0(x) .. h_{count-1}(x).
std::vector<double> hermite_functions(int count, double x);

/// count x xs.size() table, row n holding h_n at every sample point.
Eigen::MatrixXd hermite_table(int count, std::span<const double> xs);

} // namespace cavjt
