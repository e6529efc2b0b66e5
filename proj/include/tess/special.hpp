#pragma once

#include <cmath>
#include <functional>

namespace tess {

// Adaptive Simpson on [a, b] with absolute tolerance `tol`.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth = 48);

// K_{1/6}(x) = int_0^inf exp(-x cosh t) cosh(t/6) dt, x > 0.
double bessel_k_sixth(double x, double rel_tol = 1e-12);

// Regularized lower/upper incomplete gamma for a positive integer shape.
double gamma_p_int(int k, double x);
double gamma_q_int(int k, double x);

}  // namespace tess
