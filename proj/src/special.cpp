#include "tess/special.hpp"

#include <algorithm>

#include "tess/errors.hpp"

namespace tess {

namespace {

double simpson_step(const std::function<double(double)>& f, double a, double fa, double m, double fm,
                    double b, double fb, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_step(f, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol, int max_depth) {
    if (b == a) return 0.0;
    // Seed with a few panels so narrow features are not skipped.
    constexpr int panels = 16;
    double total = 0.0;
    const double h = (b - a) / panels;
    for (int i = 0; i < panels; ++i) {
        const double x0 = a + i * h, x1 = (i + 1 == panels) ? b : x0 + h, xm = 0.5 * (x0 + x1);
        const double f0 = f(x0), f1 = f(x1), fm = f(xm);
        const double whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
        total += simpson_step(f, x0, f0, xm, fm, x1, f1, whole, tol / panels, max_depth);
    }
    return total;
}

double bessel_k_sixth(double x, double rel_tol) {
    if (!(x > 0.0)) throw DomainError("bessel_k_sixth needs x > 0");
    // Scaled integrand exp(-x (cosh t - 1)) cosh(t/6), with cosh t - 1 = 2 sinh^2(t/2).
    auto g = [x](double t) {
        const double s = std::sinh(0.5 * t);
        return std::exp(-2.0 * x * s * s) * std::cosh(t / 6.0);
    };
    // Truncate where the scaled integrand drops below e^-50 of its peak.
    double T = 1.0;
    for (int i = 0; i < 60; ++i) T = std::acosh(1.0 + (50.0 + T / 6.0) / x);
    // Trapezoid rule: the integrand is analytic in |Im t| < pi/2 and decays
    // doubly exponentially, so the error falls like exp(-pi^2 / h). For large x
    // the peak narrows to width 1/sqrt(x) and the step follows it.
    const double digits = 8.0 - std::log(rel_tol);
    const double h = std::min({0.25, 9.8696044010893586 / digits, 3.1415926535897932 * std::sqrt(2.0 / (x * digits))});
    double scaled = 0.5 * g(0.0);
    for (double t = h; t <= T; t += h) scaled += g(t);
    scaled *= h;
    return std::exp(-x) * scaled;
}

double gamma_p_int(int k, double x) {
    if (k < 1) throw DomainError("gamma shape must be a positive integer");
    if (!(x > 0.0)) return 0.0;
    if (x < k + 1.0) {
        // e^-x sum_{i >= k} x^i / i!
        double term = std::exp(-x);
        for (int i = 1; i <= k; ++i) term *= x / i;
        double sum = 0.0;
        for (int i = k; i < k + 2000; ++i) {
            sum += term;
            term *= x / (i + 1);
            if (term < 1e-17 * sum) break;
        }
        return std::min(sum, 1.0);
    }
    return 1.0 - gamma_q_int(k, x);
}

double gamma_q_int(int k, double x) {
    if (k < 1) throw DomainError("gamma shape must be a positive integer");
    if (!(x > 0.0)) return 1.0;
    if (x < k + 1.0) return 1.0 - gamma_p_int(k, x);
    double term = std::exp(-x), sum = 0.0;
    for (int i = 0; i < k; ++i) {
        sum += term;
        term *= x / (i + 1);
    }
    return std::min(sum, 1.0);
}

}  // namespace tess
