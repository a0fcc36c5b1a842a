#pragma once

#include <array>
#include <cmath>
#include <cstdlib>
#include <functional>

#include "evdemand/core.hpp"

namespace evd {

namespace detail {

inline double simpson_rule(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <class F>
double adaptive_simpson_rec(F&& f, double a, double fa, double b, double fb, double m, double fm,
                            double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = simpson_rule(a, fa, m, fm, flm);
    const double right = simpson_rule(m, fm, b, fb, frm);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    // interval narrower than float resolution: further splits cannot help
    if (b - a <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}))
        return left + right + delta / 15.0;
    if (depth <= 0)
        throw NumericError("adaptive_simpson: recursion depth exhausted before reaching tolerance");
    return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Adaptive Simpson quadrature with an absolute tolerance.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double abs_tol, int max_depth = 48) {
    if (!(b > a)) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    const double whole = detail::simpson_rule(a, fa, b, fb, fm);
    return detail::adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole, abs_tol, max_depth);
}

struct NelderMeadResult {
    std::array<double, 2> x{};
    double fmin = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Derivative-free 2-D simplex minimizer (reflection/expansion/contraction/shrink).
NelderMeadResult nelder_mead_2d(const std::function<double(double, double)>& f,
                                std::array<double, 2> start, std::array<double, 2> step,
                                int max_iterations = 500, double ftol = 1e-14);

}  // namespace evd
