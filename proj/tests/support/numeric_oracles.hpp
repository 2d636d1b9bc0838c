#pragma once

// Test-only reference computations. Nothing here calls into the library's
// solver, root finders or closed forms; only plain function evaluations.

#include <cmath>
#include <functional>
#include <vector>

namespace prosumer::testing {

/// Adaptive Simpson quadrature of f over [a, b].
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                               int depth = 50) {
    struct Rec {
        const std::function<double(double)>& f;
        double operator()(double a, double b, double fa, double fm, double fb, double whole, double tol,
                          int depth) const {
            const double m = 0.5 * (a + b);
            const double lm = 0.5 * (a + m);
            const double rm = 0.5 * (m + b);
            const double flm = f(lm);
            const double frm = f(rm);
            const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            const double delta = left + right - whole;
            if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
            return (*this)(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
                   (*this)(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
        }
    };
    if (a == b) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return Rec{f}(a, b, fa, fm, fb, whole, tol, depth);
}

inline double central_difference(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

struct GridMax {
    double x;
    double value;
};

/// Argmax of f on `points` equally spaced nodes of [a, b].
inline GridMax grid_argmax(const std::function<double(double)>& f, double a, double b, int points) {
    GridMax best{a, f(a)};
    for (int k = 1; k < points; ++k) {
        const double x = k == points - 1 ? b : a + (b - a) * k / (points - 1);
        const double v = f(x);
        if (v > best.value) best = {x, v};
    }
    return best;
}

inline std::vector<double> case_study_betas(double offset) {
    std::vector<double> betas;
    for (int i = 1; i <= 11; ++i) betas.push_back(offset + 0.1 * i);
    return betas;
}

}  // namespace prosumer::testing
