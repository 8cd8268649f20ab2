#pragma once

// Independent reference computations used only by the test suites.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace tpinn::oracle {

// Entropy solution of the inviscid Greenshield LWR Riemann problem with the jump
// at x0 at time 0. Flux f(r) = vf r (1 - r), f'(r) = vf (1 - 2 r).
inline double riemann_greenshield(double rho_l, double rho_r, double vf, double x0, double t, double x) {
    if (t <= 0.0) return x < x0 ? rho_l : rho_r;
    const double xi = (x - x0) / t;
    if (rho_l < rho_r) { // shock (concave flux)
        const double s = vf * (1.0 - rho_l - rho_r);
        return xi < s ? rho_l : rho_r;
    }
    const double cl = vf * (1.0 - 2.0 * rho_l);
    const double cr = vf * (1.0 - 2.0 * rho_r);
    if (xi <= cl) return rho_l;
    if (xi >= cr) return rho_r;
    return 0.5 * (1.0 - xi / vf);
}

// Composite Simpson on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

// Richardson-extrapolated central first difference.
inline double d1_richardson(const std::function<double(double)>& f, double x, double h) {
    auto c = [&](double hh) { return (f(x + hh) - f(x - hh)) / (2.0 * hh); };
    return (4.0 * c(0.5 * h) - c(h)) / 3.0;
}

// Richardson-extrapolated central second difference.
inline double d2_richardson(const std::function<double(double)>& f, double x, double h) {
    auto c = [&](double hh) { return (f(x + hh) - 2.0 * f(x) + f(x - hh)) / (hh * hh); };
    return (4.0 * c(0.5 * h) - c(h)) / 3.0;
}

// Smallest relative error over a sweep of step sizes.
template <typename Estimator>
double best_relative_error(double analytic, Estimator estimate, double floor,
                           std::initializer_list<double> steps = {1e-2, 5e-3, 2e-3, 1e-3, 5e-4, 2e-4, 1e-4}) {
    double best = std::numeric_limits<double>::infinity();
    for (double h : steps) {
        const double fd = estimate(h);
        best = std::min(best, std::abs(analytic - fd) / std::max(std::abs(fd), floor));
    }
    return best;
}

} // namespace tpinn::oracle
