#pragma once

#include <functional>
#include <span>
#include <vector>

namespace robinwg::quad {

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Newton iteration on the Legendre three-term recurrence. Results for small
/// n are cached; the returned reference stays valid for the program lifetime.
const GaussRule& gauss_legendre(int n);

using Integrand = std::function<double(double)>;

/// n-point Gauss-Legendre on [lo, hi].
double gauss(const Integrand& f, double lo, double hi, int n = 64);

/// Gauss-Legendre applied on `panels` equal sub-intervals of [lo, hi].
double composite_gauss(const Integrand& f, double lo, double hi, int panels, int n = 64);

/// Composite Gauss-Legendre over consecutive breakpoints (a piecewise-smooth
/// integrand is integrated panel by panel, breakpoints sorted ascending).
double piecewise_gauss(const Integrand& f, std::span<const double> breaks,
                       int panels_per_piece, int n = 64);

/// Composite Simpson with interval doubling, starting from `base_points`
/// intervals. Stops once two successive levels agree to `rel_tol` (or to
/// `abs_floor`). Throws QuadratureError if the last two levels still differ
/// by more than `fail_tol` relative after `max_levels` doublings.
double adaptive_simpson(const Integrand& f, double lo, double hi, int base_points,
                        double rel_tol = 1e-13, double abs_floor = 1e-300,
                        double fail_tol = 1e-8, int max_levels = 16);

/// Trapezoid rule on a (possibly non-uniform) sample grid.
double trapezoid(std::span<const double> x, std::span<const double> fx);

}  // namespace robinwg::quad
