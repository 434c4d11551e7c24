#pragma once

#include "robinwg/modematch.hpp"

#include <optional>
#include <vector>

namespace robinwg {

/// Smooth even bump: 1 on [-p, p], 0 outside (-s, s), with the exp(-1/t)
/// transition in between, scaled to unit L2(R) norm.
class BumpProfile {
public:
    explicit BumpProfile(double plateau = 0.125, double support = 0.25);

    double plateau() const { return plateau_; }
    double support() const { return support_; }
    /// Scale factor applied to the unit-height bump.
    double scale() const { return scale_; }
    /// ||phi'||^2 over R.
    double kinetic() const { return kinetic_; }

    double operator()(double x) const;
    double derivative(double x) const;

private:
    double raw(double x) const;
    double raw_derivative(double x) const;

    double plateau_;
    double support_;
    double scale_;
    double kinetic_;
};

/// phi_n(x) = n^{-1/2} phi(x / n).
double trial_scale(const BumpProfile& bump, int n, double x);

/// Q[psi_n] = h[psi_n] - E_1(alpha0) ||psi_n||^2 for psi_n = phi_n(x) chi_1(y; alpha0),
/// evaluated through the separable reduction
///     Q = ||phi'||^2 / n^2 + (chi_1(0)^2 + chi_1(d)^2) (alpha1 - alpha0) int_{-a}^{a} phi_n^2.
double q_form(const WellConfig& cfg, const BumpProfile& bump, int n, int quad_points = 64);

struct QReport {
    std::vector<int> n_values;
    std::vector<double> q_values;
    std::optional<int> first_negative_n;
    /// int (alpha - alpha0) dx = 2 a (alpha1 - alpha0).
    double well_integral = 0.0;
    bool hypothesis_holds = false;
    /// Hypothesis satisfied but no negative Q up to n_max.
    bool inconclusive = false;
    WellConfig config{};
};

QReport existence_test(const WellConfig& cfg, const BumpProfile& bump, int n_max,
                       int quad_points = 64);

}  // namespace robinwg
