#include "robinwg/variational.hpp"

#include "robinwg/errors.hpp"
#include "robinwg/quadrature.hpp"

#include <cmath>

namespace robinwg {

namespace {

double bump_exp(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }
double bump_exp_derivative(double t) { return t > 0.0 ? std::exp(-1.0 / t) / (t * t) : 0.0; }

// C-infinity step: 0 for t <= 0, 1 for t >= 1.
double smooth_step(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double u = bump_exp(t);
    const double v = bump_exp(1.0 - t);
    return u / (u + v);
}

double smooth_step_derivative(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    const double u = bump_exp(t);
    const double v = bump_exp(1.0 - t);
    const double den = u + v;
    return (bump_exp_derivative(t) * v + u * bump_exp_derivative(1.0 - t)) / (den * den);
}

}  // namespace

BumpProfile::BumpProfile(double plateau, double support)
    : plateau_(plateau), support_(support), scale_(1.0), kinetic_(0.0) {
    if (!(plateau > 0.0 && support > plateau && std::isfinite(support)))
        throw ContractError("BumpProfile: need 0 < plateau < support");
    const auto sq = [this](double x) { const double v = raw(x); return v * v; };
    const double transition = quad::adaptive_simpson(sq, plateau_, support_, 64);
    scale_ = 1.0 / std::sqrt(2.0 * (plateau_ + transition));
    const auto dsq = [this](double x) { const double v = raw_derivative(x); return v * v; };
    kinetic_ = 2.0 * scale_ * scale_ * quad::adaptive_simpson(dsq, plateau_, support_, 64);
}

double BumpProfile::raw(double x) const {
    return smooth_step((support_ - std::abs(x)) / (support_ - plateau_));
}

double BumpProfile::raw_derivative(double x) const {
    const double width = support_ - plateau_;
    const double slope = smooth_step_derivative((support_ - std::abs(x)) / width) / width;
    return x > 0.0 ? -slope : slope;
}

double BumpProfile::operator()(double x) const { return scale_ * raw(x); }
double BumpProfile::derivative(double x) const { return scale_ * raw_derivative(x); }

double trial_scale(const BumpProfile& bump, int n, double x) {
    if (n < 1) throw ContractError("trial_scale: n must be >= 1");
    return bump(x / n) / std::sqrt(static_cast<double>(n));
}

double q_form(const WellConfig& cfg, const BumpProfile& bump, int n, int quad_points) {
    validate(cfg);
    if (n < 1) throw ContractError("q_form: n must be >= 1");
    if (quad_points < 64) throw ContractError("q_form: quad_points must be >= 64");

    const auto chi = transversal_mode(cfg.outer(), 1);
    const double wall = chi(0.0) * chi(0.0) + chi(cfg.d) * chi(cfg.d);

    // int_{-a}^{a} phi_n(x)^2 dx = int_{-a/n}^{a/n} phi(t)^2 dt, phi even.
    const double reach = std::min(cfg.a / n, bump.support());
    const double flat = std::min(reach, bump.plateau());
    double mass = flat * bump(0.0) * bump(0.0);
    if (reach > bump.plateau()) {
        const auto sq = [&bump](double t) { const double v = bump(t); return v * v; };
        mass += quad::adaptive_simpson(sq, bump.plateau(), reach, quad_points);
    }
    mass *= 2.0;

    const double kinetic = bump.kinetic() / (static_cast<double>(n) * n);
    return kinetic + wall * (cfg.alpha1 - cfg.alpha0) * mass;
}

QReport existence_test(const WellConfig& cfg, const BumpProfile& bump, int n_max, int quad_points) {
    validate(cfg);
    if (n_max < 1) throw ContractError("existence_test: n_max must be >= 1");
    QReport report;
    report.config = cfg;
    report.well_integral = 2.0 * cfg.a * (cfg.alpha1 - cfg.alpha0);
    report.hypothesis_holds = report.well_integral < 0.0;
    for (int n = 1; n <= n_max; ++n) {
        const double q = q_form(cfg, bump, n, quad_points);
        report.n_values.push_back(n);
        report.q_values.push_back(q);
        if (q < 0.0 && !report.first_negative_n) report.first_negative_n = n;
    }
    report.inconclusive = report.hypothesis_holds && !report.first_negative_n;
    return report;
}

}  // namespace robinwg
