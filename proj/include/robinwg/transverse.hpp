#pragma once

#include <vector>

namespace robinwg {

/// Cross-section (0, d) of the strip with the same Robin coupling alpha on
/// both walls: -chi'(0) + alpha chi(0) = 0 and chi'(d) + alpha chi(d) = 0.
struct RobinCrossSection {
    double alpha;
    double d;
};

/// Throws ContractError unless alpha > 0 and d > 0 (both finite).
void validate(const RobinCrossSection& cs);

/// One transversal eigenpair
///     chi_n(y) = N (alpha/k sin(k y) + cos(k y)),  E_n = k^2,
/// normalized in L^2(0, d) with N > 0, so chi_n(0) = N > 0.
class TransversalMode {
public:
    TransversalMode(int n, double k, RobinCrossSection cs);

    int index() const { return n_; }
    double energy() const { return k_ * k_; }
    double wavenumber() const { return k_; }
    double norm_const() const { return norm_; }
    const RobinCrossSection& cross_section() const { return cs_; }

    double operator()(double y) const;
    double derivative(double y) const;

    /// Amplitude/phase form chi(y) = amplitude * sin(k y + phase).
    double amplitude() const { return amplitude_; }
    double phase() const { return phase_; }

    /// Unnormalized square integral of alpha/k sin(ky) + cos(ky) over (0, d),
    /// from its elementary antiderivative.
    static double raw_square_integral(double k, const RobinCrossSection& cs);

private:
    int n_;
    double k_;
    RobinCrossSection cs_;
    double norm_;
    double amplitude_;
    double phase_;
};

/// f(E; alpha) = 2 alpha sqrt(E) cos(sqrt(E) d) + (alpha^2 - E) sin(sqrt(E) d).
double dispersion(double energy, const RobinCrossSection& cs);

/// E_1 < ... < E_{n_max}; the n-th root is bisected in k = sqrt(E) on
/// ((n-1) pi/d, n pi/d).
std::vector<double> transversal_eigenvalues(const RobinCrossSection& cs, int n_max);

/// Wavenumber k_n = sqrt(E_n) of a single channel.
double transversal_wavenumber(const RobinCrossSection& cs, int n);

TransversalMode transversal_mode(const RobinCrossSection& cs, int n);

/// The first n_max modes, in order.
std::vector<TransversalMode> transversal_modes(const RobinCrossSection& cs, int n_max);

/// chi_n(y); y outside [0, d] is a contract violation.
double mode_eval(const TransversalMode& mode, double y);

/// Integral of chi_a chi_b over (0, d). Modes may belong to different alpha
/// but must share the strip width.
double overlap(const TransversalMode& a, const TransversalMode& b);

}  // namespace robinwg
