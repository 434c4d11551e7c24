#pragma once

#include "robinwg/transverse.hpp"

#include <Eigen/Dense>

#include <limits>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

namespace robinwg {

/// Rectangular well: alpha(x) = alpha1 for |x| < a, alpha0 otherwise, on a
/// strip of width d. A bound-state window exists only for alpha1 < alpha0;
/// alpha1 >= alpha0 is accepted and simply yields an empty spectrum.
struct WellConfig {
    double alpha0;
    double alpha1;
    double a;
    double d;

    RobinCrossSection outer() const { return {alpha0, d}; }
    RobinCrossSection inner() const { return {alpha1, d}; }
};

void validate(const WellConfig& cfg);

/// E_1(alpha0), the bottom of the essential spectrum.
double threshold(const WellConfig& cfg);

/// Reflection parity in x. Symmetric states satisfy a Neumann condition on
/// x = 0, antisymmetric ones a Dirichlet condition.
enum class Parity { symmetric, antisymmetric };

std::string_view to_string(Parity p);
Parity parse_parity(std::string_view text);

/// Logarithmic x-derivative at x = a of the inner longitudinal factor:
/// l tanh(l a) / l coth(l a) below E_inner, continued to -kappa tan(kappa a) /
/// kappa cot(kappa a) above it. Throws PoleError within 1e-12 (relative) of a pole.
double axial_stiffness(double lambda, double e_inner, double a, Parity parity);

/// Longitudinal factor X(x) on 0 <= x <= a, normalized to X(a) = 1, whose
/// logarithmic derivative at a is axial_stiffness.
double axial_profile(double x, double lambda, double e_inner, double a, Parity parity);
double axial_profile_derivative(double x, double lambda, double e_inner, double a, Parity parity);

/// Transversal modes on both sides of x = a plus their overlap matrix,
/// O(m, n) = <chi_n(alpha1), chi_m(alpha0)>. Built once per (config, N) and
/// read-only afterwards.
class ModeTable {
public:
    ModeTable(const WellConfig& cfg, int n_modes);

    const WellConfig& config() const { return cfg_; }
    int size() const { return static_cast<int>(inner_.size()); }
    const std::vector<TransversalMode>& inner_modes() const { return inner_; }
    const std::vector<TransversalMode>& outer_modes() const { return outer_; }
    const Eigen::MatrixXd& overlaps() const { return overlaps_; }
    std::vector<double> inner_energies() const;
    std::vector<double> outer_energies() const;

    /// Axial-stiffness poles of the given sector inside (lo, hi), ascending.
    std::vector<double> poles(Parity parity, double lo, double hi) const;

private:
    WellConfig cfg_;
    std::vector<TransversalMode> inner_;
    std::vector<TransversalMode> outer_;
    Eigen::MatrixXd overlaps_;
};

/// Truncated matching matrix at one trial energy. Row m is scaled by
/// 1 / (1 + k_m); `raw` keeps the unscaled C_mn = (L_n + k_m) O_mn.
struct MatchingSystem {
    WellConfig config;
    Parity parity;
    int N;
    double lambda;
    Eigen::MatrixXd C;
    Eigen::MatrixXd raw;
    std::shared_ptr<const ModeTable> table;
    Eigen::VectorXd axial;  ///< L_n(lambda)
    Eigen::VectorXd decay;  ///< k_m = sqrt(E_m(alpha0) - lambda)

    const Eigen::MatrixXd& overlaps() const { return table->overlaps(); }
    std::vector<double> inner_energies() const { return table->inner_energies(); }
    std::vector<double> outer_energies() const { return table->outer_energies(); }
};

MatchingSystem matching_matrix(const WellConfig& cfg, Parity parity, double lambda, int N);
MatchingSystem matching_matrix(std::shared_ptr<const ModeTable> table, Parity parity, double lambda);

/// Singular-value summary of C. C is block diagonal after splitting indices
/// by transversal parity (n odd / n even), so each block is treated separately.
struct SingularSummary {
    double sigma_min;      ///< min over both blocks
    double sigma_odd;      ///< smallest singular value of the n = 1, 3, 5, ... block
    double sigma_even;     ///< smallest singular value of the n = 2, 4, ... block
    double norm;           ///< spectral norm of C
};

SingularSummary singular_summary(const Eigen::MatrixXd& C);

struct MatchingResidual {
    double c0;  ///< L2(0, d) norm of the jump of psi across x = a
    double c1;  ///< same for d psi / dx
};

struct BoundState {
    double lambda = 0.0;
    Parity parity = Parity::symmetric;
    Eigen::VectorXd a_coeffs;
    Eigen::VectorXd b_coeffs;
    double sigma_min = 0.0;
    double c_norm = 0.0;  ///< spectral norm of C at lambda
    MatchingResidual residual{0.0, 0.0};
    /// |lambda(N) - lambda(N/2)|; infinity when the N/2 system has no partner.
    double truncation_error = std::numeric_limits<double>::infinity();
    int N = 0;
};

struct ScanOptions {
    int scan_points = 400;
    double tol = 1e-12;
    bool estimate_truncation = true;
    int residual_quad_points = 0;  ///< 0 selects max(128, 8 N)
};

/// All accepted roots of the truncated system in (E_1(alpha1), E_1(alpha0)),
/// sorted by energy.
std::vector<BoundState> bound_state_energies(const WellConfig& cfg, Parity parity, int N,
                                             const ScanOptions& opts = {});

/// Both sectors merged and sorted by energy.
std::vector<BoundState> bound_spectrum(const WellConfig& cfg, int N, const ScanOptions& opts = {});

/// Right singular vector of the smallest singular value, ||a|| = 1, largest
/// entry positive. Throws NotAtRootError unless sigma_min < 1e-6 ||C||.
Eigen::VectorXd null_vector(const MatchingSystem& system);

/// Outer coefficients b_m = sum_n a_n O(m, n).
Eigen::VectorXd b_coefficients(const Eigen::VectorXd& a_coeffs, const Eigen::MatrixXd& overlaps);

MatchingResidual matching_residual(const WellConfig& cfg, const BoundState& state, int n_quad);

/// Sampled psi(x_i, y_j), L2-normalized by trapezoid quadrature on the grid.
struct WavefunctionGrid {
    std::vector<double> x;
    std::vector<double> y;
    Eigen::MatrixXd values;  ///< values(i, j) = psi(x[i], y[j])
    BoundState state;
    WellConfig config;
};

/// Unnormalized Ansatz value at a single point, using the state's coefficients.
double wavefunction_value(const ModeTable& table, const BoundState& state, double x, double y);

WavefunctionGrid wavefunction(const WellConfig& cfg, const BoundState& state,
                              std::span<const double> x_grid, std::span<const double> y_grid);

/// Integral of x^2 psi^2 over the grid (trapezoid).
double x_second_moment(const WavefunctionGrid& grid);

struct Bracket {
    double lower;
    double upper;
    bool empty() const { return !(lower < upper); }
    bool contains(double e) const { return e >= lower && e <= upper; }
};

/// Neumann/Dirichlet bracketing of the n-th eigenvalue,
/// E_1(alpha1) + ((n-1) pi / 2a)^2 <= E_n <= E_1(alpha1) + (n pi / 2a)^2,
/// upper end clipped at E_1(alpha0).
Bracket minimax_brackets(const WellConfig& cfg, int n);

}  // namespace robinwg
