#pragma once

#include "robinwg/modematch.hpp"

#include <Eigen/Sparse>

#include <vector>

namespace robinwg::fd {

enum class Closure { dirichlet, neumann };

std::string_view to_string(Closure c);
Closure parse_closure(std::string_view text);

/// Uniform grid on [-L, L] x [0, d].
///
/// x: nx interior nodes, hx = 2L / (nx + 1); a Neumann closure adds the two
///    end nodes x = +-L as unknowns.
/// y: ny interior nodes, hy = d / (ny + 1); both wall nodes are unknowns
///    carrying the Robin rows.
struct FdGrid {
    double L = 0.0;
    int nx = 0;
    int ny = 0;
    double hx = 0.0;
    double hy = 0.0;
    Closure closure = Closure::dirichlet;

    int x_nodes() const { return closure == Closure::dirichlet ? nx : nx + 2; }
    int y_nodes() const { return ny + 2; }
    long size() const { return static_cast<long>(x_nodes()) * y_nodes(); }
    double x(int i) const { return -L + (closure == Closure::dirichlet ? i + 1 : i) * hx; }
    double y(int j) const { return j * hy; }
    long index(int i, int j) const { return static_cast<long>(i) * y_nodes() + j; }
};

/// Grid with spacing as close as possible to h in both directions.
FdGrid make_grid(double L, double d, double h, Closure closure);

/// Grid whose x-nodes include x = +-a (hx = a / well_steps) and whose
/// half-length is L rounded up to a whole number of steps; hy = d / y_steps.
FdGrid make_aligned_grid(double L, double d, double a, int well_steps, int y_steps, Closure closure);

/// Symmetric 5-point operator. The ghost-point Robin rows and Neumann
/// closure rows are symmetrized by the half-weight diagonal mass, so the
/// stored matrix is M^{-1/2} K M^{-1/2}; eigenvalues are those of the
/// ghost-point scheme, eigenvectors are M^{1/2} u.
struct SparseOperator {
    Eigen::SparseMatrix<double> matrix;
    Eigen::VectorXd mass;  ///< diagonal of M (trapezoid node weights / h)

    long dimension() const { return matrix.rows(); }
};

/// -Laplacian with alpha(x) cell-averaged over [x_i - hx/2, x_i + hx/2].
SparseOperator assemble(const WellConfig& cfg, const FdGrid& grid);

/// The 1D ghost-point Robin operator on (0, d) with ny interior nodes.
SparseOperator cross_section_operator(double alpha, double d, int ny);

struct EigenPair {
    double value;
    Eigen::VectorXd vector;
    double residual;  ///< ||A v - value v|| for unit v
};

struct LanczosOptions {
    int max_krylov = 0;       ///< 0 selects an automatic budget
    unsigned seed = 20240611u;
};

/// The `count` smallest eigenpairs of a symmetric operator by shift-invert
/// Lanczos with full reorthogonalization. `shift` must lie below the
/// spectrum (A - shift I is Cholesky-factored). Pairs are sorted ascending
/// and satisfy ||A v - lambda v|| <= tol ||A||_inf.
std::vector<EigenPair> lowest_eigenpairs(const SparseOperator& op, int count, double shift,
                                         double tol, const LanczosOptions& opts = {});

struct OracleOptions {
    double h_finest = 1.0 / 128.0;  ///< in units of d
    Closure closure = Closure::dirichlet;
    double tol = 1e-9;
};

struct OracleLevel {
    double h;
    std::vector<double> eigenvalues;  ///< ascending, at least one above E_1(alpha0)
};

struct OracleResult {
    std::vector<double> values;            ///< extrapolated bound-state energies
    std::vector<double> error_estimates;   ///< per value
    std::vector<OracleLevel> levels;       ///< coarse to fine
    double threshold = 0.0;                ///< E_1(alpha0)
};

/// Richardson-extrapolated (order 2) eigenvalues below the essential
/// spectrum on grids h_finest * 2^(refinements-1), ..., h_finest.
OracleResult oracle_bound_states(const WellConfig& cfg, double L, int refinements,
                                 const OracleOptions& opts = {});

/// Eigenvalues of one grid strictly below `ceiling`, plus the first one above.
std::vector<double> eigenvalues_below(const WellConfig& cfg, const FdGrid& grid, double ceiling,
                                      double tol = 1e-9);

}  // namespace robinwg::fd
