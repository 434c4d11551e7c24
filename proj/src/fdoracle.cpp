#include "robinwg/fdoracle.hpp"

#include "robinwg/errors.hpp"

#include <Eigen/CholmodSupport>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace robinwg::fd {

namespace {

using Triplet = Eigen::Triplet<double>;

void require(bool ok, const char* what) {
    if (!ok) throw ContractError(what);
}

// Length of [lo, hi] inside (-a, a).
double inside_well(double lo, double hi, double a) {
    return std::max(0.0, std::min(hi, a) - std::max(lo, -a));
}

double inf_norm(const Eigen::SparseMatrix<double>& A) {
    Eigen::VectorXd rows = Eigen::VectorXd::Zero(A.rows());
    for (int k = 0; k < A.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
            rows(it.row()) += std::abs(it.value());
    return rows.maxCoeff();
}

// Stiffness triplets K and node masses M -> symmetric M^{-1/2} K M^{-1/2}.
SparseOperator symmetrize(long n, const std::vector<Triplet>& stiffness, Eigen::VectorXd mass) {
    const Eigen::VectorXd inv_sqrt = mass.cwiseSqrt().cwiseInverse();
    std::vector<Triplet> scaled;
    scaled.reserve(stiffness.size());
    for (const auto& t : stiffness)
        scaled.emplace_back(t.row(), t.col(), t.value() * inv_sqrt(t.row()) * inv_sqrt(t.col()));
    SparseOperator op;
    op.matrix.resize(n, n);
    op.matrix.setFromTriplets(scaled.begin(), scaled.end());
    op.matrix.makeCompressed();
    op.mass = std::move(mass);
    return op;
}

// Adds the edge energy c (u_p - u_q)^2 to the stiffness form.
void add_edge(std::vector<Triplet>& K, long p, long q, double c) {
    K.emplace_back(p, p, c);
    K.emplace_back(q, q, c);
    K.emplace_back(p, q, -c);
    K.emplace_back(q, p, -c);
}

}  // namespace

std::string_view to_string(Closure c) {
    return c == Closure::dirichlet ? "dirichlet" : "neumann";
}

Closure parse_closure(std::string_view text) {
    if (text == "dirichlet") return Closure::dirichlet;
    if (text == "neumann") return Closure::neumann;
    throw ContractError("unknown closure: " + std::string(text));
}

FdGrid make_grid(double L, double d, double h, Closure closure) {
    require(L > 0.0 && d > 0.0 && h > 0.0, "make_grid: L, d and h must be positive");
    FdGrid g;
    g.L = L;
    g.closure = closure;
    g.nx = static_cast<int>(std::lround(2.0 * L / h)) - 1;
    g.ny = static_cast<int>(std::lround(d / h)) - 1;
    g.hx = 2.0 * L / (g.nx + 1);
    g.hy = d / (g.ny + 1);
    return g;
}

FdGrid make_aligned_grid(double L, double d, double a, int well_steps, int y_steps, Closure closure) {
    require(L > 0.0 && d > 0.0 && a > 0.0, "make_aligned_grid: L, d and a must be positive");
    require(well_steps >= 1 && y_steps >= 2, "make_aligned_grid: step counts too small");
    FdGrid g;
    g.closure = closure;
    g.hx = a / well_steps;
    const long half = static_cast<long>(std::ceil(L / g.hx - 1e-9));
    g.L = half * g.hx;
    g.nx = static_cast<int>(2 * half - 1);
    g.ny = y_steps - 1;
    g.hy = d / y_steps;
    return g;
}

SparseOperator cross_section_operator(double alpha, double d, int ny) {
    require(ny >= 1, "cross_section_operator: ny must be >= 1");
    const int n = ny + 2;
    const double h = d / (ny + 1);
    std::vector<Triplet> K;
    Eigen::VectorXd mass = Eigen::VectorXd::Ones(n);
    mass(0) = mass(n - 1) = 0.5;
    for (int j = 0; j + 1 < n; ++j) add_edge(K, j, j + 1, 1.0 / (h * h));
    K.emplace_back(0, 0, alpha / h);
    K.emplace_back(n - 1, n - 1, alpha / h);
    return symmetrize(n, K, std::move(mass));
}

SparseOperator assemble(const WellConfig& cfg, const FdGrid& grid) {
    validate(cfg);
    if (grid.nx < 16 || grid.ny < 16) throw ContractError("assemble: grid too coarse (nx, ny >= 16)");

    const int X = grid.x_nodes();
    const int Y = grid.y_nodes();
    const long n = grid.size();
    const bool neumann = grid.closure == Closure::neumann;
    const double hx = grid.hx;
    const double hy = grid.hy;

    const auto wx = [&](int i) { return (neumann && (i == 0 || i == X - 1)) ? 0.5 : 1.0; };
    const auto wy = [&](int j) { return (j == 0 || j == Y - 1) ? 0.5 : 1.0; };

    std::vector<Triplet> K;
    K.reserve(static_cast<std::size_t>(n) * 10);
    Eigen::VectorXd mass(n);

    for (int i = 0; i < X; ++i) {
        const double x = grid.x(i);
        const double lo = std::max(x - 0.5 * hx, -grid.L);
        const double hi = std::min(x + 0.5 * hx, grid.L);
        const double alpha = cfg.alpha0 + (cfg.alpha1 - cfg.alpha0) * inside_well(lo, hi, cfg.a) / (hi - lo);

        for (int j = 0; j < Y; ++j) {
            const long p = grid.index(i, j);
            mass(p) = wx(i) * wy(j);
            if (i + 1 < X) add_edge(K, p, grid.index(i + 1, j), wy(j) / (hx * hx));
            if (j + 1 < Y) add_edge(K, p, grid.index(i, j + 1), wx(i) / (hy * hy));
            if (!neumann && (i == 0 || i == X - 1)) K.emplace_back(p, p, wy(j) / (hx * hx));
            if (j == 0 || j == Y - 1) K.emplace_back(p, p, wx(i) * alpha / hy);
        }
    }
    return symmetrize(n, K, std::move(mass));
}

std::vector<EigenPair> lowest_eigenpairs(const SparseOperator& op, int count, double shift,
                                         double tol, const LanczosOptions& opts) {
    const long n = op.dimension();
    require(count >= 1, "lowest_eigenpairs: count must be >= 1");
    require(count <= n, "lowest_eigenpairs: count exceeds the dimension");
    require(tol > 0.0, "lowest_eigenpairs: tol must be positive");

    const auto& A = op.matrix;
    Eigen::SparseMatrix<double> shifted = A;
    for (long i = 0; i < n; ++i) shifted.coeffRef(i, i) -= shift;

    Eigen::CholmodSupernodalLLT<Eigen::SparseMatrix<double>, Eigen::Lower> llt;
    llt.cholmod().print = 0;  // failures are reported through SolverError
    llt.compute(shifted);
    if (llt.info() != Eigen::Success) {
        std::ostringstream msg;
        msg << "lowest_eigenpairs: factorization of A - " << shift
            << " I failed (shift not below the spectrum?)";
        throw SolverError(msg.str());
    }

    const double a_norm = inf_norm(A);
    const long max_dim = std::min<long>(n, opts.max_krylov > 0 ? opts.max_krylov
                                                                : std::max(80, 8 * count + 40));

    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> normal;
    const auto random_unit = [&](const std::vector<Eigen::VectorXd>& basis) {
        Eigen::VectorXd v(n);
        for (long i = 0; i < n; ++i) v(i) = normal(rng);
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& q : basis) v -= q.dot(v) * q;
        return Eigen::VectorXd(v / v.norm());
    };

    std::vector<Eigen::VectorXd> Q;
    std::vector<double> alpha;
    std::vector<double> beta;  // beta[j] couples q_j and q_{j+1}
    Q.push_back(random_unit(Q));

    std::vector<EigenPair> result;
    double worst = std::numeric_limits<double>::infinity();

    for (long j = 0; j < max_dim; ++j) {
        Eigen::VectorXd w = llt.solve(Q[j]);
        const double a_j = Q[j].dot(w);
        alpha.push_back(a_j);
        // Full reorthogonalization, twice.
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& q : Q) w -= q.dot(w) * q;
        double b_j = w.norm();

        const long m = j + 1;
        const bool exhausted = (m == n);
        const bool check = exhausted || (m >= count && (m % 5 == 0 || b_j < 1e-12 * std::abs(a_j)));
        if (check) {
            Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
            for (long k = 0; k < m; ++k) {
                T(k, k) = alpha[k];
                if (k + 1 < m) T(k, k + 1) = T(k + 1, k) = beta[k];
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(T);
            // Largest theta of the inverse <-> smallest lambda of A.
            const int avail = static_cast<int>(std::min<long>(count, m));
            bool bounds_ok = avail == count;
            for (int r = 0; r < avail && bounds_ok; ++r) {
                const long c = m - 1 - r;
                const double theta = eig.eigenvalues()(c);
                const double bound = std::abs(b_j * eig.eigenvectors()(m - 1, c));
                if (!(theta > 0.0) || bound > 0.1 * tol * theta) bounds_ok = false;
            }
            if (bounds_ok || exhausted) {
                std::vector<EigenPair> pairs;
                worst = 0.0;
                for (int r = 0; r < avail; ++r) {
                    const long c = m - 1 - r;
                    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
                    for (long k = 0; k < m; ++k) v += eig.eigenvectors()(k, c) * Q[k];
                    v.normalize();
                    const double lam = v.dot(A * v);
                    const double res = (A * v - lam * v).norm();
                    worst = std::max(worst, res / a_norm);
                    pairs.push_back({lam, std::move(v), res});
                }
                if (worst <= tol && avail == count) {
                    std::sort(pairs.begin(), pairs.end(),
                              [](const EigenPair& l, const EigenPair& r) { return l.value < r.value; });
                    return pairs;
                }
                if (exhausted) break;
            }
        }

        if (b_j < 1e-13 * std::max(1.0, std::abs(a_j))) {
            // Invariant subspace found; continue in a fresh orthogonal direction.
            beta.push_back(0.0);
            Q.push_back(random_unit(Q));
        } else {
            beta.push_back(b_j);
            Q.push_back(w / b_j);
        }
    }

    std::ostringstream msg;
    msg << "lowest_eigenpairs: no convergence within " << max_dim
        << " Lanczos steps; worst relative residual " << worst << " (tol " << tol << ")";
    throw SolverError(msg.str());
}

std::vector<double> eigenvalues_below(const WellConfig& cfg, const FdGrid& grid, double ceiling,
                                      double tol) {
    const auto op = assemble(cfg, grid);
    const double e_in = transversal_eigenvalues(cfg.inner(), 1)[0];
    const double e_out = transversal_eigenvalues(cfg.outer(), 1)[0];
    const double low = std::min(e_in, e_out);
    double shift = low - std::max(0.25 * std::abs(e_out - e_in), 0.05 * low) - 1e-3 / (cfg.d * cfg.d);

    int count = 4;
    for (;;) {
        count = static_cast<int>(std::min<long>(count, op.dimension()));
        std::vector<EigenPair> pairs;
        try {
            pairs = lowest_eigenpairs(op, count, shift, tol);
        } catch (const SolverError&) {
            // Shift above the discrete ground state; move it down once.
            if (shift <= low - 1.0) throw;
            shift = low - 1.0 / (cfg.d * cfg.d);
            continue;
        }
        std::vector<double> out;
        for (const auto& p : pairs) out.push_back(p.value);
        if (out.back() >= ceiling || count == op.dimension()) {
            auto first_above = std::upper_bound(out.begin(), out.end(), ceiling);
            if (first_above != out.end()) out.erase(first_above + 1, out.end());
            return out;
        }
        count *= 2;
    }
}

OracleResult oracle_bound_states(const WellConfig& cfg, double L, int refinements,
                                 const OracleOptions& opts) {
    validate(cfg);
    require(refinements >= 2, "oracle_bound_states: refinements must be >= 2");
    require(L >= 4.0 * std::max(cfg.a, cfg.d), "oracle_bound_states: L must be >= 4 max(a, d)");

    OracleResult res;
    res.threshold = threshold(cfg);
    const double e_in = transversal_eigenvalues(cfg.inner(), 1)[0];
    if (!(res.threshold > e_in)) return res;

    // Jump of alpha on an x-node at every level; both spacings halve exactly.
    const double h_coarse = opts.h_finest * cfg.d * std::pow(2.0, refinements - 1);
    const int well_steps = std::max(1, static_cast<int>(std::lround(cfg.a / h_coarse)));
    const int y_steps = std::max(2, static_cast<int>(std::lround(cfg.d / h_coarse)));
    for (int r = 0; r < refinements; ++r) {
        const int scale = 1 << r;
        const auto grid = make_aligned_grid(L, cfg.d, cfg.a, well_steps * scale, y_steps * scale, opts.closure);
        res.levels.push_back({grid.hy, eigenvalues_below(cfg, grid, res.threshold, opts.tol)});
    }

    const auto& fine = res.levels.back().eigenvalues;
    const auto& prev = res.levels[res.levels.size() - 2].eigenvalues;
    const std::size_t tracked = std::min(fine.size(), prev.size());
    for (std::size_t i = 0; i < tracked; ++i) {
        const double ext = (4.0 * fine[i] - prev[i]) / 3.0;
        double err = std::abs(fine[i] - prev[i]) / 3.0;
        if (res.levels.size() >= 3 && i < res.levels[res.levels.size() - 3].eigenvalues.size()) {
            const double coarse = res.levels[res.levels.size() - 3].eigenvalues[i];
            err = std::abs(ext - (4.0 * prev[i] - coarse) / 3.0);
        }
        if (!(ext < res.threshold)) continue;
        const double k1 = std::sqrt(res.threshold - ext);
        const double margin = 3.0 * (err + std::exp(-k1 * L));
        if (ext < res.threshold - margin) {
            res.values.push_back(ext);
            res.error_estimates.push_back(err);
        }
    }
    return res;
}

}  // namespace robinwg::fd
