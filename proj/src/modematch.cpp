#include "robinwg/modematch.hpp"

#include "robinwg/errors.hpp"
#include "robinwg/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace robinwg {

namespace {

constexpr double kPi = std::numbers::pi;

// Relative exclusion around each axial-stiffness pole during the scan.
constexpr double kPoleMargin = 1e-9;
// Root acceptance: sigma_min(C) < kAcceptRatio * ||C||.
constexpr double kAcceptRatio = 1e-8;
constexpr double kNullVectorRatio = 1e-6;

void require(bool ok, const char* what) {
    if (!ok) throw ContractError(what);
}

// Indices 0, 2, 4, ... carry the transversal modes n = 1, 3, 5, ... (even
// about y = d/2); odd indices carry the modes odd about y = d/2.
std::vector<int> parity_class(int size, int first) {
    std::vector<int> idx;
    for (int i = first; i < size; i += 2) idx.push_back(i);
    return idx;
}

Eigen::MatrixXd sub_block(const Eigen::MatrixXd& C, const std::vector<int>& idx) {
    const auto m = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd B(m, m);
    for (Eigen::Index r = 0; r < m; ++r)
        for (Eigen::Index c = 0; c < m; ++c) B(r, c) = C(idx[r], idx[c]);
    return B;
}

struct BlockSvd {
    double sigma_min = std::numeric_limits<double>::infinity();
    double sigma_max = 0.0;
};

BlockSvd block_svd(const Eigen::MatrixXd& B) {
    BlockSvd out;
    if (B.size() == 0) return out;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(B);
    const auto& s = svd.singularValues();
    out.sigma_max = s(0);
    out.sigma_min = s(s.size() - 1);
    return out;
}

double block_sigma(const Eigen::MatrixXd& C, const std::vector<int>& idx) {
    return block_svd(sub_block(C, idx)).sigma_min;
}

// Root discriminant: C with column n additionally scaled by 1 / (1 + |L_n|).
// Singularity is unchanged, but a column blowing up at an axial-stiffness
// pole no longer inflates the norm and fakes a small sigma_min / ||C||.
Eigen::MatrixXd discriminant(const MatchingSystem& sys) {
    Eigen::MatrixXd D = sys.C;
    for (Eigen::Index n = 0; n < D.cols(); ++n) D.col(n) /= 1.0 + std::abs(sys.axial(n));
    return D;
}

// Minimizes f on [lo, hi] by golden-section search until the bracket is
// narrower than tol * max(1, |x|).
template <typename F>
double golden_section(F&& f, double lo, double hi, double tol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int iter = 0; iter < 300; ++iter) {
        if (hi - lo <= tol * std::max(1.0, std::abs(0.5 * (lo + hi)))) break;
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    return (f1 <= f2) ? x1 : x2;
}

MatchingResidual residual_with_table(const ModeTable& table, const BoundState& state, int n_quad) {
    const auto& inner = table.inner_modes();
    const auto& outer = table.outer_modes();
    const int N = table.size();
    const double lambda = state.lambda;
    const double a = table.config().a;

    Eigen::VectorXd axial(N);
    Eigen::VectorXd decay(N);
    for (int n = 0; n < N; ++n) {
        axial(n) = axial_stiffness(lambda, inner[n].energy(), a, state.parity);
        decay(n) = std::sqrt(outer[n].energy() - lambda);
    }

    const auto jump = [&](double y) {
        double v_in = 0.0, v_out = 0.0, dv_in = 0.0, dv_out = 0.0;
        for (int n = 0; n < N; ++n) {
            const double ci = inner[n](y);
            const double co = outer[n](y);
            v_in += state.a_coeffs(n) * ci;
            dv_in += state.a_coeffs(n) * axial(n) * ci;
            v_out += state.b_coeffs(n) * co;
            dv_out -= state.b_coeffs(n) * decay(n) * co;
        }
        return std::pair{v_in - v_out, dv_in - dv_out};
    };

    const auto& rule = quad::gauss_legendre(n_quad);
    const double d = table.config().d;
    double s0 = 0.0;
    double s1 = 0.0;
    for (int q = 0; q < n_quad; ++q) {
        const double y = 0.5 * d * (rule.nodes[q] + 1.0);
        const auto [j0, j1] = jump(y);
        s0 += rule.weights[q] * j0 * j0;
        s1 += rule.weights[q] * j1 * j1;
    }
    return {std::sqrt(0.5 * d * s0), std::sqrt(0.5 * d * s1)};
}

std::vector<BoundState> scan_sector(const WellConfig& cfg, Parity parity, int N,
                                    const ScanOptions& opts) {
    const double lo = transversal_eigenvalues(cfg.inner(), 1)[0];
    const double hi = transversal_eigenvalues(cfg.outer(), 1)[0];
    if (!(hi > lo)) return {};

    const auto table = std::make_shared<const ModeTable>(cfg, N);
    const double eps = 1e-10 * std::max(1.0, hi);
    if (hi - lo <= 2.0 * eps) return {};

    std::vector<std::pair<double, double>> pieces;
    {
        double start = lo + eps;
        for (double p : table->poles(parity, lo, hi)) {
            const double stop = p * (1.0 - kPoleMargin);
            if (stop > start) pieces.emplace_back(start, stop);
            start = std::max(start, p * (1.0 + kPoleMargin));
        }
        if (hi - eps > start) pieces.emplace_back(start, hi - eps);
    }

    const int points = std::max(opts.scan_points, 3);
    const std::array<std::vector<int>, 2> classes{parity_class(N, 0), parity_class(N, 1)};

    std::vector<double> roots;
    for (const auto& [s0, s1] : pieces) {
        std::vector<double> grid(points);
        for (int i = 0; i < points; ++i) grid[i] = s0 + (s1 - s0) * i / (points - 1);
        grid.back() = s1;

        std::array<std::vector<double>, 2> sig;
        for (auto& v : sig) v.resize(points);
        for (int i = 0; i < points; ++i) {
            const auto D = discriminant(matching_matrix(table, parity, grid[i]));
            for (int b = 0; b < 2; ++b) sig[b][i] = block_sigma(D, classes[b]);
        }

        for (int b = 0; b < 2; ++b) {
            if (classes[b].empty()) continue;
            const auto& v = sig[b];
            for (int i = 0; i < points; ++i) {
                const bool left = (i == 0) || v[i] < v[i - 1];
                const bool right = (i == points - 1) || v[i] <= v[i + 1];
                if (!(left && right)) continue;
                const double l = grid[std::max(i - 1, 0)];
                const double r = grid[std::min(i + 1, points - 1)];
                const auto objective = [&](double lam) {
                    return block_sigma(discriminant(matching_matrix(table, parity, lam)), classes[b]);
                };
                const double lam = golden_section(objective, l, r, opts.tol);
                const auto D = discriminant(matching_matrix(table, parity, lam));
                const auto summary = singular_summary(D);
                const double sb = block_sigma(D, classes[b]);
                if (sb < kAcceptRatio * summary.norm) roots.push_back(lam);
            }
        }
    }

    std::sort(roots.begin(), roots.end());
    std::vector<BoundState> states;
    const double merge_tol = std::max(1e3 * opts.tol, 1e-10) * std::max(1.0, hi);
    for (double lam : roots) {
        if (!states.empty() && std::abs(lam - states.back().lambda) <= merge_tol) continue;
        const auto sys = matching_matrix(table, parity, lam);
        const auto summary = singular_summary(sys.C);
        BoundState st;
        st.lambda = lam;
        st.parity = parity;
        st.N = N;
        st.sigma_min = summary.sigma_min;
        st.c_norm = summary.norm;
        st.a_coeffs = null_vector(sys);
        st.b_coeffs = b_coefficients(st.a_coeffs, table->overlaps());
        const int nq = opts.residual_quad_points > 0 ? opts.residual_quad_points
                                                     : std::max(128, 8 * N);
        st.residual = residual_with_table(*table, st, nq);
        states.push_back(std::move(st));
    }
    return states;
}

}  // namespace

void validate(const WellConfig& cfg) {
    const auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    require(positive(cfg.alpha0), "WellConfig: alpha0 must be positive and finite");
    require(positive(cfg.alpha1), "WellConfig: alpha1 must be positive and finite");
    require(positive(cfg.a), "WellConfig: a must be positive and finite");
    require(positive(cfg.d), "WellConfig: d must be positive and finite");
}

double threshold(const WellConfig& cfg) {
    return transversal_eigenvalues(cfg.outer(), 1)[0];
}

std::string_view to_string(Parity p) {
    return p == Parity::symmetric ? "symmetric" : "antisymmetric";
}

Parity parse_parity(std::string_view text) {
    if (text == "symmetric" || text == "s") return Parity::symmetric;
    if (text == "antisymmetric" || text == "a") return Parity::antisymmetric;
    throw ContractError("unknown parity: " + std::string(text));
}

double axial_stiffness(double lambda, double e_inner, double a, Parity parity) {
    require(a > 0.0, "axial_stiffness: a must be positive");
    const double gap = e_inner - lambda;
    if (gap > 0.0) {
        const double l = std::sqrt(gap);
        return parity == Parity::symmetric ? l * std::tanh(l * a) : l / std::tanh(l * a);
    }
    if (gap == 0.0) return parity == Parity::symmetric ? 0.0 : 1.0 / a;

    const double kappa = std::sqrt(-gap);
    const double theta = kappa * a;
    double pole = 0.0;
    if (parity == Parity::symmetric) {
        pole = (std::round(theta / kPi - 0.5) + 0.5) * kPi;
    } else {
        pole = std::round(theta / kPi) * kPi;
    }
    if (pole > 0.0 && std::abs(theta - pole) <= 1e-12 * pole) {
        std::ostringstream msg;
        msg << "axial_stiffness: lambda=" << lambda << " is at a pole (kappa a=" << theta << ")";
        throw PoleError(msg.str());
    }
    return parity == Parity::symmetric ? -kappa * std::tan(theta) : kappa / std::tan(theta);
}

double axial_profile(double x, double lambda, double e_inner, double a, Parity parity) {
    const double gap = e_inner - lambda;
    if (gap > 0.0) {
        const double l = std::sqrt(gap);
        const double lead = std::exp(l * (x - a));
        if (parity == Parity::symmetric)
            return lead * (1.0 + std::exp(-2.0 * l * x)) / (1.0 + std::exp(-2.0 * l * a));
        return lead * std::expm1(-2.0 * l * x) / std::expm1(-2.0 * l * a);
    }
    if (gap == 0.0) return parity == Parity::symmetric ? 1.0 : x / a;
    const double kappa = std::sqrt(-gap);
    return parity == Parity::symmetric ? std::cos(kappa * x) / std::cos(kappa * a)
                                       : std::sin(kappa * x) / std::sin(kappa * a);
}

double axial_profile_derivative(double x, double lambda, double e_inner, double a, Parity parity) {
    const double gap = e_inner - lambda;
    if (gap > 0.0) {
        const double l = std::sqrt(gap);
        const double lead = l * std::exp(l * (x - a));
        if (parity == Parity::symmetric)
            return lead * -std::expm1(-2.0 * l * x) / (1.0 + std::exp(-2.0 * l * a));
        return lead * (1.0 + std::exp(-2.0 * l * x)) / -std::expm1(-2.0 * l * a);
    }
    if (gap == 0.0) return parity == Parity::symmetric ? 0.0 : 1.0 / a;
    const double kappa = std::sqrt(-gap);
    return parity == Parity::symmetric ? -kappa * std::sin(kappa * x) / std::cos(kappa * a)
                                       : kappa * std::cos(kappa * x) / std::sin(kappa * a);
}

ModeTable::ModeTable(const WellConfig& cfg, int n_modes) : cfg_(cfg) {
    validate(cfg);
    require(n_modes >= 1, "ModeTable: need at least one mode");
    inner_ = transversal_modes(cfg.inner(), n_modes);
    outer_ = transversal_modes(cfg.outer(), n_modes);
    overlaps_ = Eigen::MatrixXd::Zero(n_modes, n_modes);
    for (int m = 0; m < n_modes; ++m)
        for (int n = 0; n < n_modes; ++n)
            if ((m + n) % 2 == 0) overlaps_(m, n) = overlap(inner_[n], outer_[m]);
}

std::vector<double> ModeTable::inner_energies() const {
    std::vector<double> e;
    for (const auto& m : inner_) e.push_back(m.energy());
    return e;
}

std::vector<double> ModeTable::outer_energies() const {
    std::vector<double> e;
    for (const auto& m : outer_) e.push_back(m.energy());
    return e;
}

std::vector<double> ModeTable::poles(Parity parity, double lo, double hi) const {
    std::vector<double> out;
    const double a = cfg_.a;
    for (const auto& mode : inner_) {
        const double e = mode.energy();
        if (e >= hi) break;
        for (int j = (parity == Parity::symmetric ? 0 : 1);; ++j) {
            const double theta = (parity == Parity::symmetric ? j + 0.5 : j) * kPi;
            const double p = e + (theta / a) * (theta / a);
            if (p >= hi) break;
            if (p > lo) out.push_back(p);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

MatchingSystem matching_matrix(std::shared_ptr<const ModeTable> table, Parity parity, double lambda) {
    const int N = table->size();
    const auto& inner = table->inner_modes();
    const auto& outer = table->outer_modes();
    if (!(lambda < outer.front().energy()))
        throw ContractError("matching_matrix: lambda must lie below E_1(alpha0)");

    MatchingSystem sys;
    sys.config = table->config();
    sys.parity = parity;
    sys.N = N;
    sys.lambda = lambda;
    sys.axial.resize(N);
    sys.decay.resize(N);
    for (int n = 0; n < N; ++n) {
        sys.axial(n) = axial_stiffness(lambda, inner[n].energy(), sys.config.a, parity);
        sys.decay(n) = std::sqrt(outer[n].energy() - lambda);
    }
    const auto& O = table->overlaps();
    sys.raw.resize(N, N);
    sys.C.resize(N, N);
    for (int m = 0; m < N; ++m) {
        const double row_scale = 1.0 / (1.0 + sys.decay(m));
        for (int n = 0; n < N; ++n) {
            sys.raw(m, n) = (sys.axial(n) + sys.decay(m)) * O(m, n);
            sys.C(m, n) = sys.raw(m, n) * row_scale;
        }
    }
    sys.table = std::move(table);
    return sys;
}

MatchingSystem matching_matrix(const WellConfig& cfg, Parity parity, double lambda, int N) {
    require(N >= 2, "matching_matrix: N must be >= 2");
    return matching_matrix(std::make_shared<const ModeTable>(cfg, N), parity, lambda);
}

SingularSummary singular_summary(const Eigen::MatrixXd& C) {
    const auto n = static_cast<int>(C.rows());
    const auto odd = block_svd(sub_block(C, parity_class(n, 0)));
    const auto even = block_svd(sub_block(C, parity_class(n, 1)));
    return {std::min(odd.sigma_min, even.sigma_min), odd.sigma_min, even.sigma_min,
            std::max(odd.sigma_max, even.sigma_max)};
}

std::vector<BoundState> bound_state_energies(const WellConfig& cfg, Parity parity, int N,
                                             const ScanOptions& opts) {
    validate(cfg);
    require(N >= 2, "bound_state_energies: N must be >= 2");
    require(opts.tol > 0.0, "bound_state_energies: tol must be positive");

    auto states = scan_sector(cfg, parity, N, opts);
    if (opts.estimate_truncation && N / 2 >= 2 && !states.empty()) {
        ScanOptions coarse = opts;
        coarse.estimate_truncation = false;
        const auto half = scan_sector(cfg, parity, N / 2, coarse);
        for (auto& st : states) {
            for (const auto& h : half)
                st.truncation_error = std::min(st.truncation_error, std::abs(st.lambda - h.lambda));
        }
    }
    return states;
}

std::vector<BoundState> bound_spectrum(const WellConfig& cfg, int N, const ScanOptions& opts) {
    auto out = bound_state_energies(cfg, Parity::symmetric, N, opts);
    auto anti = bound_state_energies(cfg, Parity::antisymmetric, N, opts);
    out.insert(out.end(), std::make_move_iterator(anti.begin()), std::make_move_iterator(anti.end()));
    std::sort(out.begin(), out.end(),
              [](const BoundState& l, const BoundState& r) { return l.lambda < r.lambda; });
    return out;
}

Eigen::VectorXd null_vector(const MatchingSystem& system) {
    const auto& C = system.C;
    const auto n = static_cast<int>(C.rows());
    const auto summary = singular_summary(C);
    if (!(summary.sigma_min < kNullVectorRatio * summary.norm)) {
        std::ostringstream msg;
        msg << "null_vector: sigma_min/||C|| = " << summary.sigma_min / summary.norm
            << " at lambda=" << system.lambda;
        throw NotAtRootError(msg.str());
    }
    const auto idx = parity_class(n, summary.sigma_odd <= summary.sigma_even ? 0 : 1);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sub_block(C, idx), Eigen::ComputeFullV);
    const Eigen::VectorXd v = svd.matrixV().col(static_cast<Eigen::Index>(idx.size()) - 1);

    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < idx.size(); ++i) out(idx[i]) = v(static_cast<Eigen::Index>(i));
    Eigen::Index big = 0;
    out.cwiseAbs().maxCoeff(&big);
    if (out(big) < 0.0) out = -out;
    return out / out.norm();
}

Eigen::VectorXd b_coefficients(const Eigen::VectorXd& a_coeffs, const Eigen::MatrixXd& overlaps) {
    if (overlaps.cols() != a_coeffs.size())
        throw ContractError("b_coefficients: dimension mismatch");
    return overlaps * a_coeffs;
}

MatchingResidual matching_residual(const WellConfig& cfg, const BoundState& state, int n_quad) {
    require(n_quad >= 1, "matching_residual: n_quad must be >= 1");
    const ModeTable table(cfg, state.N);
    return residual_with_table(table, state, n_quad);
}

double wavefunction_value(const ModeTable& table, const BoundState& state, double x, double y) {
    const double a = table.config().a;
    const double sign = (x < 0.0 && state.parity == Parity::antisymmetric) ? -1.0 : 1.0;
    const double ax = std::abs(x);
    double v = 0.0;
    const int N = table.size();
    if (ax < a) {
        for (int n = 0; n < N; ++n) {
            const auto& mode = table.inner_modes()[n];
            v += state.a_coeffs(n) * axial_profile(ax, state.lambda, mode.energy(), a, state.parity) * mode(y);
        }
    } else {
        for (int m = 0; m < N; ++m) {
            const auto& mode = table.outer_modes()[m];
            v += state.b_coeffs(m) * std::exp(-std::sqrt(mode.energy() - state.lambda) * (ax - a)) * mode(y);
        }
    }
    return sign * v;
}

WavefunctionGrid wavefunction(const WellConfig& cfg, const BoundState& state,
                              std::span<const double> x_grid, std::span<const double> y_grid) {
    require(state.N >= 1 && state.a_coeffs.size() == state.N && state.b_coeffs.size() == state.N,
            "wavefunction: state coefficients do not match its truncation order");
    const auto monotone = [](std::span<const double> g) {
        return std::adjacent_find(g.begin(), g.end(), std::greater_equal<>()) == g.end();
    };
    require(monotone(x_grid) && monotone(y_grid), "wavefunction: grids must be strictly increasing");
    require(!y_grid.empty() && y_grid.front() >= 0.0 && y_grid.back() <= cfg.d,
            "wavefunction: y grid must lie in [0, d]");

    const ModeTable table(cfg, state.N);
    const int N = state.N;
    const auto nx = static_cast<Eigen::Index>(x_grid.size());
    const auto ny = static_cast<Eigen::Index>(y_grid.size());

    Eigen::MatrixXd chi_in(N, ny);
    Eigen::MatrixXd chi_out(N, ny);
    for (int n = 0; n < N; ++n)
        for (Eigen::Index j = 0; j < ny; ++j) {
            chi_in(n, j) = table.inner_modes()[n](y_grid[j]);
            chi_out(n, j) = table.outer_modes()[n](y_grid[j]);
        }

    WavefunctionGrid out;
    out.x.assign(x_grid.begin(), x_grid.end());
    out.y.assign(y_grid.begin(), y_grid.end());
    out.state = state;
    out.config = cfg;
    out.values.resize(nx, ny);

    Eigen::RowVectorXd weights(N);
    for (Eigen::Index i = 0; i < nx; ++i) {
        const double x = x_grid[i];
        const double ax = std::abs(x);
        const double sign = (x < 0.0 && state.parity == Parity::antisymmetric) ? -1.0 : 1.0;
        if (ax < cfg.a) {
            for (int n = 0; n < N; ++n)
                weights(n) = state.a_coeffs(n) *
                             axial_profile(ax, state.lambda, table.inner_modes()[n].energy(), cfg.a, state.parity);
            out.values.row(i) = sign * (weights * chi_in);
        } else {
            for (int m = 0; m < N; ++m)
                weights(m) = state.b_coeffs(m) *
                             std::exp(-std::sqrt(table.outer_modes()[m].energy() - state.lambda) * (ax - cfg.a));
            out.values.row(i) = sign * (weights * chi_out);
        }
    }

    // L2 normalization by 2D trapezoid.
    std::vector<double> row_int(nx);
    std::vector<double> sq(ny);
    for (Eigen::Index i = 0; i < nx; ++i) {
        for (Eigen::Index j = 0; j < ny; ++j) sq[j] = out.values(i, j) * out.values(i, j);
        row_int[i] = quad::trapezoid(out.y, sq);
    }
    const double norm2 = quad::trapezoid(out.x, row_int);
    if (norm2 > 0.0 && std::isfinite(norm2)) out.values /= std::sqrt(norm2);
    return out;
}

double x_second_moment(const WavefunctionGrid& grid) {
    const auto nx = static_cast<Eigen::Index>(grid.x.size());
    const auto ny = static_cast<Eigen::Index>(grid.y.size());
    std::vector<double> row_int(nx);
    std::vector<double> sq(ny);
    for (Eigen::Index i = 0; i < nx; ++i) {
        for (Eigen::Index j = 0; j < ny; ++j) sq[j] = grid.values(i, j) * grid.values(i, j);
        row_int[i] = grid.x[i] * grid.x[i] * quad::trapezoid(grid.y, sq);
    }
    return quad::trapezoid(grid.x, row_int);
}

Bracket minimax_brackets(const WellConfig& cfg, int n) {
    require(n >= 1, "minimax_brackets: n must be >= 1");
    validate(cfg);
    const double e_in = transversal_eigenvalues(cfg.inner(), 1)[0];
    const double e_out = threshold(cfg);
    const double step = kPi / (2.0 * cfg.a);
    const double lower = e_in + std::pow((n - 1) * step, 2);
    const double upper = std::min(e_in + std::pow(n * step, 2), e_out);
    return {lower, upper};
}

}  // namespace robinwg
