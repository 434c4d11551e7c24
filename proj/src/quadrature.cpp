#include "robinwg/quadrature.hpp"

#include "robinwg/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

namespace robinwg::quad {

namespace {

GaussRule build_rule(int n) {
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Tricomi initial guess, then Newton.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 1.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
    if (n < 1) throw ContractError("gauss_legendre: n must be >= 1");
    static std::mutex mutex;
    static std::map<int, GaussRule> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, build_rule(n)).first;
    return it->second;
}

double gauss(const Integrand& f, double lo, double hi, int n) {
    const auto& rule = gauss_legendre(n);
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return sum * half;
}

double composite_gauss(const Integrand& f, double lo, double hi, int panels, int n) {
    panels = std::max(panels, 1);
    const double width = (hi - lo) / panels;
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double a = lo + p * width;
        const double b = (p + 1 == panels) ? hi : a + width;
        sum += gauss(f, a, b, n);
    }
    return sum;
}

double piecewise_gauss(const Integrand& f, std::span<const double> breaks,
                       int panels_per_piece, int n) {
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (breaks[i + 1] > breaks[i])
            sum += composite_gauss(f, breaks[i], breaks[i + 1], panels_per_piece, n);
    }
    return sum;
}

double adaptive_simpson(const Integrand& f, double lo, double hi, int base_points,
                        double rel_tol, double abs_floor, double fail_tol, int max_levels) {
    if (hi == lo) return 0.0;
    int intervals = std::max(2, base_points + (base_points % 2));
    double h = (hi - lo) / intervals;

    // Keep endpoint, odd-node and even-node sums separately so each doubling
    // only evaluates the new midpoints.
    double ends = f(lo) + f(hi);
    double odd = 0.0;
    double even = 0.0;
    for (int i = 1; i < intervals; ++i) (i % 2 ? odd : even) += f(lo + i * h);
    double prev = h / 3.0 * (ends + 4.0 * odd + 2.0 * even);

    for (int level = 0; level < max_levels; ++level) {
        even += odd;
        odd = 0.0;
        intervals *= 2;
        h *= 0.5;
        for (int i = 1; i < intervals; i += 2) odd += f(lo + i * h);
        const double cur = h / 3.0 * (ends + 4.0 * odd + 2.0 * even);
        const double diff = std::abs(cur - prev);
        if (diff <= rel_tol * std::abs(cur) || diff <= abs_floor) return cur;
        if (level + 1 == max_levels) {
            if (diff > fail_tol * std::abs(cur) && diff > abs_floor)
                throw QuadratureError("adaptive_simpson: levels differ by " +
                                      std::to_string(diff / std::abs(cur)) + " relative");
            return cur;
        }
        prev = cur;
    }
    return prev;
}

double trapezoid(std::span<const double> x, std::span<const double> fx) {
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i)
        sum += 0.5 * (x[i + 1] - x[i]) * (fx[i] + fx[i + 1]);
    return sum;
}

}  // namespace robinwg::quad
