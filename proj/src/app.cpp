#include "robinwg/app.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace robinwg::app {

namespace {

constexpr double kPi = std::numbers::pi;

double pi2_unit(double d) { return (kPi / d) * (kPi / d); }

template <typename T>
T get_or(const nlohmann::json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config field '") + key + "': " + e.what());
    }
}

const nlohmann::json& section(const nlohmann::json& doc, const char* name) {
    static const nlohmann::json empty = nlohmann::json::object();
    if (!doc.contains(name)) return empty;
    const auto& s = doc.at(name);
    if (!s.is_object()) throw ConfigError(std::string("config section '") + name + "' must be an object");
    return s;
}

void check(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

}  // namespace

RunConfig parse_config(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("config root must be an object");
    RunConfig cfg;

    const auto& well = section(doc, "well");
    cfg.well.alpha0 = get_or(well, "alpha0", cfg.well.alpha0);
    cfg.well.alpha1 = get_or(well, "alpha1", cfg.well.alpha1);
    cfg.well.a = get_or(well, "a", cfg.well.a);
    cfg.well.d = get_or(well, "d", cfg.well.d);

    const auto& matching = section(doc, "matching");
    cfg.matching.N = get_or(matching, "N", cfg.matching.N);
    cfg.matching.scan_points = get_or(matching, "scan_points", cfg.matching.scan_points);
    cfg.matching.tol = get_or(matching, "tol", cfg.matching.tol);

    const auto& sweep = section(doc, "sweep");
    cfg.sweep.parameter = get_or(sweep, "parameter", cfg.sweep.parameter);
    cfg.sweep.values = get_or(sweep, "values", cfg.sweep.values);
    if (sweep.contains("families")) {
        for (const auto& fam : sweep.at("families")) {
            if (fam.is_array() && fam.size() == 2 && fam[0].is_number() && fam[1].is_number()) {
                cfg.sweep.families.emplace_back(fam[0].get<double>(), fam[1].get<double>());
            } else if (fam.is_object()) {
                cfg.sweep.families.emplace_back(get_or(fam, "alpha0", 0.0), get_or(fam, "alpha1", 0.0));
            } else {
                throw ConfigError("sweep.families entries must be [alpha0, alpha1] or {alpha0, alpha1}");
            }
        }
    }

    const auto& oracle = section(doc, "oracle");
    cfg.oracle.L = get_or(oracle, "L", cfg.oracle.L);
    cfg.oracle.refinements = get_or(oracle, "refinements", cfg.oracle.refinements);
    cfg.oracle.h_finest = get_or(oracle, "h_finest", cfg.oracle.h_finest);
    cfg.oracle.match_tol = get_or(oracle, "match_tol", cfg.oracle.match_tol);
    if (oracle.contains("closure")) {
        try {
            cfg.oracle.closure = fd::parse_closure(get_or<std::string>(oracle, "closure", ""));
        } catch (const ContractError& e) {
            throw ConfigError(e.what());
        }
    }

    const auto& wf = section(doc, "wavefunction");
    cfg.wavefunction.state = get_or(wf, "state", cfg.wavefunction.state);
    cfg.wavefunction.nx = get_or(wf, "nx", cfg.wavefunction.nx);
    cfg.wavefunction.ny = get_or(wf, "ny", cfg.wavefunction.ny);
    cfg.wavefunction.x_max = get_or(wf, "x_max", cfg.wavefunction.x_max);

    const auto& existence = section(doc, "existence");
    cfg.existence_n_max = get_or(existence, "n_max", cfg.existence_n_max);

    const auto& output = section(doc, "output");
    cfg.output.dir = get_or(output, "dir", cfg.output.dir);
    cfg.output.formats = get_or(output, "formats", cfg.output.formats);
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in, nullptr, true, true);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config parse error: " + std::string(e.what()));
    }
    return parse_config(doc);
}

void validate_config(const RunConfig& cfg) {
    try {
        validate(cfg.well);
    } catch (const ContractError& e) {
        throw ConfigError(e.what());
    }
    check(cfg.matching.N >= 2, "matching.N must be >= 2");
    check(cfg.matching.scan_points >= 3, "matching.scan_points must be >= 3");
    check(cfg.matching.tol > 0.0, "matching.tol must be positive");
    static const std::set<std::string> params{"a_over_d", "a", "alpha0", "alpha1"};
    check(params.count(cfg.sweep.parameter) == 1, "sweep.parameter must be one of a_over_d, a, alpha0, alpha1");
    for (double v : cfg.sweep.values) check(v > 0.0 && std::isfinite(v), "sweep.values must be positive");
    for (const auto& [a0, a1] : cfg.sweep.families)
        check(a0 > 0.0 && a1 > 0.0, "sweep.families couplings must be positive");
    check(cfg.oracle.refinements >= 2, "oracle.refinements must be >= 2");
    check(cfg.oracle.L * cfg.well.d >= 4.0 * std::max(cfg.well.a, cfg.well.d), "oracle.L must be >= 4 max(a, d) / d");
    check(cfg.oracle.h_finest > 0.0 && cfg.oracle.h_finest * std::pow(2.0, cfg.oracle.refinements - 1) <= 1.0 / 17.0,
          "oracle.h_finest too coarse for the requested refinements (need >= 16 interior nodes)");
    check(cfg.oracle.match_tol > 0.0, "oracle.match_tol must be positive");
    check(cfg.wavefunction.state >= 1, "wavefunction.state must be >= 1");
    check(cfg.wavefunction.nx >= 2 && cfg.wavefunction.ny >= 2, "wavefunction.nx, ny must be >= 2");
    check(cfg.wavefunction.x_max >= 0.0, "wavefunction.x_max must be >= 0");
    check(cfg.existence_n_max >= 1, "existence.n_max must be >= 1");
    static const std::set<std::string> formats{"csv", "json", "svg"};
    for (const auto& f : cfg.output.formats) check(formats.count(f) == 1, "unknown output format: " + f);
}

std::vector<double> SweepResult::energies_at(double sweep_value) const {
    std::vector<double> out;
    for (const auto& r : rows)
        if (r.sweep_value == sweep_value) out.push_back(r.lambda);
    return out;
}

std::vector<double> SweepResult::sweep_values() const {
    std::vector<double> out;
    for (const auto& r : rows)
        if (out.empty() || out.back() != r.sweep_value) out.push_back(r.sweep_value);
    return out;
}

SweepResult spectrum_point(const WellConfig& well, const MatchingParams& params, double sweep_value) {
    ScanOptions opts;
    opts.scan_points = params.scan_points;
    opts.tol = params.tol;
    const auto states = bound_spectrum(well, params.N, opts);
    const double unit = pi2_unit(well.d);

    SweepResult result;
    for (std::size_t i = 0; i < states.size(); ++i) {
        const auto& st = states[i];
        const int n = static_cast<int>(i) + 1;
        const auto br = minimax_brackets(well, n);
        SweepRow row;
        row.sweep_value = sweep_value;
        row.sector = st.parity;
        row.n = n;
        row.lambda = st.lambda;
        row.lambda_pi2 = st.lambda / unit;
        row.sigma_min = st.sigma_min;
        row.bracket_lo = br.lower;
        row.bracket_hi = br.upper;
        if (n == 1) row.gap1 = (states.size() > 1 ? states[1].lambda : threshold(well)) - st.lambda;
        result.rows.push_back(row);
    }
    return result;
}

SweepResult run_spectrum(const RunConfig& cfg) {
    validate_config(cfg);
    return spectrum_point(cfg.well, cfg.matching, cfg.well.a / cfg.well.d);
}

WellConfig apply_sweep(const WellConfig& base, const std::string& parameter, double value) {
    WellConfig w = base;
    if (parameter == "a_over_d") w.a = value * base.d;
    else if (parameter == "a") w.a = value;
    else if (parameter == "alpha0") w.alpha0 = value;
    else if (parameter == "alpha1") w.alpha1 = value;
    else throw ConfigError("unknown sweep parameter: " + parameter);
    return w;
}

SweepResult run_sweep(const RunConfig& cfg) {
    validate_config(cfg);
    SweepResult out;
    for (double v : cfg.sweep.values) {
        auto point = spectrum_point(apply_sweep(cfg.well, cfg.sweep.parameter, v), cfg.matching, v);
        out.rows.insert(out.rows.end(), point.rows.begin(), point.rows.end());
    }
    std::stable_sort(out.rows.begin(), out.rows.end(), [](const SweepRow& l, const SweepRow& r) {
        return l.sweep_value != r.sweep_value ? l.sweep_value < r.sweep_value : l.lambda < r.lambda;
    });
    return out;
}

std::vector<FamilySweep> run_family_sweeps(const RunConfig& cfg) {
    validate_config(cfg);
    std::vector<FamilySweep> out;
    auto families = cfg.sweep.families;
    if (families.empty()) families.emplace_back(cfg.well.alpha0, cfg.well.alpha1);
    for (const auto& [a0, a1] : families) {
        RunConfig sub = cfg;
        sub.well.alpha0 = a0;
        sub.well.alpha1 = a1;
        out.push_back({a0, a1, run_sweep(sub)});
    }
    return out;
}

WavefunctionGrid run_wavefunction(const RunConfig& cfg) {
    validate_config(cfg);
    ScanOptions opts;
    opts.scan_points = cfg.matching.scan_points;
    opts.tol = cfg.matching.tol;
    const auto states = bound_spectrum(cfg.well, cfg.matching.N, opts);
    if (static_cast<int>(states.size()) < cfg.wavefunction.state) {
        std::ostringstream msg;
        msg << "requested bound state #" << cfg.wavefunction.state << " but only " << states.size()
            << " found below E_1(alpha0)";
        throw NumericalError(msg.str());
    }
    const auto& st = states[cfg.wavefunction.state - 1];
    double x_max = cfg.wavefunction.x_max;
    if (x_max == 0.0) x_max = cfg.well.a + 12.0 / std::sqrt(threshold(cfg.well) - st.lambda);

    const int nx = cfg.wavefunction.nx;
    const int ny = cfg.wavefunction.ny;
    std::vector<double> xs(nx);
    std::vector<double> ys(ny);
    for (int i = 0; i < nx; ++i) xs[i] = -x_max + 2.0 * x_max * i / (nx - 1);
    for (int j = 0; j < ny; ++j) ys[j] = cfg.well.d * j / (ny - 1);
    // Exact mirror pairs: x_{nx-1-i} = -x_i.
    for (int i = 0; i < nx / 2; ++i) xs[nx - 1 - i] = -xs[i];
    if (nx % 2 == 1) xs[nx / 2] = 0.0;
    return wavefunction(cfg.well, st, xs, ys);
}

OracleComparison compare_spectra(const std::vector<double>& modematch,
                                 const std::vector<double>& oracle,
                                 const std::vector<double>& oracle_errors, double tol) {
    OracleComparison cmp;
    cmp.tolerance = tol;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < modematch.size() || j < oracle.size()) {
        ComparisonRow row;
        if (i < modematch.size() && j < oracle.size() && std::abs(modematch[i] - oracle[j]) <= tol) {
            row.modematch = modematch[i];
            row.oracle = oracle[j];
            row.oracle_error = j < oracle_errors.size() ? oracle_errors[j] : 0.0;
            row.matched = true;
            ++i;
            ++j;
        } else if (j >= oracle.size() || (i < modematch.size() && modematch[i] < oracle[j])) {
            row.modematch = modematch[i++];
        } else {
            row.oracle = oracle[j];
            row.oracle_error = j < oracle_errors.size() ? oracle_errors[j] : 0.0;
            ++j;
        }
        cmp.rows.push_back(row);
    }
    cmp.one_to_one = std::all_of(cmp.rows.begin(), cmp.rows.end(),
                                 [](const ComparisonRow& r) { return r.matched; });
    return cmp;
}

OracleComparison run_oracle_compare(const RunConfig& cfg) {
    validate_config(cfg);
    ScanOptions opts;
    opts.scan_points = cfg.matching.scan_points;
    opts.tol = cfg.matching.tol;
    std::vector<double> mm;
    for (const auto& st : bound_spectrum(cfg.well, cfg.matching.N, opts)) mm.push_back(st.lambda);

    fd::OracleOptions fopts;
    fopts.h_finest = cfg.oracle.h_finest;
    fopts.closure = cfg.oracle.closure;
    const auto fd_res = fd::oracle_bound_states(cfg.well, cfg.oracle.L * cfg.well.d, cfg.oracle.refinements, fopts);
    auto cmp = compare_spectra(mm, fd_res.values, fd_res.error_estimates,
                               cfg.oracle.match_tol * pi2_unit(cfg.well.d));
    cmp.threshold = fd_res.threshold;
    return cmp;
}

QReport run_existence(const RunConfig& cfg) {
    validate_config(cfg);
    return existence_test(cfg.well, BumpProfile{}, cfg.existence_n_max);
}

std::string format_double(double v) {
    if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_sweep_csv(std::ostream& os, const SweepResult& result) {
    os << "sweep_value,sector,n,lambda,lambda_pi2,sigma_min,bracket_lo,bracket_hi,gap1\n";
    for (const auto& r : result.rows) {
        os << format_double(r.sweep_value) << ',' << to_string(r.sector) << ',' << r.n << ','
           << format_double(r.lambda) << ',' << format_double(r.lambda_pi2) << ','
           << format_double(r.sigma_min) << ',' << format_double(r.bracket_lo) << ','
           << format_double(r.bracket_hi) << ',' << (r.gap1 ? format_double(*r.gap1) : "") << '\n';
    }
}

nlohmann::json to_json(const SweepResult& result) {
    auto rows = nlohmann::json::array();
    for (const auto& r : result.rows) {
        nlohmann::json j{{"sweep_value", r.sweep_value}, {"sector", to_string(r.sector)},
                         {"n", r.n},                     {"lambda", r.lambda},
                         {"lambda_pi2", r.lambda_pi2},   {"sigma_min", r.sigma_min},
                         {"bracket_lo", r.bracket_lo},   {"bracket_hi", r.bracket_hi}};
        j["gap1"] = r.gap1 ? nlohmann::json(*r.gap1) : nlohmann::json(nullptr);
        rows.push_back(std::move(j));
    }
    return {{"rows", rows}};
}

void write_wavefunction(std::ostream& os, const WavefunctionGrid& grid) {
    os << "# nx ny x0 x1 y0 y1 lambda parity\n";
    os << "# " << grid.x.size() << ' ' << grid.y.size() << ' ' << format_double(grid.x.front()) << ' '
       << format_double(grid.x.back()) << ' ' << format_double(grid.y.front()) << ' '
       << format_double(grid.y.back()) << ' ' << format_double(grid.state.lambda) << ' '
       << to_string(grid.state.parity) << '\n';
    for (Eigen::Index i = 0; i < grid.values.rows(); ++i) {
        for (Eigen::Index j = 0; j < grid.values.cols(); ++j) {
            if (j) os << ' ';
            os << format_double(grid.values(i, j));
        }
        os << '\n';
    }
}

void write_comparison_csv(std::ostream& os, const OracleComparison& cmp) {
    os << "lambda_modematch,lambda_oracle,abs_diff,oracle_error,matched\n";
    for (const auto& r : cmp.rows) {
        os << (r.modematch ? format_double(*r.modematch) : "") << ','
           << (r.oracle ? format_double(*r.oracle) : "") << ','
           << (r.modematch && r.oracle ? format_double(std::abs(*r.modematch - *r.oracle)) : "") << ','
           << format_double(r.oracle_error) << ',' << (r.matched ? 1 : 0) << '\n';
    }
}

void write_qreport_csv(std::ostream& os, const QReport& report) {
    os << "n,q\n";
    for (std::size_t i = 0; i < report.n_values.size(); ++i)
        os << report.n_values[i] << ',' << format_double(report.q_values[i]) << '\n';
}

nlohmann::json to_json(const QReport& report) {
    nlohmann::json j;
    j["well"] = {{"alpha0", report.config.alpha0}, {"alpha1", report.config.alpha1},
                 {"a", report.config.a}, {"d", report.config.d}};
    j["well_integral"] = report.well_integral;
    j["hypothesis_holds"] = report.hypothesis_holds;
    j["first_negative_n"] = report.first_negative_n ? nlohmann::json(*report.first_negative_n) : nlohmann::json(nullptr);
    j["inconclusive"] = report.inconclusive;
    j["n"] = report.n_values;
    j["q"] = report.q_values;
    return j;
}

void write_branches_svg(std::ostream& os, const SweepResult& result, const std::string& x_label,
                        const std::string& title) {
    constexpr double W = 640.0, H = 420.0, left = 70.0, right = 20.0, top = 40.0, bottom = 55.0;
    std::map<int, std::vector<std::pair<double, double>>> branches;
    double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
    bool first = true;
    for (const auto& r : result.rows) {
        branches[r.n].emplace_back(r.sweep_value, r.lambda_pi2);
        if (first) {
            x0 = x1 = r.sweep_value;
            y0 = y1 = r.lambda_pi2;
            first = false;
        }
        x0 = std::min(x0, r.sweep_value);
        x1 = std::max(x1, r.sweep_value);
        y0 = std::min(y0, r.lambda_pi2);
        y1 = std::max(y1, r.lambda_pi2);
    }
    if (x1 <= x0) x1 = x0 + 1.0;
    if (y1 <= y0) y1 = y0 + 1.0;
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    const auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * (W - left - right); };
    const auto py = [&](double y) { return H - bottom - (y - y0) / (y1 - y0) * (H - top - bottom); };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << H - bottom << "\" x2=\"" << W - right << "\" y2=\"" << H - bottom
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << H - bottom
       << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double xv = x0 + (x1 - x0) * t / 4.0;
        const double yv = y0 + (y1 - y0) * t / 4.0;
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3g", xv);
        os << "<text x=\"" << px(xv) << "\" y=\"" << H - bottom + 18 << "\" text-anchor=\"middle\" font-size=\"11\">"
           << buf << "</text>\n";
        std::snprintf(buf, sizeof buf, "%.3g", yv);
        os << "<text x=\"" << left - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
           << buf << "</text>\n";
    }
    os << "<text x=\"" << (left + W - right) / 2 << "\" y=\"" << H - 12
       << "\" text-anchor=\"middle\" font-size=\"13\">" << x_label << "</text>\n";
    os << "<text x=\"18\" y=\"" << (top + H - bottom) / 2 << "\" text-anchor=\"middle\" font-size=\"13\" "
       << "transform=\"rotate(-90 18 " << (top + H - bottom) / 2 << ")\">E/(π/d)^2</text>\n";
    for (const auto& [n, pts] : branches) {
        const char* color = colors[(n - 1) % 7];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t k = 0; k < pts.size(); ++k) {
            if (k) os << ' ';
            os << px(pts[k].first) << ',' << py(pts[k].second);
        }
        os << "\"/>\n";
        for (const auto& [x, y] : pts)
            os << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
    }
    os << "</svg>\n";
}

}  // namespace robinwg::app
