#include "robinwg/app.hpp"
#include "robinwg/errors.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

using namespace robinwg;
using namespace robinwg::app;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

double parse(const std::string& s) {
    double v = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), v);
    return v;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

int run_cli(const std::string& args, const fs::path& out = {}) {
    std::string cmd = std::string(WGCLI_PATH) + " " + args;
    cmd += out.empty() ? " > /dev/null 2>&1" : " > " + out.string() + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "robinwg_tests";
    fs::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("config defaults and parsing") {
    const auto cfg = parse_config(nlohmann::json::object());
    CHECK(cfg.matching.N == 32);
    CHECK(cfg.matching.scan_points == 400);
    CHECK(cfg.well.alpha0 == 20.0);
    CHECK(cfg.output.formats == std::vector<std::string>{"csv"});

    const auto doc = nlohmann::json::parse(R"({
        "well": {"alpha0": 100000, "alpha1": 1e-5, "a": 0.8, "d": 2},
        "matching": {"N": 24, "scan_points": 300, "tol": 1e-11},
        "sweep": {"parameter": "a_over_d", "values": [0.2, 0.4], "families": [[50, 3], {"alpha0": 70, "alpha1": 2}]},
        "oracle": {"L": 6, "refinements": 2, "closure": "neumann"},
        "output": {"dir": "out", "formats": ["csv", "svg"]}
    })");
    const auto c = parse_config(doc);
    CHECK(c.well.alpha0 == 1e5);
    CHECK(c.well.d == 2.0);
    CHECK(c.matching.N == 24);
    CHECK(c.matching.tol == 1e-11);
    CHECK(c.sweep.values.size() == 2);
    CHECK(c.sweep.families.size() == 2);
    CHECK(c.sweep.families[1].first == 70.0);
    CHECK(c.oracle.closure == fd::Closure::neumann);
    CHECK(c.oracle.refinements == 2);
    CHECK(c.output.dir == "out");
    CHECK_NOTHROW(validate_config(c));
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"well": {"alpha0": "x"}})")), ConfigError);
    CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"well": 3})")), ConfigError);
    CHECK_THROWS_AS(parse_config(nlohmann::json::parse(R"({"oracle": {"closure": "periodic"}})")), ConfigError);
    CHECK_THROWS_AS(parse_config(nlohmann::json::parse("[1, 2]")), ConfigError);

    RunConfig c;
    c.matching.N = 1;
    CHECK_THROWS_AS(validate_config(c), ConfigError);
    c = RunConfig{};
    c.well.a = -1.0;
    CHECK_THROWS_AS(validate_config(c), ConfigError);
    c = RunConfig{};
    c.sweep.parameter = "temperature";
    CHECK_THROWS_AS(validate_config(c), ConfigError);
    c = RunConfig{};
    c.output.formats = {"png"};
    CHECK_THROWS_AS(validate_config(c), ConfigError);
    c = RunConfig{};
    c.oracle.L = 1.0;
    CHECK_THROWS_AS(validate_config(c), ConfigError);
    c = RunConfig{};
    c.oracle.h_finest = 0.1;
    CHECK_THROWS_AS(validate_config(c), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("shortest round-trip formatting") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(1e-5) == "1e-05");
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    for (int i = 0; i < 1000; ++i) {
        const double v = u(rng) * std::pow(10.0, i % 30 - 15);
        CHECK(parse(format_double(v)) == v);
    }
}

TEST_CASE("spectrum rows") {
    RunConfig cfg;
    const auto res = run_spectrum(cfg);
    REQUIRE(res.rows.size() == 1);
    const auto& r = res.rows[0];
    CHECK(r.sector == Parity::symmetric);
    CHECK(r.n == 1);
    CHECK(r.sweep_value == doctest::Approx(0.3));
    CHECK(r.lambda_pi2 == r.lambda / (std::numbers::pi * std::numbers::pi));
    REQUIRE(r.gap1.has_value());
    CHECK(*r.gap1 == doctest::Approx(threshold(cfg.well) - r.lambda));
    CHECK(r.bracket_lo <= r.lambda);
    CHECK(r.lambda <= r.bracket_hi);

    cfg.well.alpha1 = cfg.well.alpha0;
    CHECK(run_spectrum(cfg).rows.empty());
}

TEST_CASE("sweep rows are sorted and gap1 is defined per point") {
    RunConfig cfg;
    cfg.sweep.values = {1.2, 0.4, 0.8};
    const auto res = run_sweep(cfg);
    CHECK(res.sweep_values() == std::vector<double>{0.4, 0.8, 1.2});
    for (std::size_t i = 1; i < res.rows.size(); ++i) {
        const auto& p = res.rows[i - 1];
        const auto& q = res.rows[i];
        CHECK((p.sweep_value < q.sweep_value || (p.sweep_value == q.sweep_value && p.lambda < q.lambda)));
    }
    for (double v : res.sweep_values()) {
        const auto e = res.energies_at(v);
        for (const auto& r : res.rows) {
            if (r.sweep_value != v) continue;
            CHECK(r.gap1.has_value() == (r.n == 1));
            if (r.n == 1) CHECK(*r.gap1 == doctest::Approx((e.size() > 1 ? e[1] : threshold(apply_sweep(cfg.well, "a_over_d", v))) - e[0]));
            CHECK(r.bracket_lo <= r.lambda);
            CHECK(r.lambda <= r.bracket_hi);
        }
    }
    cfg.sweep.values.clear();
    CHECK(run_sweep(cfg).rows.empty());
}

TEST_CASE("apply_sweep") {
    const WellConfig base{20.0, 5.0, 0.3, 2.0};
    CHECK(apply_sweep(base, "a_over_d", 0.5).a == 1.0);
    CHECK(apply_sweep(base, "a", 0.5).a == 0.5);
    CHECK(apply_sweep(base, "alpha1", 7.0).alpha1 == 7.0);
    CHECK(apply_sweep(base, "alpha0", 70.0).alpha0 == 70.0);
    CHECK_THROWS_AS(apply_sweep(base, "x", 1.0), ConfigError);
}

TEST_CASE("csv and json writers") {
    RunConfig cfg;
    cfg.sweep.values = {0.4, 1.0};
    const auto res = run_sweep(cfg);
    std::ostringstream os;
    write_sweep_csv(os, res);
    const auto text = os.str();
    CHECK(text.find('\r') == std::string::npos);
    const auto lines = split(text, '\n');
    CHECK(lines.front() == "sweep_value,sector,n,lambda,lambda_pi2,sigma_min,bracket_lo,bracket_hi,gap1");
    CHECK(lines.back().empty());
    CHECK(lines.size() == res.rows.size() + 2);
    for (std::size_t i = 0; i < res.rows.size(); ++i) {
        const auto f = split(lines[i + 1], ',');
        REQUIRE(f.size() == 9);
        CHECK(parse(f[3]) == res.rows[i].lambda);
        CHECK(parse(f[6]) <= parse(f[3]));
        CHECK(parse(f[3]) <= parse(f[7]));
        CHECK(f[8].empty() == !res.rows[i].gap1.has_value());
    }
    const auto j = to_json(res);
    CHECK(j["rows"].size() == res.rows.size());
    CHECK(j["rows"][0]["lambda"].get<double>() == res.rows[0].lambda);
}

TEST_CASE("wavefunction export") {
    RunConfig cfg;
    cfg.wavefunction.nx = 41;
    cfg.wavefunction.ny = 11;
    const auto grid = run_wavefunction(cfg);
    std::ostringstream os;
    write_wavefunction(os, grid);
    const auto lines = split(os.str(), '\n');
    CHECK(lines[0] == "# nx ny x0 x1 y0 y1 lambda parity");
    const auto head = split(lines[1], ' ');
    REQUIRE(head.size() == 9);
    CHECK(head[1] == "41");
    CHECK(head[2] == "11");
    CHECK(parse(head[3]) == -parse(head[4]));
    CHECK(head[8] == "symmetric");
    CHECK(lines.size() == 2 + 41 + 1);
    for (int i = 0; i < 41; ++i) {
        const auto vals = split(lines[2 + i], ' ');
        REQUIRE(vals.size() == 11);
        CHECK(parse(vals[5]) == grid.values(i, 5));
    }
    for (int i = 0; i < 41; ++i)
        for (int j = 0; j < 11; ++j) CHECK(grid.values(i, j) == grid.values(40 - i, j));

    cfg.wavefunction.state = 2;
    CHECK_THROWS_AS(run_wavefunction(cfg), NumericalError);
}

TEST_CASE("svg plot") {
    RunConfig cfg;
    cfg.sweep.values = {0.4, 0.8, 1.2};
    const auto res = run_sweep(cfg);
    std::ostringstream os;
    write_branches_svg(os, res, "a/d", "test");
    const auto svg = os.str();
    std::size_t branches = 0;
    for (const auto& r : res.rows) branches = std::max<std::size_t>(branches, r.n);
    std::size_t count = 0;
    for (auto pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1)) ++count;
    CHECK(count == branches);
    CHECK(svg.find(">a/d<") != std::string::npos);
    CHECK(svg.find(">E/(π/d)^2<") != std::string::npos);
    CHECK(svg.rfind("</svg>") != std::string::npos);
}

TEST_CASE("compare_spectra pairing") {
    const auto c = compare_spectra({1.0, 2.0}, {1.01, 2.02}, {0.0, 0.0}, 0.05);
    CHECK(c.one_to_one);
    CHECK(c.rows.size() == 2);
    const auto missing = compare_spectra({1.0, 2.0}, {1.01}, {0.0}, 0.05);
    CHECK(!missing.one_to_one);
    CHECK(missing.rows.size() == 2);
    CHECK(!missing.rows[1].oracle);
    const auto extra = compare_spectra({2.0}, {1.0, 2.0}, {0.0, 0.0}, 0.05);
    CHECK(!extra.one_to_one);
    CHECK(!extra.rows[0].modematch);
    CHECK(compare_spectra({}, {}, {}, 0.1).one_to_one);
}

TEST_CASE("existence report") {
    RunConfig cfg;
    cfg.existence_n_max = 64;
    const auto rep = run_existence(cfg);
    std::ostringstream os;
    write_qreport_csv(os, rep);
    CHECK(split(os.str(), '\n').size() == 64 + 2);
    const auto j = to_json(rep);
    CHECK(j["first_negative_n"].get<int>() == *rep.first_negative_n);
    CHECK(j["hypothesis_holds"].get<bool>());
}

TEST_CASE("oracle agreement on randomized wells") {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int checked = 0;
    for (int draw = 0; draw < 40 && checked < 5; ++draw) {
        RunConfig cfg;
        cfg.well.alpha0 = 2.0 + 48.0 * u(rng);
        cfg.well.alpha1 = cfg.well.alpha0 * (0.05 + 0.9 * u(rng));
        cfg.well.a = 0.1 + 0.9 * u(rng);
        cfg.matching.N = 24;
        cfg.oracle.h_finest = 1.0 / 64;
        cfg.oracle.refinements = 2;
        const double tol = cfg.oracle.match_tol * std::numbers::pi * std::numbers::pi;
        const double thr = threshold(cfg.well);
        // A state within the matching tolerance of the threshold cannot be
        // resolved by a finite box; such draws are skipped.
        ScanOptions opts;
        opts.estimate_truncation = false;
        bool near = false;
        for (const auto& s : bound_spectrum(cfg.well, 24, opts)) near |= thr - s.lambda < tol;
        if (near) continue;
        const auto cmp = run_oracle_compare(cfg);
        INFO("alpha0=", cfg.well.alpha0, " alpha1=", cfg.well.alpha1, " a=", cfg.well.a);
        CHECK(cmp.one_to_one);
        ++checked;
    }
    CHECK(checked == 5);
}

TEST_CASE("cli exit codes, outputs and determinism") {
    const auto out1 = scratch("spectrum1.csv");
    const auto out2 = scratch("spectrum2.csv");
    CHECK(run_cli("spectrum", out1) == 0);
    CHECK(run_cli("spectrum", out2) == 0);
    CHECK(slurp(out1) == slurp(out2));
    CHECK(slurp(out1).rfind("sweep_value,sector,n,", 0) == 0);

    const auto bad = scratch("bad.json");
    std::ofstream(bad) << R"({"well": {"alpha0": -3}})";
    CHECK(run_cli("spectrum -c " + bad.string()) == 2);
    std::ofstream(bad) << "{ not json";
    CHECK(run_cli("spectrum -c " + bad.string()) == 2);
    CHECK(run_cli("spectrum --no-such-flag") == 2);
    CHECK(run_cli("spectrum -N 1") == 2);
    CHECK(run_cli("wavefunction --state 3") == 3);
    CHECK(run_cli("sweep --values 0.4 --values 0.8 -f svg") == 2);

    const auto dir = scratch("sweep_out");
    fs::remove_all(dir);
    const auto cfgfile = scratch("sweep.json");
    std::ofstream(cfgfile) << R"({"sweep": {"values": [0.4, 1.0], "families": [[20, 5], [50, 3]]},
                                 "output": {"formats": ["csv", "json", "svg"]}})";
    CHECK(run_cli("sweep -c " + cfgfile.string() + " -o " + dir.string()) == 0);
    CHECK(fs::exists(dir / "sweep_20_5.csv"));
    CHECK(fs::exists(dir / "sweep_50_3.svg"));
    CHECK(fs::exists(dir / "sweep_50_3.json"));
    const auto first = slurp(dir / "sweep_20_5.csv");
    CHECK(run_cli("sweep -c " + cfgfile.string() + " -o " + dir.string()) == 0);
    CHECK(slurp(dir / "sweep_20_5.csv") == first);

    CHECK(run_cli("sweep --values 0.3 -o " + dir.string() + " -f csv") == 0);
    CHECK(run_cli("existence -o " + dir.string() + " -f json") == 0);
    CHECK(fs::exists(dir / "existence.json"));
}

TEST_CASE("cli empty sweep") {
    const auto out = scratch("empty.csv");
    CHECK(run_cli("sweep", out) == 0);
    CHECK(slurp(out) == "sweep_value,sector,n,lambda,lambda_pi2,sigma_min,bracket_lo,bracket_hi,gap1\n");
}
