// wgcli: bound states of a Robin strip with a rectangular coupling well.

#include "robinwg/app.hpp"
#include "robinwg/errors.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace robinwg;
using namespace robinwg::app;

namespace {

struct Overrides {
    std::string config_path;
    std::optional<double> alpha0, alpha1, a, d;
    std::optional<int> N, scan_points, state, n_max, refinements;
    std::optional<double> L, h_finest;
    std::optional<std::string> closure, parameter, out;
    std::vector<double> values;
    std::vector<std::string> formats;
};

RunConfig resolve(const Overrides& o) {
    RunConfig cfg = o.config_path.empty() ? RunConfig{} : load_config(o.config_path);
    if (o.alpha0) cfg.well.alpha0 = *o.alpha0;
    if (o.alpha1) cfg.well.alpha1 = *o.alpha1;
    if (o.a) cfg.well.a = *o.a;
    if (o.d) cfg.well.d = *o.d;
    if (o.N) cfg.matching.N = *o.N;
    if (o.scan_points) cfg.matching.scan_points = *o.scan_points;
    if (o.state) cfg.wavefunction.state = *o.state;
    if (o.n_max) cfg.existence_n_max = *o.n_max;
    if (o.refinements) cfg.oracle.refinements = *o.refinements;
    if (o.L) cfg.oracle.L = *o.L;
    if (o.h_finest) cfg.oracle.h_finest = *o.h_finest;
    if (o.closure) {
        try {
            cfg.oracle.closure = fd::parse_closure(*o.closure);
        } catch (const ContractError& e) {
            throw ConfigError(e.what());
        }
    }
    if (o.parameter) cfg.sweep.parameter = *o.parameter;
    if (!o.values.empty()) cfg.sweep.values = o.values;
    if (!o.formats.empty()) cfg.output.formats = o.formats;
    if (o.out) cfg.output.dir = *o.out;
    validate_config(cfg);
    return cfg;
}

bool wants(const RunConfig& cfg, const std::string& format) {
    return std::find(cfg.output.formats.begin(), cfg.output.formats.end(), format) != cfg.output.formats.end();
}

// Opens dir/name for binary writing so line endings stay LF.
std::ofstream open_output(const RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.output.dir);
    const auto path = fs::path(cfg.output.dir) / name;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + path.string());
    return os;
}

template <typename Writer>
void emit(const RunConfig& cfg, const std::string& name, Writer&& write) {
    if (cfg.output.dir.empty()) {
        write(std::cout);
    } else {
        auto os = open_output(cfg, name);
        write(os);
    }
}

std::string x_label(const std::string& parameter) {
    if (parameter == "a_over_d") return "a/d";
    return parameter;
}

void write_sweep(const RunConfig& cfg, const SweepResult& result, const std::string& stem,
                 const std::string& title) {
    if (wants(cfg, "csv")) emit(cfg, stem + ".csv", [&](std::ostream& os) { write_sweep_csv(os, result); });
    if (wants(cfg, "json"))
        emit(cfg, stem + ".json", [&](std::ostream& os) { os << to_json(result).dump(2) << '\n'; });
    if (wants(cfg, "svg")) {
        if (cfg.output.dir.empty()) throw ConfigError("svg output requires --out");
        emit(cfg, stem + ".svg",
             [&](std::ostream& os) { write_branches_svg(os, result, x_label(cfg.sweep.parameter), title); });
    }
}

int cmd_spectrum(const RunConfig& cfg) {
    write_sweep(cfg, run_spectrum(cfg), "spectrum", "bound states");
    return 0;
}

int cmd_sweep(RunConfig cfg) {
    const auto sweeps = run_family_sweeps(cfg);
    if (sweeps.size() > 1 && cfg.output.dir.empty()) throw ConfigError("several families require --out");
    for (const auto& fam : sweeps) {
        std::string stem = "sweep";
        if (sweeps.size() > 1) stem += "_" + format_double(fam.alpha0) + "_" + format_double(fam.alpha1);
        const std::string title = "alpha0 = " + format_double(fam.alpha0) + ", alpha1 = " + format_double(fam.alpha1);
        write_sweep(cfg, fam.result, stem, title);
    }
    return 0;
}

int cmd_wavefunction(const RunConfig& cfg) {
    const auto grid = run_wavefunction(cfg);
    emit(cfg, "wavefunction.txt", [&](std::ostream& os) { write_wavefunction(os, grid); });
    return 0;
}

int cmd_oracle(const RunConfig& cfg) {
    const auto cmp = run_oracle_compare(cfg);
    emit(cfg, "oracle.csv", [&](std::ostream& os) { write_comparison_csv(os, cmp); });
    if (!cmp.one_to_one) {
        std::cerr << "wgcli: spectra differ beyond " << format_double(cmp.tolerance) << "\n";
        return 3;
    }
    return 0;
}

int cmd_existence(const RunConfig& cfg) {
    const auto report = run_existence(cfg);
    if (wants(cfg, "csv")) emit(cfg, "existence.csv", [&](std::ostream& os) { write_qreport_csv(os, report); });
    if (wants(cfg, "json"))
        emit(cfg, "existence.json", [&](std::ostream& os) { os << to_json(report).dump(2) << '\n'; });
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App cli{"Bound states of a Robin waveguide with a rectangular coupling well"};
    cli.require_subcommand(1);
    Overrides o;

    auto add_common = [&o](CLI::App* sub) {
        sub->add_option("-c,--config", o.config_path, "JSON configuration file");
        sub->add_option("--alpha0", o.alpha0, "outer coupling");
        sub->add_option("--alpha1", o.alpha1, "well coupling");
        sub->add_option("-a,--half-width", o.a, "well half-width a");
        sub->add_option("-d,--width", o.d, "strip width d");
        sub->add_option("-N,--modes", o.N, "transverse modes per side");
        sub->add_option("--scan-points", o.scan_points, "energy scan points per sector");
        sub->add_option("-o,--out", o.out, "output directory (default: stdout)");
        sub->add_option("-f,--format", o.formats, "csv, json, svg");
    };

    auto* spectrum = cli.add_subcommand("spectrum", "bound states of one configuration");
    add_common(spectrum);
    auto* sweep = cli.add_subcommand("sweep", "bound states over a parameter sweep");
    add_common(sweep);
    sweep->add_option("--parameter", o.parameter, "a_over_d, a, alpha0 or alpha1");
    sweep->add_option("--values", o.values, "sweep values");
    auto* wave = cli.add_subcommand("wavefunction", "sample a bound state on a grid");
    add_common(wave);
    wave->add_option("--state", o.state, "ordinal of the state (1 = ground)");
    auto* oracle = cli.add_subcommand("oracle", "compare against the finite-difference oracle");
    add_common(oracle);
    oracle->add_option("--half-length", o.L, "half-length in units of d");
    oracle->add_option("--refinements", o.refinements, "grid levels");
    oracle->add_option("--h-finest", o.h_finest, "finest spacing in units of d");
    oracle->add_option("--closure", o.closure, "dirichlet or neumann");
    auto* existence = cli.add_subcommand("existence", "variational test for a bound state");
    add_common(existence);
    existence->add_option("--n-max", o.n_max, "largest dilation");

    try {
        cli.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return cli.exit(e);
    } catch (const CLI::ParseError& e) {
        cli.exit(e);
        return 2;
    }

    try {
        const RunConfig cfg = resolve(o);
        if (spectrum->parsed()) return cmd_spectrum(cfg);
        if (sweep->parsed()) return cmd_sweep(cfg);
        if (wave->parsed()) return cmd_wavefunction(cfg);
        if (oracle->parsed()) return cmd_oracle(cfg);
        if (existence->parsed()) return cmd_existence(cfg);
    } catch (const ContractError& e) {
        std::cerr << "wgcli: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "wgcli: numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "wgcli: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
