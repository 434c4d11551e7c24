#pragma once

#include "robinwg/errors.hpp"
#include "robinwg/fdoracle.hpp"
#include "robinwg/modematch.hpp"
#include "robinwg/variational.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace robinwg::app {

/// Malformed or out-of-range configuration (CLI exit code 2).
class ConfigError : public ContractError {
public:
    using ContractError::ContractError;
};

struct MatchingParams {
    int N = 32;
    int scan_points = 400;
    double tol = 1e-12;
};

struct SweepSpec {
    /// One of "a_over_d", "a", "alpha0", "alpha1".
    std::string parameter = "a_over_d";
    std::vector<double> values;
    /// Optional (alpha0, alpha1) families; each is swept over `values`.
    std::vector<std::pair<double, double>> families;
};

struct OracleSpec {
    double L = 8.0;  ///< in units of d
    int refinements = 3;
    fd::Closure closure = fd::Closure::dirichlet;
    double h_finest = 1.0 / 128.0;  ///< in units of d
    double match_tol = 5e-3;        ///< in units of (pi/d)^2
};

struct WavefunctionSpec {
    int state = 1;        ///< ordinal in the merged spectrum
    int nx = 241;
    int ny = 41;
    double x_max = 0.0;   ///< 0 selects a + 12 / k_1
};

struct OutputSpec {
    std::string dir;                          ///< empty: write to standard output
    std::vector<std::string> formats{"csv"};  ///< csv, json, svg
};

struct RunConfig {
    WellConfig well{20.0, 5.0, 0.3, 1.0};
    MatchingParams matching;
    SweepSpec sweep;
    OracleSpec oracle;
    WavefunctionSpec wavefunction;
    OutputSpec output;
    int existence_n_max = 256;
};

RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);
/// Throws ConfigError for any field outside its module's precondition.
void validate_config(const RunConfig& cfg);

struct SweepRow {
    double sweep_value = 0.0;
    Parity sector = Parity::symmetric;
    int n = 0;
    double lambda = 0.0;
    double lambda_pi2 = 0.0;
    double sigma_min = 0.0;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    std::optional<double> gap1;  ///< set on the n = 1 row of each point
};

struct SweepResult {
    std::vector<SweepRow> rows;  ///< sorted by (sweep_value, lambda)

    /// Energies of one sweep point, ascending.
    std::vector<double> energies_at(double sweep_value) const;
    std::vector<double> sweep_values() const;
};

/// Spectrum of a single configuration, annotated for export.
SweepResult spectrum_point(const WellConfig& well, const MatchingParams& params, double sweep_value);

SweepResult run_spectrum(const RunConfig& cfg);

/// Well configuration for one sweep value.
WellConfig apply_sweep(const WellConfig& base, const std::string& parameter, double value);

SweepResult run_sweep(const RunConfig& cfg);

struct FamilySweep {
    double alpha0;
    double alpha1;
    SweepResult result;
};

/// One sweep per (alpha0, alpha1) family; falls back to the base well.
std::vector<FamilySweep> run_family_sweeps(const RunConfig& cfg);

WavefunctionGrid run_wavefunction(const RunConfig& cfg);

struct ComparisonRow {
    std::optional<double> modematch;
    std::optional<double> oracle;
    double oracle_error = 0.0;
    bool matched = false;
};

struct OracleComparison {
    std::vector<ComparisonRow> rows;
    bool one_to_one = false;
    double tolerance = 0.0;  ///< absolute energy tolerance used
    double threshold = 0.0;
};

/// Greedy one-to-one pairing of sorted spectra within `tol`.
OracleComparison compare_spectra(const std::vector<double>& modematch,
                                 const std::vector<double>& oracle,
                                 const std::vector<double>& oracle_errors, double tol);

OracleComparison run_oracle_compare(const RunConfig& cfg);

QReport run_existence(const RunConfig& cfg);

// Serialization. Floating point uses the shortest round-trip decimal form.
std::string format_double(double v);
void write_sweep_csv(std::ostream& os, const SweepResult& result);
nlohmann::json to_json(const SweepResult& result);
void write_wavefunction(std::ostream& os, const WavefunctionGrid& grid);
void write_comparison_csv(std::ostream& os, const OracleComparison& cmp);
void write_qreport_csv(std::ostream& os, const QReport& report);
nlohmann::json to_json(const QReport& report);

/// Line plot with one polyline per eigenvalue ordinal, x = sweep value,
/// y = lambda / (pi/d)^2.
void write_branches_svg(std::ostream& os, const SweepResult& result, const std::string& x_label,
                        const std::string& title);

}  // namespace robinwg::app
