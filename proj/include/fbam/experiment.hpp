#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fbam/mollifier.hpp"
#include "fbam/models.hpp"
#include "fbam/oracle.hpp"
#include "fbam/particle.hpp"

namespace fbam {

enum class OutputFormat { Csv, Json, Pretty };

OutputFormat parse_format(const std::string& name);

/// A row group sharing one set of model parameters (one block of a results table).
struct Panel {
    std::string label;
    ModelParams model;
    std::vector<double> spots;
    std::vector<double> benchmarks;  ///< empty, or aligned 1:1 with `spots`
};

struct ScanGrid {
    double hi = 0.0;  ///< 0 means K^2 * 1e-2
    double lo = 0.0;  ///< 0 means K^2 * 1e-6
    std::size_t count = 9;
};

struct ExperimentSpec {
    std::string name;
    OptionKind kind = OptionKind::Put;
    double strike = 100.0;
    double expiry = 1.0;
    std::vector<Panel> panels;
    SimConfig sim;
    bool scan_bandwidth = false;  ///< "bandwidth": "scan" picks h per cell
    ScanGrid scan;
    std::string output_path;      ///< empty means stdout
    OutputFormat format = OutputFormat::Pretty;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
    OptionSpec option(double spot) const { return {kind, strike, expiry, spot}; }
};

/// Parses an experiment document. Errors name the field path, e.g. "sim.paths".
ExperimentSpec parse_experiment(const nlohmann::json& doc);
ExperimentSpec load_experiment(const std::string& path);

struct ResultRow {
    std::string panel;
    double spot = 0.0;
    std::optional<double> benchmark;
    std::vector<double> value;   ///< cumulative price per order, 0..order
    std::vector<double> stderr_;
    std::vector<double> error_ratio;  ///< empty iff no benchmark
    double bandwidth = 0.0;      ///< h0 actually used
};

/// 100 (value - benchmark) / benchmark. Throws std::invalid_argument on a zero benchmark.
double error_ratio(double value, double benchmark);

ResultRow make_row(const std::string& panel, double spot, std::optional<double> benchmark,
                   const ExpansionResult& result, double bandwidth);

std::vector<ResultRow> run_price(const ExperimentSpec& spec);

std::vector<double> scan_grid(const ExperimentSpec& spec);

/// Bandwidth scan on the first cell of the first panel at the configured order.
BandwidthScan run_bandwidth_scan(const ExperimentSpec& spec);

enum class CheckStatus { Pass, Fail, Inconclusive };

const char* to_string(CheckStatus s);

struct OracleComparison {
    int order = 0;
    double mc_mean = 0.0;
    double mc_stderr = 0.0;
    double quadrature = 0.0;
    CheckStatus status = CheckStatus::Inconclusive;
};

/// Pass if |mc - quad| <= 3 stderr; inconclusive if the standard error exceeds
/// `max_rel_width` of the larger magnitude, so the test would have no power.
CheckStatus classify(double mc_mean, double mc_stderr, double quadrature, double max_rel_width = 0.05);

struct OracleReport {
    std::string panel;
    double spot = 0.0;
    std::vector<OracleComparison> checks;  ///< orders 1 and 2

    bool failed() const;
};

/// Orders 1 and 2 of the particle method against the quadrature oracles, for every
/// Black-Scholes cell. The quadrature delta variance is the h0 bandwidth of the run.
std::vector<OracleReport> run_oracle_check(const ExperimentSpec& spec);

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows);
nlohmann::json rows_to_json(const std::string& name, const std::vector<ResultRow>& rows);
std::vector<ResultRow> rows_from_json(const nlohmann::json& doc);
void write_pretty(std::ostream& os, const ExperimentSpec& spec, const std::vector<ResultRow>& rows);

void write_oracle(std::ostream& os, OutputFormat format, const std::vector<OracleReport>& reports);
void write_scan(std::ostream& os, OutputFormat format, const BandwidthScan& scan);

/// Writes `content` to a sibling temporary file and renames it over `path`.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace fbam
