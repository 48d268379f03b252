#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "fbam/experiment.hpp"

#ifndef FBAM_EXPERIMENT_DIR
#define FBAM_EXPERIMENT_DIR "experiments"
#endif

namespace {

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> paths;
    std::optional<int> steps;
    std::optional<int> order;
    std::optional<double> lambda;
    std::optional<unsigned> workers;
    std::optional<std::string> output;
    std::optional<std::string> format;
    bool strict = false;
};

void add_common(CLI::App* cmd, Overrides& o, bool needs_config) {
    auto* cfg = cmd->add_option("--config", o.config, "experiment file (JSON)");
    if (needs_config) cfg->required();
    cmd->add_option("--seed", o.seed, "random seed");
    cmd->add_option("--paths", o.paths, "Monte Carlo paths per cell");
    cmd->add_option("--steps", o.steps, "time steps");
    cmd->add_option("--order", o.order, "highest expansion order (0-4)");
    cmd->add_option("--lambda", o.lambda, "interaction intensity");
    cmd->add_option("--workers", o.workers, "worker threads (overrides FBAM_WORKERS)");
    cmd->add_option("--output", o.output, "output file, written atomically (default stdout)");
    cmd->add_option("--format", o.format, "csv | json | pretty");
    cmd->add_flag("--strict", o.strict, "oracle-check: exit nonzero on a failed comparison");
}

std::string find_table(const std::string& name) {
    namespace fs = std::filesystem;
    if (fs::exists(name) && fs::is_regular_file(name)) return name;
    for (const fs::path dir : {fs::path("experiments"), fs::path(FBAM_EXPERIMENT_DIR)}) {
        const fs::path p = dir / (name + ".json");
        if (fs::exists(p)) return p.string();
    }
    throw std::runtime_error("unknown table '" + name + "' (looked for " + name + ".json under experiments/)");
}

fbam::ExperimentSpec load(const std::string& path, const Overrides& o) {
    fbam::ExperimentSpec spec = fbam::load_experiment(path);
    if (const char* env = std::getenv("FBAM_WORKERS"); env && *env) {
        char* end = nullptr;
        const unsigned long w = std::strtoul(env, &end, 10);
        if (*end != '\0' || w == 0) throw std::invalid_argument("FBAM_WORKERS: expected a positive integer");
        spec.sim.workers = static_cast<unsigned>(w);
    }
    if (o.seed) spec.sim.seed = *o.seed;
    if (o.paths) spec.sim.n_paths = *o.paths;
    if (o.steps) spec.sim.n_steps = *o.steps;
    if (o.order) spec.sim.order = *o.order;
    if (o.lambda) spec.sim.lambda = *o.lambda;
    if (o.workers) spec.sim.workers = *o.workers;
    if (o.output) spec.output_path = *o.output;
    if (o.format) spec.format = fbam::parse_format(*o.format);
    spec.validate();
    if (auto w = fbam::feller_warning(spec.panels.front().model)) std::cerr << "warning: " << *w << '\n';
    return spec;
}

void emit(const fbam::ExperimentSpec& spec, const std::string& text) {
    if (spec.output_path.empty())
        std::cout << text << std::flush;
    else
        fbam::write_atomic(spec.output_path, text);
}

std::string render_rows(const fbam::ExperimentSpec& spec, const std::vector<fbam::ResultRow>& rows) {
    std::ostringstream os;
    switch (spec.format) {
        case fbam::OutputFormat::Csv: fbam::write_csv(os, rows); break;
        case fbam::OutputFormat::Json: os << fbam::rows_to_json(spec.name, rows).dump(2) << '\n'; break;
        case fbam::OutputFormat::Pretty: fbam::write_pretty(os, spec, rows); break;
    }
    return os.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"American option pricing by perturbative expansion of the early-exercise premium"};
    app.require_subcommand(1);

    Overrides o;
    std::string table_name;
    auto* price = app.add_subcommand("price", "price every cell of an experiment file");
    add_common(price, o, true);
    auto* table = app.add_subcommand("table", "reproduce a shipped table (table1, table4_t025, ...)");
    table->add_option("name", table_name, "table name or path")->required();
    add_common(table, o, false);
    auto* oracle = app.add_subcommand("oracle-check", "orders 1 and 2 against the quadrature oracles");
    add_common(oracle, o, true);
    auto* scan = app.add_subcommand("bandwidth-scan", "scan the mollifier bandwidth on the first cell");
    add_common(scan, o, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (price->parsed() || table->parsed()) {
            const std::string path = table->parsed() ? find_table(table_name) : o.config;
            const fbam::ExperimentSpec spec = load(path, o);
            emit(spec, render_rows(spec, fbam::run_price(spec)));
            return 0;
        }
        if (oracle->parsed()) {
            const fbam::ExperimentSpec spec = load(o.config, o);
            const auto reports = fbam::run_oracle_check(spec);
            std::ostringstream os;
            fbam::write_oracle(os, spec.format, reports);
            emit(spec, os.str());
            bool failed = false;
            for (const auto& r : reports) failed = failed || r.failed();
            return failed && o.strict ? 3 : 0;
        }
        if (scan->parsed()) {
            fbam::ExperimentSpec spec = load(o.config, o);
            const auto result = fbam::run_bandwidth_scan(spec);
            std::ostringstream os;
            fbam::write_scan(os, spec.format, result);
            emit(spec, os.str());
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
