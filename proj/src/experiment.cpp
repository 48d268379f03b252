#include "fbam/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace fbam {

using nlohmann::json;

OutputFormat parse_format(const std::string& name) {
    if (name == "csv") return OutputFormat::Csv;
    if (name == "json") return OutputFormat::Json;
    if (name == "pretty" || name == "pretty-table") return OutputFormat::Pretty;
    throw std::invalid_argument("output.format: expected csv, json or pretty, got '" + name + "'");
}

namespace {

[[noreturn]] void field_error(const std::string& field, const std::string& what) {
    throw std::invalid_argument(field + ": " + what);
}

double get_number(const json& obj, const std::string& key, const std::string& path) {
    const auto it = obj.find(key);
    if (it == obj.end()) field_error(path + key, "missing");
    if (!it->is_number()) field_error(path + key, "expected a number");
    return it->get<double>();
}

double get_number_or(const json& obj, const std::string& key, const std::string& path, double fallback) {
    return obj.contains(key) ? get_number(obj, key, path) : fallback;
}

std::uint64_t get_count(const json& obj, const std::string& key, const std::string& path) {
    const double v = get_number(obj, key, path);
    if (!(v >= 0.0) || v != std::floor(v) || v > 9.0e15) field_error(path + key, "expected a non-negative integer");
    return static_cast<std::uint64_t>(v);
}

std::vector<double> get_numbers(const json& obj, const std::string& key, const std::string& path) {
    const auto it = obj.find(key);
    if (it == obj.end()) field_error(path + key, "missing");
    if (!it->is_array()) field_error(path + key, "expected a list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < it->size(); ++i) {
        if (!(*it)[i].is_number()) field_error(path + key + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back((*it)[i].get<double>());
    }
    return out;
}

/// Model block; `base` supplies defaults so panels can override single fields.
ModelParams parse_model(const json& m, const std::string& path, const ModelParams* base) {
    if (!m.is_object()) field_error(path.substr(0, path.size() - 1), "expected an object");
    std::string type;
    if (m.contains("type")) {
        if (!m["type"].is_string()) field_error(path + "type", "expected a string");
        type = m["type"].get<std::string>();
    } else if (base) {
        type = is_heston(*base) ? "heston" : "black_scholes";
    } else {
        field_error(path + "type", "missing");
    }
    if (type == "black_scholes" || type == "bs") {
        BlackScholesParams p;
        if (base && !is_heston(*base)) p = std::get<BlackScholesParams>(*base);
        p.r = get_number_or(m, "r", path, p.r);
        p.y = get_number_or(m, "y", path, p.y);
        p.sigma = get_number_or(m, "sigma", path, p.sigma);
        return p;
    }
    if (type == "heston") {
        HestonParams p;
        if (base && is_heston(*base)) p = std::get<HestonParams>(*base);
        p.r = get_number_or(m, "r", path, p.r);
        p.y = get_number_or(m, "y", path, p.y);
        if (m.contains("sigma")) {
            const double s = get_number(m, "sigma", path);
            p.v0 = s * s;
        }
        p.v0 = get_number_or(m, "v0", path, p.v0);
        p.xi = get_number_or(m, "xi", path, p.xi);
        p.theta = get_number_or(m, "theta", path, p.theta);
        p.eta = get_number_or(m, "eta", path, p.eta);
        p.rho = get_number_or(m, "rho", path, p.rho);
        return p;
    }
    field_error(path + "type", "expected black_scholes or heston, got '" + type + "'");
}

void rethrow_as_field(const std::string& field, const std::function<void()>& check) {
    try {
        check();
    } catch (const std::invalid_argument& e) {
        field_error(field, e.what());
    }
}

}  // namespace

void ExperimentSpec::validate() const {
    if (panels.empty()) field_error("panels", "at least one panel with spots is required");
    if (!(strike > 0.0)) field_error("option.strike", "must be > 0");
    if (!(expiry > 0.0)) field_error("option.expiry", "must be > 0");
    for (std::size_t i = 0; i < panels.size(); ++i) {
        const Panel& p = panels[i];
        const std::string where = "panels[" + std::to_string(i) + "]";
        rethrow_as_field(where + ".model", [&] { std::visit([](const auto& m) { m.validate(); }, p.model); });
        if (p.spots.empty()) field_error(where + ".spots", "must not be empty");
        for (std::size_t k = 0; k < p.spots.size(); ++k)
            if (!(p.spots[k] > 0.0)) field_error(where + ".spots[" + std::to_string(k) + "]", "must be > 0");
        if (!p.benchmarks.empty() && p.benchmarks.size() != p.spots.size())
            field_error(where + ".benchmarks", "must align 1:1 with spots");
        if (is_heston(p.model) && sim.order > 3)
            field_error("sim.order", "order 4 is only available for the Black-Scholes model");
    }
    rethrow_as_field("sim", [&] { sim.validate(); });
    if (scan_bandwidth) {
        if (scan.count < 2) field_error("sim.scan.count", "must be >= 2");
        if (scan.hi < 0.0 || scan.lo < 0.0 || (scan.hi > 0.0 && scan.lo > 0.0 && !(scan.hi > scan.lo)))
            field_error("sim.scan", "expected hi > lo > 0");
    }
}

ExperimentSpec parse_experiment(const json& doc) {
    if (!doc.is_object()) throw std::invalid_argument("experiment: expected a JSON object");
    ExperimentSpec spec;
    if (doc.contains("name")) spec.name = doc["name"].get<std::string>();

    if (!doc.contains("model")) field_error("model", "missing");
    const ModelParams base = parse_model(doc["model"], "model.", nullptr);

    if (!doc.contains("option") || !doc["option"].is_object()) field_error("option", "missing");
    const json& opt = doc["option"];
    if (opt.contains("kind")) {
        const std::string kind = opt["kind"].get<std::string>();
        if (kind == "put") spec.kind = OptionKind::Put;
        else if (kind == "call") spec.kind = OptionKind::Call;
        else field_error("option.kind", "expected put or call, got '" + kind + "'");
    }
    spec.strike = get_number(opt, "strike", "option.");
    spec.expiry = get_number(opt, "expiry", "option.");

    if (doc.contains("panels")) {
        if (!doc["panels"].is_array()) field_error("panels", "expected a list");
        for (std::size_t i = 0; i < doc["panels"].size(); ++i) {
            const json& pj = doc["panels"][i];
            const std::string where = "panels[" + std::to_string(i) + "].";
            Panel p;
            if (pj.contains("label")) p.label = pj["label"].get<std::string>();
            p.model = pj.contains("model") ? parse_model(pj["model"], where + "model.", &base) : base;
            p.spots = get_numbers(pj, "spots", where);
            if (pj.contains("benchmarks")) p.benchmarks = get_numbers(pj, "benchmarks", where);
            spec.panels.push_back(std::move(p));
        }
    } else {
        Panel p;
        p.model = base;
        p.spots = get_numbers(opt, "spots", "option.");
        if (doc.contains("benchmarks")) p.benchmarks = get_numbers(doc, "benchmarks", "");
        spec.panels.push_back(std::move(p));
    }

    if (doc.contains("sim")) {
        const json& s = doc["sim"];
        if (!s.is_object()) field_error("sim", "expected an object");
        if (s.contains("paths")) spec.sim.n_paths = get_count(s, "paths", "sim.");
        if (s.contains("steps")) spec.sim.n_steps = static_cast<int>(get_count(s, "steps", "sim."));
        if (s.contains("lambda")) spec.sim.lambda = get_number(s, "lambda", "sim.");
        if (s.contains("order")) spec.sim.order = static_cast<int>(get_count(s, "order", "sim."));
        if (s.contains("seed")) spec.sim.seed = get_count(s, "seed", "sim.");
        if (s.contains("workers")) spec.sim.workers = static_cast<unsigned>(get_count(s, "workers", "sim."));
        if (s.contains("independent_orders")) spec.sim.independent_orders = s["independent_orders"].get<bool>();
        if (s.contains("bandwidth")) {
            const json& b = s["bandwidth"];
            if (b.is_string()) {
                if (b.get<std::string>() != "scan") field_error("sim.bandwidth", "expected a number, an object or \"scan\"");
                spec.scan_bandwidth = true;
            } else if (b.is_number()) {
                spec.sim.mollifier = MollifierConfig::uniform(b.get<double>());
            } else if (b.is_object()) {
                const double h0 = get_number(b, "h0", "sim.bandwidth.");
                spec.sim.mollifier = {h0, get_number_or(b, "h1", "sim.bandwidth.", h0),
                                      get_number_or(b, "h2", "sim.bandwidth.", h0)};
            } else {
                field_error("sim.bandwidth", "expected a number, an object or \"scan\"");
            }
        }
        if (s.contains("scan")) {
            const json& g = s["scan"];
            spec.scan.hi = get_number_or(g, "hi", "sim.scan.", 0.0);
            spec.scan.lo = get_number_or(g, "lo", "sim.scan.", 0.0);
            if (g.contains("count")) spec.scan.count = get_count(g, "count", "sim.scan.");
        }
    }

    if (doc.contains("output")) {
        const json& o = doc["output"];
        if (o.contains("path")) spec.output_path = o["path"].get<std::string>();
        if (o.contains("format")) spec.format = parse_format(o["format"].get<std::string>());
    }
    return spec;
}

ExperimentSpec load_experiment(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open experiment file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
    ExperimentSpec spec = parse_experiment(doc);
    if (spec.name.empty()) spec.name = std::filesystem::path(path).stem().string();
    return spec;
}

double error_ratio(double value, double benchmark) {
    if (benchmark == 0.0) throw std::invalid_argument("error ratio: benchmark must be nonzero");
    return 100.0 * (value - benchmark) / benchmark;
}

ResultRow make_row(const std::string& panel, double spot, std::optional<double> benchmark,
                   const ExpansionResult& result, double bandwidth) {
    ResultRow row;
    row.panel = panel;
    row.spot = spot;
    row.benchmark = benchmark;
    row.value = result.cumulative;
    row.stderr_ = result.cumulative_stderr;
    row.bandwidth = bandwidth;
    if (benchmark)
        for (double v : row.value) row.error_ratio.push_back(error_ratio(v, *benchmark));
    return row;
}

std::vector<double> scan_grid(const ExperimentSpec& spec) {
    const double k2 = spec.strike * spec.strike;
    const double hi = spec.scan.hi > 0.0 ? spec.scan.hi : k2 * 1e-2;
    const double lo = spec.scan.lo > 0.0 ? spec.scan.lo : k2 * 1e-6;
    return geometric_grid(hi, lo, spec.scan.count);
}

namespace {

struct CellScan {
    BandwidthScan scan;
    std::vector<ExpansionResult> results;
};

CellScan scan_cell(const ExperimentSpec& spec, const ModelParams& model, double spot) {
    const auto grid = scan_grid(spec);
    const int order = spec.sim.order;
    CellScan out;
    out.scan = select_bandwidth(
        [&](double h) {
            SimConfig cfg = spec.sim;
            cfg.mollifier = MollifierConfig::uniform(h);
            out.results.push_back(price_american(model, spec.option(spot), cfg));
            const auto& r = out.results.back();
            return ScanPoint{h, r.cumulative[order], r.cumulative_stderr[order]};
        },
        grid);
    return out;
}

}  // namespace

std::vector<ResultRow> run_price(const ExperimentSpec& spec) {
    spec.validate();
    std::vector<ResultRow> rows;
    for (const Panel& panel : spec.panels) {
        for (std::size_t i = 0; i < panel.spots.size(); ++i) {
            const double spot = panel.spots[i];
            const std::optional<double> bench =
                panel.benchmarks.empty() ? std::nullopt : std::optional<double>(panel.benchmarks[i]);
            if (spec.scan_bandwidth && spec.sim.order >= 2) {
                CellScan cs = scan_cell(spec, panel.model, spot);
                rows.push_back(make_row(panel.label, spot, bench, cs.results[cs.scan.selected_index],
                                        cs.scan.selected_h));
            } else {
                const auto r = price_american(panel.model, spec.option(spot), spec.sim);
                rows.push_back(make_row(panel.label, spot, bench, r, spec.sim.mollifier.h0));
            }
        }
    }
    return rows;
}

BandwidthScan run_bandwidth_scan(const ExperimentSpec& spec) {
    spec.validate();
    const Panel& panel = spec.panels.front();
    return scan_cell(spec, panel.model, panel.spots.front()).scan;
}

const char* to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::Pass: return "pass";
        case CheckStatus::Fail: return "fail";
        case CheckStatus::Inconclusive: return "inconclusive";
    }
    return "?";
}

CheckStatus classify(double mc_mean, double mc_stderr, double quadrature, double max_rel_width) {
    const double scale = std::max(std::abs(mc_mean), std::abs(quadrature));
    if (mc_stderr > max_rel_width * scale) return CheckStatus::Inconclusive;
    return std::abs(mc_mean - quadrature) <= 3.0 * mc_stderr ? CheckStatus::Pass : CheckStatus::Fail;
}

bool OracleReport::failed() const {
    for (const auto& c : checks)
        if (c.status == CheckStatus::Fail) return true;
    return false;
}

std::vector<OracleReport> run_oracle_check(const ExperimentSpec& spec) {
    spec.validate();
    std::vector<OracleReport> reports;
    for (const Panel& panel : spec.panels) {
        if (is_heston(panel.model)) throw std::invalid_argument("oracle-check requires the Black-Scholes model");
        const auto& bs = std::get<BlackScholesParams>(panel.model);
        for (double spot : panel.spots) {
            const OptionSpec opt = spec.option(spot);
            QuadratureConfig qc;
            qc.delta_variance = spec.sim.mollifier.h0;
            SimConfig cfg = spec.sim;
            cfg.order = 2;
            const ExpansionResult r = price_american(bs, opt, cfg);
            const double q1 = quadrature_v1(bs, opt, qc);
            const double q2 = quadrature_v2(bs, opt, qc);
            OracleReport rep{panel.label, spot, {}};
            rep.checks.push_back({1, r.mean[1], r.stderr_[1], q1, classify(r.mean[1], r.stderr_[1], q1)});
            rep.checks.push_back({2, r.mean[2], r.stderr_[2], q2, classify(r.mean[2], r.stderr_[2], q2)});
            reports.push_back(std::move(rep));
        }
    }
    return reports;
}

namespace {

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string num(double v) { return fmt("%.10g", v); }

}  // namespace

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
    os << "S0,benchmark";
    for (const char* col : {"v", "se", "er"})
        for (int k = 0; k <= kMaxOrder; ++k) os << ',' << col << k;
    os << '\n';
    for (const auto& row : rows) {
        os << num(row.spot) << ',';
        if (row.benchmark) os << num(*row.benchmark);
        for (const auto* vals : {&row.value, &row.stderr_, &row.error_ratio})
            for (int k = 0; k <= kMaxOrder; ++k) {
                os << ',';
                if (static_cast<std::size_t>(k) < vals->size()) os << num((*vals)[k]);
            }
        os << '\n';
    }
}

json rows_to_json(const std::string& name, const std::vector<ResultRow>& rows) {
    json out;
    out["experiment"] = name;
    out["rows"] = json::array();
    for (const auto& row : rows) {
        json r;
        r["panel"] = row.panel;
        r["S0"] = row.spot;
        r["benchmark"] = row.benchmark ? json(*row.benchmark) : json(nullptr);
        r["value"] = row.value;
        r["stderr"] = row.stderr_;
        r["error_ratio"] = row.error_ratio;
        r["bandwidth"] = row.bandwidth;
        out["rows"].push_back(std::move(r));
    }
    return out;
}

std::vector<ResultRow> rows_from_json(const json& doc) {
    std::vector<ResultRow> rows;
    for (const auto& r : doc.at("rows")) {
        ResultRow row;
        row.panel = r.at("panel").get<std::string>();
        row.spot = r.at("S0").get<double>();
        if (!r.at("benchmark").is_null()) row.benchmark = r["benchmark"].get<double>();
        row.value = r.at("value").get<std::vector<double>>();
        row.stderr_ = r.at("stderr").get<std::vector<double>>();
        row.error_ratio = r.at("error_ratio").get<std::vector<double>>();
        row.bandwidth = r.at("bandwidth").get<double>();
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_pretty(std::ostream& os, const ExperimentSpec& spec, const std::vector<ResultRow>& rows) {
    static const char* names[] = {"0th", "1st", "2nd", "3rd", "4th"};
    const int order = spec.sim.order;
    const SimConfig& s = spec.sim;
    os << (spec.name.empty() ? "experiment" : spec.name) << ": " << (spec.kind == OptionKind::Put ? "put" : "call")
       << ", K=" << num(spec.strike) << ", T=" << num(spec.expiry) << '\n';

    auto header = [&] {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%-14s%6s%11s", "", "S0", "Benchmark");
        os << buf;
        for (int k = 0; k <= order; ++k) {
            std::snprintf(buf, sizeof buf, "%17s", names[k]);
            os << buf;
        }
        os << '\n';
    };
    auto label_col = [&](const std::string& label, bool first) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%-14s", first ? label.c_str() : "");
        return std::string(buf);
    };

    bool any_bench = false;
    os << "\nPrices (standard errors)\n";
    header();
    std::string current;
    bool first_in_panel = true;
    for (const auto& row : rows) {
        first_in_panel = row.panel != current || &row == &rows.front();
        current = row.panel;
        any_bench = any_bench || row.benchmark.has_value();
        os << label_col(row.panel, first_in_panel) << fmt("%6.0f", row.spot)
           << (row.benchmark ? fmt("%11.3f", *row.benchmark) : std::string(11, ' '));
        for (int k = 0; k <= order; ++k) os << fmt("%9.3f", row.value[k]) << fmt(" (%.3f)", row.stderr_[k]);
        os << '\n';
    }
    if (any_bench) {
        os << "\nError ratio (%)\n";
        header();
        current.clear();
        for (const auto& row : rows) {
            first_in_panel = row.panel != current || &row == &rows.front();
            current = row.panel;
            if (!row.benchmark) continue;
            os << label_col(row.panel, first_in_panel) << fmt("%6.0f", row.spot) << fmt("%11.3f", *row.benchmark);
            for (int k = 0; k <= order; ++k) os << fmt("%16.3f%%", row.error_ratio[k]);
            os << '\n';
        }
        os << "error ratio = 100*(value-benchmark)/benchmark\n";
    }
    os << "\npaths=" << s.n_paths << " steps=" << s.n_steps << " lambda=" << num(s.lambda) << " seed=" << s.seed;
    if (spec.scan_bandwidth)
        os << " bandwidth=scan";
    else
        os << " h0=" << num(s.mollifier.h0) << " h1=" << num(s.mollifier.h1) << " h2=" << num(s.mollifier.h2);
    os << '\n';
}

void write_oracle(std::ostream& os, OutputFormat format, const std::vector<OracleReport>& reports) {
    if (format == OutputFormat::Json) {
        json out = json::array();
        for (const auto& rep : reports)
            for (const auto& c : rep.checks)
                out.push_back({{"panel", rep.panel}, {"S0", rep.spot}, {"order", c.order}, {"mc_mean", c.mc_mean},
                               {"mc_stderr", c.mc_stderr}, {"quadrature", c.quadrature},
                               {"status", to_string(c.status)}});
        os << out.dump(2) << '\n';
        return;
    }
    if (format == OutputFormat::Csv) {
        os << "panel,S0,order,mc_mean,mc_stderr,quadrature,status\n";
        for (const auto& rep : reports)
            for (const auto& c : rep.checks)
                os << rep.panel << ',' << num(rep.spot) << ',' << c.order << ',' << num(c.mc_mean) << ','
                   << num(c.mc_stderr) << ',' << num(c.quadrature) << ',' << to_string(c.status) << '\n';
        return;
    }
    for (const auto& rep : reports) {
        os << (rep.panel.empty() ? std::string() : rep.panel + " ") << "S0=" << num(rep.spot) << '\n';
        for (const auto& c : rep.checks)
            os << "  V" << c.order << "  particle " << fmt("%10.6f", c.mc_mean) << " +/- " << fmt("%.6f", c.mc_stderr)
               << "  quadrature " << fmt("%10.6f", c.quadrature) << "  " << to_string(c.status) << '\n';
    }
}

void write_scan(std::ostream& os, OutputFormat format, const BandwidthScan& scan) {
    if (format == OutputFormat::Json) {
        json pts = json::array();
        for (const auto& p : scan.points) pts.push_back({{"h", p.h}, {"mean", p.mean}, {"stderr", p.stderr_}});
        os << json{{"points", pts}, {"selected_h", scan.selected_h}}.dump(2) << '\n';
        return;
    }
    if (format == OutputFormat::Csv) {
        write_scan_csv(os, scan);
        return;
    }
    os << "           h          mean      stderr\n";
    for (std::size_t i = 0; i < scan.points.size(); ++i) {
        const auto& p = scan.points[i];
        os << fmt("%12.6g", p.h) << fmt("  %12.6f", p.mean) << fmt("  %10.6f", p.stderr_)
           << (i == scan.selected_index ? "  <- selected" : "") << '\n';
    }
}

void write_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, target);
}

}  // namespace fbam
