#pragma once

// Output files. Every report becomes a list of named tables (CSV or JSON)
// plus a JSON summary. Doubles use the shortest round-trip form so reruns are
// byte-identical and files parse back exactly.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "gfa/core/error.hpp"
#include "gfa/harness/bench.hpp"
#include "gfa/harness/config.hpp"
#include "gfa/harness/run.hpp"

namespace gfa::harness {

enum class Format { Csv, Json };

inline Format format_from_string(const std::string& s) {
    if (s == "csv") {
        return Format::Csv;
    }
    if (s == "json") {
        return Format::Json;
    }
    throw Error("invalid_config", "unknown output format '" + s + "' (expected csv or json)");
}

using Cell = std::variant<long long, double, std::string>;

struct Table {
    std::string name;  // file stem
    std::vector<std::string> header;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row) {
        require(row.size() == header.size(), "internal", "row width does not match header of " + name);
        rows.push_back(std::move(row));
    }
};

inline std::string format_double(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string csv_cell(const Cell& c) {
    if (const auto* i = std::get_if<long long>(&c)) {
        return std::to_string(*i);
    }
    if (const auto* d = std::get_if<double>(&c)) {
        return format_double(*d);
    }
    const auto& s = std::get<std::string>(c);
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char ch : s) {
        out += ch;
        if (ch == '"') {
            out += '"';
        }
    }
    return out + "\"";
}

inline std::string to_csv(const Table& t) {
    std::string out;
    for (std::size_t i = 0; i < t.header.size(); ++i) {
        out += (i ? "," : "") + t.header[i];
    }
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out += (i ? "," : "") + csv_cell(row[i]);
        }
        out += '\n';
    }
    return out;
}

inline json cell_json(const Cell& c) {
    if (const auto* i = std::get_if<long long>(&c)) {
        return *i;
    }
    if (const auto* d = std::get_if<double>(&c)) {
        return std::isfinite(*d) ? json(*d) : json(nullptr);
    }
    return std::get<std::string>(c);
}

inline json to_json(const Table& t) {
    json rows = json::array();
    for (const auto& row : t.rows) {
        json o = json::object();
        for (std::size_t i = 0; i < row.size(); ++i) {
            o[t.header[i]] = cell_json(row[i]);
        }
        rows.push_back(std::move(o));
    }
    return json{{"schema_version", kSchemaVersion}, {"columns", t.header}, {"rows", rows}};
}

inline void write_text(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path(), ec);
        require(!ec, "io_error", "cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), "io_error", "cannot open " + path.string() + " for writing");
    out << content;
    out.flush();
    require(static_cast<bool>(out), "io_error", "write failed for " + path.string());
}

/// Writes the tables and the summary; returns the paths written, in order.
inline std::vector<std::string> write_outputs(const std::string& out_dir, const std::vector<Table>& tables,
                                              const std::string& summary_name, const json& summary, Format fmt) {
    std::vector<std::string> written;
    const std::filesystem::path dir(out_dir);
    for (const auto& t : tables) {
        const auto path = dir / (t.name + (fmt == Format::Csv ? ".csv" : ".json"));
        write_text(path, fmt == Format::Csv ? to_csv(t) : to_json(t).dump(2) + "\n");
        written.push_back(path.string());
    }
    const auto path = dir / (summary_name + ".json");
    write_text(path, summary.dump(2) + "\n");
    written.push_back(path.string());
    return written;
}

// ---------------------------------------------------------------------------
// Integrated run.

inline std::string run_stem(const RunReport& r, bool suffix_scheme) {
    return r.name + (suffix_scheme ? std::string("_") + to_string(r.scheme) : std::string());
}

inline Table ccdf_table(const std::string& name, const CcdfCurve& c) {
    Table t{name, {"delay_ms", "ccdf"}, {}};
    for (std::size_t i = 0; i < c.delay_ms.size(); ++i) {
        t.add({c.delay_ms[i], c.ccdf[i]});
    }
    return t;
}

inline std::vector<Table> run_tables(const RunReport& r, bool suffix_scheme) {
    const auto stem = run_stem(r, suffix_scheme);
    std::vector<Table> out;
    out.push_back(ccdf_table("ccdf_bursty_" + stem, r.ccdf_a));
    out.push_back(ccdf_table("ccdf_uniform_" + stem, r.ccdf_b));
    Table rec{"records_" + stem,
              {"trial", "cycle", "arrivals_bursty", "arrivals_uniform", "load_bursty", "load_uniform", "estimate_bursty",
               "estimate_uniform", "prediction_bursty", "prediction_uniform", "w_bursty", "w_uniform", "condition"},
              {}};
    for (const auto& c : r.records) {
        rec.add({static_cast<long long>(c.trial), static_cast<long long>(c.cycle), static_cast<long long>(c.arrivals_a),
                 static_cast<long long>(c.arrivals_b), static_cast<long long>(c.load_a), static_cast<long long>(c.load_b),
                 static_cast<long long>(c.estimate_a), static_cast<long long>(c.estimate_b),
                 static_cast<long long>(c.prediction_a), static_cast<long long>(c.prediction_b),
                 static_cast<long long>(c.w_a), static_cast<long long>(c.w_b), c.condition});
    }
    out.push_back(std::move(rec));
    return out;
}

inline json to_json(const CcdfCurve& c) { return json{{"delay_ms", c.delay_ms}, {"ccdf", c.ccdf}}; }

inline CcdfCurve ccdf_from_json(const json& j) {
    CcdfCurve c;
    c.delay_ms = j.at("delay_ms").get<std::vector<double>>();
    c.ccdf = j.at("ccdf").get<std::vector<double>>();
    require(c.delay_ms.size() == c.ccdf.size(), "invalid_summary", "ccdf columns differ in length");
    return c;
}

inline json to_json(const ClassSummary& s) {
    return json{{"users", s.users},
                {"unserved", s.unserved},
                {"reliability_1ms", s.reliability_1ms},
                {"reliability_1375us", s.reliability_1375us},
                {"estimator_mae", s.estimator_mae},
                {"prediction_mre", s.prediction_mre},
                {"trial_reliability_1ms", s.trial_reliability_1ms},
                {"trial_reliability_1375us", s.trial_reliability_1375us}};
}

inline ClassSummary class_summary_from_json(const json& j) {
    ClassSummary s;
    s.users = j.at("users").get<long>();
    s.unserved = j.at("unserved").get<long>();
    s.reliability_1ms = j.at("reliability_1ms").get<double>();
    s.reliability_1375us = j.at("reliability_1375us").get<double>();
    s.estimator_mae = j.at("estimator_mae").get<double>();
    s.prediction_mre = j.at("prediction_mre").get<double>();
    s.trial_reliability_1ms = j.at("trial_reliability_1ms").get<std::vector<double>>();
    s.trial_reliability_1375us = j.at("trial_reliability_1375us").get<std::vector<double>>();
    return s;
}

/// The parts of a run report that survive into its summary file.
struct RunSummary {
    std::string name;
    AllocationScheme scheme = AllocationScheme::Adaptive;
    int trials = 0;
    int cycles = 0;
    long outage_cycles = 0;
    ClassSummary bursty;
    ClassSummary uniform;
    CcdfCurve ccdf_bursty;
    CcdfCurve ccdf_uniform;
};

inline RunSummary summarize(const RunReport& r) {
    return {r.name, r.scheme, r.trials, r.cycles, r.outage_cycles, r.a, r.b, r.ccdf_a, r.ccdf_b};
}

inline json to_json(const RunSummary& s) {
    return json{{"schema_version", kSchemaVersion},
                {"kind", "run"},
                {"name", s.name},
                {"scheme", to_string(s.scheme)},
                {"trials", s.trials},
                {"cycles", s.cycles},
                {"outage_cycles", s.outage_cycles},
                {"bursty", to_json(s.bursty)},
                {"uniform", to_json(s.uniform)},
                {"ccdf_bursty", to_json(s.ccdf_bursty)},
                {"ccdf_uniform", to_json(s.ccdf_uniform)}};
}

inline RunSummary run_summary_from_json(const json& j) {
    try {
        require(j.at("schema_version").get<int>() == kSchemaVersion, "invalid_summary", "unsupported schema_version");
        require(j.at("kind").get<std::string>() == "run", "invalid_summary", "not a run summary");
        RunSummary s;
        s.name = j.at("name").get<std::string>();
        s.scheme = allocation_scheme_from_string(j.at("scheme").get<std::string>());
        s.trials = j.at("trials").get<int>();
        s.cycles = j.at("cycles").get<int>();
        s.outage_cycles = j.at("outage_cycles").get<long>();
        s.bursty = class_summary_from_json(j.at("bursty"));
        s.uniform = class_summary_from_json(j.at("uniform"));
        s.ccdf_bursty = ccdf_from_json(j.at("ccdf_bursty"));
        s.ccdf_uniform = ccdf_from_json(j.at("ccdf_uniform"));
        return s;
    } catch (const json::exception& e) {
        throw Error("invalid_summary", std::string("malformed run summary: ") + e.what());
    }
}

inline std::vector<std::string> emit_run(const RunReport& r, const std::string& out_dir, Format fmt,
                                         bool suffix_scheme = false) {
    return write_outputs(out_dir, run_tables(r, suffix_scheme), "summary_" + run_stem(r, suffix_scheme),
                         to_json(summarize(r)), fmt);
}

// ---------------------------------------------------------------------------
// Benches.

inline json to_json(const MeanSe& m) {
    return json{{"mean", m.mean}, {"se", m.se}, {"upper95", m.upper95}, {"n", m.n}};
}

inline std::vector<std::string> emit_estimation(const EstimationBenchReport& r, const std::string& name,
                                                const std::string& out_dir, Format fmt) {
    Table rows{"estimation_" + name, {"n", "estimator", "occupation", "trials", "mean", "mae"}, {}};
    for (const auto& x : r.rows) {
        rows.add({static_cast<long long>(x.n), x.estimator, x.occupation, static_cast<long long>(x.trials), x.mean, x.mae});
    }
    Table paired{"estimation_paired_" + name, {"n", "better", "worse", "occupation", "mean_diff", "se", "upper95"}, {}};
    for (const auto& p : r.paired) {
        paired.add({static_cast<long long>(p.n), p.better, p.worse, p.occupation, p.diff.mean, p.diff.se, p.diff.upper95});
    }
    json pj = json::array();
    for (const auto& p : r.paired) {
        pj.push_back({{"n", p.n}, {"better", p.better}, {"worse", p.worse}, {"occupation", p.occupation}, {"diff", to_json(p.diff)}});
    }
    const json summary{{"schema_version", kSchemaVersion}, {"kind", "estimation"}, {"name", name}, {"paired", pj}};
    return write_outputs(out_dir, {rows, paired}, "summary_estimation_" + name, summary, fmt);
}

inline std::vector<std::string> emit_failprob(const std::vector<FailprobRow>& rows, const std::string& name,
                                              const std::string& out_dir, Format fmt) {
    Table t{"failprob_" + name, {"occupation", "k", "w", "analytical", "empirical", "abs_error", "cycles"}, {}};
    double max_adj = 0.0;
    for (const auto& r : rows) {
        t.add({r.occupation, static_cast<long long>(r.k), static_cast<long long>(r.w), r.analytical, r.empirical,
               r.abs_error, static_cast<long long>(r.cycles)});
        if (r.occupation == "adjacent") {
            max_adj = std::max(max_adj, r.abs_error);
        }
    }
    const json summary{{"schema_version", kSchemaVersion},
                       {"kind", "failprob"},
                       {"name", name},
                       {"points", rows.size()},
                       {"max_abs_error_adjacent", max_adj}};
    return write_outputs(out_dir, {t}, "summary_failprob_" + name, summary, fmt);
}

inline json to_json(const prediction::ArimaSpec& s) {
    return json{{"p", s.p}, {"d", s.d}, {"q", s.q}, {"c", s.c}, {"ar", s.ar}, {"ma", s.ma}, {"sigma2", s.sigma2}};
}

inline std::vector<std::string> emit_prediction(const PredictionBenchReport& r, const std::string& name,
                                                const std::string& out_dir, Format fmt) {
    Table diag{"prediction_diagnostics_" + name, {"regeneration", "dw", "aic", "best_p", "best_q", "best_aic"}, {}};
    for (const auto& d : r.diagnostics) {
        diag.add({static_cast<long long>(d.regeneration), d.dw, d.aic, static_cast<long long>(d.best_p),
                  static_cast<long long>(d.best_q), d.best_aic});
    }
    Table grid{"prediction_grid_" + name, {"regeneration", "p", "q", "aic", "dw"}, {}};
    for (const auto& g : r.grid) {
        grid.add({static_cast<long long>(g.regeneration), static_cast<long long>(g.p), static_cast<long long>(g.q), g.aic, g.dw});
    }
    Table reps{"prediction_replications_" + name, {"replication", "arima_mre", "masw_mre"}, {}};
    for (const auto& x : r.replications) {
        reps.add({static_cast<long long>(x.replication), x.arima_mre, x.masw_mre});
    }
    Table sweep{"prediction_masw_sweep_" + name, {"window", "mean_mre"}, {}};
    for (const auto& [w, e] : r.masw_sweep) {
        sweep.add({static_cast<long long>(w), e});
    }
    Table trace{"prediction_trace_" + name, {"cycle", "truth", "estimate", "arima", "masw"}, {}};
    for (const auto& t : r.trace) {
        trace.add({static_cast<long long>(t.cycle), static_cast<long long>(t.truth), static_cast<long long>(t.estimate),
                   static_cast<long long>(t.arima), static_cast<long long>(t.masw)});
    }
    const json summary{{"schema_version", kSchemaVersion},
                       {"kind", "prediction"},
                       {"name", name},
                       {"model", to_json(r.model)},
                       {"arima_mre", to_json(r.arima)},
                       {"masw_mre", to_json(r.masw)},
                       {"arima_minus_masw", to_json(r.diff)},
                       {"regenerations", r.diagnostics.size()},
                       {"dw_in_range", r.dw_in_range},
                       {"order_aic_minimal", r.order_aic_minimal}};
    return write_outputs(out_dir, {diag, grid, reps, sweep, trace}, "summary_prediction_" + name, summary, fmt);
}

inline std::vector<std::string> emit_negotiation(const NegotiationReport& r, const std::string& name,
                                                 const std::string& out_dir, Format fmt) {
    Table curve{"negotiation_" + name, {"delta", "fail_A", "fail_B", "w_A", "w_B"}, {}};
    for (const auto& p : r.curve) {
        curve.add({p.delta, p.fail_donor, p.fail_receiver, static_cast<long long>(p.w_donor),
                   static_cast<long long>(p.w_receiver)});
    }
    Table hits{"negotiation_scan_" + name, {"pred_A", "pred_B", "w_A", "w_B"}, {}};
    for (const auto& h : r.scan_hits) {
        hits.add({static_cast<long long>(h.pred_a), static_cast<long long>(h.pred_b), static_cast<long long>(h.w_a),
                  static_cast<long long>(h.w_b)});
    }
    json outcomes = json::array();
    for (const auto& o : r.outcomes) {
        outcomes.push_back({{"floor_A", o.floor_a},
                            {"floor_B", o.floor_b},
                            {"delta", o.delta ? json(*o.delta) : json(nullptr)},
                            {"outage", o.outage}});
    }
    const json summary{{"schema_version", kSchemaVersion}, {"kind", "negotiation"}, {"name", name},
                       {"outcomes", outcomes}, {"scan_points", r.scan_points}, {"scan_hits", r.scan_hits.size()}};
    return write_outputs(out_dir, {curve, hits}, "summary_negotiation_" + name, summary, fmt);
}

}  // namespace gfa::harness
