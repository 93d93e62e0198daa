// Acceptance runner: one PASS/FAIL line per criterion, sub-check details
// indented beneath it. Exit status is nonzero if any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gfa/allocation.hpp"
#include "gfa/estimation/markov.hpp"
#include "gfa/harness/bench.hpp"
#include "gfa/harness/config.hpp"
#include "gfa/harness/emit.hpp"
#include "gfa/harness/run.hpp"
#include "../support/oracles.hpp"

namespace fs = std::filesystem;
using namespace gfa;
using namespace gfa::harness;

namespace {

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
    bool gated = true;  // informational lines never fail a criterion
};

struct Outcome {
    std::vector<Check> checks;

    void gate(std::string name, bool pass, std::string detail) { checks.push_back({std::move(name), pass, std::move(detail), true}); }
    void info(std::string name, std::string detail) { checks.push_back({std::move(name), true, std::move(detail), false}); }
    bool pass() const {
        return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return !c.gated || c.pass; });
    }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string config_path(const std::string& name) { return std::string(GFA_SOURCE_DIR) + "/configs/" + name; }

// ---------------------------------------------------------------------------

std::map<oracle::Abc, double> table_dist(const estimation::StepProbTable& table, int n) {
    std::map<oracle::Abc, double> out;
    for (const auto& [s, p] : table.entries(n)) {
        out[{s.a, s.b, s.c}] = p;
    }
    return out;
}

double max_gap(const std::map<oracle::Abc, double>& x, const std::map<oracle::Abc, double>& y) {
    double gap = 0.0;
    for (const auto& [s, p] : x) {
        const auto it = y.find(s);
        gap = std::max(gap, std::abs(p - (it == y.end() ? 0.0 : it->second)));
    }
    for (const auto& [s, p] : y) {
        if (!x.count(s)) {
            gap = std::max(gap, p);
        }
    }
    return gap;
}

Outcome criterion_1(const fs::path&) {
    Outcome o;
    double single_gap = 0.0;
    int single_cases = 0;
    for (int w = 1; w <= 3; ++w) {
        const auto table = estimation::build_single_slot_model(w, 4).table;
        for (int n = 0; n <= 4; ++n) {
            single_gap = std::max(single_gap, max_gap(table_dist(table, n), oracle::single_slot(w, n)));
            ++single_cases;
        }
    }
    o.gate("single-slot chain vs enumeration", single_gap <= 1e-12,
           std::to_string(single_cases) + " cases, max gap " + fmt("%.3g", single_gap));

    double pooled_gap = 0.0;
    double slotwise_gap = 0.0;
    int cases = 0;
    int slotwise_bad = 0;
    std::string worst;
    for (int w = 1; w <= 3; ++w) {
        for (int t = 1; t <= 4; ++t) {
            for (int k = 1; k <= t; ++k) {
                const auto table = estimation::build_whole_cycle_model(w, t, k, 4).table;
                const auto pooled = oracle::pooled_choices(w, t, k);
                const auto slotwise = oracle::arbitrary_choices(w, t, k);
                for (int n = 0; n <= 4; ++n) {
                    ++cases;
                    const auto model = table_dist(table, n);
                    pooled_gap = std::max(pooled_gap, max_gap(model, oracle::cycle_totals(w, t, pooled, n)));
                    const double g = max_gap(model, oracle::cycle_totals(w, t, slotwise, n));
                    if (g > 1e-12) {
                        ++slotwise_bad;
                    }
                    if (g > slotwise_gap) {
                        slotwise_gap = g;
                        worst = "W=" + std::to_string(w) + " T=" + std::to_string(t) + " K=" + std::to_string(k) +
                                " N=" + std::to_string(n);
                    }
                }
            }
        }
    }
    o.gate("whole-cycle chain vs pooled K-subset enumeration", pooled_gap <= 1e-12,
           std::to_string(cases) + " cases, max gap " + fmt("%.3g", pooled_gap));
    o.gate("whole-cycle chain vs one-RB-per-slot enumeration", slotwise_gap <= 1e-12,
           std::to_string(slotwise_bad) + "/" + std::to_string(cases) + " cases off, max gap " +
               fmt("%.3g", slotwise_gap) + (worst.empty() ? "" : " at " + worst) +
               "; the kernel describes pooled subsets, which may put two replicas in one slot");
    return o;
}

Outcome criterion_2(const fs::path& work) {
    Outcome o;
    const auto j = read_json_file(config_path("estimation.json"));
    const auto cfg = estimation_bench_from_json(j);
    TableProvider tables;
    const auto rep = run_estimation_bench(cfg, tables);
    emit_estimation(rep, j.value("name", "estimation"), (work / "c2").string(), Format::Csv);

    double worst_bias = 0.0;
    std::string worst;
    for (const auto& r : rep.rows) {
        if (r.estimator == "ms-mli" || r.estimator == "ms-mld") {
            const double bias = std::abs(r.mean - r.n);
            if (bias >= worst_bias) {
                worst_bias = bias;
                worst = r.estimator + " N=" + std::to_string(r.n) + " mean " + fmt("%.3f", r.mean);
            }
        }
    }
    o.gate("MS-MLI and MS-MLD means within 0.5 of N", worst_bias <= 0.5,
           "worst |mean-N| " + fmt("%.3f", worst_bias) + " (" + worst + "), trials " + std::to_string(cfg.trials));
    for (const auto& [better, worse] : std::vector<std::pair<std::string, std::string>>{
             {"ms-mli", "ss-ml-ls"}, {"ss-ml-ls", "msem"}, {"ms-mld", "isce"}}) {
        int ok = 0;
        int total = 0;
        double worst_ub = -1e9;
        int worst_n = 0;
        for (const auto& p : rep.paired) {
            if (p.better != better || p.worse != worse) {
                continue;
            }
            ++total;
            ok += p.diff.upper95 <= 0.0 ? 1 : 0;
            if (p.diff.upper95 > worst_ub) {
                worst_ub = p.diff.upper95;
                worst_n = p.n;
            }
        }
        o.gate("MAE " + better + " <= " + worse + " (paired, one-sided 95%)", total > 0 && ok == total,
               std::to_string(ok) + "/" + std::to_string(total) + " loads, largest upper bound " +
                   fmt("%.4f", worst_ub) + " at N=" + std::to_string(worst_n));
    }
    return o;
}

Outcome criterion_3(const fs::path& work) {
    Outcome o;
    const auto j = read_json_file(config_path("failprob.json"));
    const auto cfg = failprob_bench_from_json(j);
    const auto rows = run_failprob_bench(cfg);
    emit_failprob(rows, j.value("name", "failprob"), (work / "c3").string(), Format::Csv);

    int adj = 0;
    int in_band = 0;
    double max_err = 0.0;
    std::map<int, std::pair<double, int>> arb_by_k;
    for (const auto& r : rows) {
        if (r.occupation == "adjacent") {
            ++adj;
            max_err = std::max(max_err, r.abs_error);
            in_band += r.abs_error >= 0.0052 && r.abs_error <= 0.0074 ? 1 : 0;
        } else {
            arb_by_k[r.k].first += r.abs_error;
            ++arb_by_k[r.k].second;
        }
    }
    o.gate("adjacent |analytical - empirical| <= 0.01 everywhere", adj > 0 && max_err <= 0.01,
           std::to_string(adj) + " points, " + std::to_string(cfg.cycles) + " cycles each, max error " +
               fmt("%.5f", max_err));
    o.gate("adjacent error inside [0.0052, 0.0074] on half the grid", 2 * in_band >= adj,
           std::to_string(in_band) + "/" + std::to_string(adj) +
               " points in band; the closed form is exact for adjacent access, so errors sit at Monte Carlo noise");
    std::string trend;
    for (const auto& [k, v] : arb_by_k) {
        trend += " K=" + std::to_string(k) + ":" + fmt("%.4f", v.first / v.second);
    }
    if (!trend.empty()) {
        o.info("arbitrary mean error by K", trend);
    }
    return o;
}

Outcome criterion_4(const fs::path&) {
    Outcome o;
    double gap = 0.0;
    int cases = 0;
    for (int t : {1, 2, 4, 8}) {
        for (int w = 2; w <= 20; ++w) {
            for (int n = 2; n <= 20; ++n) {
                gap = std::max(gap, std::abs(allocation::fail_prob_arbitrary(w, n, t, t) -
                                             allocation::fail_prob_adjacent(w, n, t, t)));
                ++cases;
            }
        }
    }
    o.gate("arbitrary == adjacent at K = T", gap <= 1e-12,
           std::to_string(cases) + " cases (T in {1,2,4,8}), max gap " + fmt("%.3g", gap));
    return o;
}

PredictionBenchReport prediction_report(const fs::path& work) {
    static std::optional<PredictionBenchReport> cached;
    if (!cached) {
        const auto j = read_json_file(config_path("prediction.json"));
        const auto cfg = prediction_bench_from_json(j);
        TableProvider tables;
        cached = run_prediction_bench(cfg, tables);
        emit_prediction(*cached, j.value("name", "prediction"), (work / "c5").string(), Format::Csv);
    }
    return *cached;
}

Outcome criterion_5(const fs::path& work) {
    Outcome o;
    const auto rep = prediction_report(work);
    o.gate("ARIMA error in 6.8% +/- 3", rep.arima.mean >= 0.038 && rep.arima.mean <= 0.098,
           fmt("%.2f%%", 100 * rep.arima.mean) + " over " + std::to_string(rep.arima.n) + " replications");
    o.gate("MASW error in 21.9% +/- 5", rep.masw.mean >= 0.169 && rep.masw.mean <= 0.269,
           fmt("%.2f%%", 100 * rep.masw.mean));
    o.gate("ARIMA < MASW (paired, one-sided 95%)", rep.diff.upper95 < 0.0,
           "mean diff " + fmt("%.4f", rep.diff.mean) + ", upper bound " + fmt("%.4f", rep.diff.upper95));
    std::string sweep;
    for (const auto& [w, e] : rep.masw_sweep) {
        sweep += " w=" + std::to_string(w) + ":" + fmt("%.2f%%", 100 * e);
    }
    o.info("MASW window sweep", sweep);
    return o;
}

Outcome criterion_6(const fs::path& work) {
    Outcome o;
    const auto rep = prediction_report(work);
    const int n = static_cast<int>(rep.diagnostics.size());
    o.gate("DW of ARIMA(0,2,3) in [1.8, 2.2] in >= 80% of regenerations", 5 * rep.dw_in_range >= 4 * n,
           std::to_string(rep.dw_in_range) + "/" + std::to_string(n));
    std::map<std::string, int> winners;
    for (const auto& d : rep.diagnostics) {
        ++winners["(" + std::to_string(d.best_p) + "," + std::to_string(d.best_q) + ")"];
    }
    std::string w;
    for (const auto& [k, v] : winners) {
        w += " " + k + "x" + std::to_string(v);
    }
    o.gate("(0,3) AIC-minimal on the 4x4 grid in >= 80% of regenerations", 5 * rep.order_aic_minimal >= 4 * n,
           std::to_string(rep.order_aic_minimal) + "/" + std::to_string(n) + "; AIC winners:" + w);
    return o;
}

Outcome criterion_7(const fs::path& work) {
    Outcome o;
    const auto j = read_json_file(config_path("negotiation.json"));
    const auto cfg = negotiation_from_json(j);
    const auto rep = run_negotiation(cfg);
    emit_negotiation(rep, j.value("name", "negotiation"), (work / "c7").string(), Format::Csv);
    bool mono = rep.curve.size() >= 2;
    for (std::size_t i = 1; i < rep.curve.size(); ++i) {
        mono = mono && rep.curve[i].fail_donor >= rep.curve[i - 1].fail_donor &&
               rep.curve[i].fail_receiver <= rep.curve[i - 1].fail_receiver;
    }
    o.gate("A nondecreasing, B nonincreasing in delta", mono, std::to_string(rep.curve.size()) + " grid points");
    require(rep.outcomes.size() >= 2, "invalid_config", "negotiation config needs two floor pairs");
    const auto& feasible = rep.outcomes[0];
    const auto& tight = rep.outcomes[1];
    o.gate("feasible delta at floors (" + fmt("%g", feasible.floor_a) + ", " + fmt("%g", feasible.floor_b) + ")",
           feasible.delta.has_value(), feasible.delta ? "delta = " + fmt("%.2f", *feasible.delta) : "none");
    o.gate("outage at floors (" + fmt("%g", tight.floor_a) + ", " + fmt("%g", tight.floor_b) + ")", tight.outage,
           tight.outage ? "outage reported" : "delta = " + fmt("%.2f", tight.delta.value_or(-1)));
    o.info("delta = " + fmt("%.2f", cfg.target_delta) + " match",
           std::string(feasible.delta && std::abs(*feasible.delta - cfg.target_delta) < 1e-9 ? "reproduced"
                                                                                             : "not reproduced") +
               " in the configured scenario; calibration scan: " + std::to_string(rep.scan_hits.size()) + " of " +
               std::to_string(rep.scan_points) + " settings reproduce it together with the outage");
    return o;
}

std::vector<double> read_ccdf_file(const fs::path& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), "io_error", "cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    require(line == "delay_ms,ccdf", "io_error", "unexpected header in " + path.string());
    std::vector<double> out;
    while (std::getline(in, line)) {
        out.push_back(std::stod(line.substr(line.find(',') + 1)));
    }
    return out;
}

Outcome criterion_8(const fs::path& work) {
    Outcome o;
    auto cfg = scenario_from_json(read_json_file(config_path("setup1.json")));
    TableProvider tables;
    const auto predictor = make_predictor(cfg, tables);
    std::vector<AllocationScheme> schemes{AllocationScheme::Adaptive};
    for (auto s : cfg.compare) {
        if (s != AllocationScheme::Adaptive) {
            schemes.push_back(s);
        }
    }
    std::map<AllocationScheme, RunReport> reps;
    for (auto s : schemes) {
        reps[s] = run_scenario(cfg, s, tables, predictor);
        emit_run(reps[s], (work / "c8").string(), Format::Csv, s != AllocationScheme::Adaptive);
    }
    const auto& ad = reps.at(AllocationScheme::Adaptive);
    o.gate("Adaptive bursty reliability at 1.375 ms >= 99.99%", ad.a.reliability_1375us >= 0.9999,
           fmt("%.6f", ad.a.reliability_1375us) + " over " + std::to_string(ad.a.users) + " users, " +
               std::to_string(cfg.trials) + " trials");
    o.gate("Adaptive uniform reliability at 1 ms >= 99%", ad.b.reliability_1ms >= 0.99,
           fmt("%.6f", ad.b.reliability_1ms) + " over " + std::to_string(ad.b.users) + " users");
    if (reps.count(AllocationScheme::FipIde)) {
        const auto& fi = reps.at(AllocationScheme::FipIde);
        bool dominated = true;
        int points = 0;
        for (std::size_t i = 0; i < ad.ccdf_a.delay_ms.size(); ++i) {
            if (ad.ccdf_a.delay_ms[i] + 1e-9 < 1.375) {
                continue;
            }
            ++points;
            dominated = dominated && fi.ccdf_a.ccdf.at(i) >= ad.ccdf_a.ccdf[i];
        }
        o.gate("FIPide bursty CCDF at or above Adaptive from 1.375 ms", dominated && points > 0,
               std::to_string(points) + " grid points; at 1.375 ms FIPide " + fmt("%.2e", fi.ccdf_a.at(1.375)) +
                   " vs Adaptive " + fmt("%.2e", ad.ccdf_a.at(1.375)));
    } else {
        o.gate("FIPide bursty CCDF at or above Adaptive from 1.375 ms", false, "fip_ide missing from the compare list");
    }
    // Flatness is checked on the emitted files, which is what a plot would read.
    bool flat = true;
    int files = 0;
    const int i10 = slots_for_ms(1.0, cfg.gf.slot_ms);
    const int i125 = slots_for_ms(1.25, cfg.gf.slot_ms);
    for (const auto& entry : fs::directory_iterator(work / "c8")) {
        const auto name = entry.path().filename().string();
        if (name.rfind("ccdf_", 0) != 0 || entry.path().extension() != ".csv") {
            continue;
        }
        ++files;
        const auto v = read_ccdf_file(entry.path());
        for (int i = i10 + 1; i <= i125; ++i) {
            flat = flat && static_cast<std::size_t>(i) < v.size() && v[static_cast<std::size_t>(i)] == v[static_cast<std::size_t>(i10)];
        }
    }
    o.gate("every CCDF flat over [1.0, 1.25] ms", flat && files == 2 * static_cast<int>(schemes.size()),
           std::to_string(files) + " curves");
    std::string rows;
    for (const auto& [s, r] : reps) {
        rows += std::string(" ") + to_string(s) + ": bursty@1.375 " + fmt("%.5f", r.a.reliability_1375us) +
                ", uniform@1 " + fmt("%.5f", r.b.reliability_1ms) + ";";
    }
    o.info("per-scheme reliability", rows);
    return o;
}

// Byte comparison of two output trees.
bool same_tree(const fs::path& a, const fs::path& b, std::string& detail) {
    std::vector<std::string> names_a, names_b;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (e.is_regular_file()) {
            names_a.push_back(fs::relative(e.path(), a).string());
        }
    }
    for (const auto& e : fs::recursive_directory_iterator(b)) {
        if (e.is_regular_file()) {
            names_b.push_back(fs::relative(e.path(), b).string());
        }
    }
    std::sort(names_a.begin(), names_a.end());
    std::sort(names_b.begin(), names_b.end());
    if (names_a != names_b) {
        detail = "file lists differ";
        return false;
    }
    const auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    };
    for (const auto& n : names_a) {
        if (slurp(a / n) != slurp(b / n)) {
            detail = "differs: " + n;
            return false;
        }
    }
    detail = std::to_string(names_a.size()) + " files byte-identical";
    return true;
}

// Every bench and the integrated run, shrunk so two passes stay quick. The
// code paths are the full ones; only trial counts drop.
void determinism_pass(const fs::path& dir) {
    fs::remove_all(dir);
    TableProvider tables;
    {
        auto cfg = scenario_from_json(read_json_file(config_path("setup1.json")));
        cfg.trials = 20;
        const auto predictor = make_predictor(cfg, tables);
        emit_run(run_scenario(cfg, cfg.scheme, tables, predictor), dir.string(), Format::Csv);
        for (auto s : cfg.compare) {
            emit_run(run_scenario(cfg, s, tables, predictor), dir.string(), Format::Json, true);
        }
    }
    {
        auto cfg = estimation_bench_from_json(read_json_file(config_path("estimation.json")));
        cfg.trials = 100;
        emit_estimation(run_estimation_bench(cfg, tables), "det", dir.string(), Format::Csv);
    }
    {
        auto cfg = failprob_bench_from_json(read_json_file(config_path("failprob.json")));
        cfg.cycles = 2000;
        emit_failprob(run_failprob_bench(cfg), "det", dir.string(), Format::Csv);
    }
    {
        auto cfg = prediction_bench_from_json(read_json_file(config_path("prediction.json")));
        cfg.regenerations = 2;
        cfg.replications = 5;
        emit_prediction(run_prediction_bench(cfg, tables), "det", dir.string(), Format::Csv);
    }
    emit_negotiation(run_negotiation(negotiation_from_json(read_json_file(config_path("negotiation.json")))), "det",
                     dir.string(), Format::Csv);
}

Outcome criterion_9(const fs::path& work) {
    Outcome o;
    const auto a = work / "c9" / "first";
    const auto b = work / "c9" / "second";
    determinism_pass(a);
    determinism_pass(b);
    std::string detail;
    const bool same = same_tree(a, b, detail);
    o.gate("rerun outputs byte-identical", same, detail);
    return o;
}

struct Criterion {
    int id;
    const char* title;
    std::function<Outcome(const fs::path&)> run;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    std::vector<int> only;
    std::string work_dir = "acceptance_work";
    app.add_option("--only", only, "criteria to run (default: all)")->check(CLI::Range(1, 9));
    app.add_option("--work-dir", work_dir, "scratch directory for emitted files")->capture_default_str();
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> all{
        {1, "oracle equivalence of the Markov chains", criterion_1},
        {2, "estimator accuracy", criterion_2},
        {3, "failure-probability agreement", criterion_3},
        {4, "variant equivalence at K = T", criterion_4},
        {5, "prediction error", criterion_5},
        {6, "model diagnostics", criterion_6},
        {7, "negotiation", criterion_7},
        {8, "integrated Setup 1", criterion_8},
        {9, "determinism", criterion_9},
    };
    const fs::path work(work_dir);
    fs::create_directories(work);
    bool all_pass = true;
    for (const auto& c : all) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) {
            continue;
        }
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run(work);
        } catch (const std::exception& e) {
            out.gate("run", false, std::string("error: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool pass = out.pass();
        all_pass = all_pass && pass;
        std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.title << " ("
                  << fmt("%.1f", secs) << " s)\n";
        for (const auto& ch : out.checks) {
            std::cout << "    " << (!ch.gated ? "info" : ch.pass ? "ok  " : "FAIL") << " " << ch.name << ": "
                      << ch.detail << "\n";
        }
        std::cout.flush();
    }
    return all_pass ? 0 : 1;
}
