// gfa: command-line front end for the integrated run and the benches.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "gfa/harness/bench.hpp"
#include "gfa/harness/config.hpp"
#include "gfa/harness/emit.hpp"
#include "gfa/harness/pipeline.hpp"
#include "gfa/harness/run.hpp"

namespace {

using namespace gfa;
using namespace gfa::harness;

struct Common {
    std::string config;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::string format = "csv";
    std::string table_cache;
};

void add_common(CLI::App* cmd, Common& c, const std::string& trials_help) {
    cmd->add_option("--config", c.config, "JSON config file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out-dir", c.out_dir, "directory for output files")->capture_default_str();
    cmd->add_option("--seed", c.seed, "override the config's master seed");
    cmd->add_option("--trials", c.trials, trials_help);
    cmd->add_option("--format", c.format, "table format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    cmd->add_option("--table-cache", c.table_cache, "directory for persisted step-probability tables");
}

void print_result(const std::string& command, const std::vector<std::string>& files, json extra = json::object()) {
    extra["command"] = command;
    extra["files"] = files;
    std::cout << extra.dump() << "\n";
}

std::string name_of(const json& j, const std::string& fallback) {
    return j.contains("name") ? j.at("name").get<std::string>() : fallback;
}

int cmd_run(const Common& c, std::optional<int> refit_every) {
    auto cfg = scenario_from_json(read_json_file(c.config));
    if (c.seed) {
        cfg.seed = *c.seed;
        cfg.seeds.clear();
    }
    if (c.trials) {
        cfg.trials = *c.trials;
    }
    if (refit_every) {
        cfg.refit_every = *refit_every;
    }
    cfg.validate();
    const auto fmt = format_from_string(c.format);
    TableProvider tables(c.table_cache);
    const auto predictor = make_predictor(cfg, tables);
    std::vector<std::string> files;
    json metrics = json::object();
    const auto one = [&](AllocationScheme scheme, bool suffix) {
        const auto rep = run_scenario(cfg, scheme, tables, predictor);
        const auto written = emit_run(rep, c.out_dir, fmt, suffix);
        files.insert(files.end(), written.begin(), written.end());
        metrics[to_string(scheme)] = {{"bursty_reliability_1375us", rep.a.reliability_1375us},
                                      {"uniform_reliability_1ms", rep.b.reliability_1ms},
                                      {"outage_cycles", rep.outage_cycles}};
    };
    one(cfg.scheme, false);
    for (auto s : cfg.compare) {
        if (s != cfg.scheme) {
            one(s, true);
        }
    }
    print_result("run", files, {{"metrics", metrics}});
    return 0;
}

int cmd_estimation(const Common& c) {
    const auto j = read_json_file(c.config);
    auto cfg = estimation_bench_from_json(j);
    if (c.seed) {
        cfg.seed = *c.seed;
    }
    if (c.trials) {
        require(*c.trials >= 1, "invalid_config", "--trials must be at least 1");
        cfg.trials = *c.trials;
    }
    TableProvider tables(c.table_cache);
    const auto rep = run_estimation_bench(cfg, tables);
    print_result("bench-estimation", emit_estimation(rep, name_of(j, "estimation"), c.out_dir, format_from_string(c.format)));
    return 0;
}

int cmd_failprob(const Common& c) {
    const auto j = read_json_file(c.config);
    auto cfg = failprob_bench_from_json(j);
    if (c.seed) {
        cfg.seed = *c.seed;
    }
    if (c.trials) {
        require(*c.trials >= 1, "invalid_config", "--trials must be at least 1");
        cfg.cycles = *c.trials;
    }
    const auto rows = run_failprob_bench(cfg);
    print_result("bench-failprob", emit_failprob(rows, name_of(j, "failprob"), c.out_dir, format_from_string(c.format)));
    return 0;
}

int cmd_prediction(const Common& c) {
    const auto j = read_json_file(c.config);
    auto cfg = prediction_bench_from_json(j);
    if (c.seed) {
        cfg.seed = *c.seed;
    }
    if (c.trials) {
        require(*c.trials >= 1, "invalid_config", "--trials must be at least 1");
        cfg.replications = *c.trials;
    }
    TableProvider tables(c.table_cache);
    const auto rep = run_prediction_bench(cfg, tables);
    print_result("bench-prediction", emit_prediction(rep, name_of(j, "prediction"), c.out_dir, format_from_string(c.format)),
                 {{"arima_mre", rep.arima.mean}, {"masw_mre", rep.masw.mean}});
    return 0;
}

int cmd_negotiate(const Common& c) {
    const auto j = read_json_file(c.config);
    const auto cfg = negotiation_from_json(j);
    const auto rep = run_negotiation(cfg);
    print_result("negotiate", emit_negotiation(rep, name_of(j, "negotiation"), c.out_dir, format_from_string(c.format)));
    return 0;
}

struct CacheArgs {
    std::string dir = "table_cache";
    int w_min = 1;
    int w_max = 48;
    int t_slots = 8;
    int k = 8;
    std::string variant = "single";
};

int cmd_table_cache(const CacheArgs& a) {
    require(a.w_min >= 1 && a.w_max >= a.w_min, "invalid_config", "need 1 <= w-min <= w-max");
    require(a.k >= 1 && a.k <= a.t_slots, "invalid_config", "need 1 <= k <= t-slots");
    std::vector<estimation::ModelVariant> variants;
    if (a.variant == "single" || a.variant == "all") {
        variants.push_back(estimation::ModelVariant::SingleSlot);
    }
    if (a.variant == "whole" || a.variant == "all") {
        variants.push_back(estimation::ModelVariant::WholeCycle);
    }
    TableProvider tables(a.dir);
    std::vector<std::string> files;
    for (auto v : variants) {
        for (int w = a.w_min; w <= a.w_max; ++w) {
            tables.get(v, w, a.t_slots, a.k);
            const int t = v == estimation::ModelVariant::SingleSlot ? 1 : a.t_slots;
            const int k = v == estimation::ModelVariant::SingleSlot ? 1 : a.k;
            files.push_back((std::filesystem::path(a.dir) /
                             estimation::cache::default_file_name(v, w, t, k, estimation::default_table_horizon(v, w, t, k)))
                                .string());
        }
    }
    print_result("table-cache", files);
    return 0;
}

void print_error(const std::string& code, const std::string& message) {
    std::cerr << json{{"error", {{"code", code}, {"message", message}}}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"grant-free access scheduling: integrated runs and benches"};
    app.require_subcommand(1);

    Common run_c, est_c, fp_c, pred_c, neg_c;
    std::optional<int> refit_every;
    auto* run = app.add_subcommand("run", "integrated scenario with every configured scheme");
    add_common(run, run_c, "override the number of trials");
    run->add_option("--refit-every", refit_every, "refit ARIMA on each trial's history every N cycles (0 = never)");

    auto* est = app.add_subcommand("bench-estimation", "estimator accuracy over a range of loads");
    add_common(est, est_c, "override Monte Carlo trials per load");
    auto* fp = app.add_subcommand("bench-failprob", "analytical vs simulated failure probability");
    add_common(fp, fp_c, "override Monte Carlo cycles per grid point");
    auto* pred = app.add_subcommand("bench-prediction", "prediction error and model diagnostics");
    add_common(pred, pred_c, "override forecasting replications");
    auto* neg = app.add_subcommand("negotiate", "negotiation delta sweep");
    add_common(neg, neg_c, "ignored: the sweep is deterministic");

    CacheArgs cache;
    auto* tc = app.add_subcommand("table-cache", "pre-build step-probability tables on disk");
    tc->add_option("--out-dir", cache.dir, "cache directory")->capture_default_str();
    tc->add_option("--w-min", cache.w_min)->capture_default_str();
    tc->add_option("--w-max", cache.w_max)->capture_default_str();
    tc->add_option("--t-slots", cache.t_slots)->capture_default_str();
    tc->add_option("--k", cache.k)->capture_default_str();
    tc->add_option("--variant", cache.variant)->check(CLI::IsMember({"single", "whole", "all"}))->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("usage", e.what());
        return 2;
    }

    try {
        if (*run) {
            return cmd_run(run_c, refit_every);
        }
        if (*est) {
            return cmd_estimation(est_c);
        }
        if (*fp) {
            return cmd_failprob(fp_c);
        }
        if (*pred) {
            return cmd_prediction(pred_c);
        }
        if (*neg) {
            return cmd_negotiate(neg_c);
        }
        if (*tc) {
            return cmd_table_cache(cache);
        }
    } catch (const Error& e) {
        print_error(e.code(), e.what());
        return 1;
    } catch (const std::exception& e) {
        print_error("internal", e.what());
        return 1;
    }
    return 1;
}
