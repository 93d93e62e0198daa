#pragma once

// Integrated scheduling loop: simulate each event on its own RB partition,
// estimate, predict, allocate the next cycle, and collect success delays.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gfa/allocation.hpp"
#include "gfa/core/parallel.hpp"
#include "gfa/core/rng.hpp"
#include "gfa/gfsim.hpp"
#include "gfa/harness/config.hpp"
#include "gfa/harness/pipeline.hpp"
#include "gfa/prediction/arima.hpp"

namespace gfa::harness {

/// Empirical complementary CDF of success delay on a slot-spaced grid:
/// ccdf[i] = share of users whose delay exceeds delay_ms[i]. Users never
/// served exceed every grid point.
struct CcdfCurve {
    std::vector<double> delay_ms;
    std::vector<double> ccdf;

    /// Value at the largest grid point not above `ms`.
    double at(double ms) const {
        double v = 1.0;
        for (std::size_t i = 0; i < delay_ms.size() && delay_ms[i] <= ms + 1e-9; ++i) {
            v = ccdf[i];
        }
        return v;
    }
    double reliability(double ms) const { return 1.0 - at(ms); }
};

/// Delay histogram in slots; index = delay, plus a count of unserved users.
struct DelayHistogram {
    std::vector<long> by_slot;
    long unserved = 0;

    long users() const {
        long n = unserved;
        for (long c : by_slot) {
            n += c;
        }
        return n;
    }

    void add(const DelayRecord& r) {
        if (!r.delay_slots) {
            ++unserved;
            return;
        }
        const auto d = static_cast<std::size_t>(*r.delay_slots);
        if (by_slot.size() <= d) {
            by_slot.resize(d + 1, 0);
        }
        ++by_slot[d];
    }

    void merge(const DelayHistogram& other) {
        if (by_slot.size() < other.by_slot.size()) {
            by_slot.resize(other.by_slot.size(), 0);
        }
        for (std::size_t i = 0; i < other.by_slot.size(); ++i) {
            by_slot[i] += other.by_slot[i];
        }
        unserved += other.unserved;
    }

    /// Share of users served within `slots` slots; 1 when there are no users.
    double served_within(int slots) const {
        const long n = users();
        if (n == 0) {
            return 1.0;
        }
        long ok = 0;
        for (std::size_t i = 0; i < by_slot.size() && static_cast<int>(i) <= slots; ++i) {
            ok += by_slot[i];
        }
        return static_cast<double>(ok) / static_cast<double>(n);
    }

    CcdfCurve ccdf(int max_slots, double slot_ms) const {
        CcdfCurve c;
        const long n = users();
        long served = 0;
        for (int s = 0; s <= max_slots; ++s) {
            if (static_cast<std::size_t>(s) < by_slot.size()) {
                served += by_slot[static_cast<std::size_t>(s)];
            }
            c.delay_ms.push_back(s * slot_ms);
            c.ccdf.push_back(n == 0 ? 0.0 : static_cast<double>(n - served) / static_cast<double>(n));
        }
        return c;
    }
};

struct CycleRecord {
    int trial = 0;
    int cycle = 0;
    int arrivals_a = 0;
    int arrivals_b = 0;
    int load_a = 0;  // active users including retries
    int load_b = 0;
    int estimate_a = 0;
    int estimate_b = 0;
    int prediction_a = 0;  // forecast made for this cycle, -1 before the first forecast
    int prediction_b = 0;
    int w_a = 0;
    int w_b = 0;
    std::string condition;  // allocation branch behind this cycle's partition
};

struct ClassSummary {
    long users = 0;
    long unserved = 0;
    double reliability_1ms = 1.0;
    double reliability_1375us = 1.0;
    double estimator_mae = 0.0;
    double prediction_mre = 0.0;
    std::vector<double> trial_reliability_1ms;
    std::vector<double> trial_reliability_1375us;
};

struct RunReport {
    std::string name;
    AllocationScheme scheme = AllocationScheme::Adaptive;
    int trials = 0;
    int cycles = 0;
    double slot_ms = 0.125;
    std::vector<CycleRecord> records;
    DelayHistogram delays_a;
    DelayHistogram delays_b;
    CcdfCurve ccdf_a;
    CcdfCurve ccdf_b;
    ClassSummary a;
    ClassSummary b;
    long outage_cycles = 0;
};

inline int slots_for_ms(double ms, double slot_ms) { return static_cast<int>(std::floor(ms / slot_ms + 1e-9)); }

// ---------------------------------------------------------------------------

struct Partition {
    int w_a = 1;
    int w_b = 1;
    std::string condition;
};

/// Keeps both partitions at one RB or more within W_all.
inline Partition clamp_partition(Partition p, int w_all) {
    p.w_a = std::clamp(p.w_a, 1, w_all - 1);
    p.w_b = std::clamp(p.w_b, 1, w_all - p.w_a);
    return p;
}

/// RB split for the next cycle given the predicted loads.
inline Partition plan_partition(AllocationScheme scheme, int pred_a, int pred_b, const ScenarioConfig& cfg) {
    GfConfig gf = cfg.gf;
    Partition p;
    switch (scheme) {
        case AllocationScheme::Adaptive: {
            allocation::AllocateOptions opts;
            opts.floor_a = cfg.floor_a;
            opts.w_cap = cfg.w_cap;
            try {
                const auto d = allocation::allocate(pred_a, pred_b, cfg.contract_a, cfg.contract_b, cfg.w_all, gf, opts);
                p = {d.w1, d.w2, allocation::to_string(d.condition)};
            } catch (const Error& e) {
                if (e.code() != "outage") {
                    throw;
                }
                // B's minimum does not fit next to A's floor: B takes all but the floor.
                p = {cfg.floor_a, cfg.w_all - cfg.floor_a, "hard_outage"};
            }
            break;
        }
        case AllocationScheme::Fap: {
            const int total = pred_a + pred_b;
            p.w_a = total == 0 ? cfg.w_all / 2
                               : estimation::round_half_up(static_cast<double>(cfg.w_all) * pred_a / total);
            p.w_b = cfg.w_all - p.w_a;
            p.condition = "proportional";
            break;
        }
        case AllocationScheme::FipMin:
        case AllocationScheme::FipIde: {
            const double q = scheme == AllocationScheme::FipMin ? cfg.contract_b.reliability_min : cfg.contract_b.ideal();
            p.w_b = allocation::required_rbs(q, pred_b, gf, cfg.w_cap).w;
            p.w_a = cfg.w_all - p.w_b;
            p.condition = "fixed";
            break;
        }
    }
    return clamp_partition(p, cfg.w_all);
}

inline constexpr int kMinRefitHistory = 16;

struct TrialResult {
    std::vector<CycleRecord> records;
    DelayHistogram delays_a;
    DelayHistogram delays_b;
    long outage_cycles = 0;
};

/// One trial of the loop. Cycle c uses the partition planned from the
/// forecasts made at the end of cycle c-1; the first cycle splits evenly.
inline TrialResult run_trial(const ScenarioConfig& cfg, AllocationScheme scheme, const LoadPredictor& predictor,
                             TableProvider& tables, int trial) {
    const std::uint64_t seed = cfg.trial_seed(trial);
    const auto arrivals_a = cfg.traffic_a.arrivals(cfg.cycles);
    const auto arrivals_b = cfg.traffic_b.arrivals(cfg.cycles);
    const int truncation = truncation_in_slots(cfg.delay_truncation_ms, cfg.gf.slot_ms);
    RetryChain chain_a(truncation);
    RetryChain chain_b(truncation);
    prediction::HistoryPool pool_a;
    prediction::HistoryPool pool_b;

    TrialResult out;
    Partition part = clamp_partition({cfg.w_all / 2, cfg.w_all - cfg.w_all / 2, "even_split"}, cfg.w_all);
    int pred_a = -1;
    int pred_b = -1;
    GfConfig gf_a = cfg.gf;
    GfConfig gf_b = cfg.gf;
    LoadPredictor predictor_a = predictor;
    LoadPredictor predictor_b = predictor;
    const auto refit = [&](LoadPredictor& p, const prediction::HistoryPool& pool) {
        // Too short a history cannot pin down the model; keep the old fit.
        if (static_cast<int>(pool.size()) < kMinRefitHistory) {
            return;
        }
        try {
            p.arima = fit_arima(cfg.arima, pool.series());
        } catch (const Error&) {
        }
    };

    const auto step_cycle = [&](int c, int new_a, int new_b) {
        gf_a.w = part.w_a;
        gf_b.w = part.w_b;
        const auto res_a = chain_a.step(gf_a, new_a, derive_seed(seed, 2 * static_cast<std::uint64_t>(c)));
        const auto res_b = chain_b.step(gf_b, new_b, derive_seed(seed, 2 * static_cast<std::uint64_t>(c) + 1));
        CycleRecord rec;
        rec.trial = trial;
        rec.cycle = c;
        rec.arrivals_a = new_a;
        rec.arrivals_b = new_b;
        rec.load_a = res_a.n_active;
        rec.load_b = res_b.n_active;
        rec.estimate_a = estimate(cfg.estimator, res_a.observation, gf_a, tables).n_hat;
        rec.estimate_b = estimate(cfg.estimator, res_b.observation, gf_b, tables).n_hat;
        rec.prediction_a = pred_a;
        rec.prediction_b = pred_b;
        rec.w_a = part.w_a;
        rec.w_b = part.w_b;
        rec.condition = part.condition;
        if (part.condition == "cond3_outage" || part.condition == "hard_outage") {
            ++out.outage_cycles;
        }
        pool_a.append(rec.estimate_a);
        pool_b.append(rec.estimate_b);
        if (cfg.refit_every > 0 && cfg.predictor == Predictor::Arima && (c + 1) % cfg.refit_every == 0) {
            refit(predictor_a, pool_a);
            refit(predictor_b, pool_b);
        }
        pred_a = predictor_a(pool_a).value_rounded;
        pred_b = predictor_b(pool_b).value_rounded;
        part = plan_partition(scheme, pred_a, pred_b, cfg);
        return rec;
    };

    for (int c = 0; c < cfg.cycles; ++c) {
        out.records.push_back(
            step_cycle(c, arrivals_a[static_cast<std::size_t>(c)], arrivals_b[static_cast<std::size_t>(c)]));
    }
    // Drain: keep scheduling without arrivals until every user is closed out.
    for (int c = cfg.cycles; chain_a.pending() > 0 || chain_b.pending() > 0; ++c) {
        step_cycle(c, 0, 0);
    }
    for (const auto& r : chain_a.records()) {
        if (r.arrival_cycle >= cfg.warmup_cycles) {
            out.delays_a.add(r);
        }
    }
    for (const auto& r : chain_b.records()) {
        if (r.arrival_cycle >= cfg.warmup_cycles) {
            out.delays_b.add(r);
        }
    }
    return out;
}

inline LoadPredictor make_predictor(const ScenarioConfig& cfg, TableProvider& tables) {
    LoadPredictor p;
    p.kind = cfg.predictor;
    p.masw_window = cfg.masw_window;
    if (cfg.predictor == Predictor::Arima) {
        p.arima = fit_arima(cfg.arima, training_series(cfg.training, cfg.training.seed, tables));
    }
    return p;
}

inline ClassSummary summarize_class(const std::vector<TrialResult>& trials, bool event_a, const ScenarioConfig& cfg) {
    ClassSummary s;
    DelayHistogram all;
    double abs_err = 0.0;
    double rel_err = 0.0;
    long n_est = 0;
    long n_pred = 0;
    const int at_1ms = slots_for_ms(1.0, cfg.gf.slot_ms);
    const int at_1375 = slots_for_ms(1.375, cfg.gf.slot_ms);
    for (const auto& t : trials) {
        const auto& h = event_a ? t.delays_a : t.delays_b;
        all.merge(h);
        s.trial_reliability_1ms.push_back(h.served_within(at_1ms));
        s.trial_reliability_1375us.push_back(h.served_within(at_1375));
        for (const auto& r : t.records) {
            if (r.cycle < cfg.warmup_cycles) {
                continue;
            }
            const int load = event_a ? r.load_a : r.load_b;
            abs_err += std::abs((event_a ? r.estimate_a : r.estimate_b) - load);
            ++n_est;
            const int pred = event_a ? r.prediction_a : r.prediction_b;
            if (pred >= 0) {
                rel_err += std::abs(pred - load) / std::max(1.0, static_cast<double>(load));
                ++n_pred;
            }
        }
    }
    s.users = all.users();
    s.unserved = all.unserved;
    s.reliability_1ms = all.served_within(at_1ms);
    s.reliability_1375us = all.served_within(at_1375);
    s.estimator_mae = n_est == 0 ? 0.0 : abs_err / static_cast<double>(n_est);
    s.prediction_mre = n_pred == 0 ? 0.0 : rel_err / static_cast<double>(n_pred);
    return s;
}

/// Runs every trial of one scheme. Trials are independent and may run in
/// parallel; results are reduced in trial order.
inline RunReport run_scenario(const ScenarioConfig& cfg, AllocationScheme scheme, TableProvider& tables,
                              const LoadPredictor& predictor) {
    cfg.validate();
    std::vector<TrialResult> trials(static_cast<std::size_t>(cfg.trials));
    // Build the tables every partition may need before fanning out.
    if (needs_table(cfg.estimator)) {
        for (int w = 1; w <= cfg.w_all; ++w) {
            tables.get(table_variant(cfg.estimator), w, cfg.gf.t_slots, cfg.gf.k);
        }
    }
    parallel_for(trials.size(), [&](std::size_t i) {
        trials[i] = run_trial(cfg, scheme, predictor, tables, static_cast<int>(i));
    });

    RunReport rep;
    rep.name = cfg.name;
    rep.scheme = scheme;
    rep.trials = cfg.trials;
    rep.cycles = cfg.cycles;
    rep.slot_ms = cfg.gf.slot_ms;
    for (auto& t : trials) {
        rep.records.insert(rep.records.end(), t.records.begin(), t.records.end());
        rep.delays_a.merge(t.delays_a);
        rep.delays_b.merge(t.delays_b);
        rep.outage_cycles += t.outage_cycles;
    }
    const int max_slots = truncation_in_slots(cfg.delay_truncation_ms, cfg.gf.slot_ms);
    rep.ccdf_a = rep.delays_a.ccdf(max_slots, cfg.gf.slot_ms);
    rep.ccdf_b = rep.delays_b.ccdf(max_slots, cfg.gf.slot_ms);
    rep.a = summarize_class(trials, true, cfg);
    rep.b = summarize_class(trials, false, cfg);
    return rep;
}

inline RunReport run_scenario(const ScenarioConfig& cfg, TableProvider& tables) {
    return run_scenario(cfg, cfg.scheme, tables, make_predictor(cfg, tables));
}

}  // namespace gfa::harness
