#pragma once

// Pieces shared by the integrated run and the benches: a table cache, the
// estimator dispatch, training-series generation and the predictors.

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include "gfa/core/rng.hpp"
#include "gfa/estimation/estimators.hpp"
#include "gfa/estimation/markov.hpp"
#include "gfa/gfsim.hpp"
#include "gfa/harness/config.hpp"
#include "gfa/prediction/arima.hpp"
#include "gfa/traffic.hpp"

namespace gfa::harness {

/// Step-probability tables keyed by (variant, W, T, K), built once and shared
/// read-only. With a cache directory the tables also persist on disk.
class TableProvider {
public:
    explicit TableProvider(std::string cache_dir = {}) : cache_dir_(std::move(cache_dir)) {}

    std::shared_ptr<const estimation::StepProbTable> get(estimation::ModelVariant variant, int w, int t, int k) {
        using estimation::ModelVariant;
        if (variant == ModelVariant::SingleSlot) {
            t = 1;
            k = 1;
        }
        const auto key = std::make_tuple(static_cast<int>(variant), w, t, k);
        std::lock_guard lock(mutex_);
        if (auto it = tables_.find(key); it != tables_.end()) {
            return it->second;
        }
        const int n_max = estimation::default_table_horizon(variant, w, t, k);
        std::shared_ptr<const estimation::StepProbTable> table;
        if (cache_dir_.empty()) {
            const auto model = variant == ModelVariant::SingleSlot ? estimation::MarkovModel::single_slot(w)
                                                                   : estimation::MarkovModel::whole_cycle(w, t, k);
            table = std::make_shared<const estimation::StepProbTable>(estimation::build_step_table(model, n_max));
        } else {
            std::filesystem::create_directories(cache_dir_);
            const auto path = std::filesystem::path(cache_dir_) /
                              estimation::cache::default_file_name(variant, w, t, k, n_max);
            table = std::make_shared<const estimation::StepProbTable>(
                estimation::cache::load_or_build(path.string(), variant, w, t, k, n_max));
        }
        tables_.emplace(key, table);
        return table;
    }

private:
    std::string cache_dir_;
    std::mutex mutex_;
    std::map<std::tuple<int, int, int, int>, std::shared_ptr<const estimation::StepProbTable>> tables_;
};

inline estimation::ModelVariant table_variant(estimation::Scheme s) {
    return s == estimation::Scheme::MsMld ? estimation::ModelVariant::WholeCycle : estimation::ModelVariant::SingleSlot;
}

inline bool needs_table(estimation::Scheme s) {
    using estimation::Scheme;
    return s == Scheme::SsMlLs || s == Scheme::MsMli || s == Scheme::MsMld;
}

/// Runs the chosen estimator on one cycle's observation.
inline estimation::EstimateReport estimate(estimation::Scheme scheme, const CycleObservation& obs, const GfConfig& cfg,
                                           TableProvider& tables, const estimation::SearchOptions& opts = {}) {
    using estimation::Scheme;
    std::shared_ptr<const estimation::StepProbTable> table;
    if (needs_table(scheme)) {
        table = tables.get(table_variant(scheme), cfg.w, cfg.t_slots, cfg.k);
    }
    switch (scheme) {
        case Scheme::SsMlLs: return estimation::ss_ml_ls(obs, cfg, *table, opts);
        case Scheme::MsMli: return estimation::ms_mli(obs, cfg, *table, opts);
        case Scheme::MsMld: return estimation::ms_mld(obs, cfg, *table, opts);
        case Scheme::Msem: return estimation::msem(obs, cfg, opts);
        case Scheme::Isce: return estimation::isce(obs, cfg, opts);
    }
    throw Error("invalid_argument", "unknown estimator");
}

/// Estimated per-cycle loads of `bursts` back-to-back Beta bursts. Each cycle
/// is an independent access cycle with the burst's user count.
inline std::vector<double> training_series(const TrainingSpec& spec, std::uint64_t seed, TableProvider& tables) {
    const auto counts = traffic::beta_arrivals(spec.burst).per_cycle_counts;
    std::vector<double> series;
    series.reserve(counts.size() * static_cast<std::size_t>(spec.bursts));
    CycleSimulator sim;
    std::uint64_t cycle = 0;
    for (int b = 0; b < spec.bursts; ++b) {
        for (int n : counts) {
            sim.run(spec.gf, n, derive_seed(seed, cycle++));
            series.push_back(estimate(spec.estimator, sim.observation(), spec.gf, tables).n_hat);
        }
    }
    return series;
}

/// ARIMA fit on a training series. A fit that runs out of iterations keeps
/// its best point rather than failing the run.
inline prediction::ArimaSpec fit_arima(const ArimaOrder& order, const std::vector<double>& training) {
    const auto y = prediction::difference(training, order.d);
    try {
        return prediction::fit_arma(y, order.p, order.q, order.d);
    } catch (const prediction::FitError& e) {
        return e.best();
    }
}

/// Next-cycle load from a history pool. ARIMA falls back to the mean of what
/// is available until the pool covers the model's lags; MASW does the same
/// until the pool fills its window.
struct LoadPredictor {
    Predictor kind = Predictor::Arima;
    prediction::ArimaSpec arima;
    int masw_window = 3;

    prediction::Forecast operator()(const prediction::HistoryPool& pool) const {
        if (pool.empty()) {
            return prediction::Forecast::of(0.0);
        }
        if (kind == Predictor::Arima &&
            static_cast<int>(pool.size()) >= arima.d + std::max({arima.p, arima.q, 1})) {
            return prediction::forecast_one(arima, pool);
        }
        const int w = std::min(masw_window, static_cast<int>(pool.size()));
        return prediction::masw(pool, w);
    }
};

}  // namespace gfa::harness
