#pragma once

// Scenario and benchmark configuration, read from JSON files.

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "gfa/allocation.hpp"
#include "gfa/core/error.hpp"
#include "gfa/core/rng.hpp"
#include "gfa/estimation/estimators.hpp"
#include "gfa/gfsim.hpp"
#include "gfa/traffic.hpp"

namespace gfa::harness {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

enum class AllocationScheme { Adaptive, Fap, FipMin, FipIde };
enum class Predictor { Arima, Masw };

inline const char* to_string(AllocationScheme s) {
    switch (s) {
        case AllocationScheme::Adaptive: return "adaptive";
        case AllocationScheme::Fap: return "fap";
        case AllocationScheme::FipMin: return "fip_min";
        case AllocationScheme::FipIde: return "fip_ide";
    }
    return "?";
}

inline const char* to_string(Predictor p) { return p == Predictor::Arima ? "arima" : "masw"; }

inline AllocationScheme allocation_scheme_from_string(const std::string& s) {
    for (auto v : {AllocationScheme::Adaptive, AllocationScheme::Fap, AllocationScheme::FipMin, AllocationScheme::FipIde}) {
        if (s == to_string(v)) {
            return v;
        }
    }
    throw Error("invalid_config", "unknown allocation scheme '" + s + "'");
}

inline Predictor predictor_from_string(const std::string& s) {
    if (s == "arima") {
        return Predictor::Arima;
    }
    if (s == "masw") {
        return Predictor::Masw;
    }
    throw Error("invalid_config", "unknown predictor '" + s + "'");
}

inline Occupation occupation_from_string(const std::string& s) {
    if (s == "adjacent") {
        return Occupation::Adjacent;
    }
    if (s == "arbitrary") {
        return Occupation::Arbitrary;
    }
    throw Error("invalid_config", "unknown occupation '" + s + "'");
}

// ---------------------------------------------------------------------------
// Small JSON readers that name the offending key.

namespace detail {

inline void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    require(j.is_object(), "invalid_config", where + " must be an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j.items()) {
        require(ok.count(key) > 0, "invalid_config", "unknown key '" + key + "' in " + where);
    }
}

template <class T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
    if (!j.contains(key)) {
        return fallback;
    }
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw Error("invalid_config", where + "." + key + ": " + e.what());
    }
}

}  // namespace detail

inline GfConfig gf_from_json(const json& j, const GfConfig& base = {}) {
    detail::check_keys(j, "gf", {"w", "t_slots", "k", "occupation", "slot_ms", "gap_slots"});
    GfConfig cfg = base;
    cfg.w = detail::get_or(j, "w", cfg.w, "gf");
    cfg.t_slots = detail::get_or(j, "t_slots", cfg.t_slots, "gf");
    cfg.k = detail::get_or(j, "k", cfg.k, "gf");
    cfg.occupation = occupation_from_string(detail::get_or<std::string>(j, "occupation", to_string(cfg.occupation), "gf"));
    cfg.slot_ms = detail::get_or(j, "slot_ms", cfg.slot_ms, "gf");
    cfg.gap_slots = detail::get_or(j, "gap_slots", cfg.gap_slots, "gf");
    cfg.validate();
    return cfg;
}

inline json to_json(const GfConfig& cfg) {
    return json{{"w", cfg.w},           {"t_slots", cfg.t_slots}, {"k", cfg.k},
                {"occupation", to_string(cfg.occupation)}, {"slot_ms", cfg.slot_ms}, {"gap_slots", cfg.gap_slots}};
}

inline traffic::BetaBurstSpec burst_from_json(const json& j, const std::string& where) {
    traffic::BetaBurstSpec b;
    b.n_total = detail::get_or(j, "n_total", b.n_total, where);
    b.duration_ms = detail::get_or(j, "duration_ms", b.duration_ms, where);
    b.alpha = detail::get_or(j, "alpha", b.alpha, where);
    b.beta = detail::get_or(j, "beta", b.beta, where);
    b.cycle_len_ms = detail::get_or(j, "cycle_len_ms", b.cycle_len_ms, where);
    b.validate();
    return b;
}

inline json to_json(const traffic::BetaBurstSpec& b) {
    return json{{"n_total", b.n_total}, {"duration_ms", b.duration_ms}, {"alpha", b.alpha},
                {"beta", b.beta},       {"cycle_len_ms", b.cycle_len_ms}};
}

/// One event's arrival process: a Beta burst starting at a given cycle, or a
/// constant number of users every cycle.
struct TrafficSpec {
    std::variant<traffic::UniformSpec, traffic::BetaBurstSpec> shape = traffic::UniformSpec{};
    int start_cycle = 0;  // bursts only

    bool is_burst() const { return std::holds_alternative<traffic::BetaBurstSpec>(shape); }

    /// Per-cycle arrivals for cycles [0, n_cycles).
    std::vector<int> arrivals(int n_cycles) const {
        std::vector<int> out(static_cast<std::size_t>(n_cycles), 0);
        if (const auto* u = std::get_if<traffic::UniformSpec>(&shape)) {
            return traffic::uniform_arrivals(*u, n_cycles).per_cycle_counts;
        }
        const auto trace = traffic::beta_arrivals(std::get<traffic::BetaBurstSpec>(shape));
        for (int c = start_cycle; c < n_cycles; ++c) {
            out[static_cast<std::size_t>(c)] = trace.at(static_cast<std::size_t>(c - start_cycle));
        }
        return out;
    }
};

inline TrafficSpec traffic_from_json(const json& j, const std::string& where) {
    const auto kind = detail::get_or<std::string>(j, "kind", "", where);
    TrafficSpec t;
    if (kind == "uniform") {
        detail::check_keys(j, where, {"kind", "users_per_cycle"});
        traffic::UniformSpec u;
        u.users_per_cycle = detail::get_or(j, "users_per_cycle", 0, where);
        require(u.users_per_cycle >= 0, "invalid_config", where + ".users_per_cycle must be nonnegative");
        t.shape = u;
    } else if (kind == "beta") {
        detail::check_keys(j, where, {"kind", "n_total", "duration_ms", "alpha", "beta", "cycle_len_ms", "start_cycle"});
        t.shape = burst_from_json(j, where);
        t.start_cycle = detail::get_or(j, "start_cycle", 0, where);
        require(t.start_cycle >= 0, "invalid_config", where + ".start_cycle must be nonnegative");
    } else {
        throw Error("invalid_config", where + ".kind must be 'uniform' or 'beta'");
    }
    return t;
}

inline json to_json(const TrafficSpec& t) {
    if (const auto* u = std::get_if<traffic::UniformSpec>(&t.shape)) {
        return json{{"kind", "uniform"}, {"users_per_cycle", u->users_per_cycle}};
    }
    json j = to_json(std::get<traffic::BetaBurstSpec>(t.shape));
    j["kind"] = "beta";
    j["start_cycle"] = t.start_cycle;
    return j;
}

inline allocation::QosContract contract_from_json(const json& j, const std::string& where) {
    detail::check_keys(j, where, {"reliability_min", "reliability_ideal", "priority"});
    allocation::QosContract c;
    c.reliability_min = detail::get_or(j, "reliability_min", c.reliability_min, where);
    if (j.contains("reliability_ideal")) {
        c.reliability_ideal = detail::get_or(j, "reliability_ideal", 0.0, where);
    }
    c.priority = detail::get_or(j, "priority", 0, where);
    c.validate();
    return c;
}

inline json to_json(const allocation::QosContract& c) {
    json j{{"reliability_min", c.reliability_min}, {"priority", c.priority}};
    if (c.reliability_ideal) {
        j["reliability_ideal"] = *c.reliability_ideal;
    }
    return j;
}

/// Training series for the ARIMA model: `bursts` back-to-back copies of a
/// Beta burst, each cycle observed through simulated access and estimated.
struct TrainingSpec {
    traffic::BetaBurstSpec burst{100, 20.0, 3.0, 4.0, 1.25};
    int bursts = 10;
    GfConfig gf{20, 8, 4, Occupation::Adjacent, 0.125, 2};
    estimation::Scheme estimator = estimation::Scheme::SsMlLs;
    std::uint64_t seed = 2024;
};

inline TrainingSpec training_from_json(const json& j, const std::string& where) {
    detail::check_keys(j, where, {"burst", "bursts", "gf", "estimator", "seed"});
    TrainingSpec t;
    if (j.contains("burst")) {
        detail::check_keys(j.at("burst"), where + ".burst", {"n_total", "duration_ms", "alpha", "beta", "cycle_len_ms"});
        t.burst = burst_from_json(j.at("burst"), where + ".burst");
    }
    t.bursts = detail::get_or(j, "bursts", t.bursts, where);
    require(t.bursts >= 1, "invalid_config", where + ".bursts must be at least 1");
    if (j.contains("gf")) {
        t.gf = gf_from_json(j.at("gf"), t.gf);
    }
    t.estimator = estimation::scheme_from_string(
        detail::get_or<std::string>(j, "estimator", estimation::to_string(t.estimator), where));
    t.seed = detail::get_or(j, "seed", t.seed, where);
    return t;
}

inline json to_json(const TrainingSpec& t) {
    return json{{"burst", to_json(t.burst)}, {"bursts", t.bursts}, {"gf", to_json(t.gf)},
                {"estimator", estimation::to_string(t.estimator)}, {"seed", t.seed}};
}

struct ArimaOrder {
    int p = 0;
    int d = 2;
    int q = 3;
};

// ---------------------------------------------------------------------------

struct ScenarioConfig {
    std::string name = "scenario";
    GfConfig gf{1, 8, 8, Occupation::Adjacent, 0.125, 2};  // gf.w is replaced by each partition
    TrafficSpec traffic_a;                                  // bursty, high priority
    TrafficSpec traffic_b;                                  // uniform
    allocation::QosContract contract_a{0.99999, std::nullopt, 1};
    allocation::QosContract contract_b{0.99, 0.99999, 0};
    int w_all = 48;
    AllocationScheme scheme = AllocationScheme::Adaptive;
    std::vector<AllocationScheme> compare;  // extra schemes run on the same seeds
    estimation::Scheme estimator = estimation::Scheme::SsMlLs;
    Predictor predictor = Predictor::Arima;
    int masw_window = 3;
    ArimaOrder arima;
    TrainingSpec training;
    int refit_every = 0;     // refit ARIMA on a trial's own history every this many cycles; 0 keeps the offline fit
    int cycles = 32;         // recorded scheduling cycles per trial, warm-up included
    int warmup_cycles = 8;   // arrivals before this cycle are simulated but not scored
    int floor_a = 2;
    int w_cap = 1024;
    std::uint64_t seed = 1;
    std::vector<std::uint64_t> seeds;  // explicit per-trial seeds; derived from `seed` when empty
    int trials = 200;
    double delay_truncation_ms = 10.0;

    std::uint64_t trial_seed(int trial) const {
        if (!seeds.empty()) {
            return seeds[static_cast<std::size_t>(trial)];
        }
        return derive_seed(seed, static_cast<std::uint64_t>(trial));
    }

    void validate() const {
        gf.validate();
        require(w_all >= 2, "invalid_config", "w_all must be at least 2 (one RB per event)");
        require(trials >= 1, "invalid_config", "trials must be at least 1");
        require(seeds.empty() || static_cast<int>(seeds.size()) >= trials, "invalid_config",
                "seeds list is shorter than trials");
        require(delay_truncation_ms > 0.0, "invalid_config", "delay_truncation_ms must be positive");
        require(cycles >= 1 && warmup_cycles >= 0 && warmup_cycles < cycles, "invalid_config",
                "need 0 <= warmup_cycles < cycles");
        require(masw_window >= 1, "invalid_config", "masw_window must be at least 1");
        require(refit_every >= 0, "invalid_config", "refit_every must be nonnegative");
        require(floor_a >= 1 && floor_a < w_all, "invalid_config", "floor_a must lie in [1, w_all)");
        require(!traffic_b.is_burst(), "invalid_config", "traffic_b must be uniform");
        contract_a.validate();
        contract_b.validate();
    }
};

inline ScenarioConfig scenario_from_json(const json& j) {
    detail::check_keys(j, "scenario",
                       {"schema_version", "name", "gf", "traffic_a", "traffic_b", "contracts", "w_all", "scheme", "compare",
                        "estimator", "predictor", "masw_window", "arima", "training", "refit_every", "cycles", "warmup_cycles",
                        "floor_a", "w_cap", "seed", "seeds", "trials", "delay_truncation_ms"});
    const int version = detail::get_or(j, "schema_version", kSchemaVersion, "scenario");
    require(version == kSchemaVersion, "invalid_config", "unsupported schema_version " + std::to_string(version));
    ScenarioConfig c;
    c.name = detail::get_or(j, "name", c.name, "scenario");
    if (j.contains("gf")) {
        c.gf = gf_from_json(j.at("gf"), c.gf);
    }
    require(j.contains("traffic_a") && j.contains("traffic_b"), "invalid_config", "traffic_a and traffic_b are required");
    c.traffic_a = traffic_from_json(j.at("traffic_a"), "traffic_a");
    c.traffic_b = traffic_from_json(j.at("traffic_b"), "traffic_b");
    if (j.contains("contracts")) {
        const auto& cj = j.at("contracts");
        detail::check_keys(cj, "contracts", {"a", "b"});
        if (cj.contains("a")) {
            c.contract_a = contract_from_json(cj.at("a"), "contracts.a");
        }
        if (cj.contains("b")) {
            c.contract_b = contract_from_json(cj.at("b"), "contracts.b");
        }
    }
    c.w_all = detail::get_or(j, "w_all", c.w_all, "scenario");
    c.scheme = allocation_scheme_from_string(detail::get_or<std::string>(j, "scheme", to_string(c.scheme), "scenario"));
    for (const auto& s : detail::get_or(j, "compare", std::vector<std::string>{}, "scenario")) {
        c.compare.push_back(allocation_scheme_from_string(s));
    }
    c.estimator = estimation::scheme_from_string(
        detail::get_or<std::string>(j, "estimator", estimation::to_string(c.estimator), "scenario"));
    c.predictor = predictor_from_string(detail::get_or<std::string>(j, "predictor", to_string(c.predictor), "scenario"));
    c.masw_window = detail::get_or(j, "masw_window", c.masw_window, "scenario");
    c.refit_every = detail::get_or(j, "refit_every", c.refit_every, "scenario");
    if (j.contains("arima")) {
        const auto& aj = j.at("arima");
        detail::check_keys(aj, "arima", {"p", "d", "q"});
        c.arima.p = detail::get_or(aj, "p", c.arima.p, "arima");
        c.arima.d = detail::get_or(aj, "d", c.arima.d, "arima");
        c.arima.q = detail::get_or(aj, "q", c.arima.q, "arima");
        require(c.arima.p >= 0 && c.arima.d >= 0 && c.arima.q >= 0, "invalid_config", "ARIMA orders must be nonnegative");
    }
    if (j.contains("training")) {
        c.training = training_from_json(j.at("training"), "training");
    }
    c.cycles = detail::get_or(j, "cycles", c.cycles, "scenario");
    c.warmup_cycles = detail::get_or(j, "warmup_cycles", c.warmup_cycles, "scenario");
    c.floor_a = detail::get_or(j, "floor_a", c.floor_a, "scenario");
    c.w_cap = detail::get_or(j, "w_cap", c.w_cap, "scenario");
    c.seed = detail::get_or(j, "seed", c.seed, "scenario");
    c.seeds = detail::get_or(j, "seeds", c.seeds, "scenario");
    c.trials = detail::get_or(j, "trials", c.trials, "scenario");
    c.delay_truncation_ms = detail::get_or(j, "delay_truncation_ms", c.delay_truncation_ms, "scenario");
    c.validate();
    return c;
}

inline json to_json(const ScenarioConfig& c) {
    json compare = json::array();
    for (auto s : c.compare) {
        compare.push_back(to_string(s));
    }
    json j{{"schema_version", kSchemaVersion},
           {"name", c.name},
           {"gf", to_json(c.gf)},
           {"traffic_a", to_json(c.traffic_a)},
           {"traffic_b", to_json(c.traffic_b)},
           {"contracts", {{"a", to_json(c.contract_a)}, {"b", to_json(c.contract_b)}}},
           {"w_all", c.w_all},
           {"scheme", to_string(c.scheme)},
           {"compare", compare},
           {"estimator", estimation::to_string(c.estimator)},
           {"predictor", to_string(c.predictor)},
           {"masw_window", c.masw_window},
           {"refit_every", c.refit_every},
           {"arima", {{"p", c.arima.p}, {"d", c.arima.d}, {"q", c.arima.q}}},
           {"training", to_json(c.training)},
           {"cycles", c.cycles},
           {"warmup_cycles", c.warmup_cycles},
           {"floor_a", c.floor_a},
           {"w_cap", c.w_cap},
           {"seed", c.seed},
           {"trials", c.trials},
           {"delay_truncation_ms", c.delay_truncation_ms}};
    if (!c.seeds.empty()) {
        j["seeds"] = c.seeds;
    }
    return j;
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), "io_error", "cannot open config '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error("invalid_config", path + ": " + e.what());
    }
}

}  // namespace gfa::harness
