#pragma once

// Analytical access-failure probabilities, their inversion to RB counts, and
// the two-service allocation / negotiation rules built on top.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "gfa/core/combinatorics.hpp"
#include "gfa/core/error.hpp"
#include "gfa/estimation/estimators.hpp"
#include "gfa/gfsim.hpp"

namespace gfa::allocation {

inline void check_fail_args(int w, int n, int k, int t) {
    require(n >= 1, "invalid_argument", "failure probability needs n >= 1");
    require(w >= 1, "invalid_argument", "failure probability needs W >= 1");
    require(k >= 1 && k <= t, "invalid_argument", "K must satisfy 1 <= K <= T");
}

namespace detail {

/// Probability that one replica collides in a slot carrying m users: the
/// other m-1 must all miss its RB. W (W-1)^(m-1) / W^m as a ratio power.
inline double collision_given_load(int w, int m) {
    const double keep = std::pow(static_cast<double>(w - 1) / static_cast<double>(w), m - 1);
    return 1.0 - keep;
}

class AdjacentCache {
public:
    std::optional<double> find(const std::tuple<int, int, int, int>& key) {
        std::lock_guard lock(mutex_);
        auto it = values_.find(key);
        if (it == values_.end()) {
            return std::nullopt;
        }
        return it->second;
    }

    void store(const std::tuple<int, int, int, int>& key, double value) {
        std::lock_guard lock(mutex_);
        values_.emplace(key, value);
    }

private:
    std::mutex mutex_;
    std::map<std::tuple<int, int, int, int>, double> values_;
};

inline AdjacentCache& adjacent_cache() {
    static AdjacentCache cache;
    return cache;
}

}  // namespace detail

/// Failure probability of a random user under adjacent K-repetition: exact
/// sum over start vectors.
inline double fail_prob_adjacent(int w, int n, int k, int t, double cap = kDefaultEnumerationCap) {
    check_fail_args(w, n, k, t);
    const auto key = std::make_tuple(w, n, k, t);
    if (auto hit = detail::adjacent_cache().find(key)) {
        return *hit;
    }
    std::vector<double> collide(static_cast<std::size_t>(n) + 1, 0.0);
    for (int m = 1; m <= n; ++m) {
        collide[static_cast<std::size_t>(m)] = detail::collision_given_load(w, m);
    }
    const int slots = t - k + 1;
    std::vector<double> log_fact(static_cast<std::size_t>(n) + 1, 0.0);
    for (int m = 1; m <= n; ++m) {
        log_fact[static_cast<std::size_t>(m)] = log_fact[static_cast<std::size_t>(m) - 1] + std::log(m);
    }
    const double log_norm = log_fact[static_cast<std::size_t>(n)] - n * std::log(static_cast<double>(slots));
    double total = 0.0;
    std::vector<int> loads;
    estimation::enumerate_start_vectors(
        n, slots,
        [&](const std::vector<int>& phi) {
            loads = estimation::loads_from_starts(phi, t, k);
            double inner = 0.0;
            for (int r = 0; r < slots; ++r) {
                const int starters = phi[static_cast<std::size_t>(r)];
                if (starters == 0) {
                    continue;
                }
                double tar = 1.0;
                for (int j = 0; j < k; ++j) {
                    tar *= collide[static_cast<std::size_t>(loads[static_cast<std::size_t>(r + j)])];
                }
                inner += static_cast<double>(starters) / n * tar;
            }
            if (inner > 0.0) {
                double log_p = log_norm;
                for (int v : phi) {
                    log_p -= log_fact[static_cast<std::size_t>(v)];
                }
                total += std::exp(log_p) * inner;
            }
        },
        cap);
    detail::adjacent_cache().store(key, total);
    return total;
}

/// Mean-field failure probability under arbitrary K-repetition, with the
/// expected per-slot load e = NK/T kept real-valued.
inline double fail_prob_arbitrary(int w, int n, int k, int t) {
    check_fail_args(w, n, k, t);
    const double e = static_cast<double>(n) * k / t;
    double bracket = 1.0 - std::pow(static_cast<double>(w - 1) / static_cast<double>(w), e - 1.0);
    // e < 1 sends the power above 1; no user then has company.
    bracket = std::clamp(bracket, 0.0, 1.0);
    return std::pow(bracket, k);
}

/// Dispatch on occupation; zero users never fail, zero RBs always fail.
inline double fail_prob(int w, int n, const GfConfig& cfg) {
    if (n <= 0) {
        return 0.0;
    }
    if (w <= 0) {
        return 1.0;
    }
    return cfg.occupation == Occupation::Adjacent ? fail_prob_adjacent(w, n, cfg.k, cfg.t_slots)
                                                  : fail_prob_arbitrary(w, n, cfg.k, cfg.t_slots);
}

struct RequiredRbs {
    int w = 0;
    bool overflow = false;
};

/// Smallest W with failure probability at most 1 - reliability, scanning up
/// from W = 1. Returns w_cap with the overflow flag when even w_cap misses.
inline RequiredRbs required_rbs(double reliability, int n, const GfConfig& cfg, int w_cap = 1024) {
    require(reliability > 0.0 && reliability < 1.0, "invalid_argument", "reliability must lie in (0, 1)");
    require(w_cap >= 1, "invalid_argument", "W cap must be at least 1");
    if (n <= 0) {
        return {0, false};
    }
    const double budget = 1.0 - reliability;
    for (int w = 1; w <= w_cap; ++w) {
        if (fail_prob(w, n, cfg) <= budget) {
            return {w, false};
        }
    }
    return {w_cap, true};
}

// ---------------------------------------------------------------------------

struct QosContract {
    double reliability_min = 0.99;
    std::optional<double> reliability_ideal;
    int priority = 0;

    double ideal() const { return reliability_ideal.value_or(reliability_min); }

    void validate() const {
        require(reliability_min > 0.0 && reliability_min < 1.0, "invalid_config",
                "reliability_min must lie in (0, 1)");
        if (reliability_ideal) {
            require(*reliability_ideal >= reliability_min && *reliability_ideal < 1.0, "invalid_config",
                    "reliability_ideal must lie in [reliability_min, 1)");
        }
    }
};

enum class Condition { Cond1, Cond2, Cond3Outage };

inline const char* to_string(Condition c) {
    switch (c) {
        case Condition::Cond1: return "cond1";
        case Condition::Cond2: return "cond2";
        case Condition::Cond3Outage: return "cond3_outage";
    }
    return "?";
}

struct AllocationDecision {
    int w1 = 0;
    int w2 = 0;
    Condition condition = Condition::Cond1;
    std::pair<double, double> expected_qos{1.0, 1.0};
    std::optional<double> delta;
    // Inputs to the classification, kept for records and checks.
    int w_req = 0;
    int w_q2_ide = 0;
    int w_q2_min = 0;
};

struct AllocateOptions {
    int floor_a = 2;  // RBs kept for A while its predicted load is zero
    int w_cap = 1024;
};

/// Two-service allocation. A is the bursty high-priority event with a single
/// reliability target, B the uniform event with (min, ideal).
inline AllocationDecision allocate(int pred_a, int pred_b, const QosContract& a, const QosContract& b, int w_all,
                                   const GfConfig& cfg, const AllocateOptions& opts = {}) {
    require(w_all >= 1, "invalid_argument", "W_all must be at least 1");
    require(pred_a >= 0 && pred_b >= 0, "invalid_argument", "predicted loads must be nonnegative");
    a.validate();
    b.validate();

    AllocationDecision d;
    d.w_q2_ide = required_rbs(b.ideal(), pred_b, cfg, opts.w_cap).w;
    d.w_q2_min = required_rbs(b.reliability_min, pred_b, cfg, opts.w_cap).w;
    require(w_all >= d.w_q2_min + opts.floor_a, "outage",
            "W_all = " + std::to_string(w_all) + " cannot cover B's minimum (" + std::to_string(d.w_q2_min) +
                ") plus A's floor (" + std::to_string(opts.floor_a) + ")");
    d.w_req = std::max(required_rbs(a.reliability_min, pred_a, cfg, opts.w_cap).w, opts.floor_a);

    const int neg_max = d.w_q2_ide - d.w_q2_min;
    if (d.w_req <= w_all - d.w_q2_ide) {
        d.condition = Condition::Cond1;
        d.w1 = d.w_req;
        d.w2 = d.w_q2_ide;
    } else if (d.w_req <= w_all - d.w_q2_ide + neg_max) {
        d.condition = Condition::Cond2;
        d.w1 = d.w_req;
        d.w2 = w_all - d.w_req;
    } else {
        d.condition = Condition::Cond3Outage;
        d.w1 = w_all - d.w_q2_ide + neg_max;
        d.w2 = d.w_q2_ide - neg_max;
    }
    d.expected_qos = {1.0 - fail_prob(d.w1, pred_a, cfg), 1.0 - fail_prob(d.w2, pred_b, cfg)};
    return d;
}

// ---------------------------------------------------------------------------
// Negotiation: the donor gives up a fraction delta of its RBs to the receiver.

struct NegotiationPoint {
    double delta = 0.0;
    int w_donor = 0;
    int w_receiver = 0;
    double fail_donor = 0.0;
    double fail_receiver = 0.0;
};

struct NegotiationResult {
    std::vector<NegotiationPoint> curve;
    std::optional<double> delta;  // smallest feasible grid point
    bool outage = false;
};

inline constexpr int kDeltaSteps = 20;  // grid step 0.05

/// Sweeps delta over [0, 1]. The donor keeps w_donor - round(w_donor * delta)
/// RBs and the receiver gains exactly what the donor lost.
inline NegotiationResult negotiate_delta(int w_donor, int w_receiver, int pred_donor, int pred_receiver,
                                         double reliability_donor, double reliability_receiver,
                                         const GfConfig& cfg) {
    require(w_donor >= 0 && w_receiver >= 0, "invalid_argument", "RB counts must be nonnegative");
    NegotiationResult out;
    for (int i = 0; i <= kDeltaSteps; ++i) {
        NegotiationPoint p;
        p.delta = static_cast<double>(i) / kDeltaSteps;
        const int moved = estimation::round_half_up(w_donor * p.delta);
        p.w_donor = w_donor - moved;
        p.w_receiver = w_receiver + moved;
        p.fail_donor = fail_prob(p.w_donor, pred_donor, cfg);
        p.fail_receiver = fail_prob(p.w_receiver, pred_receiver, cfg);
        if (!out.delta && p.fail_donor <= 1.0 - reliability_donor && p.fail_receiver <= 1.0 - reliability_receiver) {
            out.delta = p.delta;
        }
        out.curve.push_back(p);
    }
    out.outage = !out.delta.has_value();
    return out;
}

}  // namespace gfa::allocation
