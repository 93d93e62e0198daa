#pragma once

// One access cycle of K-repetition grant-free access, plus the retry chain
// that carries failed users into later cycles.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gfa/core/error.hpp"
#include "gfa/core/rng.hpp"
#include "gfa/traffic.hpp"

namespace gfa {

enum class Occupation { Adjacent, Arbitrary };

inline const char* to_string(Occupation o) { return o == Occupation::Adjacent ? "adjacent" : "arbitrary"; }

struct GfConfig {
    int w = 1;         // RBs per slot
    int t_slots = 8;   // slots per access cycle
    int k = 1;         // repetitions per user
    Occupation occupation = Occupation::Adjacent;
    double slot_ms = 0.125;
    int gap_slots = 2;  // broadcast slots closing each scheduling cycle

    int start_slots() const { return t_slots - k + 1; }
    int cycle_slots() const { return t_slots + gap_slots; }
    double cycle_ms() const { return cycle_slots() * slot_ms; }

    void validate() const {
        require(w >= 1, "invalid_config", "W must be at least 1");
        require(t_slots >= 1, "invalid_config", "T must be at least 1");
        require(k >= 1 && k <= t_slots, "invalid_config", "K must satisfy 1 <= K <= T");
        require(gap_slots >= 0, "invalid_config", "gap slots must be nonnegative");
        require(slot_ms > 0.0, "invalid_config", "slot duration must be positive");
    }
};

/// Success / collision / idle RB counts of one slot.
struct SlotObservation {
    int a = 0;
    int b = 0;
    int c = 0;

    int total() const { return a + b + c; }
    /// Fewest users able to produce this slot.
    int min_users() const { return a + 2 * b; }
    friend bool operator==(const SlotObservation&, const SlotObservation&) = default;
};

struct CycleObservation {
    std::vector<SlotObservation> slots;

    SlotObservation totals() const {
        SlotObservation sum;
        for (const auto& s : slots) {
            sum.a += s.a;
            sum.b += s.b;
            sum.c += s.c;
        }
        return sum;
    }

    static CycleObservation idle(int w, int t_slots) {
        return CycleObservation{std::vector<SlotObservation>(static_cast<std::size_t>(t_slots), {0, 0, w})};
    }

    void validate(const GfConfig& cfg) const {
        require(static_cast<int>(slots.size()) == cfg.t_slots, "inconsistent_observation",
                "observation length differs from T");
        for (const auto& s : slots) {
            require(s.a >= 0 && s.b >= 0 && s.c >= 0 && s.total() == cfg.w, "inconsistent_observation",
                    "slot counts must be nonnegative and sum to W");
        }
    }
};

struct UserOutcome {
    std::uint64_t user_id = 0;
    std::vector<int> slots;  // 1-based slots carrying this user's replicas, ascending
    bool succeeded = false;
    std::optional<int> first_success_slot;

    int start_slot() const { return slots.empty() ? 0 : slots.front(); }
};

struct CycleResult {
    CycleObservation observation;
    std::vector<UserOutcome> outcomes;
    int n_active = 0;
    int n_total_pop = 0;
};

/// Reusable simulation state for one access cycle. Buffers survive across
/// runs so Monte Carlo loops do not allocate per cycle.
class CycleSimulator {
public:
    /// Simulates `n_active` users. User u draws from the counter stream keyed
    /// by (seed, u), so results do not depend on evaluation order.
    void run(const GfConfig& cfg, int n_active, std::uint64_t seed) {
        require(n_active >= 0, "invalid_argument", "active user count must be nonnegative");
        cfg_ = cfg;
        n_ = n_active;
        const auto t = static_cast<std::size_t>(cfg.t_slots);
        const auto w = static_cast<std::size_t>(cfg.w);
        const auto k = static_cast<std::size_t>(cfg.k);
        counts_.assign(t * w, 0);
        slot_of_.resize(static_cast<std::size_t>(n_active) * k);
        rb_of_.resize(static_cast<std::size_t>(n_active) * k);
        slot_pool_.resize(t);

        for (int u = 0; u < n_active; ++u) {
            CounterRng rng(derive_seed(seed, static_cast<std::uint64_t>(u)));
            int* slots = &slot_of_[static_cast<std::size_t>(u) * k];
            // A forced slot set (K = T) consumes no draws, so both occupation
            // modes then replay identically from the same seed.
            if (cfg.occupation == Occupation::Adjacent || cfg.k == cfg.t_slots) {
                const int start =
                    cfg.start_slots() == 1 ? 0 : static_cast<int>(rng.below(static_cast<std::uint32_t>(cfg.start_slots())));
                for (std::size_t j = 0; j < k; ++j) {
                    slots[j] = start + static_cast<int>(j);
                }
            } else {
                std::iota(slot_pool_.begin(), slot_pool_.end(), 0);
                for (std::size_t j = 0; j < k; ++j) {
                    const auto pick = j + rng.below(static_cast<std::uint32_t>(t - j));
                    std::swap(slot_pool_[j], slot_pool_[pick]);
                }
                std::copy_n(slot_pool_.begin(), k, slots);
                std::sort(slots, slots + k);
            }
            int* rbs = &rb_of_[static_cast<std::size_t>(u) * k];
            for (std::size_t j = 0; j < k; ++j) {
                rbs[j] = static_cast<int>(rng.below(static_cast<std::uint32_t>(cfg.w)));
                ++counts_[static_cast<std::size_t>(slots[j]) * w + static_cast<std::size_t>(rbs[j])];
            }
        }
    }

    /// 1-based slot of user u's first collision-free replica, 0 if every
    /// replica collided.
    int first_success_slot(int u) const {
        const auto k = static_cast<std::size_t>(cfg_.k);
        const auto w = static_cast<std::size_t>(cfg_.w);
        for (std::size_t j = 0; j < k; ++j) {
            const auto idx = static_cast<std::size_t>(u) * k + j;
            if (counts_[static_cast<std::size_t>(slot_of_[idx]) * w + static_cast<std::size_t>(rb_of_[idx])] == 1) {
                return slot_of_[idx] + 1;
            }
        }
        return 0;
    }

    int failures() const {
        int failed = 0;
        for (int u = 0; u < n_; ++u) {
            failed += first_success_slot(u) == 0 ? 1 : 0;
        }
        return failed;
    }

    SlotObservation slot_observation(int slot) const {
        SlotObservation s;
        const auto w = static_cast<std::size_t>(cfg_.w);
        for (std::size_t r = 0; r < w; ++r) {
            const int c = counts_[static_cast<std::size_t>(slot) * w + r];
            if (c == 0) {
                ++s.c;
            } else if (c == 1) {
                ++s.a;
            } else {
                ++s.b;
            }
        }
        return s;
    }

    CycleObservation observation() const {
        CycleObservation obs;
        obs.slots.reserve(static_cast<std::size_t>(cfg_.t_slots));
        for (int s = 0; s < cfg_.t_slots; ++s) {
            obs.slots.push_back(slot_observation(s));
        }
        return obs;
    }

    /// Number of users transmitting in each slot.
    std::vector<int> slot_loads() const {
        std::vector<int> loads(static_cast<std::size_t>(cfg_.t_slots), 0);
        for (int v : std::span<const int>(slot_of_.data(), static_cast<std::size_t>(n_) * static_cast<std::size_t>(cfg_.k))) {
            ++loads[static_cast<std::size_t>(v)];
        }
        return loads;
    }

    UserOutcome outcome(int u) const {
        UserOutcome out;
        out.user_id = static_cast<std::uint64_t>(u);
        const auto k = static_cast<std::size_t>(cfg_.k);
        out.slots.reserve(k);
        for (std::size_t j = 0; j < k; ++j) {
            out.slots.push_back(slot_of_[static_cast<std::size_t>(u) * k + j] + 1);
        }
        const int first = first_success_slot(u);
        out.succeeded = first > 0;
        if (first > 0) {
            out.first_success_slot = first;
        }
        return out;
    }

    /// RB index (0-based) user u picked for its j-th replica.
    int rb_choice(int u, int j) const { return rb_of_[static_cast<std::size_t>(u * cfg_.k + j)]; }
    int occupancy(int slot, int rb) const { return counts_[static_cast<std::size_t>(slot * cfg_.w + rb)]; }
    int n_active() const { return n_; }
    const GfConfig& config() const { return cfg_; }

private:
    GfConfig cfg_;
    int n_ = 0;
    std::vector<int> counts_;   // T x W occupancy
    std::vector<int> slot_of_;  // n x K, 0-based
    std::vector<int> rb_of_;    // n x K, 0-based
    std::vector<int> slot_pool_;
};

inline CycleResult simulate_cycle(const GfConfig& cfg, int n_active, std::uint64_t seed) {
    cfg.validate();
    CycleSimulator sim;
    sim.run(cfg, n_active, seed);
    CycleResult result;
    result.observation = sim.observation();
    result.n_active = n_active;
    result.n_total_pop = n_active;
    result.outcomes.reserve(static_cast<std::size_t>(n_active));
    for (int u = 0; u < n_active; ++u) {
        result.outcomes.push_back(sim.outcome(u));
    }
    return result;
}

/// Final fate of one user. The delay is kept in slots; a missing value means
/// the user was still unserved when the truncation horizon passed.
struct DelayRecord {
    std::uint64_t user_id = 0;
    int arrival_cycle = 0;
    int attempts = 0;
    std::optional<int> delay_slots;

    bool served() const { return delay_slots.has_value(); }
};

/// Carries users across scheduling cycles. Each cycle's RB count may change
/// (the allocator resizes partitions), so the config is passed per step.
class RetryChain {
public:
    /// `truncation_slots`: users whose earliest possible success would exceed
    /// this delay are closed out as unserved.
    explicit RetryChain(int truncation_slots) : truncation_slots_(truncation_slots) {}

    CycleResult step(const GfConfig& cfg, int new_arrivals, std::uint64_t cycle_seed) {
        cfg.validate();
        require(new_arrivals >= 0, "invalid_argument", "arrivals must be nonnegative");
        for (int i = 0; i < new_arrivals; ++i) {
            pending_.push_back(Pending{next_id_++, cycle_, 0});
        }
        const int n = static_cast<int>(pending_.size());
        sim_.run(cfg, n, cycle_seed);

        CycleResult result;
        result.observation = sim_.observation();
        result.n_active = n;
        result.n_total_pop = n;
        result.outcomes.reserve(pending_.size());

        std::vector<Pending> still_pending;
        for (int u = 0; u < n; ++u) {
            auto& p = pending_[static_cast<std::size_t>(u)];
            UserOutcome out = sim_.outcome(u);
            out.user_id = p.id;
            ++p.attempts;
            const int waited = cycle_ - p.arrival_cycle;
            if (out.succeeded) {
                done_.push_back(DelayRecord{p.id, p.arrival_cycle, p.attempts,
                                            waited * cfg.cycle_slots() + *out.first_success_slot});
            } else if ((waited + 1) * cfg.cycle_slots() + 1 > truncation_slots_) {
                done_.push_back(DelayRecord{p.id, p.arrival_cycle, p.attempts, std::nullopt});
            } else {
                still_pending.push_back(p);
            }
            result.outcomes.push_back(std::move(out));
        }
        pending_ = std::move(still_pending);
        ++cycle_;
        return result;
    }

    std::size_t pending() const { return pending_.size(); }
    int cycle() const { return cycle_; }
    const std::vector<DelayRecord>& records() const { return done_; }

private:
    struct Pending {
        std::uint64_t id;
        int arrival_cycle;
        int attempts;
    };

    int truncation_slots_;
    int cycle_ = 0;
    std::uint64_t next_id_ = 0;
    std::vector<Pending> pending_;
    std::vector<DelayRecord> done_;
    CycleSimulator sim_;
};

inline int truncation_in_slots(double truncation_ms, double slot_ms) {
    return static_cast<int>(std::floor(truncation_ms / slot_ms + 1e-9));
}

/// Runs the trace through a fixed configuration, then keeps stepping with no
/// new arrivals until every user is served or truncated.
inline std::vector<DelayRecord> simulate_retry_chain(const GfConfig& cfg, const traffic::ArrivalTrace& arrivals,
                                                     std::uint64_t seed, double truncation_ms = 10.0) {
    cfg.validate();
    require(truncation_ms > 0.0, "invalid_config", "delay truncation must be positive");
    RetryChain chain(truncation_in_slots(truncation_ms, cfg.slot_ms));
    std::uint64_t cycle = 0;
    for (int count : arrivals.per_cycle_counts) {
        chain.step(cfg, count, derive_seed(seed, cycle++));
    }
    while (chain.pending() > 0) {
        chain.step(cfg, 0, derive_seed(seed, cycle++));
    }
    return chain.records();
}

}  // namespace gfa
