#pragma once

// Markov views of RB occupation. Each step adds one user; the state is the
// (success, collision, idle) RB count triple.
//
//  * single-slot: W RBs, the user picks one uniformly.
//  * whole-cycle: the W*T RBs of a cycle pooled, the user marks K of them.

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "gfa/core/combinatorics.hpp"
#include "gfa/core/error.hpp"

namespace gfa::estimation {

struct AbcState {
    int a = 0;
    int b = 0;
    int c = 0;

    friend bool operator==(const AbcState&, const AbcState&) = default;
};

enum class ModelVariant : std::uint8_t { SingleSlot = 1, WholeCycle = 2 };

struct Transition {
    AbcState to;
    double probability = 0.0;
};

/// Upper bound on dense table entries (states x steps) a build may allocate.
inline constexpr std::size_t kDefaultTableEntryBound = std::size_t{1} << 26;

class MarkovModel {
public:
    static MarkovModel single_slot(int w) {
        require(w >= 1, "invalid_argument", "W must be at least 1");
        return MarkovModel(ModelVariant::SingleSlot, w, 1, 1);
    }

    static MarkovModel whole_cycle(int w, int t, int k) {
        require(w >= 1, "invalid_argument", "W must be at least 1");
        require(k >= 1 && k <= t, "invalid_argument", "K must satisfy 1 <= K <= T");
        return MarkovModel(ModelVariant::WholeCycle, w, t, k);
    }

    ModelVariant variant() const { return variant_; }
    int w() const { return w_; }
    int t() const { return t_; }
    int k() const { return k_; }
    /// RBs covered by one state: W, or W*T for the whole-cycle view.
    int resources() const { return resources_; }
    AbcState initial() const { return {0, 0, resources_}; }

    /// All triples with a+b+c equal to the resource count.
    std::vector<AbcState> state_space() const {
        std::vector<AbcState> states;
        for (int a = 0; a <= resources_; ++a) {
            for (int b = 0; a + b <= resources_; ++b) {
                states.push_back({a, b, resources_ - a - b});
            }
        }
        return states;
    }

    /// Nonzero one-step moves out of `from`.
    std::vector<Transition> successors(const AbcState& from) const {
        std::vector<Transition> out;
        for_each_successor(from, [&](const AbcState& to, double p) { out.push_back({to, p}); });
        return out;
    }

    template <class Fn>
    void for_each_successor(const AbcState& s, Fn&& fn) const {
        if (variant_ == ModelVariant::SingleSlot) {
            const double w = static_cast<double>(w_);
            if (s.b > 0) {
                fn(s, s.b / w);
            }
            if (s.c > 0) {
                fn(AbcState{s.a + 1, s.b, s.c - 1}, s.c / w);
            }
            if (s.a > 0) {
                fn(AbcState{s.a - 1, s.b + 1, s.c}, s.a / w);
            }
            return;
        }
        // x replicas land on success RBs, y on idle RBs, z on collision RBs.
        const double denom = binom_(resources_, k_);
        for (int x = 0; x <= std::min(k_, s.a); ++x) {
            for (int y = 0; y <= std::min(k_ - x, s.c); ++y) {
                const int z = k_ - x - y;
                if (z > s.b) {
                    continue;
                }
                const double p = binom_(s.a, x) * binom_(s.c, y) * binom_(s.b, z) / denom;
                if (p > 0.0) {
                    fn(AbcState{s.a - x + y, s.b + x, s.c - y}, p);
                }
            }
        }
    }

private:
    MarkovModel(ModelVariant variant, int w, int t, int k)
        : variant_(variant),
          w_(w),
          t_(t),
          k_(k),
          resources_(variant == ModelVariant::SingleSlot ? w : w * t),
          binom_(variant == ModelVariant::SingleSlot ? 1 : w * t) {}

    ModelVariant variant_;
    int w_;
    int t_;
    int k_;
    int resources_;
    BinomialTable binom_;
};

/// Probability of every state after N steps from the initial state, for
/// N = 0..n_max. Stored dense over (a, b); c is implied.
class StepProbTable {
public:
    StepProbTable() = default;

    StepProbTable(ModelVariant variant, int w, int t, int k, int n_max)
        : variant_(variant), w_(w), t_(t), k_(k), n_max_(n_max),
          resources_(variant == ModelVariant::SingleSlot ? w : w * t),
          side_(static_cast<std::size_t>(resources_) + 1),
          probs_(static_cast<std::size_t>(n_max) + 1, std::vector<double>(side_ * side_, 0.0)) {}

    ModelVariant variant() const { return variant_; }
    int w() const { return w_; }
    int t() const { return t_; }
    int k() const { return k_; }
    int n_max() const { return n_max_; }
    int resources() const { return resources_; }

    double prob(int n, const AbcState& s) const {
        if (n < 0 || n > n_max_ || s.a < 0 || s.b < 0 || s.c < 0 || s.a + s.b + s.c != resources_) {
            return 0.0;
        }
        return probs_[static_cast<std::size_t>(n)][index(s.a, s.b)];
    }

    /// Nonzero entries reached in exactly n steps, ordered by (a, b).
    std::vector<std::pair<AbcState, double>> entries(int n) const {
        std::vector<std::pair<AbcState, double>> out;
        const auto& row = probs_.at(static_cast<std::size_t>(n));
        for (int a = 0; a <= resources_; ++a) {
            for (int b = 0; a + b <= resources_; ++b) {
                const double p = row[index(a, b)];
                if (p > 0.0) {
                    out.push_back({AbcState{a, b, resources_ - a - b}, p});
                }
            }
        }
        return out;
    }

    double mass(int n) const {
        double sum = 0.0;
        for (double p : probs_.at(static_cast<std::size_t>(n))) {
            sum += p;
        }
        return sum;
    }

    void set(int n, const AbcState& s, double p) { probs_[static_cast<std::size_t>(n)][index(s.a, s.b)] = p; }
    void add(int n, const AbcState& s, double p) { probs_[static_cast<std::size_t>(n)][index(s.a, s.b)] += p; }

    bool matches(ModelVariant variant, int w, int t, int k, int n_max) const {
        return variant_ == variant && w_ == w && t_ == t && k_ == k && n_max_ >= n_max;
    }

private:
    std::size_t index(int a, int b) const {
        return static_cast<std::size_t>(a) * side_ + static_cast<std::size_t>(b);
    }

    ModelVariant variant_ = ModelVariant::SingleSlot;
    int w_ = 0;
    int t_ = 1;
    int k_ = 1;
    int n_max_ = -1;
    int resources_ = 0;
    std::size_t side_ = 0;
    std::vector<std::vector<double>> probs_;
};

/// Iterates the kernel n_max times from the initial state.
inline StepProbTable build_step_table(const MarkovModel& model, int n_max,
                                      std::size_t entry_bound = kDefaultTableEntryBound) {
    require(n_max >= 0, "invalid_argument", "n_max must be nonnegative");
    const auto side = static_cast<std::size_t>(model.resources()) + 1;
    require(side * side * (static_cast<std::size_t>(n_max) + 1) <= entry_bound, "state_space_too_large",
            "step table for " + std::to_string(model.resources()) + " RBs and " + std::to_string(n_max) +
                " steps exceeds the memory bound");
    StepProbTable table(model.variant(), model.w(), model.t(), model.k(), n_max);
    table.set(0, model.initial(), 1.0);
    for (int n = 0; n < n_max; ++n) {
        for (const auto& [state, p] : table.entries(n)) {
            model.for_each_successor(state, [&](const AbcState& to, double q) { table.add(n + 1, to, p * q); });
        }
    }
    return table;
}

struct ModelWithTable {
    MarkovModel model;
    StepProbTable table;
};

inline ModelWithTable build_single_slot_model(int w, int n_max, std::size_t entry_bound = kDefaultTableEntryBound) {
    auto model = MarkovModel::single_slot(w);
    auto table = build_step_table(model, n_max, entry_bound);
    return {std::move(model), std::move(table)};
}

inline ModelWithTable build_whole_cycle_model(int w, int t, int k, int n_max,
                                              std::size_t entry_bound = kDefaultTableEntryBound) {
    auto model = MarkovModel::whole_cycle(w, t, k);
    auto table = build_step_table(model, n_max, entry_bound);
    return {std::move(model), std::move(table)};
}

/// Default step horizon: enough to cover twice the largest consistency
/// lower bound any observation can produce, and at least 3W.
inline int default_table_horizon(ModelVariant variant, int w, int t, int k) {
    if (variant == ModelVariant::SingleSlot) {
        return 4 * w;
    }
    const int max_lower = (2 * w * t + k - 1) / k;
    return std::max(3 * w, 2 * max_lower);
}

// Cache file layout (little-endian):
//   magic "GFASTPT\0" | u32 version | u8 variant | u32 W, T, K, n_max
//   then for N = 0..n_max: u32 entry count, entries of (u32 a, u32 b, f64 p).
namespace cache {

inline constexpr char kMagic[8] = {'G', 'F', 'A', 'S', 'T', 'P', 'T', '\0'};
inline constexpr std::uint32_t kVersion = 1;

namespace detail {

template <class T>
void put(std::ostream& os, T v) {
    char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    os.write(bytes, sizeof(T));
}

template <class T>
T get(std::istream& is) {
    char bytes[sizeof(T)];
    is.read(bytes, sizeof(T));
    if (!is) {
        throw Error("cache_corrupt", "step table cache ended early");
    }
    T v;
    std::memcpy(&v, bytes, sizeof(T));
    return v;
}

}  // namespace detail

inline void save(const StepProbTable& table, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(os), "io_error", "cannot open " + path + " for writing");
    os.write(kMagic, sizeof(kMagic));
    detail::put<std::uint32_t>(os, kVersion);
    detail::put<std::uint8_t>(os, static_cast<std::uint8_t>(table.variant()));
    detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(table.w()));
    detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(table.t()));
    detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(table.k()));
    detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(table.n_max()));
    for (int n = 0; n <= table.n_max(); ++n) {
        const auto entries = table.entries(n);
        detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(entries.size()));
        for (const auto& [s, p] : entries) {
            detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(s.a));
            detail::put<std::uint32_t>(os, static_cast<std::uint32_t>(s.b));
            detail::put<double>(os, p);
        }
    }
    require(static_cast<bool>(os), "io_error", "failed writing " + path);
}

inline StepProbTable load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(static_cast<bool>(is), "io_error", "cannot open " + path);
    char magic[sizeof(kMagic)];
    is.read(magic, sizeof(magic));
    require(static_cast<bool>(is) && std::memcmp(magic, kMagic, sizeof(kMagic)) == 0, "cache_corrupt",
            path + " is not a step table cache");
    require(detail::get<std::uint32_t>(is) == kVersion, "cache_version", path + " has an unsupported version");
    const auto variant = static_cast<ModelVariant>(detail::get<std::uint8_t>(is));
    require(variant == ModelVariant::SingleSlot || variant == ModelVariant::WholeCycle, "cache_corrupt",
            path + " names an unknown model variant");
    const auto w = static_cast<int>(detail::get<std::uint32_t>(is));
    const auto t = static_cast<int>(detail::get<std::uint32_t>(is));
    const auto k = static_cast<int>(detail::get<std::uint32_t>(is));
    const auto n_max = static_cast<int>(detail::get<std::uint32_t>(is));
    StepProbTable table(variant, w, t, k, n_max);
    for (int n = 0; n <= n_max; ++n) {
        const auto count = detail::get<std::uint32_t>(is);
        for (std::uint32_t i = 0; i < count; ++i) {
            const auto a = static_cast<int>(detail::get<std::uint32_t>(is));
            const auto b = static_cast<int>(detail::get<std::uint32_t>(is));
            const double p = detail::get<double>(is);
            require(a + b <= table.resources(), "cache_corrupt", path + " holds an out-of-range state");
            table.set(n, AbcState{a, b, table.resources() - a - b}, p);
        }
    }
    return table;
}

/// Loads the cached table when it matches the requested parameters,
/// otherwise builds it and rewrites the cache.
inline StepProbTable load_or_build(const std::string& path, ModelVariant variant, int w, int t, int k, int n_max) {
    if (std::ifstream probe(path, std::ios::binary); probe) {
        try {
            auto table = load(path);
            if (table.matches(variant, w, t, k, n_max)) {
                return table;
            }
        } catch (const Error&) {
            // stale or corrupt: rebuild below
        }
    }
    const auto model = variant == ModelVariant::SingleSlot ? MarkovModel::single_slot(w)
                                                           : MarkovModel::whole_cycle(w, t, k);
    auto table = build_step_table(model, n_max);
    save(table, path);
    return table;
}

inline std::string default_file_name(ModelVariant variant, int w, int t, int k, int n_max) {
    const std::string kind = variant == ModelVariant::SingleSlot ? "single" : "whole";
    return "steptable_" + kind + "_w" + std::to_string(w) + "_t" + std::to_string(t) + "_k" + std::to_string(k) +
           "_n" + std::to_string(n_max) + ".bin";
}

}  // namespace cache

}  // namespace gfa::estimation
