#pragma once

// Exhaustive reference distributions built by enumerating every user choice
// tuple. Users are folded in one at a time over the full per-RB occupancy
// configuration (each RB capped at "2 or more"), which is exact and keeps the
// state count manageable.

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <tuple>
#include <unordered_map>
#include <vector>

namespace oracle {

using Choice = std::vector<int>;  // RB indices (slot * W + rb) hit by one user
using Abc = std::tuple<int, int, int>;

inline std::vector<Choice> single_slot_choices(int w) {
    std::vector<Choice> out;
    for (int r = 0; r < w; ++r) {
        out.push_back({r});
    }
    return out;
}

namespace detail {

inline void subsets(int n, int k, int from, Choice& cur, std::vector<Choice>& out) {
    if (static_cast<int>(cur.size()) == k) {
        out.push_back(cur);
        return;
    }
    for (int i = from; i < n; ++i) {
        cur.push_back(i);
        subsets(n, k, i + 1, cur, out);
        cur.pop_back();
    }
}

inline void rb_tuples(const Choice& slots, int w, std::size_t j, Choice& cur, std::vector<Choice>& out) {
    if (j == slots.size()) {
        out.push_back(cur);
        return;
    }
    for (int r = 0; r < w; ++r) {
        cur.push_back(slots[j] * w + r);
        rb_tuples(slots, w, j + 1, cur, out);
        cur.pop_back();
    }
}

}  // namespace detail

inline std::vector<Choice> k_subsets(int n, int k) {
    std::vector<Choice> out;
    Choice cur;
    detail::subsets(n, k, 0, cur, out);
    return out;
}

/// K distinct slots, one RB in each.
inline std::vector<Choice> arbitrary_choices(int w, int t, int k) {
    std::vector<Choice> out;
    for (const auto& slots : k_subsets(t, k)) {
        Choice cur;
        detail::rb_tuples(slots, w, 0, cur, out);
    }
    return out;
}

/// K consecutive slots from a uniform start, one RB in each.
inline std::vector<Choice> adjacent_choices(int w, int t, int k) {
    std::vector<Choice> out;
    for (int s = 0; s + k <= t; ++s) {
        Choice slots;
        for (int j = 0; j < k; ++j) {
            slots.push_back(s + j);
        }
        Choice cur;
        detail::rb_tuples(slots, w, 0, cur, out);
    }
    return out;
}

/// K distinct RBs out of the pooled W*T grid.
inline std::vector<Choice> pooled_choices(int w, int t, int k) { return k_subsets(w * t, k); }

/// Distribution over occupancy configurations (base-3 code per RB) after n
/// users each pick uniformly from `choices`.
inline std::unordered_map<std::uint64_t, double> occupancy_distribution(int resources, const std::vector<Choice>& choices,
                                                                         int n) {
    std::vector<std::uint64_t> pow3(static_cast<std::size_t>(resources) + 1, 1);
    for (std::size_t i = 1; i < pow3.size(); ++i) {
        pow3[i] = pow3[i - 1] * 3;
    }
    std::unordered_map<std::uint64_t, double> dist{{0, 1.0}};
    const double p = 1.0 / static_cast<double>(choices.size());
    for (int u = 0; u < n; ++u) {
        std::unordered_map<std::uint64_t, double> next;
        for (const auto& [code, prob] : dist) {
            for (const auto& c : choices) {
                std::uint64_t updated = code;
                for (int r : c) {
                    const auto digit = (code / pow3[static_cast<std::size_t>(r)]) % 3;
                    if (digit < 2) {
                        updated += pow3[static_cast<std::size_t>(r)];
                    }
                }
                next[updated] += prob * p;
            }
        }
        dist = std::move(next);
    }
    return dist;
}

inline int digit(std::uint64_t code, int r) {
    for (int i = 0; i < r; ++i) {
        code /= 3;
    }
    return static_cast<int>(code % 3);
}

/// (A, B, C) over the RB range [first, first + count).
inline Abc abc_of(std::uint64_t code, int first, int count) {
    int a = 0, b = 0, c = 0;
    for (int r = first; r < first + count; ++r) {
        const int d = digit(code, r);
        a += d == 1;
        b += d == 2;
        c += d == 0;
    }
    return {a, b, c};
}

/// Exact (A, B, C) distribution of one slot with W RBs and n users.
inline std::map<Abc, double> single_slot(int w, int n) {
    std::map<Abc, double> out;
    for (const auto& [code, p] : occupancy_distribution(w, single_slot_choices(w), n)) {
        out[abc_of(code, 0, w)] += p;
    }
    return out;
}

/// Exact distribution of the whole-cycle totals (A, B, C) for given choices.
inline std::map<Abc, double> cycle_totals(int w, int t, const std::vector<Choice>& choices, int n) {
    std::map<Abc, double> out;
    for (const auto& [code, p] : occupancy_distribution(w * t, choices, n)) {
        out[abc_of(code, 0, w * t)] += p;
    }
    return out;
}

/// Exact distribution of per-slot observation vectors.
inline std::map<std::vector<Abc>, double> cycle_slots(int w, int t, const std::vector<Choice>& choices, int n) {
    std::map<std::vector<Abc>, double> out;
    for (const auto& [code, p] : occupancy_distribution(w * t, choices, n)) {
        std::vector<Abc> v;
        for (int s = 0; s < t; ++s) {
            v.push_back(abc_of(code, s * w, w));
        }
        out[v] += p;
    }
    return out;
}

/// Probability that user 0 has every replica collide, by walking all n-tuples
/// of equally likely choices. Choices list RB indices in slot order.
inline double failure_by_enumeration(int resources, const std::vector<Choice>& choices, int n) {
    const std::size_t m = choices.size();
    std::vector<std::size_t> pick(static_cast<std::size_t>(n), 0);
    std::vector<int> load(static_cast<std::size_t>(resources), 0);
    double failed = 0.0;
    double total = 0.0;
    while (true) {
        std::fill(load.begin(), load.end(), 0);
        for (std::size_t u = 0; u < pick.size(); ++u) {
            for (int rb : choices[pick[u]]) {
                ++load[static_cast<std::size_t>(rb)];
            }
        }
        bool all_hit = true;
        for (int rb : choices[pick[0]]) {
            all_hit = all_hit && load[static_cast<std::size_t>(rb)] >= 2;
        }
        failed += all_hit ? 1.0 : 0.0;
        total += 1.0;
        std::size_t u = 0;
        while (u < pick.size() && ++pick[u] == m) {
            pick[u++] = 0;
        }
        if (u == pick.size()) {
            break;
        }
    }
    return failed / total;
}

}  // namespace oracle
