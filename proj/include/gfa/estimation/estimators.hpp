#pragma once

// Network-load estimators: given one cycle's (A, B, C) observation, recover
// the number of active users.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gfa/core/combinatorics.hpp"
#include "gfa/core/error.hpp"
#include "gfa/estimation/markov.hpp"
#include "gfa/gfsim.hpp"

namespace gfa::estimation {

enum class Scheme { SsMlLs, MsMli, MsMld, Msem, Isce };

inline const char* to_string(Scheme s) {
    switch (s) {
        case Scheme::SsMlLs: return "ss-ml-ls";
        case Scheme::MsMli: return "ms-mli";
        case Scheme::MsMld: return "ms-mld";
        case Scheme::Msem: return "msem";
        case Scheme::Isce: return "isce";
    }
    return "?";
}

inline Scheme scheme_from_string(const std::string& s) {
    for (auto v : {Scheme::SsMlLs, Scheme::MsMli, Scheme::MsMld, Scheme::Msem, Scheme::Isce}) {
        if (s == to_string(v)) {
            return v;
        }
    }
    throw Error("invalid_config", "unknown estimator '" + s + "'");
}

struct EstimateReport {
    int n_hat = 0;
    Scheme scheme = Scheme::SsMlLs;
    std::optional<std::vector<double>> per_slot;  // n_hat_t, when the scheme produces one
    std::optional<std::vector<double>> start_vector;
    std::optional<double> log_likelihood;
};

/// Hypothesis range for ML scans: [lower, max(rb_multiple * RBs, lower_multiple * lower)],
/// or [lower, n_max] when n_max is pinned.
struct SearchOptions {
    int rb_multiple = 3;
    double lower_multiple = 2.0;
    std::optional<int> n_max;
    double enumeration_cap = kDefaultEnumerationCap;

    int upper(int lower, int resources) const {
        if (n_max) {
            return std::max(*n_max, lower);
        }
        return std::max({rb_multiple * resources, static_cast<int>(std::ceil(lower_multiple * lower)), lower});
    }
};

inline int round_half_up(double x) { return static_cast<int>(std::floor(x + 0.5)); }

// ---------------------------------------------------------------------------
// Start vector <-> per-slot load relation.

/// Users active in each slot when phi[r] users start in slot r (0-based),
/// each occupying K consecutive slots.
inline std::vector<int> loads_from_starts(std::span<const int> phi, int t_slots, int k) {
    require(static_cast<int>(phi.size()) == t_slots - k + 1, "invalid_argument", "start vector length must be T-K+1");
    std::vector<int> n(static_cast<std::size_t>(t_slots), 0);
    for (std::size_t r = 0; r < phi.size(); ++r) {
        for (int j = 0; j < k; ++j) {
            n[r + static_cast<std::size_t>(j)] += phi[r];
        }
    }
    return n;
}

/// T x (T-K+1) 0/1 matrix mapping start counts to per-slot loads.
struct DesignMatrix {
    Eigen::MatrixXd omega;

    static DesignMatrix for_cycle(int t_slots, int k) {
        require(k >= 1 && k <= t_slots, "invalid_argument", "K must satisfy 1 <= K <= T");
        const int s = t_slots - k + 1;
        DesignMatrix m{Eigen::MatrixXd::Zero(t_slots, s)};
        for (int t = 0; t < t_slots; ++t) {
            for (int r = std::max(0, t - k + 1); r <= std::min(t, s - 1); ++r) {
                m.omega(t, r) = 1.0;
            }
        }
        return m;
    }
};

/// Least-squares start vector from per-slot loads via the normal equations.
inline Eigen::VectorXd solve_start_vector(const DesignMatrix& design, std::span<const double> loads) {
    const Eigen::MatrixXd& omega = design.omega;
    require(static_cast<Eigen::Index>(loads.size()) == omega.rows(), "invalid_argument", "load vector length must be T");
    const Eigen::VectorXd n = Eigen::Map<const Eigen::VectorXd>(loads.data(), static_cast<Eigen::Index>(loads.size()));
    const Eigen::MatrixXd gram = omega.transpose() * omega;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    require(ldlt.info() == Eigen::Success && ldlt.isPositive(), "singular_design", "normal equations are singular");
    return ldlt.solve(omega.transpose() * n);
}

/// Every start vector with `n` users over `slots` start slots.
template <class Visitor>
void enumerate_start_vectors(int n, int slots, Visitor&& visit, double cap = kDefaultEnumerationCap) {
    for_each_composition(n, slots, std::forward<Visitor>(visit), cap);
}

/// Multinomial probability of a start vector under independent uniform
/// start-slot draws by `n` users.
inline double start_vector_pmf(std::span<const int> phi, int n) {
    require(!phi.empty(), "invalid_argument", "start vector must be nonempty");
    long sum = 0;
    double log_p = log_factorial(n) - n * std::log(static_cast<double>(phi.size()));
    for (int v : phi) {
        require(v >= 0, "invalid_argument", "start counts must be nonnegative");
        sum += v;
        log_p -= log_factorial(v);
    }
    require(sum == n, "invalid_argument", "start vector does not sum to N");
    return std::exp(log_p);
}

// ---------------------------------------------------------------------------
// Single-slot maximum likelihood.

struct SlotMl {
    int n = 0;
    double likelihood = 0.0;
};

/// Most likely user count behind one slot's observation. Ties go to the
/// smaller count.
inline SlotMl ml_slot_count(const SlotObservation& obs, const StepProbTable& table, const SearchOptions& opts = {}) {
    require(table.variant() == ModelVariant::SingleSlot, "invalid_argument", "single-slot table required");
    require(obs.total() == table.resources() && obs.a >= 0 && obs.b >= 0 && obs.c >= 0, "inconsistent_observation",
            "slot observation does not match W of the table");
    const int lower = obs.min_users();
    const int upper = std::min(opts.upper(lower, table.resources()), table.n_max());
    SlotMl best{-1, 0.0};
    const AbcState state{obs.a, obs.b, obs.c};
    for (int n = lower; n <= upper; ++n) {
        const double p = table.prob(n, state);
        if (p > best.likelihood) {
            best = {n, p};
        }
    }
    require(best.n >= 0, "inconsistent_observation", "observed slot state is unreachable within the search range");
    return best;
}

inline void check_cycle(const CycleObservation& obs, const GfConfig& cfg) {
    cfg.validate();
    obs.validate(cfg);
}

/// Per-slot ML loads, then least squares for the start vector; negative
/// start counts are clamped before summing.
inline EstimateReport ss_ml_ls(const CycleObservation& obs, const GfConfig& cfg, const StepProbTable& table,
                               const SearchOptions& opts = {}) {
    check_cycle(obs, cfg);
    require(cfg.occupation == Occupation::Adjacent, "invalid_argument", "SS-ML-LS needs adjacent occupation");
    std::vector<double> loads;
    loads.reserve(obs.slots.size());
    for (const auto& s : obs.slots) {
        loads.push_back(ml_slot_count(s, table, opts).n);
    }
    const auto phi = solve_start_vector(DesignMatrix::for_cycle(cfg.t_slots, cfg.k), loads);
    std::vector<double> starts(phi.data(), phi.data() + phi.size());
    double total = 0.0;
    for (double& v : starts) {
        v = std::max(0.0, v);
        total += v;
    }
    EstimateReport report;
    report.scheme = Scheme::SsMlLs;
    report.n_hat = round_half_up(total);
    report.per_slot = std::move(loads);
    report.start_vector = std::move(starts);
    return report;
}

// ---------------------------------------------------------------------------
// Multi-slot ML over start vectors (adjacent occupation).

/// Smallest user count consistent with an adjacent-occupation cycle.
inline int cycle_lower_bound(const CycleObservation& obs, int k) {
    int per_slot = 0;
    int replicas = 0;
    for (const auto& s : obs.slots) {
        per_slot = std::max(per_slot, s.min_users());
        replicas += s.min_users();
    }
    return std::max(per_slot, (replicas + k - 1) / k);
}

namespace detail {

struct MliSearch {
    int t_slots;
    int k;
    int starts;
    int upper;
    std::vector<std::vector<double>> f;   // f[t][n] = P(obs_t | n)
    std::vector<int> lo, hi;              // support of f[t]
    std::vector<double> inv_fact;
    std::vector<int> phi;
    std::vector<double> acc;              // acc[N] = sum over phi with |phi| = N

    void descend(int j, int total, double weight) {
        int base = 0;
        for (int i = std::max(0, j - k + 1); i < j; ++i) {
            base += phi[static_cast<std::size_t>(i)];
        }
        int from = std::max(0, lo[static_cast<std::size_t>(j)] - base);
        int to = std::min(upper - total, hi[static_cast<std::size_t>(j)] - base);
        if (j + 1 < starts) {
            for (int v = from; v <= to; ++v) {
                const double fv = f[static_cast<std::size_t>(j)][static_cast<std::size_t>(base + v)];
                if (fv == 0.0) {
                    continue;
                }
                phi[static_cast<std::size_t>(j)] = v;
                descend(j + 1, total + v, weight * inv_fact[static_cast<std::size_t>(v)] * fv);
            }
            return;
        }
        // Last start slot: it also closes every trailing slot t >= starts.
        std::vector<int> tail_base;
        for (int t = starts; t < t_slots; ++t) {
            int sum = 0;
            for (int i = t - k + 1; i < j; ++i) {
                sum += phi[static_cast<std::size_t>(i)];
            }
            tail_base.push_back(sum);
            from = std::max(from, lo[static_cast<std::size_t>(t)] - sum);
            to = std::min(to, hi[static_cast<std::size_t>(t)] - sum);
        }
        for (int v = from; v <= to; ++v) {
            double p = weight * inv_fact[static_cast<std::size_t>(v)] *
                       f[static_cast<std::size_t>(j)][static_cast<std::size_t>(base + v)];
            for (std::size_t i = 0; i < tail_base.size() && p != 0.0; ++i) {
                p *= f[static_cast<std::size_t>(starts) + i][static_cast<std::size_t>(tail_base[i] + v)];
            }
            if (p != 0.0) {
                acc[static_cast<std::size_t>(total + v)] += p;
            }
        }
    }
};

}  // namespace detail

/// Joint likelihood of the whole cycle for each hypothesis N, summed over
/// start vectors weighted by their multinomial probability; per-slot factors
/// come from the single-slot table.
inline EstimateReport ms_mli(const CycleObservation& obs, const GfConfig& cfg, const StepProbTable& table,
                             const SearchOptions& opts = {}) {
    check_cycle(obs, cfg);
    require(cfg.occupation == Occupation::Adjacent, "invalid_argument", "MS-MLI needs adjacent occupation");
    require(table.variant() == ModelVariant::SingleSlot && table.w() == cfg.w, "invalid_argument",
            "MS-MLI needs the single-slot table for this W");
    const int lower = cycle_lower_bound(obs, cfg.k);
    const int upper = std::min(opts.upper(lower, cfg.w), table.n_max());
    require(lower <= upper, "inconsistent_observation", "observation needs more users than the table covers");
    const int starts = cfg.start_slots();

    double nominal = 0.0;
    for (int n = lower; n <= upper; ++n) {
        nominal += composition_count(n, starts);
    }
    require(nominal <= opts.enumeration_cap, "enumeration_cap",
            "MS-MLI would enumerate " + std::to_string(static_cast<long long>(nominal)) +
                " start vectors; lower n_max or fall back to SS-ML-LS");

    detail::MliSearch search{cfg.t_slots, cfg.k, starts, upper, {}, {}, {}, {}, {}, {}};
    search.f.resize(static_cast<std::size_t>(cfg.t_slots));
    for (int t = 0; t < cfg.t_slots; ++t) {
        const auto& s = obs.slots[static_cast<std::size_t>(t)];
        auto& ft = search.f[static_cast<std::size_t>(t)];
        ft.assign(static_cast<std::size_t>(upper) + 1, 0.0);
        int first = -1;
        int last = -1;
        for (int n = 0; n <= upper; ++n) {
            ft[static_cast<std::size_t>(n)] = table.prob(n, AbcState{s.a, s.b, s.c});
            if (ft[static_cast<std::size_t>(n)] > 0.0) {
                first = first < 0 ? n : first;
                last = n;
            }
        }
        require(first >= 0, "inconsistent_observation", "a slot state is unreachable within the search range");
        search.lo.push_back(first);
        search.hi.push_back(last);
    }
    search.inv_fact.resize(static_cast<std::size_t>(upper) + 1);
    for (int m = 0; m <= upper; ++m) {
        search.inv_fact[static_cast<std::size_t>(m)] = std::exp(-log_factorial(m));
    }
    search.phi.assign(static_cast<std::size_t>(starts), 0);
    search.acc.assign(static_cast<std::size_t>(upper) + 1, 0.0);
    search.descend(0, 0, 1.0);

    EstimateReport report;
    report.scheme = Scheme::MsMli;
    report.n_hat = -1;
    double best = -std::numeric_limits<double>::infinity();
    for (int n = lower; n <= upper; ++n) {
        const double a = search.acc[static_cast<std::size_t>(n)];
        if (a <= 0.0) {
            continue;
        }
        const double log_l = std::log(a) + log_factorial(n) - n * std::log(static_cast<double>(starts));
        if (log_l > best) {
            best = log_l;
            report.n_hat = n;
        }
    }
    require(report.n_hat >= 0, "inconsistent_observation", "no hypothesis explains the observed cycle");
    report.log_likelihood = best;
    return report;
}

// ---------------------------------------------------------------------------
// Whole-cycle direct ML (arbitrary occupation).

inline EstimateReport ms_mld(const CycleObservation& obs, const GfConfig& cfg, const StepProbTable& table,
                             const SearchOptions& opts = {}) {
    check_cycle(obs, cfg);
    require(cfg.occupation == Occupation::Arbitrary, "invalid_argument", "MS-MLD needs arbitrary occupation");
    require(table.variant() == ModelVariant::WholeCycle && table.w() == cfg.w && table.t() == cfg.t_slots &&
                table.k() == cfg.k,
            "invalid_argument", "MS-MLD needs the whole-cycle table for this (W, T, K)");
    const auto totals = obs.totals();
    const int lower = cycle_lower_bound(obs, cfg.k);
    const int upper = std::min(opts.upper(lower, cfg.w), table.n_max());
    const AbcState state{totals.a, totals.b, totals.c};
    EstimateReport report;
    report.scheme = Scheme::MsMld;
    report.n_hat = -1;
    double best = 0.0;
    for (int n = lower; n <= upper; ++n) {
        const double p = table.prob(n, state);
        if (p > best) {
            best = p;
            report.n_hat = n;
        }
    }
    require(report.n_hat >= 0, "inconsistent_observation", "observed totals are unreachable within the search range");
    report.log_likelihood = std::log(best);
    return report;
}

// ---------------------------------------------------------------------------
// Baselines.

/// Users behind an aggregate window of `rbs` RBs, by least squared distance
/// between observed counts and their expectations.
inline int msem_window_estimate(const SlotObservation& window, int rbs, const SearchOptions& opts = {}) {
    const int upper = opts.upper(window.min_users(), rbs);
    const double m = static_cast<double>(rbs);
    int best_n = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int n = 0; n <= upper; ++n) {
        const double a_mean = n == 0 ? 0.0 : n * std::pow(1.0 - 1.0 / m, n - 1);
        const double c_mean = m * std::pow(1.0 - 1.0 / m, n);
        const double b_mean = m - a_mean - c_mean;
        const double d = (window.a - a_mean) * (window.a - a_mean) + (window.b - b_mean) * (window.b - b_mean) +
                         (window.c - c_mean) * (window.c - c_mean);
        if (d < best) {
            best = d;
            best_n = n;
        }
    }
    return best_n;
}

inline EstimateReport msem(const CycleObservation& obs, const GfConfig& cfg, const SearchOptions& opts = {}) {
    check_cycle(obs, cfg);
    require(cfg.occupation == Occupation::Adjacent, "invalid_argument", "MSEM needs adjacent occupation");
    const int t_slots = cfg.t_slots;
    const int k = cfg.k;
    // theta(r, e): users summed over e consecutive slots starting at slot r (1-based).
    const auto theta = [&](int r, int e) {
        SlotObservation window;
        for (int t = r; t < r + e; ++t) {
            const auto& s = obs.slots[static_cast<std::size_t>(t - 1)];
            window.a += s.a;
            window.b += s.b;
            window.c += s.c;
        }
        return msem_window_estimate(window, e * cfg.w, opts);
    };
    std::vector<double> thetas;
    double sum = 0.0;
    for (int e = 1; e <= k - 1; ++e) {
        thetas.push_back(theta(1, e));
        sum += thetas.back();
    }
    for (int r = 1; r <= t_slots - k + 1; ++r) {
        thetas.push_back(theta(r, k));
        sum += thetas.back();
    }
    for (int r = t_slots - k + 2; r <= t_slots; ++r) {
        thetas.push_back(theta(r, t_slots - r + 1));
        sum += thetas.back();
    }
    EstimateReport report;
    report.scheme = Scheme::Msem;
    report.n_hat = round_half_up(sum / (static_cast<double>(k) * k));
    report.per_slot = std::move(thetas);
    return report;
}

/// Idle-count inversion per slot, averaged over the K replicas per user.
/// A slot with no idle RB saturates at the search upper bound.
inline EstimateReport isce(const CycleObservation& obs, const GfConfig& cfg, const SearchOptions& opts = {}) {
    check_cycle(obs, cfg);
    require(cfg.w >= 2, "invalid_argument", "ISCE needs W >= 2");
    const double w = static_cast<double>(cfg.w);
    std::vector<double> loads;
    double sum = 0.0;
    for (const auto& s : obs.slots) {
        double n_t = 0.0;
        if (s.c == 0) {
            n_t = opts.upper(s.min_users(), cfg.w);
        } else if (s.c < cfg.w) {
            n_t = std::log(s.c / w) / std::log((w - 1.0) / w);
        }
        loads.push_back(n_t);
        sum += n_t;
    }
    EstimateReport report;
    report.scheme = Scheme::Isce;
    report.n_hat = round_half_up(sum / cfg.k);
    report.per_slot = std::move(loads);
    return report;
}

}  // namespace gfa::estimation
