#pragma once

// Per-cycle arrival counts for the two URLLC traffic classes: a constant
// (uniform, periodic) stream and a Beta-shaped burst.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

#include "gfa/core/error.hpp"

namespace gfa::traffic {

struct BetaBurstSpec {
    int n_total = 0;           // users spread over the burst
    double duration_ms = 0.0;  // length of the Beta window
    double alpha = 3.0;
    double beta = 4.0;
    double cycle_len_ms = 1.25;  // one scheduling cycle

    int cycle_count() const { return static_cast<int>(std::floor(duration_ms / cycle_len_ms + 1e-9)); }

    void validate() const {
        require(n_total >= 0, "invalid_traffic", "burst user count must be nonnegative");
        require(duration_ms > 0.0, "invalid_traffic", "burst duration must be positive");
        require(cycle_len_ms > 0.0, "invalid_traffic", "cycle length must be positive");
        require(alpha > 0.0 && beta > 0.0, "invalid_traffic", "Beta shapes must be positive");
    }
};

struct UniformSpec {
    int users_per_cycle = 0;
};

struct ArrivalTrace {
    std::vector<int> per_cycle_counts;

    int total() const { return std::accumulate(per_cycle_counts.begin(), per_cycle_counts.end(), 0); }
    std::size_t size() const { return per_cycle_counts.size(); }
    int at(std::size_t cycle) const { return cycle < per_cycle_counts.size() ? per_cycle_counts[cycle] : 0; }
};

/// Density of activation times over [0, duration]:
///   p(t) = t^(a-1) (T-t)^(b-1) / (T^(a+b-1) B(a,b)).
inline double burst_density(double t, double duration, double alpha, double beta) {
    if (t < 0.0 || t > duration) {
        return 0.0;
    }
    const double u = t / duration;
    const auto log_power = [](double exponent, double x) {
        return exponent == 0.0 ? 0.0 : exponent * std::log(x);
    };
    const double log_beta_fn = std::lgamma(alpha) + std::lgamma(beta) - std::lgamma(alpha + beta);
    return std::exp(log_power(alpha - 1.0, u) + log_power(beta - 1.0, 1.0 - u) - log_beta_fn) / duration;
}

namespace detail {

inline double simpson(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double fa, double b,
                               double fb, double fm, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double flm = f(0.5 * (a + m));
    const double frm = f(0.5 * (m + b));
    const double left = simpson(a, fa, m, fm, flm);
    const double right = simpson(m, fm, b, fb, frm);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return adaptive_simpson(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance `tol`.
inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-10) {
    if (b <= a) {
        return 0.0;
    }
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    return detail::adaptive_simpson(f, a, fa, b, fb, fm, detail::simpson(a, fa, b, fb, fm), tol, 50);
}

/// Expected number of burst users in each scheduling cycle (unrounded).
inline std::vector<double> beta_expected_counts(const BetaBurstSpec& spec) {
    spec.validate();
    const int cycles = spec.cycle_count();
    std::vector<double> expected(static_cast<std::size_t>(cycles), 0.0);
    const auto density = [&](double t) { return burst_density(t, spec.duration_ms, spec.alpha, spec.beta); };
    for (int i = 0; i < cycles; ++i) {
        const double lo = i * spec.cycle_len_ms;
        const double hi = std::min((i + 1) * spec.cycle_len_ms, spec.duration_ms);
        expected[static_cast<std::size_t>(i)] = spec.n_total * integrate(density, lo, hi, 1e-10);
    }
    return expected;
}

/// Deterministic burst trace. Counts are rounded by largest remainder: floor
/// every expectation, then hand the missing units to the largest fractional
/// parts. The total is the rounded covered mass (n_total when the cycles span
/// the whole burst) and the ordering of expectations survives, so the trace
/// stays unimodal.
inline ArrivalTrace beta_arrivals(const BetaBurstSpec& spec) {
    const auto expected = beta_expected_counts(spec);
    ArrivalTrace trace;
    trace.per_cycle_counts.reserve(expected.size());
    for (double e : expected) {
        trace.per_cycle_counts.push_back(static_cast<int>(std::floor(e)));
    }
    const double covered = std::accumulate(expected.begin(), expected.end(), 0.0);
    const int missing = static_cast<int>(std::floor(covered + 0.5)) - trace.total();
    std::vector<std::size_t> order(expected.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return expected[i] - std::floor(expected[i]) > expected[j] - std::floor(expected[j]);
    });
    for (int i = 0; i < missing && i < static_cast<int>(order.size()); ++i) {
        ++trace.per_cycle_counts[order[static_cast<std::size_t>(i)]];
    }
    return trace;
}

inline ArrivalTrace uniform_arrivals(const UniformSpec& spec, int n_cycles) {
    require(n_cycles >= 0, "invalid_traffic", "cycle count must be nonnegative");
    require(spec.users_per_cycle >= 0, "invalid_traffic", "uniform intensity must be nonnegative");
    return ArrivalTrace{std::vector<int>(static_cast<std::size_t>(n_cycles), spec.users_per_cycle)};
}

}  // namespace gfa::traffic
