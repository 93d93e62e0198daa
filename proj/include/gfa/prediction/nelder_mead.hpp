#pragma once

// Derivative-free simplex minimizer (Nelder-Mead with the standard
// reflection/expansion/contraction/shrink coefficients).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

namespace gfa::prediction {

struct NelderMeadOptions {
    int max_iterations = 20000;
    double f_tolerance = 1e-8;  // stop when the simplex's value spread falls below this
    double x_tolerance = 1e-10;
    double initial_step = 0.1;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> x0, const NelderMeadOptions& opts = {}) {
    const std::size_t n = x0.size();
    if (n == 0) {
        return {x0, f(x0), 0, true};
    }
    std::vector<std::vector<double>> simplex(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) {
        simplex[i + 1][i] += x0[i] != 0.0 ? opts.initial_step * std::max(1.0, std::abs(x0[i])) : opts.initial_step;
    }
    std::vector<double> values(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        values[i] = f(simplex[i]);
    }
    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), trial(n), trial2(n);
    const auto point = [&](double t, std::vector<double>& out) {
        // centroid + t * (centroid - worst)
        const auto& worst = simplex[order[n]];
        for (std::size_t j = 0; j < n; ++j) {
            out[j] = centroid[j] + t * (centroid[j] - worst[j]);
        }
    };

    NelderMeadResult result;
    for (int it = 0; it < opts.max_iterations; ++it) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const double best = values[order[0]];
        const double worst = values[order[n]];
        double spread_x = 0.0;
        for (std::size_t i = 1; i <= n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                spread_x = std::max(spread_x, std::abs(simplex[order[i]][j] - simplex[order[0]][j]));
            }
        }
        result.iterations = it;
        if (std::abs(worst - best) <= opts.f_tolerance * (1.0 + std::abs(best)) || spread_x <= opts.x_tolerance) {
            result.converged = true;
            break;
        }
        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                centroid[j] += simplex[order[i]][j] / static_cast<double>(n);
            }
        }
        point(1.0, trial);
        const double fr = f(trial);
        if (fr < best) {
            point(2.0, trial2);
            const double fe = f(trial2);
            if (fe < fr) {
                simplex[order[n]] = trial2;
                values[order[n]] = fe;
            } else {
                simplex[order[n]] = trial;
                values[order[n]] = fr;
            }
            continue;
        }
        if (fr < values[order[n - 1]]) {
            simplex[order[n]] = trial;
            values[order[n]] = fr;
            continue;
        }
        const bool outside = fr < worst;
        point(outside ? 0.5 : -0.5, trial2);
        const double fc = f(trial2);
        if (fc < (outside ? fr : worst)) {
            simplex[order[n]] = trial2;
            values[order[n]] = fc;
            continue;
        }
        for (std::size_t i = 1; i <= n; ++i) {
            auto& v = simplex[order[i]];
            for (std::size_t j = 0; j < n; ++j) {
                v[j] = simplex[order[0]][j] + 0.5 * (v[j] - simplex[order[0]][j]);
            }
            values[order[i]] = f(v);
        }
    }
    const auto best_it = std::min_element(values.begin(), values.end());
    result.x = simplex[static_cast<std::size_t>(best_it - values.begin())];
    result.value = *best_it;
    return result;
}

}  // namespace gfa::prediction
