#pragma once

// Single-step load forecasting: ARIMA(p,d,q) fitted by conditional sum of
// squares, AIC / Durbin-Watson diagnostics, and the moving-average baseline.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "gfa/core/error.hpp"
#include "gfa/prediction/nelder_mead.hpp"

namespace gfa::prediction {

/// Per-cycle load values in cycle order. Estimates go in as if observed.
class HistoryPool {
public:
    HistoryPool() = default;
    explicit HistoryPool(std::vector<double> values) {
        for (double v : values) {
            append(v);
        }
    }

    void append(double v) {
        require(v >= 0.0 && std::isfinite(v), "invalid_argument", "history values must be finite and nonnegative");
        series_.push_back(v);
    }

    const std::vector<double>& series() const { return series_; }
    std::size_t size() const { return series_.size(); }
    bool empty() const { return series_.empty(); }
    double back() const { return series_.back(); }

private:
    std::vector<double> series_;
};

struct ArimaSpec {
    int p = 0;
    int d = 2;
    int q = 3;
    double c = 0.0;
    std::vector<double> ar;  // length p
    std::vector<double> ma;  // length q
    double sigma2 = 0.0;
    bool degenerate = false;  // zero residual variance; likelihood-based diagnostics are undefined

    int parameter_count() const { return p + q + 1; }
};

struct Forecast {
    double value = 0.0;
    int value_rounded = 0;

    static Forecast of(double v) {
        const double clamped = std::max(0.0, v);
        return {clamped, static_cast<int>(std::floor(clamped + 0.5))};
    }
};

struct DiagnosticReport {
    int p = 0;
    int q = 0;
    double aic = 0.0;
    double dw = 0.0;
    double log_likelihood = 0.0;
    bool fitted = true;
};

/// Thrown when the optimizer runs out of iterations; carries the best point.
class FitError : public Error {
public:
    FitError(const std::string& message, ArimaSpec best) : Error("fit_not_converged", message), best_(std::move(best)) {}
    const ArimaSpec& best() const noexcept { return best_; }

private:
    ArimaSpec best_;
};

inline std::vector<double> difference(std::span<const double> series, int d) {
    require(d >= 0, "invalid_argument", "difference order must be nonnegative");
    require(static_cast<int>(series.size()) > d, "series_too_short", "series must be longer than the difference order");
    std::vector<double> out(series.begin(), series.end());
    for (int i = 0; i < d; ++i) {
        for (std::size_t t = 0; t + 1 < out.size(); ++t) {
            out[t] = out[t + 1] - out[t];
        }
        out.pop_back();
    }
    return out;
}

/// CSS residuals of an ARMA(p,q) with intercept on an already differenced
/// series. Pre-sample errors are zero and the first p points only seed the
/// AR terms.
inline std::vector<double> css_residuals(std::span<const double> y, double c, std::span<const double> ar,
                                         std::span<const double> ma) {
    const std::size_t p = ar.size();
    std::vector<double> e(y.size(), 0.0);
    for (std::size_t t = p; t < y.size(); ++t) {
        double pred = c;
        for (std::size_t i = 0; i < p; ++i) {
            pred += ar[i] * y[t - 1 - i];
        }
        for (std::size_t j = 0; j < ma.size() && j < t; ++j) {
            pred += ma[j] * e[t - 1 - j];
        }
        e[t] = y[t] - pred;
    }
    e.erase(e.begin(), e.begin() + static_cast<std::ptrdiff_t>(std::min(p, e.size())));
    return e;
}

inline std::vector<double> css_residuals(std::span<const double> y, const ArimaSpec& spec) {
    return css_residuals(y, spec.c, spec.ar, spec.ma);
}

/// True when every root of z^m + c_1 z^(m-1) + ... + c_m lies strictly
/// inside the unit circle. With c = theta this is MA invertibility; with
/// c = -ar it is AR stationarity.
inline bool roots_inside_unit_circle(std::span<const double> coeffs) {
    const auto m = static_cast<Eigen::Index>(coeffs.size());
    if (m == 0) {
        return true;
    }
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        companion(0, j) = -coeffs[static_cast<std::size_t>(j)];
    }
    for (Eigen::Index i = 1; i < m; ++i) {
        companion(i, i - 1) = 1.0;
    }
    const Eigen::VectorXcd roots = companion.eigenvalues();
    for (Eigen::Index i = 0; i < m; ++i) {
        if (std::abs(roots(i)) >= 1.0) {
            return false;
        }
    }
    return true;
}

inline bool ma_invertible(std::span<const double> ma) { return roots_inside_unit_circle(ma); }

inline bool ar_stationary(std::span<const double> ar) {
    std::vector<double> neg(ar.begin(), ar.end());
    for (double& v : neg) {
        v = -v;
    }
    return roots_inside_unit_circle(neg);
}

/// Least-squares AR(p) with intercept on lagged values; the starting point
/// for the AR part of a CSS fit.
inline std::vector<double> fit_ar_least_squares(std::span<const double> y, int p) {
    require(p >= 0, "invalid_argument", "AR order must be nonnegative");
    if (p == 0) {
        double mean = 0.0;
        for (double v : y) {
            mean += v;
        }
        return {y.empty() ? 0.0 : mean / static_cast<double>(y.size())};
    }
    const auto n = static_cast<Eigen::Index>(y.size()) - p;
    require(n > p, "series_too_short", "series too short for the AR order");
    Eigen::MatrixXd x(n, p + 1);
    Eigen::VectorXd target(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto t = static_cast<std::size_t>(r + p);
        x(r, 0) = 1.0;
        for (int i = 0; i < p; ++i) {
            x(r, i + 1) = y[t - 1 - static_cast<std::size_t>(i)];
        }
        target(r) = y[t];
    }
    const Eigen::VectorXd beta = x.colPivHouseholderQr().solve(target);
    return std::vector<double>(beta.data(), beta.data() + beta.size());
}

struct FitOptions {
    NelderMeadOptions optimizer;
    int restarts = 2;  // extra simplex restarts from the incumbent
};

/// CSS fit of ARMA(p,q) with intercept to an already differenced series.
/// `d` is recorded on the result for later undifferencing.
inline ArimaSpec fit_arma(std::span<const double> y, int p, int q, int d = 2, const FitOptions& opts = {}) {
    require(p >= 0 && q >= 0, "invalid_argument", "orders must be nonnegative");
    require(static_cast<int>(y.size()) >= p + q + 5, "series_too_short", "need at least p+q+5 differenced points");
    ArimaSpec spec;
    spec.p = p;
    spec.d = d;
    spec.q = q;

    // c, ar_1..ar_p from least squares; MA starts at zero.
    std::vector<double> x0 = fit_ar_least_squares(y, p);
    while (!ar_stationary(std::span<const double>(x0.data() + 1, static_cast<std::size_t>(p)))) {
        for (int i = 1; i <= p; ++i) {
            x0[static_cast<std::size_t>(i)] *= 0.9;
        }
    }
    x0.resize(static_cast<std::size_t>(1 + p + q), 0.0);

    const auto unpack = [&](const std::vector<double>& x, ArimaSpec& s) {
        s.c = x[0];
        s.ar.assign(x.begin() + 1, x.begin() + 1 + p);
        s.ma.assign(x.begin() + 1 + p, x.end());
    };
    // Non-invertible MA or nonstationary AR points are rejected outright.
    const auto objective = [&](const std::vector<double>& x) {
        const std::span<const double> ar(x.data() + 1, static_cast<std::size_t>(p));
        const std::span<const double> ma(x.data() + 1 + p, static_cast<std::size_t>(q));
        if (!ma_invertible(ma) || !ar_stationary(ar)) {
            return std::numeric_limits<double>::max();
        }
        double ss = 0.0;
        for (double e : css_residuals(y, x[0], ar, ma)) {
            ss += e * e;
        }
        return std::isfinite(ss) ? ss : std::numeric_limits<double>::max();
    };

    auto best = nelder_mead(objective, x0, opts.optimizer);
    bool converged = best.converged;
    for (int r = 0; r < opts.restarts; ++r) {
        auto again = nelder_mead(objective, best.x, opts.optimizer);
        converged = again.converged;
        if (again.value <= best.value) {
            best = std::move(again);
        }
    }
    unpack(best.x, spec);
    const auto residuals = css_residuals(y, spec);
    double ss = 0.0;
    for (double e : residuals) {
        ss += e * e;
    }
    spec.sigma2 = residuals.empty() ? 0.0 : ss / static_cast<double>(residuals.size());
    spec.degenerate = spec.sigma2 <= 1e-24;
    if (spec.degenerate) {
        spec.sigma2 = 0.0;
    }
    if (!converged) {
        throw FitError("CSS fit did not converge within the iteration budget", spec);
    }
    return spec;
}

/// ARIMA(0,d,q) by CSS on the differenced series.
inline ArimaSpec fit_ma(std::span<const double> series_diff, int q, int d = 2, const FitOptions& opts = {}) {
    return fit_arma(series_diff, 0, q, d, opts);
}

/// Gaussian log-likelihood at the CSS variance estimate.
inline double log_likelihood(double sigma2, std::size_t n) {
    if (sigma2 <= 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return -0.5 * static_cast<double>(n) * (std::log(2.0 * std::numbers::pi * sigma2) + 1.0);
}

inline double aic(int k, double log_lik) { return 2.0 * k - 2.0 * log_lik; }

inline double aic(const ArimaSpec& spec, std::span<const double> y) {
    return aic(spec.parameter_count(), log_likelihood(spec.sigma2, css_residuals(y, spec).size()));
}

inline double durbin_watson(std::span<const double> e) {
    require(e.size() >= 2, "invalid_argument", "Durbin-Watson needs at least two residuals");
    double num = 0.0;
    double den = e[0] * e[0];
    for (std::size_t t = 1; t < e.size(); ++t) {
        num += (e[t] - e[t - 1]) * (e[t] - e[t - 1]);
        den += e[t] * e[t];
    }
    require(den > 0.0, "undefined_statistic", "Durbin-Watson is undefined for all-zero residuals");
    return num / den;
}

/// Next value of the original series: forecast the differenced series with
/// the future error set to zero, then undo the differencing.
inline Forecast forecast_one(const ArimaSpec& spec, const HistoryPool& pool) {
    const auto& x = pool.series();
    require(static_cast<int>(x.size()) >= spec.d + std::max({spec.p, spec.q, 1}), "insufficient_history",
            "history too short for this model");
    const auto y = difference(x, spec.d);
    const auto e = css_residuals(y, spec);
    const std::size_t offset = y.size() - e.size();  // residuals start after the AR seed points
    double next = spec.c;
    for (int i = 0; i < spec.p; ++i) {
        next += spec.ar[static_cast<std::size_t>(i)] * y[y.size() - 1 - static_cast<std::size_t>(i)];
    }
    for (int j = 0; j < spec.q; ++j) {
        const auto idx = static_cast<std::ptrdiff_t>(y.size()) - 1 - j - static_cast<std::ptrdiff_t>(offset);
        if (idx >= 0) {
            next += spec.ma[static_cast<std::size_t>(j)] * e[static_cast<std::size_t>(idx)];
        }
    }
    // Undo each differencing level using the last value at that level.
    std::vector<std::vector<double>> levels{x};
    for (int i = 0; i < spec.d; ++i) {
        levels.push_back(difference(levels.back(), 1));
    }
    for (int i = spec.d - 1; i >= 0; --i) {
        next += levels[static_cast<std::size_t>(i)].back();
    }
    return Forecast::of(next);
}

/// Mean of the last `w` observations.
inline Forecast masw(const HistoryPool& pool, int w = 3) {
    require(w >= 1, "invalid_argument", "window must be positive");
    require(pool.size() >= static_cast<std::size_t>(w), "insufficient_history", "history shorter than the window");
    double sum = 0.0;
    for (std::size_t i = pool.size() - static_cast<std::size_t>(w); i < pool.size(); ++i) {
        sum += pool.series()[i];
    }
    return Forecast::of(sum / w);
}

struct Selection {
    int p = 0;
    int q = 0;
    bool gate_failed = false;  // no candidate passed the DW gate; AIC-best returned
    std::vector<DiagnosticReport> grid;
};

/// Fits every (p, q) on the d-times differenced training series and picks the
/// lowest AIC among models whose |DW - 2| is within `dw_gate`.
inline Selection select_model(std::span<const double> training, int p_max, int q_max, int d = 2,
                              double dw_gate = 0.3, const FitOptions& opts = {}) {
    const auto y = difference(training, d);
    Selection sel;
    double best_gated = std::numeric_limits<double>::infinity();
    double best_any = std::numeric_limits<double>::infinity();
    std::optional<std::pair<int, int>> gated, any;
    for (int p = 0; p <= p_max; ++p) {
        for (int q = 0; q <= q_max; ++q) {
            DiagnosticReport rep{p, q, std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
                                 std::numeric_limits<double>::quiet_NaN(), false};
            ArimaSpec spec;
            try {
                spec = fit_arma(y, p, q, d, opts);
            } catch (const FitError& e) {
                spec = e.best();
            } catch (const Error&) {
                sel.grid.push_back(rep);
                continue;
            }
            const auto res = css_residuals(y, spec);
            rep.fitted = true;
            rep.log_likelihood = log_likelihood(spec.sigma2, res.size());
            rep.aic = aic(spec.parameter_count(), rep.log_likelihood);
            try {
                rep.dw = durbin_watson(res);
            } catch (const Error&) {
                rep.dw = std::numeric_limits<double>::quiet_NaN();
            }
            sel.grid.push_back(rep);
            if (rep.aic < best_any) {
                best_any = rep.aic;
                any = {p, q};
            }
            if (std::abs(rep.dw - 2.0) <= dw_gate && rep.aic < best_gated) {
                best_gated = rep.aic;
                gated = {p, q};
            }
        }
    }
    if (gated) {
        std::tie(sel.p, sel.q) = *gated;
    } else {
        sel.gate_failed = true;
        if (any) {
            std::tie(sel.p, sel.q) = *any;
        }
    }
    return sel;
}

/// Prediction error over a run: mean of |forecast - truth| / max(truth, 1).
inline double mean_relative_error(std::span<const double> predicted, std::span<const double> truth) {
    require(predicted.size() == truth.size() && !truth.empty(), "invalid_argument", "series lengths must match");
    double sum = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        sum += std::abs(predicted[i] - truth[i]) / std::max(truth[i], 1.0);
    }
    return sum / static_cast<double>(truth.size());
}

}  // namespace gfa::prediction
