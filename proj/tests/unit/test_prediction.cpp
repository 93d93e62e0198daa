#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "gfa/core/rng.hpp"
#include "gfa/prediction/arima.hpp"

using namespace gfa;
using namespace gfa::prediction;

namespace {

std::vector<double> gaussian(std::size_t n, std::uint64_t seed, double sd = 1.0) {
    CounterRng rng(seed);
    std::normal_distribution<double> dist(0.0, sd);
    std::vector<double> out(n);
    for (auto& v : out) {
        v = dist(rng);
    }
    return out;
}

}  // namespace

TEST(NelderMead, Rosenbrock) {
    const auto r = nelder_mead(
        [](const std::vector<double>& x) {
            return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
        },
        {-1.2, 1.0}, NelderMeadOptions{.max_iterations = 5000, .f_tolerance = 1e-14});
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.x[0], 1.0, 1e-4);
    EXPECT_NEAR(r.x[1], 1.0, 1e-4);
}

TEST(Difference, Examples) {
    EXPECT_EQ(difference(std::vector<double>{1, 2, 3, 4}, 2), (std::vector<double>{0, 0}));
    EXPECT_EQ(difference(std::vector<double>{0, 1, 4, 9, 16}, 2), (std::vector<double>{2, 2, 2}));
    EXPECT_EQ(difference(std::vector<double>{5, 1, 7}, 0), (std::vector<double>{5, 1, 7}));
    EXPECT_THROW(difference(std::vector<double>{1, 2}, 2), Error);
}

TEST(FitMa, ZeroSeriesIsDegenerate) {
    const std::vector<double> zeros(30, 0.0);
    const auto spec = fit_ma(zeros, 3);
    EXPECT_NEAR(spec.c, 0.0, 1e-9);
    for (double t : spec.ma) {
        EXPECT_NEAR(t, 0.0, 1e-6);
    }
    EXPECT_EQ(spec.sigma2, 0.0);
    EXPECT_TRUE(spec.degenerate);
}

TEST(FitMa, ConstantSeriesIsMeanOnly) {
    const std::vector<double> k(40, 2.5);
    const auto spec = fit_ma(k, 3);
    EXPECT_NEAR(spec.c, 2.5, 1e-6);
    for (double t : spec.ma) {
        EXPECT_NEAR(t, 0.0, 1e-4);
    }
}

TEST(FitMa, RecoversMa3) {
    const std::vector<double> theta{0.4, 0.3, 0.2};
    const auto eps = gaussian(2003, 11);
    std::vector<double> y;
    for (std::size_t t = 3; t < eps.size(); ++t) {
        y.push_back(0.5 + eps[t] + theta[0] * eps[t - 1] + theta[1] * eps[t - 2] + theta[2] * eps[t - 3]);
    }
    const auto spec = fit_ma(y, 3);
    ASSERT_EQ(spec.ma.size(), 3u);
    for (std::size_t j = 0; j < 3; ++j) {
        EXPECT_NEAR(spec.ma[j], theta[j], 0.08) << j;
    }
    EXPECT_NEAR(spec.c, 0.5, 0.15);
    EXPECT_NEAR(spec.sigma2, 1.0, 0.1);
}

TEST(FitMa, RejectsShortSeries) {
    EXPECT_THROW(fit_ma(std::vector<double>{1, 2, 3, 4, 5, 6, 7}, 3), Error);
}

TEST(FitMa, NonConvergenceCarriesBestSoFar) {
    const auto y = gaussian(200, 3);
    FitOptions opts;
    opts.optimizer.max_iterations = 3;
    opts.restarts = 0;
    try {
        fit_ma(y, 3, 2, opts);
        FAIL() << "expected a convergence failure";
    } catch (const FitError& e) {
        EXPECT_EQ(e.code(), "fit_not_converged");
        EXPECT_EQ(e.best().ma.size(), 3u);
        EXPECT_GT(e.best().sigma2, 0.0);
    }
}

TEST(ArLeastSquares, MatchesNormalEquations) {
    const auto eps = gaussian(500, 21);
    std::vector<double> y{0.0};
    for (std::size_t t = 1; t < eps.size(); ++t) {
        y.push_back(0.3 + 0.6 * y.back() + eps[t]);
    }
    // 2x2 normal equations for y_t = c + a y_{t-1}.
    double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t t = 1; t < y.size(); ++t) {
        n += 1;
        sx += y[t - 1];
        sy += y[t];
        sxx += y[t - 1] * y[t - 1];
        sxy += y[t - 1] * y[t];
    }
    const double det = n * sxx - sx * sx;
    const double a = (n * sxy - sx * sy) / det;
    const double c = (sy - a * sx) / n;
    const auto beta = fit_ar_least_squares(y, 1);
    EXPECT_NEAR(beta[0], c, 1e-10);
    EXPECT_NEAR(beta[1], a, 1e-10);
    EXPECT_NEAR(a, 0.6, 0.1);
}

TEST(Forecast, LinearHistoryExtendsLine) {
    ArimaSpec spec;
    spec.ma = {0.0, 0.0, 0.0};
    const auto f = forecast_one(spec, HistoryPool({2, 4, 6, 8, 10}));
    EXPECT_DOUBLE_EQ(f.value, 12.0);
    EXPECT_EQ(f.value_rounded, 12);
}

TEST(Forecast, ConstantHistory) {
    ArimaSpec spec;
    spec.ma = {0.3, -0.2, 0.1};
    EXPECT_DOUBLE_EQ(forecast_one(spec, HistoryPool(std::vector<double>(9, 7.0))).value, 7.0);
}

TEST(Forecast, AffineHistoryAnyMaCoefficients) {
    for (double slope : {-0.5, 0.0, 1.5, 3.0}) {
        std::vector<double> h;
        for (int t = 0; t < 12; ++t) {
            h.push_back(40.0 + slope * t);
        }
        ArimaSpec spec;
        spec.ma = {0.7, 0.2, -0.4};
        EXPECT_NEAR(forecast_one(spec, HistoryPool(h)).value, 40.0 + slope * 12, 1e-9);
    }
}

TEST(Forecast, ClampsAtZero) {
    ArimaSpec spec;
    spec.ma = {0.0, 0.0, 0.0};
    const auto f = forecast_one(spec, HistoryPool({12, 9, 6, 3, 0}));
    EXPECT_EQ(f.value, 0.0);
    EXPECT_EQ(f.value_rounded, 0);
    EXPECT_THROW(forecast_one(spec, HistoryPool({1, 2, 3, 4})), Error);
}

TEST(Forecast, MatchesHandRecursion) {
    ArimaSpec spec;
    spec.c = 0.1;
    spec.ma = {0.5, -0.25, 0.125};
    const std::vector<double> h{3, 5, 4, 8, 9, 13, 12};
    // first differences 2,-1,4,1,4,-1; second differences below
    const std::vector<double> y{-3, 5, -3, 3, -5};
    std::vector<double> e;
    for (std::size_t t = 0; t < y.size(); ++t) {
        double pred = spec.c;
        for (std::size_t j = 0; j < 3 && j < t; ++j) {
            pred += spec.ma[j] * e[t - 1 - j];
        }
        e.push_back(y[t] - pred);
    }
    const double diff_next = spec.c + 0.5 * e[4] - 0.25 * e[3] + 0.125 * e[2];
    EXPECT_NEAR(forecast_one(spec, HistoryPool(h)).value, diff_next + 2 * 12 - 13, 1e-12);
}

TEST(Masw, Examples) {
    EXPECT_DOUBLE_EQ(masw(HistoryPool({3, 3, 3}), 3).value, 3.0);
    EXPECT_DOUBLE_EQ(masw(HistoryPool({0, 10}), 2).value, 5.0);
    EXPECT_DOUBLE_EQ(masw(HistoryPool({100, 1, 2, 3}), 3).value, 2.0);
    EXPECT_THROW(masw(HistoryPool({1}), 2), Error);
}

TEST(Aic, FormulaAndMonotonicity) {
    EXPECT_DOUBLE_EQ(aic(3, -10.0), 26.0);
    EXPECT_LT(aic(4, log_likelihood(1.0, 50)), aic(4, log_likelihood(2.0, 50)));
    EXPECT_NEAR(log_likelihood(1.0, 10), -5.0 * (std::log(2 * std::numbers::pi) + 1.0), 1e-12);
}

TEST(DurbinWatson, Examples) {
    EXPECT_DOUBLE_EQ(durbin_watson(std::vector<double>{1, -1, 1, -1}), 3.0);
    const auto e = gaussian(10000, 8);
    EXPECT_NEAR(durbin_watson(e), 2.0, 0.1);
    std::vector<double> scaled(e);
    for (auto& v : scaled) {
        v *= -3.7;
    }
    EXPECT_NEAR(durbin_watson(scaled), durbin_watson(e), 1e-12);
    EXPECT_THROW(durbin_watson(std::vector<double>{0, 0, 0}), Error);
    EXPECT_THROW(durbin_watson(std::vector<double>{1}), Error);
    const double dw = durbin_watson(std::vector<double>{5, 5, 5, 5});
    EXPECT_GE(dw, 0.0);
    EXPECT_LE(dw, 4.0);
}

TEST(SelectModel, ConstantSeriesFailsGate) {
    const std::vector<double> flat(30, 4.0);
    const auto sel = select_model(flat, 1, 1);
    EXPECT_TRUE(sel.gate_failed);
    EXPECT_EQ(sel.grid.size(), 4u);
}

TEST(SelectModel, FindsMa2OnLongSeries) {
    const auto eps = gaussian(1502, 4);
    std::vector<double> y;
    for (std::size_t t = 2; t < eps.size(); ++t) {
        y.push_back(eps[t] + 0.6 * eps[t - 1] + 0.5 * eps[t - 2]);
    }
    // integrate twice so select_model's differencing recovers y
    std::vector<double> x{0.0, 0.0};
    for (double v : y) {
        x.push_back(2 * x[x.size() - 1] - x[x.size() - 2] + v);
    }
    const auto sel = select_model(x, 0, 3);
    EXPECT_FALSE(sel.gate_failed);
    EXPECT_EQ(sel.p, 0);
    EXPECT_EQ(sel.q, 2);
}

TEST(HistoryPool, RejectsNegative) {
    HistoryPool pool;
    EXPECT_THROW(pool.append(-1.0), Error);
    pool.append(2.0);
    EXPECT_EQ(pool.back(), 2.0);
}

TEST(RelativeError, Definition) {
    EXPECT_DOUBLE_EQ(mean_relative_error(std::vector<double>{2, 0, 11}, std::vector<double>{0, 0, 10}), (2.0 + 0 + 0.1) / 3);
}
