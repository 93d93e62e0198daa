#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gfa/core/error.hpp"

namespace gfa {

/// Binomial coefficient as a double. Exact for every value below 2^53.
inline double binomial(int n, int k) {
    if (k < 0 || n < 0 || k > n) {
        return 0.0;
    }
    k = std::min(k, n - k);
    double result = 1.0;
    for (int i = 1; i <= k; ++i) {
        result = result * static_cast<double>(n - k + i) / static_cast<double>(i);
    }
    return result < 0x1.0p53 ? std::round(result) : result;
}

inline double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

/// Pascal-triangle table of C(n, k) for 0 <= k <= n <= max_n.
class BinomialTable {
public:
    explicit BinomialTable(int max_n) : max_n_(max_n), rows_(static_cast<std::size_t>(max_n) + 1) {
        for (int n = 0; n <= max_n; ++n) {
            auto& row = rows_[static_cast<std::size_t>(n)];
            row.assign(static_cast<std::size_t>(n) + 1, 1.0);
            for (int k = 1; k < n; ++k) {
                row[static_cast<std::size_t>(k)] =
                    rows_[static_cast<std::size_t>(n) - 1][static_cast<std::size_t>(k) - 1] +
                    rows_[static_cast<std::size_t>(n) - 1][static_cast<std::size_t>(k)];
            }
        }
    }

    double operator()(int n, int k) const {
        if (k < 0 || n < 0 || k > n || n > max_n_) {
            return 0.0;
        }
        return rows_[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
    }

    int max_n() const noexcept { return max_n_; }

private:
    int max_n_;
    std::vector<std::vector<double>> rows_;
};

/// Number of compositions of n into `parts` nonnegative parts, C(n+parts-1, parts-1).
inline double composition_count(int n, int parts) {
    if (parts <= 0) {
        return n == 0 ? 1.0 : 0.0;
    }
    return binomial(n + parts - 1, parts - 1);
}

inline constexpr double kDefaultEnumerationCap = 2.0e6;

/// Visits every composition of n into `parts` nonnegative parts exactly once,
/// starting at (n,0,...,0) and ending at (0,...,0,n).
template <class Visitor>
void for_each_composition(int n, int parts, Visitor&& visit, double cap = kDefaultEnumerationCap) {
    require(n >= 0 && parts >= 1, "invalid_argument", "composition needs n >= 0 and parts >= 1");
    const double count = composition_count(n, parts);
    require(count <= cap, "enumeration_cap",
            "composition count " + std::to_string(count) + " exceeds the enumeration cap " +
                std::to_string(cap));
    std::vector<int> v(static_cast<std::size_t>(parts), 0);
    v[0] = n;
    const auto last = static_cast<std::size_t>(parts) - 1;
    while (true) {
        visit(static_cast<const std::vector<int>&>(v));
        const int tail = v[last];
        v[last] = 0;
        std::size_t i = last;
        bool found = false;
        while (i > 0) {
            --i;
            if (v[i] > 0) {
                found = true;
                break;
            }
        }
        if (!found) {
            return;
        }
        --v[i];
        v[i + 1] = tail + 1;
    }
}

}  // namespace gfa
