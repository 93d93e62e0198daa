#pragma once

#include <cstdint>
#include <limits>

namespace gfa {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Derives an independent stream key from a parent key and a label
/// (cycle index, user index, trial index, ...).
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t label) noexcept {
    return splitmix64(parent ^ splitmix64(label + 0x632BE59BD9B4E019ULL));
}

/// Counter-based generator: output i is a pure function of (key, i), so a
/// stream can be recreated anywhere from its key alone. Models
/// UniformRandomBitGenerator.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit constexpr CounterRng(std::uint64_t key) noexcept : key_(key) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept {
        return splitmix64(key_ + 0xD1B54A32D192ED03ULL * ++counter_);
    }

    /// Uniform integer in [0, bound). Lemire's multiply-shift with rejection,
    /// so the result is exactly uniform.
    std::uint32_t below(std::uint32_t bound) noexcept {
        std::uint64_t m = static_cast<std::uint64_t>(static_cast<std::uint32_t>((*this)() >> 32)) * bound;
        auto low = static_cast<std::uint32_t>(m);
        if (low < bound) {
            const std::uint32_t threshold = static_cast<std::uint32_t>(-bound) % bound;
            while (low < threshold) {
                m = static_cast<std::uint64_t>(static_cast<std::uint32_t>((*this)() >> 32)) * bound;
                low = static_cast<std::uint32_t>(m);
            }
        }
        return static_cast<std::uint32_t>(m >> 32);
    }

    /// Uniform double in [0, 1).
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    constexpr std::uint64_t key() const noexcept { return key_; }
    constexpr std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace gfa
