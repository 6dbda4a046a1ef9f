#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace edgetwin {

/// FNV-1a 64-bit hash. Used for stream tags and golden-file content hashes.
constexpr std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace detail {
constexpr std::uint64_t splitmix_gamma = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
} // namespace detail

/// splitmix64 generator. Streams are split off a root seed by tag so that
/// draw order in one stream never perturbs another.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += detail::splitmix_gamma;
        return detail::mix64(state_);
    }

    /// Uniform in [0, 1).
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [lo, hi] inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        if (hi <= lo) return lo;
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(next_u64() % span);
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via Box-Muller.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.141592653589793 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    /// Exponential inter-arrival draw with the given rate (events per unit).
    double exponential(double rate) {
        double u = uniform01();
        while (u <= 0.0) u = uniform01();
        return -std::log(u) / rate;
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Derive an independent child seed from (seed, tag).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
    return detail::mix64(seed ^ fnv1a64(tag));
}

/// Derive an independent child seed from (seed, tag, index...).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index) {
    return detail::mix64(derive_seed(seed, tag) + index * detail::splitmix_gamma);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t i,
                                    std::uint64_t j) {
    return detail::mix64(derive_seed(seed, tag, i) + j * 0xd1342543de82ef95ULL);
}

} // namespace edgetwin
