#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "scalar.hpp"

namespace ielab {

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Counter-based stream: output i is a hash of (key, i). Streams are derived
// from a master seed and a name, so no stream depends on another's usage.
class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t master_seed, std::string_view name)
        : key_(splitmix64(splitmix64(master_seed) ^ fnv1a64(name))), name_(name) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() { return splitmix64(key_ + 0x632be59bd9b4e019ULL * ++counter_); }

    // uniform on [0,1) with 53 random bits
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    // uniform on {0,...,n-1}, rejection sampling keeps it unbiased
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        std::uint64_t limit = max() - max() % n;
        std::uint64_t v;
        do v = (*this)();
        while (v >= limit);
        return v % n;
    }

    // index drawn proportionally to nonnegative weights
    template <class W>
    std::size_t pick(const W* weights, std::size_t n) {
        double total = 0;
        for (std::size_t i = 0; i < n; ++i) total += to_double(weights[i]);
        double u = uniform() * total;
        std::size_t last = 0;
        double acc = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double w = to_double(weights[i]);
            if (w <= 0) continue;
            last = i;
            acc += w;
            if (u < acc) return i;
        }
        return last;
    }

    template <class W>
    std::size_t pick(const std::vector<W>& weights) {
        return pick(weights.data(), weights.size());
    }

    const std::string& name() const { return name_; }
    std::uint64_t draws() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    std::string name_;
};

namespace streams {
inline std::string truth() { return "truth"; }
inline std::string kstar(long phase) { return "phase:" + std::to_string(phase) + ":kstar"; }
inline std::string episode(long k) { return "episode:" + std::to_string(k) + ":traj"; }
inline std::string hal_model(long phase) { return "phase:" + std::to_string(phase) + ":hal-model"; }
inline std::string hal_rewards(long phase) { return "phase:" + std::to_string(phase) + ":hal-rewards"; }
}  // namespace streams

}  // namespace ielab
