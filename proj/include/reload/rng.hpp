#pragma once

#include <cstdint>
#include <vector>

namespace reload {

/// SplitMix64. State update: s += 0x9E3779B97F4A7C15; output is the finalizer
///   z = s; z = (z ^ z>>30) * 0xBF58476D1CE4E5B9; z = (z ^ z>>27) * 0x94D049BB133111EB;
///   return z ^ z>>31.
/// This generator is part of the serialization contract for seeded environments
/// and must not change.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform on the open interval (0, 1); never returns 0 or 1.
    double next_open01() {
        return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Uniform on [0, 1).
    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Flat Dirichlet row via normalized exponentials of uniform draws.
    std::vector<double> dirichlet(std::size_t n) {
        std::vector<double> w(n);
        double total = 0.0;
        for (auto& e : w) {
            e = -std::log(next_open01());
            total += e;
        }
        for (auto& e : w) e /= total;
        return w;
    }

private:
    std::uint64_t state_;
};

}  // namespace reload
