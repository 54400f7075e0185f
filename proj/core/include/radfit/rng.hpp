#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace radfit {

/// Deterministic pseudo-random stream (splitmix64 state advance). All
/// distributions are implemented here so output is identical across
/// compilers, which the byte-reproducibility guarantees depend on.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::size_t uniform_index(std::size_t n) {
        return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
    }

    /// Standard normal via Box-Muller (one value per call, no caching so the
    /// stream position is predictable).
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = uniform_index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    /// Derive an independent child stream, e.g. per device or per tree.
    Rng split(std::uint64_t tag) {
        std::uint64_t s = state_ ^ (tag * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
        Rng child(s);
        child.next_u64();
        return child;
    }

private:
    std::uint64_t state_;
};

}  // namespace radfit
