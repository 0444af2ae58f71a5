#pragma once
// Seeded RNG helpers. Draws go through hand-rolled transforms on top of
// mt19937_64 (whose stream the standard pins down) instead of the std::
// distributions, which differ between standard libraries. Same seed, same
// stream, on any platform/libstdc++/libc++.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace migtf {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform in [0, 1), 53-bit resolution
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n); modulo bias is irrelevant at 64-bit range
    std::uint64_t below(std::uint64_t n) { return engine_() % n; }

    // Box-Muller; one value per call, no cached spare (keeps the stream
    // position a pure function of the call count)
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        // Fisher-Yates
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace migtf
