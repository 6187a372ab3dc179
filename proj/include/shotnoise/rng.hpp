#pragma once

// Counter-based generator: every output is a hash of (key, counter), so any
// draw is reproducible from the seed alone and streams split without
// coordination (child key = hash(parent key, stream index)).

#include <cmath>
#include <cstdint>

namespace shotnoise {

class CounterRng {
  public:
    explicit CounterRng(std::uint64_t seed) : key_(mix(seed ^ 0x9E3779B97F4A7C15ull)) {}

    // Independent child stream; used to parallelize draws by index.
    CounterRng stream(std::uint64_t index) const {
        return CounterRng(mix(key_ + mix(index + 0xD1B54A32D192ED03ull)), 0);
    }

    std::uint64_t next_u64() { return mix(key_ ^ mix(counter_++ + 0x9E3779B97F4A7C15ull)); }

    // Uniform in the open interval (0,1); safe to pass to log().
    double uniform01() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    double exponential(double rate) { return -std::log(uniform01()) / rate; }

  private:
    CounterRng(std::uint64_t key, int) : key_(key) {}

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace shotnoise
