#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace vsql {

// SplitMix64: tiny, fast, and fully specified, so identical seeds give
// identical streams on any compiler. The std:: distributions are
// implementation-defined, which would break bit-stable reruns.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
};

// Hash-combine a base seed with a list of stream identifiers. Used to derive
// independent substreams per (sample, circuit, window, parameter, shift) so
// sampled-shot runs do not depend on thread count or evaluation order.
std::uint64_t mix_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts);

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t bits() { return gen_.next(); }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(gen_.next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // standard normal via Box-Muller, caching the second draw
    double normal();

    // uniform integer in [0, bound); bound > 0
    std::uint64_t integer(std::uint64_t bound);

    // in-place Fisher-Yates
    void shuffle(std::vector<int>& items);

private:
    SplitMix64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace vsql
