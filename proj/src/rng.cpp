#include "vsql/rng.hpp"

#include <cmath>

namespace vsql {

std::uint64_t mix_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts) {
    SplitMix64 g(base);
    std::uint64_t h = g.next();
    for (std::uint64_t p : parts) {
        SplitMix64 gp(h ^ (p + 0x9e3779b97f4a7c15ull));
        h = gp.next();
    }
    return h;
}

double Rng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    // Box-Muller on (0,1] x [0,1) so the log argument never vanishes
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
}

std::uint64_t Rng::integer(std::uint64_t bound) {
    // Lemire multiply-shift; bias is below 2^-64 per draw
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(gen_.next()) * bound) >> 64);
}

void Rng::shuffle(std::vector<int>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(integer(i));
        std::swap(items[i - 1], items[j]);
    }
}

} // namespace vsql
