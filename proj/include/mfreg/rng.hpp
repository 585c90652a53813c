#ifndef MFREG_RNG_HPP
#define MFREG_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace mfreg {

// Seeded generator with hand-rolled mappings. mt19937_64 output is specified
// bit-exactly by the standard; the standard *distributions* are not, so the
// uniform/gaussian/shuffle mappings are implemented here to keep results
// reproducible across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Uniform double in [0, 1), 53-bit resolution.
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    // Uniform double in [lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    // Standard normal via Box-Muller. No cached spare: every call consumes
    // exactly two generator words, which keeps the draw sequence predictable.
    double gaussian() {
        double u1 = (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53; // (0,1)
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    // Unbiased integer in [0, n), n >= 1. Rejection sampling.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % n;
    }

    // Fisher-Yates.
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
};

} // namespace mfreg

#endif
