#ifndef WCA_RNG_HPP
#define WCA_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace wca {

// Seeded generator with hand-rolled canonical conversions. std::mt19937_64 is
// bit-stable across platforms, but the std distributions are not, so uniform
// and gaussian draws are derived here directly from the raw 64-bit stream.
// Every harness and pipeline stage routes its randomness through one of these,
// keyed by an explicit seed, so identical seeds reproduce identical outputs.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t bits() { return gen_(); }

    // Uniform in [0, 1), 53 significant bits.
    double uniform() { return std::ldexp(static_cast<double>(gen_() >> 11), -53); }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // Unbiased integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        std::uint64_t mask = ~std::uint64_t{0};
        if (n == 0) return 0;
        std::uint64_t limit = mask - mask % n;
        std::uint64_t v;
        do { v = gen_(); } while (v >= limit);
        return v % n;
    }

    int index(int n) { return static_cast<int>(below(static_cast<std::uint64_t>(n))); }

    // Standard normal via Box-Muller; one spare cached.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do { u1 = uniform(); } while (u1 <= 0.0);
        u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Index drawn proportionally to the (nonnegative) entries of w.
    template <typename Container>
    int weighted_index(const Container& w) {
        double total = 0;
        for (double v : w) total += v;
        if (total <= 0) return index(static_cast<int>(w.size()));
        double target = uniform() * total, acc = 0;
        int last = static_cast<int>(w.size()) - 1;
        for (int i = 0; i <= last; ++i) {
            acc += w[i];
            if (target < acc) return i;
        }
        return last;
    }

  private:
    std::mt19937_64 gen_;
    double spare_ = 0;
    bool have_spare_ = false;
};

}  // namespace wca

#endif
