#pragma once

#include <cstdint>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace crispnam {

// Deterministic random stream. std::mt19937_64 supplies the raw bits; the
// floating-point draws are implemented here rather than with
// std::*_distribution so that identical seeds give identical sequences on
// every standard library.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform on [0, 1)
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // uniform on (0, 1]
    double uniform_open0() { return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double log_uniform(double lo, double hi) {
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }

    // integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        // multiply-shift rejection-free bound is overkill here; modulo bias is
        // negligible for the small n we use, but keep it unbiased anyway
        std::uint64_t threshold = (~n + 1) % n;
        for (;;) {
            std::uint64_t r = engine_();
            if (r >= threshold) return r % n;
        }
    }

    int uniform_int(int lo, int hi) { // inclusive range
        return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    bool bernoulli(double p) { return uniform() < p; }

    // standard normal, Marsaglia polar method
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    double exponential(double rate) { return -std::log(uniform_open0()) / rate; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// All randomness in the project flows from one master seed through named
// substreams, so each stage (split, init, dropout, search, ...) is
// individually reproducible.
inline std::uint64_t substream_seed(std::uint64_t master, const std::string& name) {
    std::uint64_t h = 1469598103934665603ull; // FNV-1a 64
    for (unsigned char c : name) {
        h ^= c;
        h *= 1099511628211ull;
    }
    // splitmix64 finalizer over (master ^ h)
    std::uint64_t z = master ^ h;
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline Rng substream(std::uint64_t master, const std::string& name) {
    return Rng(substream_seed(master, name));
}

} // namespace crispnam
