#pragma once
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace distfor {

double norm_quantile(double p);  // math.hpp

// Deterministic RNG used throughout. All variate generation is spelled out here
// (uniform via 53-bit mantissa, normal via inverse CDF) instead of relying on
// std:: distributions, whose output is implementation-defined. Bit
// reproducibility of fits, forests, and archives depends on this.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on (0, 1); never returns an exact endpoint.
    double uniform01() {
        const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        return u > 0.0 ? u : 0x1.0p-53;
    }

    // Uniform integer in [0, n), n >= 1. Rejection keeps it unbiased.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = engine_();
        while (v >= limit) v = engine_();
        return v % n;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    double normal() { return norm_quantile(uniform01()); }

    double normal(double mu, double sigma) { return mu + sigma * normal(); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

    // k distinct indices from [0, n), in random order.
    std::vector<int> sample_without_replacement(int n, int k) {
        std::vector<int> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        for (int i = 0; i < k; ++i) std::swap(idx[i], idx[i + static_cast<int>(below(n - i))]);
        idx.resize(k);
        return idx;
    }

    std::vector<int> permutation(int n) { return sample_without_replacement(n, n); }

    // Independent child stream; (seed, id) -> stream is a fixed function, so
    // stream t is unaffected by how many draws other streams consumed.
    Rng spawn(std::uint64_t id) const { return Rng(mix(seed_, id)); }

    static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
        // splitmix64 finalizer over the combined words
        std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

  private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace distfor
