#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "dyadic/tree_function.hpp"

namespace dyadic {

/// splitmix64 step; used to derive independent per-trial seeds from one base
/// seed so runs are reproducible regardless of trial order.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    /// uniform in [0,1), 53-bit, implementation-independent
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::uint64_t bits() { return gen_(); }

private:
    std::mt19937_64 gen_;
};

inline TreeFunction random_positive(const std::shared_ptr<const DyadicTree>& tree,
                                    std::uint64_t seed, double lo = 0.05, double hi = 1.05) {
    Rng rng(seed);
    std::vector<double> v(tree->leaf_count());
    for (double& x : v) x = rng.uniform(lo, hi);
    return TreeFunction(tree, std::move(v));
}

inline TreeFunction random_signed(const std::shared_ptr<const DyadicTree>& tree,
                                  std::uint64_t seed, double amp = 1.0) {
    Rng rng(seed);
    std::vector<double> v(tree->leaf_count());
    for (double& x : v) x = amp * (2.0 * rng.uniform() - 1.0);
    return TreeFunction(tree, std::move(v));
}

/// Positive function with a Pareto-style tail: a few leaves spike far above
/// the mean, so average-stopping conditions genuinely fire.
inline TreeFunction random_spiky(const std::shared_ptr<const DyadicTree>& tree,
                                 std::uint64_t seed, double tail_exponent = 0.6) {
    Rng rng(seed);
    std::vector<double> v(tree->leaf_count());
    for (double& x : v) {
        double u = std::max(rng.uniform(), 0x1.0p-40);
        x = 0.05 + std::pow(u, -tail_exponent);
    }
    return TreeFunction(tree, std::move(v));
}

inline std::vector<std::int8_t> random_signs(const std::shared_ptr<const DyadicTree>& tree,
                                             std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::int8_t> s(tree->node_count());
    for (auto& x : s) x = rng.uniform() < 0.5 ? -1 : 1;
    return s;
}

}  // namespace dyadic
