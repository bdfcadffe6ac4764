#pragma once
#include <cstdint>
#include <vector>

namespace gal {

// Deterministic random source. All draws go through hand-rolled transforms so
// that streams are reproducible across standard-library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    // uniform double in [0, 1)
    double uniform();
    // uniform double in [lo, hi)
    double uniform(double lo, double hi);
    // standard normal via Box-Muller (caches the second deviate)
    double normal();
    double normal(double mean, double stddev);
    // uniform integer in [0, n)
    std::size_t index(std::size_t n);

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    // Independent child stream; distinct tags give decorrelated streams.
    Rng derive(std::uint64_t stream_tag) const;

private:
    std::uint64_t state_[4];
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
    std::uint64_t seed_;
};

} // namespace gal
