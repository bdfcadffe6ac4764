#include "gal/rng.hpp"

#include <cmath>

namespace gal {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

} // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t s = seed;
    for (auto& w : state_) w = splitmix64(s);
}

// xoshiro256**
std::uint64_t Rng::next_u64() {
    std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    double u1 = 0.0;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * 3.14159265358979323846 * u2;
    cached_normal_ = r * std::sin(theta);
    has_cached_normal_ = true;
    return r * std::cos(theta);
}

double Rng::normal(double mean, double stddev) { return mean + stddev * normal(); }

std::size_t Rng::index(std::size_t n) {
    if (n <= 1) return 0;
    // 128-bit multiply rejection-free scaling (Lemire)
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * static_cast<__uint128_t>(n);
    std::uint64_t lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
        std::uint64_t threshold = (0ULL - n) % n;
        while (lo < threshold) {
            x = next_u64();
            m = static_cast<__uint128_t>(x) * static_cast<__uint128_t>(n);
            lo = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::size_t>(m >> 64);
}

Rng Rng::derive(std::uint64_t stream_tag) const {
    std::uint64_t s = seed_;
    std::uint64_t a = splitmix64(s);
    std::uint64_t t = stream_tag;
    std::uint64_t b = splitmix64(t);
    return Rng(a ^ rotl(b, 32) ^ 0xa5a5a5a55a5a5a5aULL);
}

} // namespace gal
