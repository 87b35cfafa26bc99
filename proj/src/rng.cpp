#include "scdc/rng.hpp"

namespace scdc {

namespace {

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t key) : key_(key), engine_(splitmix64(key)) {}

Rng Rng::substream(std::string_view tag, std::uint64_t index) const {
    std::uint64_t k = splitmix64(key_ ^ fnv1a(tag));
    k = splitmix64(k + index * 0xd1b54a32d192ed03ULL);
    return Rng(k);
}

std::uint64_t Rng::next_u64() { return engine_(); }

double Rng::uniform(double low, double high) {
    return std::uniform_real_distribution<double>(low, high)(engine_);
}

double Rng::normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }

std::int64_t Rng::uniform_int(std::int64_t low, std::int64_t high) {
    return std::uniform_int_distribution<std::int64_t>(low, high)(engine_);
}

bool Rng::bernoulli(double p) { return uniform(0.0, 1.0) < p; }

Rng seed_rng(std::uint64_t seed) { return Rng(splitmix64(seed ^ 0x5cdc5cdc5cdc5cdcULL)); }

}  // namespace scdc
