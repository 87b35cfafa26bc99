#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace scdc {

/// Deterministic, splittable random generator.
///
/// Every stream is identified by a 64-bit key. Child streams are derived from
/// (parent key, purpose tag, index) through a SplitMix64 mix, so the draws a
/// consumer sees depend only on where it sits in the derivation tree and never
/// on how many values sibling streams consumed.
class Rng {
public:
    explicit Rng(std::uint64_t key);

    std::uint64_t key() const { return key_; }

    Rng substream(std::string_view tag, std::uint64_t index = 0) const;

    std::uint64_t next_u64();
    double uniform(double low, double high);
    double normal();
    /// Inclusive on both ends.
    std::int64_t uniform_int(std::int64_t low, std::int64_t high);
    bool bernoulli(double p);

    std::mt19937_64& engine() { return engine_; }

private:
    std::uint64_t key_;
    std::mt19937_64 engine_;
};

Rng seed_rng(std::uint64_t seed);

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace scdc
