#pragma once

#include <cstdint>
#include <random>

namespace dynet {

/// SplitMix64 finalizer; used to derive well-separated child seeds.
std::uint64_t mix64(std::uint64_t x);

/// Seeded, splittable random stream.
///
/// Every variate is produced by code in this file (not by <random>
/// distributions), so a given seed yields the same numbers on every
/// standard library. `split(id)` derives an independent child stream whose
/// state depends only on this stream's key and `id`, never on how many
/// numbers the parent has already drawn.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    Rng split(std::uint64_t stream_id) const;

    std::uint64_t key() const { return key_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on the open interval (0, 1).
    double uniform();

    /// Exponential with the given rate (> 0).
    double exponential(double rate);

    /// Uniform integer in [0, bound); bound > 0.
    std::uint64_t below(std::uint64_t bound);

    bool bernoulli(double p) { return uniform() < p; }

private:
    std::uint64_t key_;
    std::mt19937_64 engine_;
};

} // namespace dynet
