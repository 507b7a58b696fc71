#pragma once

#include <cstdint>
#include <limits>

namespace fasticp {

/// Counter-based generator: output i is splitmix64(key + i * golden_gamma).
/// `split` derives an independent child stream from (key, stream id), so a
/// sweep can hand each row its own generator without sharing state.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    Rng split(std::uint64_t stream) const;
    /// Rebuilds a stream from a recorded `key()`, counter reset to zero.
    static Rng from_key(std::uint64_t key);

    /// Key this stream was constructed from; enough to reproduce it.
    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform();
    int uniform_int(int lo, int hi);  // inclusive bounds
    /// Standard normal via Box-Muller; consumes two outputs per draw.
    double normal();

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t z);

}  // namespace fasticp
