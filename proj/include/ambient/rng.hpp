#pragma once

#include <array>
#include <cstdint>

namespace ambient {

// Counter-based generator: Philox4x64-10 (Salmon et al.), bit-compatible
// with numpy.random.Philox for key = {seed, stream} and zero start counter.
// Independent streams come from distinct (seed, stream) pairs, so any
// consumer can be given its own reproducible stream without coordination.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t next_u64();

    // Uniform double in [0, 1), 53 mantissa bits.
    double uniform();

    // Standard normal via Box-Muller; consumes two uniforms per call.
    double normal();
    double normal(double mean, double stddev);

    // Uniform integer in [0, n), n > 0.
    std::uint64_t next_below(std::uint64_t n);

    std::uint64_t seed() const { return key_[0]; }
    std::uint64_t stream() const { return key_[1]; }

    struct State {
        std::uint64_t key0 = 0, key1 = 0;
        std::uint64_t ctr0 = 0, ctr1 = 0;  // next block to generate
        std::uint32_t pos = 0;             // consumed outputs of previous block
    };
    State state() const;
    static Rng restore(const State& s);

private:
    std::uint64_t key_[2];
    std::uint64_t ctr_[2];
    std::array<std::uint64_t, 4> buf_{};
    std::uint32_t pos_ = 4;  // 4 = buffer exhausted

    void refill();
};

// Deterministic stream id for a named purpose + index (splitmix64-style mix),
// used to hand out independent substreams of one experiment seed.
std::uint64_t derive_stream(std::uint64_t purpose_tag, std::uint64_t index);

// Poisson draw via exponential inter-arrival accumulation; exact for any
// rate >= 0 and free of the exp(-rate) underflow of the product method.
int poisson(Rng& rng, double rate);

}  // namespace ambient
