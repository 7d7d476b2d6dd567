#include "ambient/rng.hpp"

#include <cmath>

namespace ambient {

namespace {

constexpr std::uint64_t kPhiloxM0 = 0xD2E7470EE14C6C93ULL;
constexpr std::uint64_t kPhiloxM1 = 0xCA5A826395121157ULL;
constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

inline void mul_hilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
    const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
    hi = static_cast<std::uint64_t>(p >> 64);
    lo = static_cast<std::uint64_t>(p);
}

inline void philox_round(std::uint64_t c[4], const std::uint64_t k[2]) {
    std::uint64_t hi0, lo0, hi1, lo1;
    mul_hilo(kPhiloxM0, c[0], hi0, lo0);
    mul_hilo(kPhiloxM1, c[2], hi1, lo1);
    const std::uint64_t n0 = hi1 ^ c[1] ^ k[0];
    const std::uint64_t n1 = lo1;
    const std::uint64_t n2 = hi0 ^ c[3] ^ k[1];
    const std::uint64_t n3 = lo0;
    c[0] = n0;
    c[1] = n1;
    c[2] = n2;
    c[3] = n3;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
    key_[0] = seed;
    key_[1] = stream;
    ctr_[0] = 0;
    ctr_[1] = 0;
}

void Rng::refill() {
    // The counter advances before each block, matching the reference stream.
    if (++ctr_[0] == 0) ++ctr_[1];
    std::uint64_t c[4] = {ctr_[0], ctr_[1], 0, 0};
    std::uint64_t k[2] = {key_[0], key_[1]};
    for (int r = 0; r < 10; ++r) {
        philox_round(c, k);
        k[0] += kWeyl0;
        k[1] += kWeyl1;
    }
    buf_ = {c[0], c[1], c[2], c[3]};
    pos_ = 0;
}

std::uint64_t Rng::next_u64() {
    if (pos_ >= 4) refill();
    return buf_[pos_++];
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    // Box-Muller, cosine branch only; (0,1] argument keeps the log finite.
    const double a = 1.0 - uniform();
    const double b = uniform();
    return std::sqrt(-2.0 * std::log(a)) * std::cos(6.283185307179586476925286766559 * b);
}

double Rng::normal(double mean, double stddev) {
    return mean + stddev * normal();
}

std::uint64_t Rng::next_below(std::uint64_t n) {
    // Modulo bias is < 2^-60 for the n used here; determinism is what matters.
    return next_u64() % n;
}

Rng::State Rng::state() const {
    State s;
    s.key0 = key_[0];
    s.key1 = key_[1];
    s.ctr0 = ctr_[0];
    s.ctr1 = ctr_[1];
    s.pos = pos_;
    return s;
}

Rng Rng::restore(const State& s) {
    Rng r(s.key0, s.key1);
    r.ctr_[0] = s.ctr0;
    r.ctr_[1] = s.ctr1;
    if (s.pos < 4) {
        // Regenerate the block that the stored counter points at.
        Rng tmp(s.key0, s.key1);
        tmp.ctr_[0] = s.ctr0 - 1;
        tmp.ctr_[1] = (s.ctr0 == 0) ? s.ctr1 - 1 : s.ctr1;
        tmp.refill();
        r.buf_ = tmp.buf_;
        r.ctr_[0] = s.ctr0;
        r.ctr_[1] = s.ctr1;
        r.pos_ = s.pos;
    }
    return r;
}

std::uint64_t derive_stream(std::uint64_t purpose_tag, std::uint64_t index) {
    return splitmix64(splitmix64(purpose_tag) ^ (0x9E3779B97F4A7C15ULL * (index + 1)));
}

int poisson(Rng& rng, double rate) {
    if (rate <= 0.0) return 0;
    double acc = 0.0;
    int n = -1;
    do {
        acc += -std::log(1.0 - rng.uniform());
        ++n;
    } while (acc < rate);
    return n;
}

}  // namespace ambient
