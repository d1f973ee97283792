#include "stfrag/rng.hpp"

#include <cmath>

namespace stfrag {

namespace {

constexpr std::uint32_t kWeylA = 0x9E3779B9u;
constexpr std::uint32_t kWeylB = 0xBB67AE85u;
constexpr std::uint32_t kMulA = 0xD2511F53u;
constexpr std::uint32_t kMulB = 0xCD9E8D57u;

inline void round_once(std::array<std::uint32_t, 4>& ctr,
                       const std::array<std::uint32_t, 2>& key) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMulA) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMulB) * ctr[2];
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

} // namespace

std::array<std::uint32_t, 4> RngStream::philox4x32(std::array<std::uint32_t, 4> counter,
                                                   std::array<std::uint32_t, 2> key) {
    for (int r = 0; r < 9; ++r) {
        round_once(counter, key);
        key[0] += kWeylA;
        key[1] += kWeylB;
    }
    round_once(counter, key);
    return counter;
}

std::uint64_t RngStream::mix64(std::uint64_t v) {
    v += 0x9E3779B97F4A7C15ull;
    v = (v ^ (v >> 30)) * 0xBF58476D1CE4E5B9ull;
    v = (v ^ (v >> 27)) * 0x94D049BB133111EBull;
    return v ^ (v >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_(stream_id) {}

void RngStream::refill() {
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
        static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)};
    const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed_),
                                              static_cast<std::uint32_t>(seed_ >> 32)};
    buf_ = philox4x32(ctr, key);
    ++block_;
    have_ = 4;
}

std::uint32_t RngStream::next_u32() {
    if (have_ == 0) refill();
    return buf_[4 - have_--];
}

std::uint64_t RngStream::next_u64() {
    const std::uint64_t hi = next_u32();
    const std::uint64_t lo = next_u32();
    return (hi << 32) | lo;
}

double RngStream::uniform() {
    // (x + 0.5) * 2^-53 lies strictly inside (0,1)
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::exponential() { return -std::log(uniform()); }

double RngStream::pareto(double a) { return std::pow(uniform(), -1.0 / a); }

RngStream RngStream::substream(std::uint64_t label) const {
    return RngStream(seed_, mix64(stream_ ^ mix64(label + 0x51ED2700u)));
}

RngStream RngStream::substream(std::uint64_t label_a, std::uint64_t label_b) const {
    return substream(label_a).substream(label_b);
}

} // namespace stfrag
