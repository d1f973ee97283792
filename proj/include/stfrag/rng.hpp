#ifndef STFRAG_RNG_HPP
#define STFRAG_RNG_HPP

#include <array>
#include <cstdint>

namespace stfrag {

// Counter-based stream built on Philox4x32-10.
//
// The 64-bit seed forms the cipher key; the 128-bit block counter carries
// the 64-bit stream id in its high half and a running 64-bit block index in
// its low half.  Distinct (seed, stream_id) pairs therefore index disjoint
// counter blocks of the same keyed permutation, replay is bit-exact, and
// skipping or splitting costs nothing.
//
// All randomness in the artifact flows from one top-level seed through
// substream(label) derivations (splitmix64 mixing of the stream id), so a
// run is reproducible from its manifest.
class RngStream {
public:
    RngStream() : RngStream(0, 0) {}
    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_; }

    std::uint32_t next_u32();
    std::uint64_t next_u64();

    // uniform on the open interval (0,1), 53-bit resolution
    double uniform();
    // standard exponential
    double exponential();
    // uniform on (0,1) to the power -1/a: Pareto tail draw
    double pareto(double a);

    // statistically independent child stream; deterministic in (this, label)
    RngStream substream(std::uint64_t label) const;
    RngStream substream(std::uint64_t label_a, std::uint64_t label_b) const;

    // raw block cipher, exposed for known-answer tests
    static std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                                   std::array<std::uint32_t, 2> key);
    static std::uint64_t mix64(std::uint64_t v);

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int have_ = 0;
};

} // namespace stfrag

#endif
