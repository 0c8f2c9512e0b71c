#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace gbrbm {

/// Counter-based random stream (Philox4x32-10).
///
/// The output is a pure function of (seed, stream_id, counter): the seed is the
/// cipher key and (stream_id, counter) the 128-bit block counter. Each block
/// yields two 64-bit words. Distinct stream ids index disjoint counter ranges,
/// so streams never overlap.
///
/// Gaussian variates use Box-Muller on two consecutive uniforms and discard the
/// sine branch, so every normal draw consumes exactly two words.
class RngStream {
  public:
    using result_type = std::uint64_t;

    RngStream() = default;
    RngStream(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t counter = 0)
        : seed_(seed), stream_id_(stream_id), counter_(counter) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    /// Uniform in the open interval (0, 1).
    double uniform();
    double normal();
    bool bernoulli(double p) { return uniform() < p; }

    /// Independent stream derived from this one's (seed, stream_id) and `index`.
    /// Does not advance this stream.
    [[nodiscard]] RngStream child(std::uint64_t index) const;

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }
    /// Number of 64-bit words consumed so far.
    std::uint64_t counter() const { return counter_; }

    friend bool operator==(const RngStream&, const RngStream&) = default;

  private:
    std::uint64_t seed_ = 0;
    std::uint64_t stream_id_ = 0;
    std::uint64_t counter_ = 0;
};

/// Well-mixed 64-bit key from an ordered pair.
std::uint64_t mix_key(std::uint64_t a, std::uint64_t b);

/// Philox4x32-10 block function, exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key);

}  // namespace gbrbm
