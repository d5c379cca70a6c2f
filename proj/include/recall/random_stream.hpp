#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace recall {

// Keyed pseudo-random stream. The generator state is a pure function of
// (seed, stream_id), so any stream can be rebuilt independently of the order
// in which other streams were consumed. Engine: xoshiro256** initialised from
// a SplitMix64 hash of the key.
class RandomStream {
public:
    using result_type = std::uint64_t;

    RandomStream(std::uint64_t seed, std::uint64_t stream_id);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept;
    // Uniform double in (0, 1).
    double uniform_open() noexcept;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    // Stream keyed by (seed, hash(stream_id, path...)). Does not consume
    // state of *this.
    RandomStream substream(std::initializer_list<std::uint64_t> path) const;

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::array<std::uint64_t, 4> state_{};
};

// 64-bit mixing used for key derivation.
std::uint64_t mix64(std::uint64_t x) noexcept;
std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) noexcept;

}  // namespace recall
