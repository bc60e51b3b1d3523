#ifndef DIFFRESTORE_RNG_HPP
#define DIFFRESTORE_RNG_HPP

#include <array>
#include <cstdint>
#include <utility>

namespace diffrestore {

// Philox4x32-10 counter-based generator (Salmon et al., "Parallel random
// numbers: as easy as 1, 2, 3"). Streams are identified by a 64-bit key and
// a 64-bit stream tag placed in the upper counter words; draws advance the
// lower counter words only, so streams with distinct (key, tag) never
// overlap. Copyable value type: a chain can carry its generator by value.
class philox_rng {
public:
    philox_rng() = default;

    // key = (key0, key1), stream tag occupies counter words 2 and 3.
    philox_rng(std::uint32_t key0, std::uint32_t key1,
               std::uint32_t stream0 = 0, std::uint32_t stream1 = 0);

    // Seeding used by the samplers: chain index, user seed, frame index and
    // a purpose tag (chain evolution, bootstrap, reference, ...).
    static philox_rng for_stream(std::uint64_t chain_index, std::uint64_t seed,
                                 std::uint32_t frame = 0, std::uint32_t purpose = 0);

    std::uint32_t next_u32();
    std::uint64_t next_u64();

    // Uniform on [0,1) with 53-bit resolution.
    double uniform();
    // Uniform on (0,1]; safe as a log() argument.
    double uniform_pos();
    // One standard 2-d normal via Box-Muller (consumes exactly two uniforms).
    std::pair<double, double> normal2();
    // Exponential with the given rate.
    double exponential(double rate);

    // Raw block function, exposed for the known-answer tests.
    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> counter,
                                              std::array<std::uint32_t, 2> key);

private:
    void refill();

    std::array<std::uint32_t, 4> m_counter{};
    std::array<std::uint32_t, 2> m_key{};
    std::array<std::uint32_t, 4> m_buffer{};
    int m_available = 0;
};

} // namespace diffrestore

#endif
