#include "diffrestore/rng.hpp"

#include <cmath>
#include <numbers>

namespace diffrestore {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(std::array<std::uint32_t, 4>& ctr,
                         std::array<std::uint32_t, 2> const& key)
{
    std::uint64_t const p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
    std::uint64_t const p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
    std::uint32_t const hi0 = static_cast<std::uint32_t>(p0 >> 32);
    std::uint32_t const lo0 = static_cast<std::uint32_t>(p0);
    std::uint32_t const hi1 = static_cast<std::uint32_t>(p1 >> 32);
    std::uint32_t const lo1 = static_cast<std::uint32_t>(p1);
    ctr = { hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0 };
}

} // namespace

std::array<std::uint32_t, 4> philox_rng::block(std::array<std::uint32_t, 4> counter,
                                               std::array<std::uint32_t, 2> key)
{
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kPhiloxW0;
            key[1] += kPhiloxW1;
        }
        philox_round(counter, key);
    }
    return counter;
}

philox_rng::philox_rng(std::uint32_t key0, std::uint32_t key1,
                       std::uint32_t stream0, std::uint32_t stream1)
    : m_counter{ 0, 0, stream0, stream1 },
      m_key{ key0, key1 }
{}

philox_rng philox_rng::for_stream(std::uint64_t chain_index, std::uint64_t seed,
                                  std::uint32_t frame, std::uint32_t purpose)
{
    // Fold the upper halves into the stream words so 64-bit indices and
    // seeds still yield distinct streams.
    std::uint32_t const s0 = frame ^ static_cast<std::uint32_t>(chain_index >> 32);
    std::uint32_t const s1 = purpose ^ static_cast<std::uint32_t>(seed >> 32);
    return philox_rng(static_cast<std::uint32_t>(chain_index),
                      static_cast<std::uint32_t>(seed), s0, s1);
}

void philox_rng::refill()
{
    m_buffer = block(m_counter, m_key);
    m_available = 4;
    if (++m_counter[0] == 0)
        ++m_counter[1]; // 2^64 draws per stream before the tag words move
}

std::uint32_t philox_rng::next_u32()
{
    if (m_available == 0)
        refill();
    return m_buffer[4 - m_available--];
}

std::uint64_t philox_rng::next_u64()
{
    std::uint64_t const hi = next_u32();
    return (hi << 32) | next_u32();
}

double philox_rng::uniform()
{
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double philox_rng::uniform_pos()
{
    return 1.0 - uniform();
}

std::pair<double, double> philox_rng::normal2()
{
    double const u1 = uniform_pos();
    double const u2 = uniform();
    double const r = std::sqrt(-2.0 * std::log(u1));
    double const theta = 2.0 * std::numbers::pi * u2;
    return { r * std::cos(theta), r * std::sin(theta) };
}

double philox_rng::exponential(double rate)
{
    return -std::log(uniform_pos()) / rate;
}

} // namespace diffrestore
