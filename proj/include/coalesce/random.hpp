#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

#include "errors.hpp"
#include "vec2.hpp"

namespace coalesce
{
//---------------------------------------------------------------------------//
/*!
 * Philox4x32-10 counter-based block cipher (Salmon et al., SC'11).
 *
 * Maps a 128-bit counter and 64-bit key to 128 random bits. Distinct
 * (key, counter) pairs give statistically independent outputs, so every
 * particle can own a stream keyed by its id and the macro step without any
 * shared generator state.
 */
class Philox4x32
{
  public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr Counter apply(Counter ctr, Key key) noexcept
    {
        for (int round = 0; round < 10; ++round)
        {
            if (round > 0)
            {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            std::uint64_t const p0 = std::uint64_t{kMul0} * ctr[0];
            std::uint64_t const p1 = std::uint64_t{kMul1} * ctr[2];
            auto const hi0 = static_cast<std::uint32_t>(p0 >> 32);
            auto const lo0 = static_cast<std::uint32_t>(p0);
            auto const hi1 = static_cast<std::uint32_t>(p1 >> 32);
            auto const lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }

  private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

//---------------------------------------------------------------------------//
/*!
 * Sequential 64-bit generator over one Philox stream.
 *
 * The stream is addressed by (seed, major, minor); `major` is typically a
 * particle id and `minor` a macro-step index. Satisfies
 * UniformRandomBitGenerator.
 */
class Stream
{
  public:
    using result_type = std::uint64_t;

    Stream(std::uint64_t seed, std::uint64_t major, std::uint32_t minor) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}
        , major_(major)
        , minor_(minor)
    {
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept
    {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() noexcept
    {
        if (used_ == 2)
            refill();
        auto const i = 2 * used_++;
        return (std::uint64_t{block_[i]} << 32) | block_[i + 1];
    }

  private:
    void refill() noexcept
    {
        Philox4x32::Counter const ctr{
            counter_++, minor_, static_cast<std::uint32_t>(major_),
            static_cast<std::uint32_t>(major_ >> 32)};
        block_ = Philox4x32::apply(ctr, key_);
        used_ = 0;
    }

    Philox4x32::Key key_;
    std::uint64_t major_;
    std::uint32_t minor_;
    std::uint32_t counter_ = 0;
    Philox4x32::Counter block_{};
    int used_ = 2;
};

/// Minor stream indices reserved for non-stepping uses.
inline constexpr std::uint32_t kInitialConditionStream = 0xFFFFFFFFu;

//---------------------------------------------------------------------------//
// Distributions. Written out rather than taken from <random> so that sampled
// values do not depend on the standard library implementation.
//---------------------------------------------------------------------------//
/// Uniform on the open interval (0, 1).
template<class G>
double uniform01(G& g)
{
    static_assert(G::max() == std::numeric_limits<std::uint64_t>::max()
                  && G::min() == 0);
    return (static_cast<double>(g() >> 11) + 0.5) * 0x1.0p-53;
}

/// Two independent standard normals (Box-Muller).
template<class G>
Vec2 normal_pair(G& g)
{
    double const r = std::sqrt(-2 * std::log(uniform01(g)));
    double const theta = 2 * std::numbers::pi * uniform01(g);
    return {r * std::cos(theta), r * std::sin(theta)};
}

template<class G>
double standard_normal(G& g)
{
    return normal_pair(g).x;
}

/*!
 * Gamma(shape, 1) by Marsaglia-Tsang squeeze/rejection.
 *
 * Shapes below one are boosted: if X ~ Gamma(k + 1) and U ~ U(0,1) then
 * X U^(1/k) ~ Gamma(k).
 */
template<class G>
double sample_gamma(double shape, G& g)
{
    if (!(shape > 0) || !std::isfinite(shape))
        throw DomainError("sample_gamma: shape must be positive");
    double boost = 1;
    if (shape < 1)
    {
        boost = std::pow(uniform01(g), 1 / shape);
        shape += 1;
    }
    double const d = shape - 1.0 / 3.0;
    double const c = 1 / std::sqrt(9 * d);
    for (;;)
    {
        double z;
        double v;
        do
        {
            z = standard_normal(g);
            v = 1 + c * z;
        } while (v <= 0);
        v = v * v * v;
        double const u = uniform01(g);
        double const z2 = z * z;
        if (u < 1 - 0.0331 * z2 * z2
            || std::log(u) < 0.5 * z2 + d * (1 - v + std::log(v)))
        {
            return boost * d * v;
        }
    }
}
}  // namespace coalesce
