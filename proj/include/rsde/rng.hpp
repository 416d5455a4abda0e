#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace rsde {

/// Philox4x32-10 counter-based generator. Output is a pure function of
/// (counter, key), so any draw can be regenerated without replaying a stream.
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;

    explicit Philox4x32(std::uint64_t seed)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

    Counter operator()(Counter c) const {
        std::uint32_t k0 = key_[0], k1 = key_[1];
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                k0 += 0x9E3779B9u;
                k1 += 0xBB67AE85u;
            }
            const std::uint64_t p0 = std::uint64_t{0xD2511F53u} * c[0];
            const std::uint64_t p1 = std::uint64_t{0xCD9E8D57u} * c[2];
            c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k0, static_cast<std::uint32_t>(p1),
                 static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k1, static_cast<std::uint32_t>(p0)};
        }
        return c;
    }

private:
    std::array<std::uint32_t, 2> key_;
};

/// Uniform in the open interval (0, 1) from 53 random bits.
inline double to_unit_open(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

/// Two independent standard normals addressed by (seed, stream, step, slot).
inline std::array<double, 2> normal_pair(const Philox4x32& gen, std::uint64_t stream,
                                         std::uint32_t step, std::uint32_t slot) {
    const auto r = gen({step, slot, static_cast<std::uint32_t>(stream),
                        static_cast<std::uint32_t>(stream >> 32)});
    const double u1 = to_unit_open(r[0], r[1]);
    const double u2 = to_unit_open(r[2], r[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
}

}  // namespace rsde
