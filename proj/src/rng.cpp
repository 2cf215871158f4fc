#include "oubridge/rng.hpp"

#include <cmath>
#include <numbers>

namespace oubridge {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(product >> 32);
    lo = static_cast<std::uint32_t>(product);
}

// (0, 1] with 53 random bits.
inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32 | lo) >> 11;
    return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t domain) noexcept {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (domain + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

NormalStream::NormalStream(std::uint64_t seed, std::uint64_t path) noexcept
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      path_lo_(static_cast<std::uint32_t>(path)),
      path_hi_(static_cast<std::uint32_t>(path >> 32)) {}

double NormalStream::normal(std::uint64_t step, std::uint32_t index) const noexcept {
    const auto block = Philox4x32::generate(
        {index / 2, static_cast<std::uint32_t>(step), path_lo_,
         path_hi_ ^ (static_cast<std::uint32_t>(step >> 32) << 16)},
        key_);
    const double radius = std::sqrt(-2.0 * std::log(to_unit(block[0], block[1])));
    const double angle = 2.0 * std::numbers::pi * to_unit(block[2], block[3]);
    return (index % 2 == 0) ? radius * std::cos(angle) : radius * std::sin(angle);
}

void NormalStream::fill(std::uint64_t step, std::span<double> out) const noexcept {
    const auto step_lo = static_cast<std::uint32_t>(step);
    const auto path_hi = path_hi_ ^ (static_cast<std::uint32_t>(step >> 32) << 16);
    for (std::size_t i = 0; i < out.size(); i += 2) {
        const auto block = Philox4x32::generate(
            {static_cast<std::uint32_t>(i / 2), step_lo, path_lo_, path_hi}, key_);
        const double radius = std::sqrt(-2.0 * std::log(to_unit(block[0], block[1])));
        const double angle = 2.0 * std::numbers::pi * to_unit(block[2], block[3]);
        out[i] = radius * std::cos(angle);
        if (i + 1 < out.size()) out[i + 1] = radius * std::sin(angle);
    }
}

double NormalStream::uniform(std::uint64_t step, std::uint32_t index) const noexcept {
    const auto block = Philox4x32::generate(
        {index / 2, static_cast<std::uint32_t>(step), path_lo_,
         path_hi_ ^ (static_cast<std::uint32_t>(step >> 32) << 16) ^ 0x80000000u},
        key_);
    return (index % 2 == 0) ? to_unit(block[0], block[1]) : to_unit(block[2], block[3]);
}

}  // namespace oubridge
