#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace oubridge {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter counter, Key key) noexcept;
};

/// splitmix64 finalizer; used to derive independent sub-seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t domain) noexcept;

/// Standard normal variates addressed by (seed, path, step, index).
///
/// The value for a given address does not depend on the order in which
/// addresses are visited, so ensembles split across workers reproduce the
/// serial result path by path.
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint64_t path) noexcept;

    double normal(std::uint64_t step, std::uint32_t index) const noexcept;
    /// out[i] = normal(step, i).
    void fill(std::uint64_t step, std::span<double> out) const noexcept;
    /// Uniform on (0, 1].
    double uniform(std::uint64_t step, std::uint32_t index) const noexcept;

private:
    Philox4x32::Key key_;
    std::uint32_t path_lo_;
    std::uint32_t path_hi_;
};

/// Sub-stream domains; each draws from an independent Philox key.
enum class StreamDomain : std::uint64_t {
    increments = 0,
    endpoint = 1,
    invariant = 2,
    outer_x = 3,
    outer_y = 4,
};

/// Master seed plus the (path, step) addressing scheme.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) noexcept : seed_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }
    NormalStream path(std::uint64_t path_index,
                      StreamDomain domain = StreamDomain::increments) const noexcept {
        return NormalStream(mix_seed(seed_, static_cast<std::uint64_t>(domain)), path_index);
    }
    /// Independent master stream, e.g. one per outer Monte Carlo cell.
    RngStream split(std::uint64_t key) const noexcept {
        return RngStream(mix_seed(seed_ ^ 0xA5A5A5A5A5A5A5A5ull, key));
    }

private:
    std::uint64_t seed_;
};

}  // namespace oubridge
