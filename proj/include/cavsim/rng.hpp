#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <numbers>

namespace cavsim {

/// Counter-free splittable seeding: SplitMix64 is used both to expand a
/// 64-bit seed into engine state and to derive independent per-stream seeds
/// from (master_seed, stream_index).
struct SplitMix64 {
    std::uint64_t s;

    std::uint64_t next() {
        std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

/// xoshiro256++ engine. Chosen over std::mt19937_64 because the 32-byte
/// state checkpoints trivially and the output sequence does not depend on
/// the standard library implementation.
class Rng {
  public:
    static constexpr std::size_t kStateBytes = 32;

    Rng() : Rng(0) {}

    explicit Rng(std::uint64_t seed) {
        SplitMix64 sm{seed};
        for (auto& w : state_) w = sm.next();
    }

    /// Independent stream for trajectory/chain `index` under one master seed.
    /// Streams are decorrelated by hashing (master, index) before expansion,
    /// so results do not depend on which thread runs which index.
    static Rng stream(std::uint64_t master_seed, std::uint64_t index) {
        SplitMix64 sm{master_seed ^ (0x632be59bd9b4e019ULL * (index + 1))};
        std::uint64_t derived = sm.next();
        return Rng(derived ^ sm.next());
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform on (0, 1]: never returns 0 so log() is always finite.
    double uniform01() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller. Stateless (no cached second value)
    /// so engine state alone fixes the draw sequence across checkpoints.
    double normal() {
        const double u1 = uniform01();
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

    std::array<std::uint8_t, kStateBytes> serialize() const {
        std::array<std::uint8_t, kStateBytes> out{};
        std::memcpy(out.data(), state_.data(), kStateBytes);
        return out;
    }

    static Rng deserialize(const std::uint8_t* bytes) {
        Rng r;
        std::memcpy(r.state_.data(), bytes, kStateBytes);
        return r;
    }

    friend bool operator==(const Rng& a, const Rng& b) { return a.state_ == b.state_; }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::array<std::uint64_t, 4> state_{};
};

}  // namespace cavsim
