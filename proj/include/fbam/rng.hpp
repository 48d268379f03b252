#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace fbam {

/// Philox4x32-10 block function (Salmon et al., SC'11).
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t m0 = 0xD2511F53u;
    constexpr std::uint32_t m1 = 0xCD9E8D57u;
    constexpr std::uint32_t w0 = 0x9E3779B9u;
    constexpr std::uint32_t w1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(m0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(m1) * ctr[2];
        ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
               static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
        key[0] += w0;
        key[1] += w1;
    }
    return ctr;
}

/// Identifies an independent random sub-stream: (seed, path index, branch id).
struct StreamId {
    std::uint64_t seed = 0;
    std::uint64_t path = 0;
    std::uint32_t branch = 0;

    friend bool operator==(const StreamId&, const StreamId&) = default;
};

/// Sequential reader over one Philox sub-stream. Uniforms lie in (0, 1].
class RandomStream {
public:
    explicit RandomStream(StreamId id) : id_(id) {}

    const StreamId& id() const { return id_; }

    double uniform() {
        if (cached_ == 0) refill();
        return buf_[--cached_];
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double ang = 2.0 * std::numbers::pi * u2;
        spare_ = rad * std::sin(ang);
        has_spare_ = true;
        return rad * std::cos(ang);
    }

    /// Standard exponential variate.
    double exponential() { return -std::log(uniform()); }

private:
    void refill() {
        const auto key = std::array<std::uint32_t, 2>{static_cast<std::uint32_t>(id_.seed),
                                                      static_cast<std::uint32_t>(id_.seed >> 32)};
        const auto ctr = std::array<std::uint32_t, 4>{counter_, id_.branch, static_cast<std::uint32_t>(id_.path),
                                                      static_cast<std::uint32_t>(id_.path >> 32)};
        ++counter_;
        const auto out = philox4x32(ctr, key);
        constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
        for (int i = 0; i < 2; ++i) {
            const std::uint64_t bits = (static_cast<std::uint64_t>(out[2 * i]) << 32) | out[2 * i + 1];
            buf_[i] = (static_cast<double>(bits >> 11) + 1.0) * scale;
        }
        cached_ = 2;
    }

    StreamId id_;
    std::uint32_t counter_ = 0;
    double buf_[2] = {0.0, 0.0};
    int cached_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace fbam
