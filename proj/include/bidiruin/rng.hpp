#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>

namespace bidiruin {

// Identifies one independent random stream: every path of every estimator
// owns a distinct stream_index under a shared master seed.
struct seed_spec {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_index = 0;

    friend bool operator==(const seed_spec&, const seed_spec&) = default;
};

// Philox4x32-10 (Salmon et al., SC'11). Counter-based: the output for a given
// (key, counter) is a pure function, so any element of any stream can be
// produced without touching the others.
class philox4x32 {
   public:
    using block = std::array<std::uint32_t, 4>;
    using key_type = std::array<std::uint32_t, 2>;

    static constexpr block generate(block ctr, key_type key) noexcept {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
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

// Uniform in (0, 1]; never zero so log() is always finite.
inline double to_unit_open_closed(std::uint64_t bits) noexcept {
    return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
}

// Uniform in [0, 1).
inline double to_unit_closed_open(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Uniform in [-1, 1).
inline double to_signed_unit(std::uint64_t bits) noexcept {
    return static_cast<double>(static_cast<std::int64_t>(bits) >> 11) * 0x1.0p-52;
}

// A channel of a stream. Element j of the channel depends only on
// (master_seed, stream_index, channel, j), which makes prefixes stable: a
// path of 2k steps starts with the path of k steps drawn from the same channel.
class counter_stream {
   public:
    counter_stream(seed_spec seed, std::uint32_t channel) noexcept
        : key_{static_cast<std::uint32_t>(seed.master_seed),
               static_cast<std::uint32_t>(seed.master_seed >> 32)},
          channel_(channel),
          stream_lo_(static_cast<std::uint32_t>(seed.stream_index)),
          stream_hi_(static_cast<std::uint32_t>(seed.stream_index >> 32)) {}

    philox4x32::block raw_block(std::uint32_t index) const noexcept {
        return philox4x32::generate({index, channel_, stream_lo_, stream_hi_}, key_);
    }

    // Two 64-bit words per block.
    std::array<std::uint64_t, 2> words(std::uint32_t index) const noexcept {
        const auto b = raw_block(index);
        return {(std::uint64_t{b[1]} << 32) | b[0], (std::uint64_t{b[3]} << 32) | b[2]};
    }

    double uniform(std::uint64_t j) const noexcept {
        return to_unit_open_closed(words(static_cast<std::uint32_t>(j >> 1))[j & 1]);
    }

    // Marsaglia polar pair for normals 2*index and 2*index + 1. A rejected
    // candidate retries with the attempt number folded into the counter, so
    // the pair is still a pure function of its position.
    std::array<double, 2> normal_pair(std::uint32_t index) const noexcept {
        for (std::uint32_t attempt = 0;; ++attempt) {
            const auto b = philox4x32::generate(
                {index, channel_ ^ (attempt << 24), stream_lo_, stream_hi_}, key_);
            const double x = to_signed_unit((std::uint64_t{b[1]} << 32) | b[0]);
            const double y = to_signed_unit((std::uint64_t{b[3]} << 32) | b[2]);
            const double r2 = x * x + y * y;
            if (r2 < 1.0 && r2 > 0.0) {
                const double factor = std::sqrt(-2.0 * std::log(r2) / r2);
                return {x * factor, y * factor};
            }
        }
    }

    double normal(std::uint64_t j) const noexcept {
        return normal_pair(static_cast<std::uint32_t>(j >> 1))[j & 1];
    }

    // out[j] = normal(j).
    void fill_normals(std::span<double> out) const noexcept {
        const std::size_t n = out.size();
        std::size_t j = 0;
        for (; j + 1 < n; j += 2) {
            const auto z = normal_pair(static_cast<std::uint32_t>(j >> 1));
            out[j] = z[0];
            out[j + 1] = z[1];
        }
        if (j < n) out[j] = normal_pair(static_cast<std::uint32_t>(j >> 1))[0];
    }

    // out[j] = uniform(j).
    void fill_uniforms(std::span<double> out) const noexcept {
        const std::size_t n = out.size();
        std::size_t j = 0;
        for (; j + 1 < n; j += 2) {
            const auto w = words(static_cast<std::uint32_t>(j >> 1));
            out[j] = to_unit_open_closed(w[0]);
            out[j + 1] = to_unit_open_closed(w[1]);
        }
        if (j < n) out[j] = to_unit_open_closed(words(static_cast<std::uint32_t>(j >> 1))[0]);
    }

   private:
    philox4x32::key_type key_;
    std::uint32_t channel_;
    std::uint32_t stream_lo_;
    std::uint32_t stream_hi_;
};

}  // namespace bidiruin
