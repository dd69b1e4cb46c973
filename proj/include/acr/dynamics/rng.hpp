#pragma once

#include <array>
#include <cstdint>

namespace acr {

/// SplitMix64 finalizer; used to derive stream keys.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11). The key
/// selects the stream, the two high counter words a substream; the low words
/// count blocks.
class Philox {
public:
    using result_type = std::uint64_t;

    Philox(std::uint64_t key, std::uint64_t substream = 0)
        : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)},
          ctr_{0, 0, static_cast<std::uint32_t>(substream),
               static_cast<std::uint32_t>(substream >> 32)} {}

    /// Stream for replica `index` of an ensemble seeded with `master`.
    static Philox for_replica(std::uint64_t master, std::uint64_t index,
                              std::uint64_t substream = 0) {
        return Philox(mix64(master ^ mix64(index + 0x632be59bd9b4e019ULL)), substream);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    result_type operator()() {
        if (pos_ >= 2) refill();
        const std::uint64_t v = (static_cast<std::uint64_t>(block_[2 * pos_ + 1]) << 32) |
                                block_[2 * pos_];
        ++pos_;
        return v;
    }

    /// Uniform on the open interval (0, 1) with 53 random bits.
    double uniform() {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    void refill() {
        std::array<std::uint32_t, 4> c = ctr_;
        std::array<std::uint32_t, 2> k = key_;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(0xD2511F53u) * c[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(0xCD9E8D57u) * c[2];
            c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
                 static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
            k[0] += 0x9E3779B9u;
            k[1] += 0xBB67AE85u;
        }
        block_ = c;
        pos_ = 0;
        if (++ctr_[0] == 0) ++ctr_[1];
    }

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> ctr_;
    std::array<std::uint32_t, 4> block_{};
    int pos_ = 2;
};

}  // namespace acr
