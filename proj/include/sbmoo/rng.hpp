#pragma once

// Counter-based random streams. Every draw is a pure function of
// (master_seed, stream_id, position), so runs can be scheduled in any order.

#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <string_view>

namespace sbmoo {

/// Anything that can feed the problems and operators: U[0,1), N(0,1) and
/// unbiased integers in [0, n).
template <class R>
concept RandomSource = requires(R& r, std::uint64_t n) {
    { r.uniform() } -> std::convertible_to<double>;
    { r.normal() } -> std::convertible_to<double>;
    { r.below(n) } -> std::convertible_to<std::uint64_t>;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

}  // namespace detail

/// Philox4x32-10 block function (Salmon et al., Random123).
inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) noexcept {
    constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kW0;
            key[1] += kW1;
        }
        const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
        const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
        ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
               static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
}

/// Seedable stream with independent substreams. The stream id occupies the
/// upper half of the Philox counter, the draw position the lower half.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_id) noexcept
        : seed_(master_seed), stream_(stream_id) {}

    std::uint64_t master_seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_; }

    std::uint64_t next_u64() noexcept {
        if (used_ == 4) refill();
        const std::uint64_t hi = buf_[used_++];
        const std::uint64_t lo = buf_[used_++];
        return (hi << 32) | lo;
    }

    /// 53-bit uniform in [0, 1).
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal via the Marsaglia polar method (log and sqrt only,
    /// so results match across conforming libms).
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

    /// Unbiased integer in [0, n) by rejection; n must be positive.
    std::uint64_t below(std::uint64_t n) noexcept {
        const std::uint64_t limit = -n % n;  // 2^64 mod n
        std::uint64_t r;
        do {
            r = next_u64();
        } while (r < limit);
        return r % n;
    }

    friend bool operator==(const RngStream&, const RngStream&) = default;

private:
    void refill() noexcept {
        const std::array<std::uint32_t, 4> ctr{static_cast<std::uint32_t>(block_),
                                                static_cast<std::uint32_t>(block_ >> 32),
                                                static_cast<std::uint32_t>(stream_),
                                                static_cast<std::uint32_t>(stream_ >> 32)};
        buf_ = philox4x32_10(ctr, {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
        ++block_;
        used_ = 0;
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int used_ = 4;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

static_assert(RandomSource<RngStream>);

/// Mixes an arbitrary list of integers and strings into one 64-bit seed.
class SeedHasher {
public:
    explicit SeedHasher(std::uint64_t master) noexcept : h_(detail::splitmix64(master)) {}
    SeedHasher& add(std::uint64_t v) noexcept {
        h_ = detail::splitmix64(h_ ^ detail::splitmix64(v + 0x632BE59BD9B4E019ull));
        return *this;
    }
    SeedHasher& add(std::string_view s) noexcept { return add(detail::fnv1a(s)); }
    std::uint64_t value() const noexcept { return h_; }

private:
    std::uint64_t h_;
};

/// Per-run seed: hash(master_seed, problem_id, dim, run_index).
inline std::uint64_t run_seed(std::uint64_t master_seed, std::string_view problem_id, std::uint64_t d,
                              std::uint64_t run_index) noexcept {
    return SeedHasher(master_seed).add(problem_id).add(d).add(run_index).value();
}

/// Stream ids used inside one run.
namespace streams {
inline constexpr std::uint64_t kObjectives = 0;
inline constexpr std::uint64_t kOptimiser = 1;
}  // namespace streams

}  // namespace sbmoo
