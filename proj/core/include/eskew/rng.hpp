#ifndef ESKEW_RNG_HPP
#define ESKEW_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace eskew {

/// SplitMix64 finalizer; mixes a 64-bit value into a well-distributed one.
inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seedable random stream with a pinned output sequence.
///
/// Uniform and normal variates are produced by fixed in-class recipes
/// (bit-shift mapping and Box–Muller) rather than the standard library
/// distributions, whose sequences are implementation-defined. Reports
/// produced from these streams are reproducible across toolchains.
///
/// A stream is owned by one caller at a time; it may be moved between
/// threads but must not be shared concurrently.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    /// Uniform draw on (0, 1]; never returns 0, so log(u) is always finite.
    double uniform() {
        const std::uint64_t x = engine_();
        return static_cast<double>(x >> 11) * 0x1.0p-53 + 0x1.0p-53;
    }

    /// Standard normal draw (Box–Muller, one spare cached).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    /// Raw 64-bit output (used for derived seeds recorded in reports).
    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Derives the seed of an independent substream, e.g. one per Monte Carlo
/// replication. The construction is splittable: substreams for distinct
/// indices are decorrelated regardless of how the master seed was chosen,
/// and the result does not depend on which worker consumes the index.
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(master ^ splitmix64(index + 1));
}

}  // namespace eskew

#endif  // ESKEW_RNG_HPP
