#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace inag {

/// Counter-based random stream.
///
/// Each draw hashes (key, counter) through a SplitMix64 finalizer, so a stream
/// is fully described by two integers and child streams can be derived with
/// split() without touching the parent. Parallel workers that derive their
/// stream from (master seed, record index) therefore see the same numbers
/// regardless of scheduling.
///
/// Gaussian draws use the Box-Muller transform on two uniforms; the second
/// variate of each pair is cached and returned by the next call.
class SeedStream {
public:
    using result_type = std::uint64_t;

    explicit SeedStream(std::uint64_t seed = 0, std::uint64_t stream_id = 0);

    /// Independent child stream. Does not advance this stream.
    [[nodiscard]] SeedStream split(std::uint64_t stream_id) const;

    std::uint64_t next_u64();
    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    /// Uniform in (0, 1].
    double uniform_open_low();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Unbiased integer in [0, n). n must be > 0.
    std::size_t index(std::size_t n);
    double gaussian();

    [[nodiscard]] std::uint64_t key() const { return key_; }
    [[nodiscard]] std::uint64_t counter() const { return counter_; }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()() { return next_u64(); }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    std::optional<double> spare_;
};

/// n standard-normal samples drawn from `stream`.
std::vector<double> seeded_gaussian(SeedStream& stream, std::size_t n);

/// Fisher-Yates permutation of 0..n-1 driven by `stream`.
std::vector<std::size_t> random_permutation(SeedStream& stream, std::size_t n);

/// SplitMix64 finalizer; also used for config digests and stream derivation.
std::uint64_t mix64(std::uint64_t x);

}  // namespace inag
