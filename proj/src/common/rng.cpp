#include "inag/common/rng.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace inag {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

SeedStream::SeedStream(std::uint64_t seed, std::uint64_t stream_id)
    : key_(mix64(mix64(seed) ^ (stream_id * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL))) {}

SeedStream SeedStream::split(std::uint64_t stream_id) const {
    return SeedStream(key_, stream_id + 1);
}

std::uint64_t SeedStream::next_u64() {
    const std::uint64_t c = counter_++;
    return mix64(key_ ^ mix64(c));
}

double SeedStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeedStream::uniform_open_low() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

std::size_t SeedStream::index(std::size_t n) {
    // Lemire's multiply-shift with rejection.
    const std::uint64_t range = n;
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * range;
    auto low = static_cast<std::uint64_t>(m);
    if (low < range) {
        const std::uint64_t threshold = (0 - range) % range;
        while (low < threshold) {
            x = next_u64();
            m = static_cast<__uint128_t>(x) * range;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::size_t>(m >> 64);
}

double SeedStream::gaussian() {
    if (spare_) {
        const double v = *spare_;
        spare_.reset();
        return v;
    }
    const double u1 = uniform_open_low();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    return r * std::cos(theta);
}

std::vector<double> seeded_gaussian(SeedStream& stream, std::size_t n) {
    std::vector<double> out(n);
    for (auto& v : out) v = stream.gaussian();
    return out;
}

std::vector<std::size_t> random_permutation(SeedStream& stream, std::size_t n) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = stream.index(i);
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

}  // namespace inag
