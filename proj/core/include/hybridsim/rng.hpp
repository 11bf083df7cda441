#pragma once

#include <cmath>
#include <cstdint>

namespace hybridsim {

// Counter-based splittable generator built on the splitmix64 finalizer.
// Each logical stream is addressed by (run seed, stream id, path index);
// the derived 64-bit key plus a running counter feed a stateless mix, so
// identical keys reproduce identical sequences and distinct streams are
// statistically independent.

namespace detail {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace detail

// Splitting rule: fold the stream id and path index into the seed through
// two rounds of the finalizer. Documented so tapes can be replayed by an
// independent implementation.
constexpr std::uint64_t derive_stream_key(std::uint64_t seed,
                                          std::uint64_t stream_id,
                                          std::uint64_t path_index) {
    std::uint64_t k = detail::mix64(seed + detail::kGolden);
    k = detail::mix64(k ^ (stream_id * 0xD1342543DE82EF95ULL + detail::kGolden));
    k = detail::mix64(k ^ (path_index * 0x2545F4914F6CDD1DULL + detail::kGolden));
    return k;
}

class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) : key_(key) {}

    std::uint64_t next_u64() {
        counter_ += 1;
        return detail::mix64(key_ + counter_ * detail::kGolden);
    }

    /// Uniform on the open interval (0, 1); never returns an endpoint.
    double next_unit_open() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
    }

    /// Uniform on [lo, hi).
    double next_uniform(double lo, double hi) {
        const double u = static_cast<double>(next_u64() >> 11) * 0x1p-53; // [0, 1)
        return lo + (hi - lo) * u;
    }

    /// Standard normal via Box-Muller; pairs are cached.
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = next_unit_open();
        const double u2 = next_unit_open();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Exponential with the given mean (= 1/rate).
    double next_exponential_mean(double mean) {
        return -mean * std::log(next_unit_open());
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace hybridsim
