#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dec {

/// Raised when an input violates a documented invariant.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Raised when an exact computation would exceed a configured size limit.
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when a recorded run fails one of its audit inequalities.
struct AuditViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw ValidationError(msg);
}

inline constexpr double kDistTol = 1e-9;
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Formats with 17 significant digits, enough to round-trip any double.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// FNV-1a, 64 bit.
inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t hash_doubles(const std::vector<double>& v) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (double d : v) {
        auto bits = std::bit_cast<std::uint64_t>(d);
        for (int k = 0; k < 8; ++k) {
            h ^= (bits >> (8 * k)) & 0xffu;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// Portable random source. The engine is std::mt19937_64, whose output
/// sequence is fixed by the standard; all derived variates are computed here
/// so results do not depend on the standard library's distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    /// Independent stream for round t of a run seeded with seed.
    static Rng for_round(std::uint64_t seed, std::uint64_t t) {
        return Rng(splitmix64(seed) ^ splitmix64(t + 1));
    }

    std::uint64_t next() { return eng_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::size_t below(std::size_t n) {
        return static_cast<std::size_t>(uniform() * static_cast<double>(n));
    }

    bool bernoulli(double p) { return uniform() < p; }

    double normal() {
        double u1 = 0.0;
        while (u1 <= 0.0) u1 = uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    /// Marsaglia-Tsang, with the boost for shape < 1.
    double gamma(double shape) {
        if (shape < 1.0) {
            double u = 0.0;
            while (u <= 0.0) u = uniform();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    std::vector<double> dirichlet(std::size_t n, double alpha) {
        std::vector<double> w(n);
        double total = 0.0;
        for (auto& x : w) total += (x = gamma(alpha));
        if (total <= 0.0) {
            for (auto& x : w) x = 1.0 / static_cast<double>(n);
            return w;
        }
        for (auto& x : w) x /= total;
        return w;
    }

    /// Index i with cumulative weight crossing u * total; lowest index on ties.
    template <class Range>
    std::size_t categorical(const Range& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double u = uniform() * total;
        double acc = 0.0;
        std::size_t last = 0, i = 0;
        for (double w : weights) {
            if (w > 0.0) {
                acc += w;
                last = i;
                if (u < acc) return i;
            }
            ++i;
        }
        return last;
    }

private:
    std::mt19937_64 eng_;
};

} // namespace dec
