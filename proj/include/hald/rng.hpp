#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

namespace hald {

/// SplitMix64 step. Used to expand a single u64 seed into well-mixed
/// per-stream seeds so that logically independent random streams never
/// share state even when their seeds are small consecutive integers.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic random stream with explicitly pinned algorithms.
///
/// Everything that consumes randomness in this project goes through this
/// class so that a (seed, stream) pair fully determines the sequence of
/// draws on any platform.  The generator is mt19937_64; floating-point
/// draws use the top 53 bits, integer draws use rejection sampling, and
/// gaussians use Box-Muller.  None of the distribution logic is delegated
/// to <random>'s distribution templates, whose output is
/// implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : Rng(seed, 0) {}

    Rng(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t s = seed ^ (0xd1b54a32d192ed03ULL * (stream + 1));
        std::uint64_t a = splitmix64(s);
        std::uint64_t b = splitmix64(s);
        engine_.seed(a ^ (b << 1));
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    /// Uniform integer in [lo, hi], both ends inclusive.  Unbiased via
    /// rejection; deterministic across platforms unlike
    /// std::uniform_int_distribution.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        if (lo > hi) throw std::invalid_argument("uniform_int: lo > hi");
        std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
        if (range == 0) return static_cast<std::int64_t>(engine_());  // full 64-bit range
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
        std::uint64_t draw;
        do {
            draw = engine_();
        } while (draw >= limit);
        return lo + static_cast<std::int64_t>(draw % range);
    }

    /// Standard normal via Box-Muller.  Generates two values per
    /// transform and caches the second.
    double gaussian() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u1, u2;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * M_PI * u2;
        cached_ = r * std::sin(theta);
        has_cached_ = true;
        return r * std::cos(theta);
    }

    double gaussian(double mean, double stddev) {
        return mean + stddev * gaussian();
    }

    /// Exponential(1) via inversion.
    double exponential() {
        double u;
        do {
            u = uniform();
        } while (u <= 0.0);
        return -std::log(u);
    }

    /// Gamma(shape, 1) by Marsaglia-Tsang squeeze; shapes below one are
    /// lifted with the standard U^(1/shape) boost.
    double gamma(double shape) {
        if (!(shape > 0.0)) throw std::invalid_argument("gamma: shape must be positive");
        if (shape < 1.0) {
            double u;
            do {
                u = uniform();
            } while (u <= 0.0);
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        double d = shape - 1.0 / 3.0;
        double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = gaussian();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            double u = uniform();
            if (u <= 0.0) continue;
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    /// Beta(a, b) as the usual ratio of gammas.
    double beta(double a, double b) {
        if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("beta: parameters must be positive");
        double x = gamma(a);
        double y = gamma(b);
        return x / (x + y);
    }

    /// Symmetric Dirichlet(alpha, ..., alpha) over out.size() components.
    void dirichlet(std::span<double> out, double alpha) {
        if (out.empty()) throw std::invalid_argument("dirichlet: empty output");
        if (!(alpha > 0.0)) throw std::invalid_argument("dirichlet: alpha must be positive");
        double total = 0.0;
        for (double& v : out) {
            // Gamma(1) is exponential; keep the cheap path for the common
            // flat-Dirichlet case.
            v = (alpha == 1.0) ? exponential() : gamma(alpha);
            total += v;
        }
        for (double& v : out) v /= total;
    }

    std::uint64_t raw() { return engine_(); }

private:
    std::mt19937_64 engine_;
    bool has_cached_ = false;
    double cached_ = 0.0;
};

}  // namespace hald
