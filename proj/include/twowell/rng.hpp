#pragma once

#include <cstdint>
#include <random>

#include "twowell/mat.hpp"

namespace twowell {

/// Seeded uniform doubles with a fixed bit-level recipe, so identical seeds
/// reproduce identical streams on every platform (std distributions do not
/// guarantee that).
struct Rng {
    std::mt19937_64 gen;

    explicit Rng(std::uint64_t seed) : gen(seed) {}

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    Vec2 vec2(double lo, double hi) { return {uniform(lo, hi), uniform(lo, hi)}; }

    Mat2 mat2(double lo, double hi) {
        return {uniform(lo, hi), uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)};
    }

    /// Uniform angle in [-pi, pi).
    double angle() { return uniform(-3.14159265358979323846, 3.14159265358979323846); }

    Vec2 unit_vec2() {
        const double a = angle();
        return {std::cos(a), std::sin(a)};
    }
};

}  // namespace twowell
