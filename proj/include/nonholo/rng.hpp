#pragma once
#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace nonholo {

/// Deterministic random source. Doubles are derived from the raw mt19937_64
/// stream directly so sequences are reproducible across platforms (the
/// std::uniform_real_distribution output is implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform01() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    int uniform_int(int lo, int hi) { // inclusive bounds
        return lo + static_cast<int>(eng_() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    Eigen::VectorXd uniform_vec(int n, double lo, double hi) {
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v[i] = uniform(lo, hi);
        return v;
    }

private:
    std::mt19937_64 eng_;
};

} // namespace nonholo
