#pragma once
#include <vector>

#include "nonholo/geometry.hpp"

namespace nonholo {

struct PhaseState {
    Vec q;
    Vec pi;
};

/// Result of the skew-symmetry criterion C_{Z alpha beta} = -C_{Z beta alpha}.
struct SkewReport {
    double max_residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    int worst_alpha = -1;
    int worst_beta = -1;
};

/// p_Z = Z^alpha(q) pi_alpha.
double momentum_value(const MechanicalSystem& sys, const GaugeGenerator& z,
                      const PhaseState& state);

/// Tests <[Z,X_a],X_b> + <[Z,X_b],X_a> = 0 over the samples. The tolerance is
/// scaled by the largest Gram entry at each sample.
SkewReport skew_test(const MechanicalSystem& sys, const GaugeGenerator& z,
                     const std::vector<Vec>& samples, double tol = 1e-8);

/// Instantaneous drift d/dt p_Z along the nonholonomic flow,
/// 1/2 (L_Z G)(u,u) - Z[V] with u the reconstructed velocity.
double momentum_drift(const MechanicalSystem& sys, const GaugeGenerator& z,
                      const PhaseState& state);

} // namespace nonholo
