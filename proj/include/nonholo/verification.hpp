#pragma once
#include <cstdint>

#include "nonholo/brackets.hpp"
#include "nonholo/rng.hpp"

#include <nlohmann/json_fwd.hpp>

namespace nonholo {

/// Machine-readable outcome of one theorem-level check.
struct CheckReport {
    std::string check;
    std::string system;
    int n_samples = 0;
    std::uint64_t seed = 0;
    double max_residual = 0.0;
    double threshold = 0.0;
    bool pass = false;
    bool expected_fail = false;

    /// A report is in order when it passes, or fails where failure is the
    /// documented outcome (negative controls, rank-4 brackets).
    bool ok() const { return expected_fail ? !pass : pass; }
    nlohmann::json to_json() const;
};

using StateSampler = std::function<PhaseState(Rng&)>;

/// Random states on the Euler-angle charts used by the bundled systems.
StateSampler default_state_sampler(const MechanicalSystem& sys);

/// The contraction block B_{alpha beta} = B^gamma_{alpha beta} pi_gamma.
Mat contraction_block(const MechanicalSystem& sys, const ThreeForm& lam, const PhaseState& state);

/// Gauge momenta are Casimir-ready: X_{pi_b} under the transformed bracket has
/// zero momentum components and base components equal to the generator column.
CheckReport verify_theorem_main(const MechanicalSystem& sys, const ThreeForm& lam,
                                const StateSampler& sampler, int n_samples, std::uint64_t seed,
                                double threshold = 1e-7);

/// The transformed and untransformed brackets generate the same dynamics.
CheckReport verify_dynamics_equivalence(const MechanicalSystem& sys, const ThreeForm& lam,
                                        const StateSampler& sampler, int n_samples,
                                        std::uint64_t seed, double threshold = 1e-12);

/// Id + Pi# o Xi^flat is unit block-triangular: determinant one, and the
/// definition-path bivector matches the direct block formula.
CheckReport verify_invertibility(const MechanicalSystem& sys, const ThreeForm& lam,
                                 const StateSampler& sampler, int n_samples, std::uint64_t seed,
                                 double threshold = 1e-10);

/// FD Jacobiator of random coordinate-function triples under a closed-form
/// bracket matrix.
CheckReport verify_rank2_jacobi(const std::string& system_name,
                                const std::function<Mat(const Vec&)>& bracket,
                                const std::vector<ScalarField>& coords,
                                const std::function<Vec(Rng&)>& point_sampler, int n_triples,
                                std::uint64_t seed, double threshold = 1e-7,
                                bool expected_fail = false);

/// Coordinate functions on (M1,M2,M3,gamma1,gamma2,gamma3) with gradients.
std::vector<ScalarField> mg_coordinate_fields();

/// The S^1-invariant polynomials sigma_1..sigma_5 as functions of (M, gamma).
std::vector<ScalarField> sigma_invariant_fields();

/// Random (M, gamma) with |gamma| = 1, |gamma_3| <= gamma3_max, |M_i| <= 1.
std::function<Vec(Rng&)> mg_sampler(double gamma3_max = 0.93);

} // namespace nonholo
