#pragma once
#include <functional>

#include "nonholo/gauge.hpp"

namespace nonholo {

/// A section of Lambda^3(D*): alternating coefficients B_{alpha beta gamma}(q).
struct ThreeForm {
    std::function<Tensor3(const Vec&)> b_down; // empty means Lambda = 0
    bool zero() const { return !b_down; }
};

/// The two nontrivial blocks of an almost-Poisson bivector on D*:
/// the full matrix is (0, rho; -rho^T, lower_right).
struct BivectorBlocks {
    Mat rho;         // n x r
    Mat lower_right; // r x r, skew

    Mat full() const {
        const int n = static_cast<int>(rho.rows());
        const int r = static_cast<int>(rho.cols());
        Mat m = Mat::Zero(n + r, n + r);
        m.topRightCorner(n, r) = rho;
        m.bottomLeftCorner(r, n) = -rho.transpose();
        m.bottomRightCorner(r, r) = lower_right;
        return m;
    }
};

/// A scalar function on phase space (or any R^N); the gradient is optional
/// and computed by central differences when absent.
struct ScalarField {
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> gradient;
};

/// The nonholonomic bivector: lower_right = -C^gamma_{alpha beta} pi_gamma.
BivectorBlocks pi_nh(const MechanicalSystem& sys, const PhaseState& state);

/// The 3-form built from the leading n_generators frame fields:
/// B_{b beta gamma} = <[Z_b, X_beta], X_gamma>, remaining independent
/// components zero, extended by alternation. Throws InconsistentGenerators
/// when the required antisymmetry fails beyond tol.
ThreeForm lambda_from_generators(const MechanicalSystem& sys, int n_generators,
                                 double tol = 1e-6);

/// Evaluate the alternating coefficient tensor of a ThreeForm at q.
Tensor3 three_form_at(const MechanicalSystem& sys, const ThreeForm& lam, const Vec& q);

/// Gauge-transformed bivector: lower_right = B - C with
/// B_{alpha beta} = B^gamma_{alpha beta} pi_gamma.
BivectorBlocks gauge_transform(const MechanicalSystem& sys, const ThreeForm& lam,
                               const PhaseState& state);

/// X_f = full(blocks) * df.
Vec hamiltonian_vf(const BivectorBlocks& blocks, const Vec& df);

/// Constrained Hamiltonian H_c = 1/2 G^{ab} pi_a pi_b + V and its gradient in
/// (q, pi). The q-part uses analytic metric/frame derivatives when the system
/// provides them and falls back to central differences of H_c otherwise.
double hamiltonian(const MechanicalSystem& sys, const PhaseState& state);
Vec hamiltonian_gradient(const MechanicalSystem& sys, const PhaseState& state);

/// Cyclic sum {f,{g,h}} + {g,{h,f}} + {h,{f,g}} for the bracket given by the
/// antisymmetric coefficient matrix P(x); the inner brackets are
/// differentiated by central differences with the given step scale.
double jacobiator(const std::function<Mat(const Vec&)>& bracket_matrix,
                  const ScalarField& f, const ScalarField& g, const ScalarField& h,
                  const Vec& x, double fd_step = 1e-5);

/// Gradient of a ScalarField (analytic if present).
Vec scalar_gradient(const ScalarField& f, const Vec& x, double fd_step = 1e-6);

/// A smooth alternating 3-form with coefficients drawn deterministically from
/// the seed; used to exercise claims that hold for arbitrary 3-forms.
ThreeForm random_three_form(const MechanicalSystem& sys, std::uint64_t seed);

/// Poisson bracket of two scalar fields under the coefficient matrix P(x).
double bracket_of(const std::function<Mat(const Vec&)>& bracket_matrix,
                  const ScalarField& f, const ScalarField& g, const Vec& x);

} // namespace nonholo
