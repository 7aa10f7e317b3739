#pragma once
#include <Eigen/Dense>

#include "nonholo/brackets.hpp"

namespace nonholo {

/// Inhomogeneous sphere with two equal moments of inertia rolling without
/// slipping on the plane. Chart (phi, theta, psi, x, y), Euler x-convention,
/// frame ordered (Z1, Y2, Y3) with Z1 = d/dphi the gauge generator.
struct ChaplyginParams {
    double I1 = 2.0;
    double I3 = 1.0;
    double m = 1.0;
    double R = 1.0;
    // Potential as a function of (theta, psi); SE(2)-invariant by construction.
    std::function<double(double, double)> V;
    std::function<Eigen::Vector2d(double, double)> dV; // (dV/dtheta, dV/dpsi)
};

struct ReducedStateMG {
    Eigen::Vector3d M;
    Eigen::Vector3d gamma;
};

MechanicalSystem build_chaplygin(const ChaplyginParams& p, double theta_min = 1e-3);

/// The gauge generator Z1 = d/dphi, first frame field.
GaugeGenerator chaplygin_z1();

ReducedStateMG reduce_to_mg(const ChaplyginParams& p, const PhaseState& state);

/// Body angular velocity from (M, gamma).
Eigen::Vector3d chaplygin_omega(const ChaplyginParams& p, const Eigen::Vector3d& M,
                                const Eigen::Vector3d& gamma);

/// Closed-form reduced bracket on (M1,M2,M3,gamma1,gamma2,gamma3).
Eigen::Matrix<double, 6, 6> reduced_bracket_mg(const ChaplyginParams& p,
                                               const Eigen::Vector3d& M,
                                               const Eigen::Vector3d& gamma);

/// Reduced Hamiltonian 1/2 (M, Omega) + V.
double chaplygin_h_mg(const ChaplyginParams& p, const Eigen::Vector3d& M,
                      const Eigen::Vector3d& gamma);

/// Reduced equations Mdot = M x Omega, gammadot = gamma x Omega (V = 0).
Eigen::Matrix<double, 6, 1> chaplygin_reduced_field(const ChaplyginParams& p,
                                                    const Eigen::Vector3d& M,
                                                    const Eigen::Vector3d& gamma);

} // namespace nonholo
