#pragma once
#include <array>
#include <memory>

#include <Eigen/Dense>

#include "nonholo/brackets.hpp"

namespace nonholo {

/// Convex solid of revolution described through the inverse Gauss map:
/// contact vector rho = (f1(g3) g1, f1(g3) g2, f2(g3)) with g = gamma the
/// body-frame vertical. All profile functions take gamma3 in [-1, 1].
struct ShapeProfile {
    std::string name;
    std::function<double(double)> f1, f2;   // values
    std::function<double(double)> df1, df2; // d/dgamma3
    // (Rp - Rm) / (1 - gamma3^2); supplied in closed form by the presets,
    // otherwise computed with a pole-safe fallback.
    std::function<double(double)> curvature_diff_ratio;

    static ShapeProfile sphere(double radius);
    static ShapeProfile offset_sphere(double radius, double offset);
    static ShapeProfile ellipsoid(double a, double c);

    double rp(double g3) const { return f1(g3); }
    double rm(double g3) const { return df2(g3); }
    double ratio(double g3) const; // pole-safe (Rp-Rm)/(1-g3^2)

    // theta-parametrized derived quantities (gamma3 = cos theta)
    double z_theta(double theta) const;  // height of the centre of mass
    double a1_theta(double theta) const; // distance of P from the symmetry axis
    double a2_theta(double theta) const; // dz/dtheta
    double b_theta(double theta) const;  // a2 / sin(theta) = cos f1 - f2
};

struct RevolutionParams {
    double I1 = 2.0;
    double I3 = 1.0;
    double m = 1.0;
    std::function<double(double)> V_theta;  // even in theta
    std::function<double(double)> dV_theta; // dV/dtheta
};

/// One fundamental solution of the gauge-momentum ODE on the theta grid.
struct GaugeSolution {
    std::vector<double> theta;          // uniform nodes on [0, 2 pi]
    std::vector<Eigen::Vector2d> x;     // (g, k) at nodes
    std::vector<Eigen::Vector2d> xdot;  // L(theta) x at nodes
    double evenness_residual = 0.0;
    double periodicity_residual = 0.0;

    Eigen::Vector2d eval(double th) const;      // cubic Hermite, periodic
    double g(double th) const { return eval(th)[0]; }
    double k(double th) const { return eval(th)[1]; }
};

/// K(theta) = I1 I3 + m I1 a1^2 + m I3 f2^2 (invariant-measure density).
double k_measure(const ShapeProfile& profile, const RevolutionParams& p, double theta);

/// Coefficient matrix of the gauge ODE d(g,k)/dtheta = L(theta)(g,k),
/// evaluated through the pole-regular factored forms (odd, vanishes at n pi).
Eigen::Matrix2d l_matrix(const ShapeProfile& profile, const RevolutionParams& p, double theta);

/// Integrates the gauge ODE from (1,0) and (0,1) at theta = 0 over one period
/// (plus a backward sweep for the evenness check). Throws FloquetViolation
/// when a solution fails to come back even and periodic.
std::array<GaugeSolution, 2> solve_gauge_ode(const ShapeProfile& profile,
                                             const RevolutionParams& p, int n_steps = 4000);

/// d(g,k)/dgamma3 for solution j, from the closed-form -L~/(K sin) factors.
Eigen::Vector2d gauge_solution_dgamma3(const ShapeProfile& profile, const RevolutionParams& p,
                                       const GaugeSolution& sol, double gamma3);

struct ReducedRevolution {
    Eigen::Vector3d M;
    Eigen::Vector3d gamma;
    Eigen::Matrix<double, 5, 1> sigma;
};

/// The full model: solved gauge ODE plus the mechanical system on the chart,
/// frame (Z1 = g W1 + k W2, Y2 = W1, Y3) built from gauge solution
/// `frame_solution` (default: the one with k(0) = 1).
struct RevolutionModel {
    ShapeProfile profile;
    RevolutionParams params;
    std::array<GaugeSolution, 2> gauge;
    int frame_solution = 1;
    MechanicalSystem system;
};

RevolutionModel build_revolution(const ShapeProfile& profile, const RevolutionParams& p,
                                 int n_steps = 4000, double theta_min = 1e-3,
                                 int frame_solution = 1);

/// The generator Z1 of the frame (coefficients (1,0,0)).
GaugeGenerator revolution_z1();

/// Gauge generator for fundamental solution j expressed in the model frame.
GaugeGenerator revolution_gauge_generator(const RevolutionModel& model, int j);

ReducedRevolution reduce_revolution(const RevolutionModel& model, const PhaseState& state);

Eigen::Vector3d revolution_omega(const RevolutionModel& model, const Eigen::Vector3d& M,
                                 const Eigen::Vector3d& gamma);

/// Closed-form intermediate bracket on (M1,M2,M3,gamma1,gamma2,gamma3);
/// pole-regular through the curvature-difference ratio.
Eigen::Matrix<double, 6, 6> reduced_bracket_revolution(const RevolutionModel& model,
                                                       const Eigen::Vector3d& M,
                                                       const Eigen::Vector3d& gamma);

double revolution_h_mg(const RevolutionModel& model, const Eigen::Vector3d& M,
                       const Eigen::Vector3d& gamma);

/// Hamiltonian in the S^1-invariant variables sigma.
double hamiltonian_sigma(const RevolutionModel& model, const Eigen::Matrix<double, 5, 1>& sigma);

/// Casimir C_j = g_j(s1) s3 + (g_j(s1) s1 + k_j(s1)) s4.
double casimir_sigma(const RevolutionModel& model, int j, const Eigen::Matrix<double, 5, 1>& sigma);

/// Casimir as a function of (M, gamma) and its gradient (M first).
double casimir_mg(const RevolutionModel& model, int j, const Eigen::Vector3d& M,
                  const Eigen::Vector3d& gamma);
Eigen::Matrix<double, 6, 1> casimir_mg_gradient(const RevolutionModel& model, int j,
                                                const Eigen::Vector3d& M,
                                                const Eigen::Vector3d& gamma);

} // namespace nonholo
