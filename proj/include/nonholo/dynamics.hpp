#pragma once
#include <map>
#include <string>
#include <vector>

#include "nonholo/brackets.hpp"

namespace nonholo {

enum class IntegratorMethod { Rk4Fixed, Rkf45Adaptive };

struct IntegratorConfig {
    IntegratorMethod method = IntegratorMethod::Rk4Fixed;
    double step = 1e-3;   // rk4-fixed
    double rtol = 1e-8;   // rkf45
    double atol = 1e-10;  // rkf45
    double t_end = 10.0;
    int sample_stride = 10;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<PhaseState> states;
    std::map<std::string, std::vector<double>> monitors;
};

struct Monitor {
    std::string name;
    std::function<double(const PhaseState&)> fn;
};

/// Thrown when the flow reaches the chart boundary; carries the partial
/// trajectory ending at the last valid sample.
struct ChartExit : Error {
    ChartExit(std::string msg, Trajectory t) : Error(std::move(msg)), partial(std::move(t)) {}
    Trajectory partial;
};

struct StepUnderflow : Error {
    StepUnderflow(std::string msg, Trajectory t) : Error(std::move(msg)), partial(std::move(t)) {}
    Trajectory partial;
};

/// Right-hand side of the first-order system on D*:
/// qdot = rho dH/dpi, pidot = -rho^T dH/dq - C dH/dpi.
Vec nh_vector_field(const MechanicalSystem& sys, const PhaseState& state);

Trajectory integrate(const MechanicalSystem& sys, const PhaseState& state0,
                     const IntegratorConfig& cfg, const std::vector<Monitor>& monitors = {});

/// Integrate an arbitrary right-hand side on R^N with the same schemes
/// (used for flows of Hamiltonian vector fields and for the gauge ODE).
Vec integrate_flow(const std::function<Vec(const Vec&)>& rhs, Vec x0,
                   double t_end, const IntegratorConfig& cfg);

PhaseState pack_state(const Vec& x, int n, int r);
Vec unpack_state(const PhaseState& s);

} // namespace nonholo
