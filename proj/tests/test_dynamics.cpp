#include <doctest.h>

#include "nonholo/dynamics.hpp"

#include "helpers.hpp"

using namespace nonholo;
using nonholo::testing::chaplygin_state;
using nonholo::testing::default_chaplygin;

namespace {

double max_drift(const std::vector<double>& series) {
    double m = 0.0;
    for (double v : series) m = std::max(m, std::abs(v - series.front()));
    return m;
}

std::vector<Monitor> chaplygin_monitors(const MechanicalSystem& sys) {
    std::vector<Monitor> mons;
    mons.push_back({"H", [&sys](const PhaseState& s) { return hamiltonian(sys, s); }});
    mons.push_back({"p_Z1", [&sys](const PhaseState& s) {
                        return momentum_value(sys, chaplygin_z1(), s);
                    }});
    return mons;
}

} // namespace

TEST_CASE("vector field equals the bracket applied to dH") {
    const MechanicalSystem sys = build_chaplygin(default_chaplygin());
    Rng rng(51);
    for (int i = 0; i < 50; ++i) {
        const PhaseState s = chaplygin_state(rng);
        const Vec direct = nh_vector_field(sys, s);
        const Vec via_bracket = hamiltonian_vf(pi_nh(sys, s), hamiltonian_gradient(sys, s));
        CHECK((direct - via_bracket).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("equilibrium states stay put") {
    const MechanicalSystem sys = build_chaplygin(default_chaplygin());
    PhaseState s;
    s.q = Vec(5);
    s.q << 0.2, 1.3, 0.5, 0.0, 0.0;
    s.pi = Vec::Zero(3);
    CHECK(nh_vector_field(sys, s).cwiseAbs().maxCoeff() < 1e-13);

    IntegratorConfig cfg;
    cfg.t_end = 1.0;
    cfg.step = 1e-2;
    const Trajectory traj = integrate(sys, s, cfg);
    CHECK((unpack_state(traj.states.back()) - unpack_state(s)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("energy and gauge momentum are conserved along the flow") {
    const MechanicalSystem sys = build_chaplygin(default_chaplygin());
    PhaseState s0;
    s0.q = Vec(5);
    s0.q << 0.4, 1.1, 0.7, 0.0, 0.0;
    s0.pi = Vec(3);
    s0.pi << 0.6, 0.3, -0.4;

    IntegratorConfig cfg;
    cfg.step = 1e-3;
    cfg.t_end = 10.0;
    cfg.sample_stride = 10;
    const Trajectory traj = integrate(sys, s0, cfg, chaplygin_monitors(sys));
    const double h0 = std::abs(traj.monitors.at("H").front());
    CHECK(max_drift(traj.monitors.at("H")) / h0 < 1e-9);
    CHECK(max_drift(traj.monitors.at("p_Z1")) < 1e-9);
}

TEST_CASE("halving the step cuts the energy drift by about sixteen") {
    const MechanicalSystem sys = build_chaplygin(default_chaplygin());
    PhaseState s0;
    s0.q = Vec(5);
    s0.q << 0.0, 1.0, 0.0, 0.0, 0.0;
    s0.pi = Vec(3);
    s0.pi << 0.8, 0.9, -0.5;

    IntegratorConfig cfg;
    cfg.t_end = 5.0;
    cfg.sample_stride = 50;
    cfg.step = 4e-3;
    const Trajectory coarse = integrate(sys, s0, cfg, chaplygin_monitors(sys));
    cfg.step = 2e-3;
    const Trajectory fine = integrate(sys, s0, cfg, chaplygin_monitors(sys));
    const double ratio =
        max_drift(coarse.monitors.at("H")) / max_drift(fine.monitors.at("H"));
    CHECK(ratio > 8.0);
    CHECK(ratio < 32.0);
}

TEST_CASE("adaptive integration lands on the fixed-step answer") {
    const MechanicalSystem sys = build_chaplygin(default_chaplygin());
    PhaseState s0;
    s0.q = Vec(5);
    s0.q << 0.4, 1.1, 0.7, 0.0, 0.0;
    s0.pi = Vec(3);
    s0.pi << 0.6, 0.3, -0.4;

    IntegratorConfig fixed;
    fixed.step = 2e-4;
    fixed.t_end = 3.0;
    const Trajectory a = integrate(sys, s0, fixed);

    IntegratorConfig adaptive;
    adaptive.method = IntegratorMethod::Rkf45Adaptive;
    adaptive.step = 1e-2;
    adaptive.rtol = 1e-10;
    adaptive.atol = 1e-12;
    adaptive.t_end = 3.0;
    const Trajectory b = integrate(sys, s0, adaptive);
    CHECK((unpack_state(a.states.back()) - unpack_state(b.states.back())).cwiseAbs().maxCoeff() <
          1e-6);
}

TEST_CASE("trajectories abort cleanly at the chart boundary") {
    const MechanicalSystem sys = build_chaplygin(default_chaplygin());
    PhaseState s0;
    s0.q = Vec(5);
    s0.q << 0.0, 0.05, 0.0, 0.0, 0.0;
    s0.pi = Vec(3);
    s0.pi << 0.0, -1.0, 0.0; // heading for theta = 0

    IntegratorConfig cfg;
    cfg.step = 1e-3;
    cfg.t_end = 5.0;
    cfg.sample_stride = 1;
    try {
        integrate(sys, s0, cfg);
        FAIL("expected ChartExit");
    } catch (const ChartExit& e) {
        REQUIRE(!e.partial.states.empty());
        const PhaseState& last = e.partial.states.back();
        CHECK(sys.domain.ok(last.q));
        CHECK(last.q[1] < 0.06); // it was moving toward the pole
    }
}

TEST_CASE("invalid integrator settings are rejected") {
    const MechanicalSystem sys = build_chaplygin(default_chaplygin());
    PhaseState s0;
    s0.q = Vec(5);
    s0.q << 0.2, 1.3, 0.5, 0.0, 0.0;
    s0.pi = Vec::Zero(3);
    IntegratorConfig bad;
    bad.step = -1.0;
    CHECK_THROWS_AS(integrate(sys, s0, bad), ConfigError);
    bad.step = 1e-3;
    bad.method = IntegratorMethod::Rkf45Adaptive;
    bad.rtol = 0.5; // outside (0, 1e-2]
    CHECK_THROWS_AS(integrate(sys, s0, bad), ConfigError);
}

TEST_CASE("adaptive step underflow raises") {
    // discontinuous right-hand side: the error estimate never settles
    auto rhs = [](const Vec& x) {
        Vec v(1);
        v[0] = (std::sin(1e6 * x[0]) > 0.0) ? 1e8 : -1e8;
        return v;
    };
    IntegratorConfig cfg;
    cfg.method = IntegratorMethod::Rkf45Adaptive;
    cfg.step = 1e-3;
    cfg.rtol = 1e-10;
    cfg.atol = 1e-12;
    CHECK_THROWS_AS(integrate_flow(rhs, Vec::Zero(1), 1.0, cfg), StepUnderflow);
}

TEST_CASE("reduced image of a trajectory obeys the rigid-body equations") {
    const ChaplyginParams p = default_chaplygin();
    const MechanicalSystem sys = build_chaplygin(p);
    PhaseState s0;
    s0.q = Vec(5);
    s0.q << 0.4, 1.1, 0.7, 0.0, 0.0;
    s0.pi = Vec(3);
    s0.pi << 0.6, 0.3, -0.4;

    IntegratorConfig cfg;
    cfg.step = 1e-3;
    cfg.t_end = 0.5;
    cfg.sample_stride = 1;
    const Trajectory traj = integrate(sys, s0, cfg);

    for (size_t i = 50; i + 50 < traj.states.size(); i += 100) {
        const ReducedStateMG prev = reduce_to_mg(p, traj.states[i - 1]);
        const ReducedStateMG here = reduce_to_mg(p, traj.states[i]);
        const ReducedStateMG next = reduce_to_mg(p, traj.states[i + 1]);
        const double dt = traj.times[i + 1] - traj.times[i - 1];
        const Eigen::Matrix<double, 6, 1> field = chaplygin_reduced_field(p, here.M, here.gamma);
        Eigen::Matrix<double, 6, 1> slope;
        slope.head<3>() = (next.M - prev.M) / dt;
        slope.tail<3>() = (next.gamma - prev.gamma) / dt;
        CHECK((slope - field).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("the gauge flow commutes with the dynamics modulo the group") {
    // The composed flows agree in every direction annihilating the SE(2)
    // orbits: theta, psi, all momenta, and the reduced (M, gamma). Along the
    // orbit directions (x, y) they differ, because the gauge generator is a
    // configuration-dependent combination of symmetry generators.
    const ChaplyginParams p = default_chaplygin();
    const MechanicalSystem sys = build_chaplygin(p);
    const ThreeForm lam = lambda_from_generators(sys, 1);

    const auto nh_rhs = [&sys](const Vec& x) {
        return nh_vector_field(sys, pack_state(x, 5, 3));
    };
    const auto gauge_rhs = [&sys, &lam](const Vec& x) {
        const PhaseState s = pack_state(x, 5, 3);
        Vec df = Vec::Zero(8);
        df[5] = 1.0;
        return hamiltonian_vf(gauge_transform(sys, lam, s), df);
    };

    IntegratorConfig cfg;
    cfg.step = 1e-3;
    Rng rng(52);
    bool vertical_defect_seen = false;
    for (int i = 0; i < 3; ++i) {
        const Vec x0 = unpack_state(chaplygin_state(rng));
        const double t = rng.uniform(0.3, 1.0), s = rng.uniform(0.3, 1.0);
        const Vec a = integrate_flow(gauge_rhs, integrate_flow(nh_rhs, x0, t, cfg), s, cfg);
        const Vec b = integrate_flow(nh_rhs, integrate_flow(gauge_rhs, x0, s, cfg), t, cfg);
        // invariant part of the chart: theta, psi and the momenta
        CHECK(std::abs(a[1] - b[1]) < 1e-6);
        CHECK(std::abs(a[2] - b[2]) < 1e-6);
        CHECK((a.tail(3) - b.tail(3)).cwiseAbs().maxCoeff() < 1e-6);
        const ReducedStateMG ra = reduce_to_mg(p, pack_state(a, 5, 3));
        const ReducedStateMG rb = reduce_to_mg(p, pack_state(b, 5, 3));
        CHECK((ra.M - rb.M).cwiseAbs().maxCoeff() < 1e-6);
        CHECK((ra.gamma - rb.gamma).cwiseAbs().maxCoeff() < 1e-6);
        vertical_defect_seen =
            vertical_defect_seen || (a - b).cwiseAbs().maxCoeff() > 1e-3;
    }
    CHECK(vertical_defect_seen); // the obstruction genuinely lives in (x, y)
}
