#include <doctest.h>

#include "nonholo/dynamics.hpp"

#include "helpers.hpp"

using namespace nonholo;
using nonholo::testing::chaplygin_point;
using nonholo::testing::chaplygin_state;
using nonholo::testing::default_chaplygin;
using nonholo::testing::default_revolution_params;

namespace {

std::vector<Vec> sample_points(int count, int seed) {
    Rng rng(seed);
    std::vector<Vec> pts;
    for (int i = 0; i < count; ++i) pts.push_back(chaplygin_point(rng));
    return pts;
}

GaugeGenerator frame_field_generator(int idx, bool tangent) {
    GaugeGenerator z;
    z.tangent_to_orbit = tangent;
    z.name = "X" + std::to_string(idx + 1);
    z.coeffs_in_frame = [idx](const Vec&) {
        Vec v = Vec::Zero(3);
        v[idx] = 1.0;
        return v;
    };
    z.coeffs_jacobian = [](const Vec& q) { return Mat::Zero(3, q.size()); };
    return z;
}

} // namespace

TEST_CASE("momentum of a frame field is the corresponding coordinate") {
    const MechanicalSystem sys = build_chaplygin(default_chaplygin());
    Rng rng(21);
    for (int i = 0; i < 20; ++i) {
        const PhaseState s = chaplygin_state(rng);
        CHECK(momentum_value(sys, frame_field_generator(0, true), s) ==
              doctest::Approx(s.pi[0]).epsilon(1e-15));
    }
    PhaseState s;
    s.q = chaplygin_point(rng);
    s.pi = Vec::Zero(3);
    s.pi[0] = 2.0;
    CHECK(momentum_value(sys, chaplygin_z1(), s) == doctest::Approx(2.0));
}

TEST_CASE("Z1 is tangent to the SE(2) orbits") {
    const MechanicalSystem sys = build_chaplygin(default_chaplygin());
    Rng rng(22);
    for (int i = 0; i < 20; ++i) {
        const Vec q = chaplygin_point(rng);
        const Vec zq = generator_coords(sys, chaplygin_z1(), q);
        CHECK(orbit_tangency_residual(sys, zq, q) < 1e-9);
    }
}

TEST_CASE("skew test: chaplygin Z1 passes, C_123 = -C_132") {
    const MechanicalSystem sys = build_chaplygin(default_chaplygin());
    const SkewReport rep = skew_test(sys, chaplygin_z1(), sample_points(50, 23));
    CHECK(rep.pass);
    CHECK(rep.max_residual < 1e-9);
    Rng rng(24);
    const FrameData fd = frame_at(sys, chaplygin_point(rng));
    CHECK(fd.c_down(0, 1, 2) == doctest::Approx(-fd.c_down(0, 2, 1)).epsilon(1e-12));
}

TEST_CASE("skew test requires an orbit-tangent generator") {
    const MechanicalSystem sys = build_chaplygin(default_chaplygin());
    CHECK_THROWS_AS(skew_test(sys, frame_field_generator(1, false), sample_points(3, 25)),
                    NotOrbitTangent);
}

TEST_CASE("skew test: W1 alone fails on an ellipsoid, the ODE combination passes") {
    const RevolutionModel model =
        build_revolution(ShapeProfile::ellipsoid(1.0, 1.4), default_revolution_params());
    const std::vector<Vec> pts = sample_points(40, 26);

    // W1 = Y2 is the second frame field; it is orbit-tangent but not a gauge generator.
    const SkewReport w1 = skew_test(model.system, frame_field_generator(1, true), pts);
    CHECK_FALSE(w1.pass);
    CHECK(w1.max_residual > 1e-3);

    const SkewReport z1 = skew_test(model.system, revolution_z1(), pts);
    CHECK(z1.pass);
    CHECK(z1.max_residual < 1e-6);
}

TEST_CASE("drift of a conserved momentum vanishes") {
    const MechanicalSystem sys = build_chaplygin(default_chaplygin());
    Rng rng(27);
    for (int i = 0; i < 50; ++i)
        CHECK(std::abs(momentum_drift(sys, chaplygin_z1(), chaplygin_state(rng))) < 1e-9);
}

TEST_CASE("drift vanishes at zero momentum when the generator kills V") {
    ChaplyginParams p = default_chaplygin();
    p.V = [](double th, double) { return 0.5 * std::cos(th); };
    p.dV = [](double th, double) { return Eigen::Vector2d(-0.5 * std::sin(th), 0.0); };
    const MechanicalSystem sys = build_chaplygin(p);
    Rng rng(28);
    PhaseState s;
    s.q = chaplygin_point(rng);
    s.pi = Vec::Zero(3);
    CHECK(std::abs(momentum_drift(sys, chaplygin_z1(), s)) < 1e-12);
}

TEST_CASE("drift of a non-conserved momentum matches the FD slope along a trajectory") {
    const RevolutionModel model =
        build_revolution(ShapeProfile::ellipsoid(1.0, 1.4), default_revolution_params());
    const GaugeGenerator w1 = frame_field_generator(1, true);

    PhaseState s0;
    s0.q = Vec(5);
    s0.q << 0.4, 1.2, 0.8, 0.0, 0.0;
    s0.pi = Vec(3);
    s0.pi << 0.5, 0.3, -0.6;

    IntegratorConfig cfg;
    cfg.step = 1e-3;
    cfg.t_end = 0.2;
    cfg.sample_stride = 1;
    Monitor mon{"p_W1", [&](const PhaseState& s) { return momentum_value(model.system, w1, s); }};
    const Trajectory traj = integrate(model.system, s0, cfg, {mon});

    const auto& series = traj.monitors.at("p_W1");
    bool saw_nonzero = false;
    for (size_t i = 10; i + 10 < series.size(); i += 20) {
        const double slope = (series[i + 1] - series[i - 1]) / (traj.times[i + 1] - traj.times[i - 1]);
        const double drift = momentum_drift(model.system, w1, traj.states[i]);
        CHECK(std::abs(slope - drift) < 1e-6);
        saw_nonzero = saw_nonzero || std::abs(drift) > 1e-3;
    }
    CHECK(saw_nonzero);
}

TEST_CASE("skew criterion and drift criterion agree") {
    // Conserved generator: both pass; W1 on the ellipsoid: both fail somewhere.
    const RevolutionModel model =
        build_revolution(ShapeProfile::ellipsoid(1.0, 1.4), default_revolution_params());
    Rng rng(29);
    double max_drift_z1 = 0.0, max_drift_w1 = 0.0;
    for (int i = 0; i < 100; ++i) {
        const PhaseState s = chaplygin_state(rng);
        max_drift_z1 = std::max(max_drift_z1,
                                std::abs(momentum_drift(model.system, revolution_z1(), s)));
        max_drift_w1 = std::max(max_drift_w1,
                                std::abs(momentum_drift(model.system, frame_field_generator(1, true), s)));
    }
    CHECK(max_drift_z1 < 1e-7);
    CHECK(max_drift_w1 > 1e-3);
}

TEST_CASE("skew residual is subadditive under constant combinations") {
    const RevolutionModel model =
        build_revolution(ShapeProfile::ellipsoid(1.0, 1.4), default_revolution_params());
    const std::vector<Vec> pts = sample_points(20, 30);
    const double c1 = 0.7, c2 = -1.3;

    GaugeGenerator z1 = revolution_z1();
    GaugeGenerator w1 = frame_field_generator(1, true);
    GaugeGenerator combo;
    combo.tangent_to_orbit = true;
    combo.coeffs_in_frame = [&, c1, c2](const Vec& q) {
        return (c1 * z1.coeffs_in_frame(q) + c2 * w1.coeffs_in_frame(q)).eval();
    };
    combo.coeffs_jacobian = [](const Vec& q) { return Mat::Zero(3, q.size()); };

    const double r1 = skew_test(model.system, z1, pts).max_residual;
    const double r2 = skew_test(model.system, w1, pts).max_residual;
    const double rc = skew_test(model.system, combo, pts).max_residual;
    CHECK(rc <= std::abs(c1) * r1 + std::abs(c2) * r2 + 1e-9);
}
