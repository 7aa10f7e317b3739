#include <doctest.h>

#include "nonholo/dynamics.hpp"

#include "helpers.hpp"

using namespace nonholo;
using nonholo::testing::chaplygin_point;
using nonholo::testing::chaplygin_state;
using nonholo::testing::default_chaplygin;

namespace {

// FD pushforward of a bivector through a reduction map: J = DPhi P DPhi^T.
Mat pushforward_bracket(const MechanicalSystem& sys, const ThreeForm& lam,
                        const std::function<Vec(const PhaseState&)>& map, const PhaseState& s) {
    const Vec x0 = unpack_state(s);
    const int n_out = static_cast<int>(map(s).size());
    Mat dphi(n_out, x0.size());
    for (int j = 0; j < x0.size(); ++j) {
        const double h = 1e-6 * std::max(1.0, std::abs(x0[j]));
        Vec xp = x0, xm = x0;
        xp[j] += h;
        xm[j] -= h;
        dphi.col(j) = (map(pack_state(xp, sys.n, sys.r)) - map(pack_state(xm, sys.n, sys.r))) /
                      (2.0 * h);
    }
    const Mat full = gauge_transform(sys, lam, s).full();
    return dphi * full * dphi.transpose();
}

Vec mg_vector(const ReducedStateMG& red) {
    Vec v(6);
    v << red.M[0], red.M[1], red.M[2], red.gamma[0], red.gamma[1], red.gamma[2];
    return v;
}

} // namespace

TEST_CASE("quasi-velocities are the Euler-angle rates") {
    const MechanicalSystem sys = build_chaplygin(default_chaplygin());
    Rng rng(61);
    const FrameData fd = frame_at(sys, chaplygin_point(rng));
    CHECK((fd.rho.topRows(3) - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("reduction at theta = pi/2, psi = 0") {
    const ChaplyginParams p = default_chaplygin();
    PhaseState s;
    s.q = Vec(5);
    s.q << 1.7, M_PI / 2.0, 0.0, 0.4, -0.1;
    s.pi = Vec(3);
    s.pi << 0.3, -0.8, 0.5;
    const ReducedStateMG red = reduce_to_mg(p, s);
    CHECK((red.gamma - Eigen::Vector3d(0, 1, 0)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(red.M[0] == doctest::Approx(s.pi[1]).epsilon(1e-14)); // pi_2
    CHECK(red.M[1] == doctest::Approx(s.pi[0]).epsilon(1e-14)); // pi_1
    CHECK(red.M[2] == doctest::Approx(s.pi[2]).epsilon(1e-14)); // pi_3
}

TEST_CASE("reduction is invariant under the group shifts") {
    const ChaplyginParams p = default_chaplygin();
    Rng rng(62);
    for (int i = 0; i < 20; ++i) {
        PhaseState s = chaplygin_state(rng);
        const ReducedStateMG a = reduce_to_mg(p, s);
        s.q[0] += rng.uniform(-2.0, 2.0); // phi
        s.q[3] += rng.uniform(-2.0, 2.0); // x
        s.q[4] += rng.uniform(-2.0, 2.0); // y
        const ReducedStateMG b = reduce_to_mg(p, s);
        CHECK((mg_vector(a) - mg_vector(b)).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("pi_1 equals the vertical angular momentum (M, gamma)") {
    const ChaplyginParams p = default_chaplygin();
    Rng rng(63);
    for (int i = 0; i < 100; ++i) {
        const PhaseState s = chaplygin_state(rng);
        const ReducedStateMG red = reduce_to_mg(p, s);
        CHECK(red.M.dot(red.gamma) == doctest::Approx(s.pi[0]).epsilon(1e-11));
    }
}

TEST_CASE("closed-form reduced bracket basics") {
    const ChaplyginParams p = default_chaplygin();
    const Eigen::Vector3d gamma(0, 0, 1);
    const Eigen::Vector3d M(0.3, -0.2, 0.7);
    const auto J = reduced_bracket_mg(p, M, gamma);
    // {gamma_i, gamma_j} = 0
    CHECK(J.bottomRightCorner(3, 3).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    // {M_1, gamma_2} = -gamma_3 = -1
    CHECK(J(0, 4) == doctest::Approx(-1.0));
    CHECK((J + J.transpose()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("K(theta) factorization used in the paper's bracket computation") {
    const ChaplyginParams p = default_chaplygin();
    Rng rng(64);
    for (int i = 0; i < 20; ++i) {
        const double th = rng.uniform(0.1, M_PI - 0.1);
        const double s = std::sin(th), c = std::cos(th);
        const double mR2 = p.m * p.R * p.R;
        const Eigen::Vector3d gamma(s * std::sin(0.3), s * std::cos(0.3), c);
        const Eigen::Vector3d A(1.0 / (p.I1 + mR2), 1.0 / (p.I1 + mR2), 1.0 / (p.I3 + mR2));
        const double K = p.I1 * mR2 * s * s + p.I3 * mR2 * c * c + p.I1 * p.I3;
        const double factored = (p.I1 + mR2) * (p.I3 + mR2) *
                                (1.0 - mR2 * A.cwiseProduct(gamma).dot(gamma));
        CHECK(K == doctest::Approx(factored).epsilon(1e-12));
    }
}

TEST_CASE("(M, gamma) is a Casimir pair: J annihilates d(M.gamma)") {
    const ChaplyginParams p = default_chaplygin();
    Rng rng(65);
    for (int i = 0; i < 100; ++i) {
        const PhaseState s = chaplygin_state(rng);
        const ReducedStateMG red = reduce_to_mg(p, s);
        Vec dc(6);
        dc << red.gamma[0], red.gamma[1], red.gamma[2], red.M[0], red.M[1], red.M[2];
        const auto J = reduced_bracket_mg(p, red.M, red.gamma);
        CHECK((J * dc).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("reduced bracket has rank 4 at generic states") {
    const ChaplyginParams p = default_chaplygin();
    Rng rng(66);
    for (int i = 0; i < 20; ++i) {
        const PhaseState s = chaplygin_state(rng);
        const ReducedStateMG red = reduce_to_mg(p, s);
        const auto J = reduced_bracket_mg(p, red.M, red.gamma);
        Eigen::JacobiSVD<Mat> svd(J);
        int rank = 0;
        for (int k = 0; k < 6; ++k)
            if (svd.singularValues()[k] > 1e-10 * svd.singularValues()[0]) ++rank;
        CHECK(rank == 4);
    }
}

TEST_CASE("pushforward of the transformed bracket reproduces the closed form") {
    const ChaplyginParams p = default_chaplygin();
    const MechanicalSystem sys = build_chaplygin(p);
    const ThreeForm lam = lambda_from_generators(sys, 1);
    const auto map = [&p](const PhaseState& s) { return mg_vector(reduce_to_mg(p, s)); };
    Rng rng(67);
    for (int i = 0; i < 100; ++i) {
        const PhaseState s = chaplygin_state(rng);
        const ReducedStateMG red = reduce_to_mg(p, s);
        const Mat pushed = pushforward_bracket(sys, lam, map, s);
        const Mat closed = reduced_bracket_mg(p, red.M, red.gamma);
        CHECK((pushed - closed).cwiseAbs().maxCoeff() < 1e-7);
    }
}

TEST_CASE("reduced dynamics is Hamiltonian for the closed-form bracket") {
    const ChaplyginParams p = default_chaplygin(); // V = 0
    Rng rng(68);
    for (int i = 0; i < 20; ++i) {
        const PhaseState s = chaplygin_state(rng);
        const ReducedStateMG red = reduce_to_mg(p, s);
        const auto J = reduced_bracket_mg(p, red.M, red.gamma);
        Vec dh(6);
        const double h = 1e-6;
        for (int k = 0; k < 6; ++k) {
            Vec xp = mg_vector(red), xm = mg_vector(red);
            xp[k] += h;
            xm[k] -= h;
            dh[k] = (chaplygin_h_mg(p, xp.head<3>(), xp.tail<3>()) -
                     chaplygin_h_mg(p, xm.head<3>(), xm.tail<3>())) /
                    (2.0 * h);
        }
        const Vec field = J * dh;
        const auto direct = chaplygin_reduced_field(p, red.M, red.gamma);
        CHECK((field - direct).cwiseAbs().maxCoeff() < 1e-7);
    }
}

TEST_CASE("degenerate denominator guard") {
    const ChaplyginParams p = default_chaplygin();
    // unphysical gamma far outside the sphere defeats the positivity bound
    const Eigen::Vector3d gamma(0.0, 0.0, 2.0);
    const Eigen::Vector3d M(0.1, 0.2, 0.3);
    CHECK_THROWS_AS(chaplygin_omega(p, M, gamma), DegenerateDenominator);
}
