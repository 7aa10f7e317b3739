#pragma once
#include <cmath>

#include "nonholo/chaplygin.hpp"
#include "nonholo/revolution.hpp"
#include "nonholo/rng.hpp"

namespace nonholo::testing {

/// Flat R^2 with the euclidean metric and D = TQ (coordinate frame).
inline MechanicalSystem flat_plane() {
    MechanicalSystem sys;
    sys.n = 2;
    sys.r = 2;
    sys.name = "flat-plane";
    sys.coord_names = {"x", "y"};
    sys.metric.g = [](const Vec& q) { return Mat::Identity(q.size(), q.size()); };
    sys.metric.dg = [](const Vec& q, int) { return Mat::Zero(q.size(), q.size()); };
    for (int i = 0; i < 2; ++i) {
        VectorField f;
        f.coeffs = [i](const Vec& q) {
            Vec v = Vec::Zero(q.size());
            v[i] = 1.0;
            return v;
        };
        f.jacobian = [](const Vec& q) { return Mat::Zero(q.size(), q.size()); };
        sys.frame.push_back(f);
    }
    return sys;
}

inline ChaplyginParams default_chaplygin() {
    ChaplyginParams p;
    p.I1 = 2.0;
    p.I3 = 1.0;
    p.m = 1.0;
    p.R = 1.0;
    return p;
}

inline Vec chaplygin_point(Rng& rng) {
    Vec q(5);
    q[0] = rng.uniform(0.0, 2.0 * M_PI);
    q[1] = rng.uniform(0.3, M_PI - 0.3);
    q[2] = rng.uniform(0.0, 2.0 * M_PI);
    q[3] = rng.uniform(-1.0, 1.0);
    q[4] = rng.uniform(-1.0, 1.0);
    return q;
}

inline PhaseState chaplygin_state(Rng& rng) {
    PhaseState s;
    s.q = chaplygin_point(rng);
    s.pi = rng.uniform_vec(3, -1.0, 1.0);
    return s;
}

inline RevolutionParams default_revolution_params() {
    RevolutionParams p;
    p.I1 = 2.0;
    p.I3 = 1.0;
    p.m = 1.0;
    return p;
}

} // namespace nonholo::testing
