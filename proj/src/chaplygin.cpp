#include "nonholo/chaplygin.hpp"

#include <cmath>

namespace nonholo {

namespace {

constexpr int kPhi = 0, kTheta = 1, kPsi = 2, kX = 3, kY = 4;

Mat zero_jacobian(const Vec& q) {
    return Mat::Zero(q.size(), q.size());
}

} // namespace

MechanicalSystem build_chaplygin(const ChaplyginParams& p, double theta_min) {
    MechanicalSystem sys;
    sys.n = 5;
    sys.r = 3;
    sys.n_gauge = 1;
    sys.name = "chaplygin";
    sys.coord_names = {"phi", "theta", "psi", "x", "y"};

    sys.domain.contains = [theta_min](const Vec& q) {
        return q[kTheta] > theta_min && q[kTheta] < M_PI - theta_min;
    };

    const double I1 = p.I1, I3 = p.I3, m = p.m, R = p.R;

    sys.metric.g = [I1, I3, m](const Vec& q) {
        const double th = q[kTheta];
        const double s = std::sin(th), c = std::cos(th);
        Mat g = Mat::Zero(5, 5);
        g(kPhi, kPhi) = I1 * s * s + I3 * c * c;
        g(kTheta, kTheta) = I1;
        g(kPsi, kPsi) = I3;
        g(kPhi, kPsi) = g(kPsi, kPhi) = I3 * c;
        g(kX, kX) = g(kY, kY) = m;
        return g;
    };
    sys.metric.dg = [I1, I3](const Vec& q, int i) {
        Mat d = Mat::Zero(5, 5);
        if (i == kTheta) {
            const double th = q[kTheta];
            const double s = std::sin(th), c = std::cos(th);
            d(kPhi, kPhi) = 2.0 * (I1 - I3) * s * c;
            d(kPhi, kPsi) = d(kPsi, kPhi) = -I3 * s;
        }
        return d;
    };

    if (p.V) {
        auto V = p.V;
        sys.potential = [V](const Vec& q) { return V(q[kTheta], q[kPsi]); };
        if (p.dV) {
            auto dV = p.dV;
            sys.potential_grad = [dV](const Vec& q) {
                Vec g = Vec::Zero(5);
                const Eigen::Vector2d d = dV(q[kTheta], q[kPsi]);
                g[kTheta] = d[0];
                g[kPsi] = d[1];
                return g;
            };
        }
    }

    VectorField z1;
    z1.coeffs = [](const Vec&) {
        Vec v = Vec::Zero(5);
        v[kPhi] = 1.0;
        return v;
    };
    z1.jacobian = zero_jacobian;

    VectorField y2;
    y2.coeffs = [R](const Vec& q) {
        Vec v = Vec::Zero(5);
        v[kTheta] = 1.0;
        v[kX] = R * std::sin(q[kPhi]);
        v[kY] = -R * std::cos(q[kPhi]);
        return v;
    };
    y2.jacobian = [R](const Vec& q) {
        Mat J = Mat::Zero(5, 5);
        J(kX, kPhi) = R * std::cos(q[kPhi]);
        J(kY, kPhi) = R * std::sin(q[kPhi]);
        return J;
    };

    VectorField y3;
    y3.coeffs = [R](const Vec& q) {
        Vec v = Vec::Zero(5);
        v[kPsi] = 1.0;
        v[kX] = -R * std::cos(q[kPhi]) * std::sin(q[kTheta]);
        v[kY] = -R * std::sin(q[kPhi]) * std::sin(q[kTheta]);
        return v;
    };
    y3.jacobian = [R](const Vec& q) {
        const double sp = std::sin(q[kPhi]), cp = std::cos(q[kPhi]);
        const double st = std::sin(q[kTheta]), ct = std::cos(q[kTheta]);
        Mat J = Mat::Zero(5, 5);
        J(kX, kPhi) = R * sp * st;
        J(kX, kTheta) = -R * cp * ct;
        J(kY, kPhi) = -R * cp * st;
        J(kY, kTheta) = -R * sp * ct;
        return J;
    };
    sys.frame = {z1, y2, y3};

    VectorField dx, dy;
    dx.coeffs = [](const Vec&) { Vec v = Vec::Zero(5); v[kX] = 1.0; return v; };
    dx.jacobian = zero_jacobian;
    dy.coeffs = [](const Vec&) { Vec v = Vec::Zero(5); v[kY] = 1.0; return v; };
    dy.jacobian = zero_jacobian;
    sys.complement = {dx, dy};

    VectorField rot;
    rot.coeffs = [](const Vec& q) {
        Vec v = Vec::Zero(5);
        v[kPhi] = 1.0;
        v[kX] = -q[kY];
        v[kY] = q[kX];
        return v;
    };
    rot.jacobian = [](const Vec& q) {
        Mat J = Mat::Zero(5, 5);
        (void)q;
        J(kX, kY) = -1.0;
        J(kY, kX) = 1.0;
        return J;
    };
    sys.orbit_generators = {rot, dx, dy};
    return sys;
}

GaugeGenerator chaplygin_z1() {
    GaugeGenerator z;
    z.name = "Z1";
    z.tangent_to_orbit = true;
    z.coeffs_in_frame = [](const Vec&) {
        Vec v = Vec::Zero(3);
        v[0] = 1.0;
        return v;
    };
    z.coeffs_jacobian = [](const Vec& q) { return Mat::Zero(3, q.size()); };
    return z;
}

ReducedStateMG reduce_to_mg(const ChaplyginParams& p, const PhaseState& state) {
    (void)p;
    const double th = state.q[kTheta], ps = state.q[kPsi];
    const double st = std::sin(th), ct = std::cos(th);
    const double sp = std::sin(ps), cp = std::cos(ps);
    const double p1 = state.pi[0], p2 = state.pi[1], p3 = state.pi[2];
    ReducedStateMG out;
    out.gamma = {st * sp, st * cp, ct};
    out.M[0] = (sp * p1 + cp * st * p2 - sp * ct * p3) / st;
    out.M[1] = (cp * p1 - sp * st * p2 - cp * ct * p3) / st;
    out.M[2] = p3;
    return out;
}

Eigen::Vector3d chaplygin_omega(const ChaplyginParams& p, const Eigen::Vector3d& M,
                                const Eigen::Vector3d& gamma) {
    const double mR2 = p.m * p.R * p.R;
    const Eigen::Vector3d A(1.0 / (p.I1 + mR2), 1.0 / (p.I1 + mR2), 1.0 / (p.I3 + mR2));
    const Eigen::Vector3d AM = A.cwiseProduct(M);
    const Eigen::Vector3d Ag = A.cwiseProduct(gamma);
    const double denom = 1.0 - mR2 * Ag.dot(gamma);
    if (denom < 1e-12)
        throw DegenerateDenominator("1 - mR^2 (A gamma, gamma) vanished");
    return AM + mR2 * AM.dot(gamma) / denom * Ag;
}

Eigen::Matrix<double, 6, 6> reduced_bracket_mg(const ChaplyginParams& p,
                                               const Eigen::Vector3d& M,
                                               const Eigen::Vector3d& gamma) {
    const double mR2 = p.m * p.R * p.R;
    const Eigen::Vector3d omega = chaplygin_omega(p, M, gamma);
    const double spin = omega.dot(gamma);

    Eigen::Matrix<double, 6, 6> J = Eigen::Matrix<double, 6, 6>::Zero();
    auto eps = [](int i, int j, int k) {
        return ((i + 1) % 3 == j && (j + 1) % 3 == k) ? 1.0
             : ((j + 1) % 3 == i && (i + 1) % 3 == k) ? -1.0 : 0.0;
    };
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            if (i != j) {
                double mm = 0.0, mg = 0.0;
                for (int k = 0; k < 3; ++k) {
                    const double e = eps(i, j, k);
                    if (e != 0.0) {
                        mm += -e * (M[k] - mR2 * spin * gamma[k]);
                        mg += -e * gamma[k];
                    }
                }
                J(i, j) = mm;          // {M_i, M_j}
                J(i, 3 + j) = mg;      // {M_i, gamma_j}
                J(3 + j, i) = -mg;
            }
        }
    return J;
}

double chaplygin_h_mg(const ChaplyginParams& p, const Eigen::Vector3d& M,
                      const Eigen::Vector3d& gamma) {
    double v = 0.0;
    if (p.V) v = p.V(std::acos(std::clamp(gamma[2], -1.0, 1.0)), std::atan2(gamma[0], gamma[1]));
    return 0.5 * M.dot(chaplygin_omega(p, M, gamma)) + v;
}

Eigen::Matrix<double, 6, 1> chaplygin_reduced_field(const ChaplyginParams& p,
                                                    const Eigen::Vector3d& M,
                                                    const Eigen::Vector3d& gamma) {
    const Eigen::Vector3d omega = chaplygin_omega(p, M, gamma);
    Eigen::Matrix<double, 6, 1> out;
    out.head<3>() = M.cross(omega);
    out.tail<3>() = gamma.cross(omega);
    return out;
}

} // namespace nonholo
