#include "nonholo/revolution.hpp"

#include <cmath>
#include <sstream>

namespace nonholo {

namespace {

constexpr int kPhi = 0, kTheta = 1, kPsi = 2, kX = 3, kY = 4;

Mat zero_jacobian(const Vec& q) { return Mat::Zero(q.size(), q.size()); }

} // namespace

ShapeProfile ShapeProfile::sphere(double radius) {
    ShapeProfile s;
    s.name = "sphere";
    s.f1 = [radius](double) { return radius; };
    s.f2 = [radius](double g3) { return radius * g3; };
    s.df1 = [](double) { return 0.0; };
    s.df2 = [radius](double) { return radius; };
    s.curvature_diff_ratio = [](double) { return 0.0; };
    return s;
}

ShapeProfile ShapeProfile::offset_sphere(double radius, double offset) {
    ShapeProfile s;
    s.name = "offset-sphere";
    s.f1 = [radius](double) { return radius; };
    s.f2 = [radius, offset](double g3) { return radius * g3 - offset; };
    s.df1 = [](double) { return 0.0; };
    s.df2 = [radius](double) { return radius; };
    s.curvature_diff_ratio = [](double) { return 0.0; };
    return s;
}

ShapeProfile ShapeProfile::ellipsoid(double a, double c) {
    ShapeProfile s;
    s.name = "ellipsoid";
    auto N = [a, c](double g3) { return std::sqrt(a * a + (c * c - a * a) * g3 * g3); };
    s.f1 = [a, N](double g3) { return a * a / N(g3); };
    s.f2 = [c, N](double g3) { return c * c * g3 / N(g3); };
    s.df1 = [a, c, N](double g3) {
        const double n = N(g3);
        return -a * a * (c * c - a * a) * g3 / (n * n * n);
    };
    s.df2 = [a, c, N](double g3) {
        const double n = N(g3);
        return a * a * c * c / (n * n * n);
    };
    s.curvature_diff_ratio = [a, c, N](double g3) {
        const double n = N(g3);
        return a * a * (a * a - c * c) / (n * n * n);
    };
    return s;
}

double ShapeProfile::ratio(double g3) const {
    if (curvature_diff_ratio) return curvature_diff_ratio(g3);
    const double s2 = 1.0 - g3 * g3;
    const double tau = 1e-4;
    if (s2 >= tau) return (rp(g3) - rm(g3)) / s2;
    // Pole-safe fallback: Rp - Rm vanishes to second order, so the ratio is a
    // smooth even function of s^2; extrapolate from two interior samples.
    const double sgn = (g3 >= 0.0) ? 1.0 : -1.0;
    const double c1 = sgn * std::sqrt(1.0 - tau);
    const double c2 = sgn * std::sqrt(1.0 - 4.0 * tau);
    const double r1 = (rp(c1) - rm(c1)) / tau;
    const double r2 = (rp(c2) - rm(c2)) / (4.0 * tau);
    if (std::abs(r1 - r2) > 0.1 * std::max(1.0, std::abs(r1)))
        throw ShapeSingularity("(Rp - Rm)/sin^2 has no finite limit at the pole");
    return (4.0 * r1 - r2) / 3.0;
}

double ShapeProfile::z_theta(double theta) const {
    const double s = std::sin(theta), c = std::cos(theta);
    return s * s * f1(c) + c * f2(c);
}

double ShapeProfile::a1_theta(double theta) const { return f1(std::cos(theta)) * std::sin(theta); }

double ShapeProfile::b_theta(double theta) const {
    const double c = std::cos(theta);
    return c * f1(c) - f2(c);
}

double ShapeProfile::a2_theta(double theta) const { return std::sin(theta) * b_theta(theta); }

double k_measure(const ShapeProfile& profile, const RevolutionParams& p, double theta) {
    const double a1 = profile.a1_theta(theta);
    const double f2v = profile.f2(std::cos(theta));
    return p.I1 * p.I3 + p.m * p.I1 * a1 * a1 + p.m * p.I3 * f2v * f2v;
}

namespace {

// L~ / sin(theta): smooth and even; L = sin * this / K.
Eigen::Matrix2d l_tilde_over_sin(const ShapeProfile& pr, const RevolutionParams& p,
                                 double theta) {
    const double s = std::sin(theta), c = std::cos(theta);
    const double f1 = pr.f1(c), f2 = pr.f2(c);
    const double z = pr.z_theta(theta), b = pr.b_theta(theta);
    const double rs = pr.ratio(c); // (Rp - Rm)/(1 - g3^2)
    const double m = p.m, I1 = p.I1, I3 = p.I3;

    Eigen::Matrix2d lt;
    lt(0, 0) = -m * I3 * f2 * rs - m * b * f1 * (I3 + m * z * f1);
    lt(0, 1) = -m * I3 * f2 * c * rs - m * f1 * f1 * (I3 + m * z * f1);
    lt(1, 0) = m * f1 * (I1 * s * s + I3 * c * c) * rs +
               m * b * (m * f1 * b * z - I3 * c * rs + (I3 - I1) * f1 * c);
    lt(1, 1) = m * c * rs * (I1 * f1 * s * s + I3 * f2 * c) +
               m * f1 * f1 * (m * z * b + (I3 - I1) * c);
    return lt;
}

} // namespace

Eigen::Matrix2d l_matrix(const ShapeProfile& profile, const RevolutionParams& p, double theta) {
    const Eigen::Matrix2d lt = l_tilde_over_sin(profile, p, theta);
    if (!lt.allFinite()) throw ShapeSingularity("L(theta) is not finite");
    return std::sin(theta) / k_measure(profile, p, theta) * lt;
}

Eigen::Vector2d GaugeSolution::eval(double th) const {
    const double period = 2.0 * M_PI;
    double t = std::fmod(th, period);
    if (t < 0.0) t += period;
    const size_t n = theta.size() - 1;
    const double h = period / static_cast<double>(n);
    size_t i = std::min(static_cast<size_t>(t / h), n - 1);
    const double u = (t - theta[i]) / h;
    const double u2 = u * u, u3 = u2 * u;
    const double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u;
    const double h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
    return h00 * x[i] + h * h10 * xdot[i] + h01 * x[i + 1] + h * h11 * xdot[i + 1];
}

std::array<GaugeSolution, 2> solve_gauge_ode(const ShapeProfile& profile,
                                             const RevolutionParams& p, int n_steps) {
    const double period = 2.0 * M_PI;
    const double h = period / n_steps;
    const auto L = [&](double th) { return l_matrix(profile, p, th); };

    std::array<GaugeSolution, 2> out;
    for (int j = 0; j < 2; ++j) {
        GaugeSolution& sol = out[j];
        sol.theta.resize(n_steps + 1);
        sol.x.resize(n_steps + 1);
        sol.xdot.resize(n_steps + 1);
        Eigen::Vector2d x = (j == 0) ? Eigen::Vector2d(1.0, 0.0) : Eigen::Vector2d(0.0, 1.0);
        sol.theta[0] = 0.0;
        sol.x[0] = x;
        sol.xdot[0] = L(0.0) * x;

        Eigen::Vector2d xb = x; // backward sweep for the evenness check
        double even_res = 0.0;
        for (int i = 0; i < n_steps; ++i) {
            const double t = i * h;
            // classic RK4 for the non-autonomous linear system
            const auto step = [&](double t0, double dt, const Eigen::Vector2d& y) {
                const Eigen::Vector2d k1 = L(t0) * y;
                const Eigen::Vector2d k2 = L(t0 + 0.5 * dt) * (y + 0.5 * dt * k1);
                const Eigen::Vector2d k3 = L(t0 + 0.5 * dt) * (y + 0.5 * dt * k2);
                const Eigen::Vector2d k4 = L(t0 + dt) * (y + dt * k3);
                return (y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).eval();
            };
            x = step(t, h, x);
            xb = step(-t, -h, xb);
            sol.theta[i + 1] = (i + 1) * h;
            sol.x[i + 1] = x;
            sol.xdot[i + 1] = L((i + 1) * h) * x;
            even_res = std::max(even_res, (xb - x).cwiseAbs().maxCoeff());
        }
        sol.evenness_residual = even_res;
        sol.periodicity_residual = (sol.x[n_steps] - sol.x[0]).cwiseAbs().maxCoeff();
        // NaN-safe: an overflowed solution must also trip the guard
        if (!(sol.evenness_residual <= 1e-5 && sol.periodicity_residual <= 1e-5)) {
            std::ostringstream msg;
            msg << "gauge ODE solution " << j + 1 << " fails the Floquet parity check"
                << " (evenness " << sol.evenness_residual << ", periodicity "
                << sol.periodicity_residual << ")";
            throw FloquetViolation(msg.str());
        }
    }
    return out;
}

Eigen::Vector2d gauge_solution_dgamma3(const ShapeProfile& profile, const RevolutionParams& p,
                                       const GaugeSolution& sol, double gamma3) {
    const double theta = std::acos(std::clamp(gamma3, -1.0, 1.0));
    // d(g,k)/dgamma3 = -(L~/sin)(theta) (g,k) / K: regular at the poles.
    const Eigen::Matrix2d lt = l_tilde_over_sin(profile, p, theta);
    return -lt * sol.eval(theta) / k_measure(profile, p, theta);
}

GaugeGenerator revolution_z1() {
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

GaugeGenerator revolution_gauge_generator(const RevolutionModel& model, int j) {
    GaugeGenerator z;
    z.name = (j == 0) ? "Z(1,0)" : "Z(0,1)";
    z.tangent_to_orbit = true;
    const GaugeSolution target = model.gauge[static_cast<size_t>(j)];
    const GaugeSolution frame = model.gauge[static_cast<size_t>(model.frame_solution)];
    // g_j W1 + k_j W2 = (k_j/k) Z1 + (g_j - k_j g/k) Y2 in the model frame.
    z.coeffs_in_frame = [target, frame](const Vec& q) {
        const Eigen::Vector2d gj = target.eval(q[kTheta]);
        const Eigen::Vector2d gf = frame.eval(q[kTheta]);
        Vec v = Vec::Zero(3);
        v[0] = gj[1] / gf[1];
        v[1] = gj[0] - gj[1] * gf[0] / gf[1];
        return v;
    };
    return z;
}

RevolutionModel build_revolution(const ShapeProfile& profile, const RevolutionParams& p,
                                 int n_steps, double theta_min, int frame_solution) {
    for (double g3 : {-1.0, -0.7, -0.3, 0.0, 0.3, 0.7, 1.0}) {
        if (!(profile.rp(g3) > 0.0 && profile.rm(g3) > 0.0))
            throw ShapeSingularity("profile is not convex: a curvature radius is <= 0");
    }
    if (std::abs(profile.rp(1.0) - profile.rm(1.0)) > 1e-8 ||
        std::abs(profile.rp(-1.0) - profile.rm(-1.0)) > 1e-8)
        throw ShapeSingularity("curvature radii must agree at the poles");
    if (p.V_theta) {
        for (double th : {0.3, 1.1, 2.5})
            if (std::abs(p.V_theta(th) - p.V_theta(-th)) > 1e-10 * std::max(1.0, std::abs(p.V_theta(th))))
                throw ConfigError("potential V(theta) must be even");
    }

    RevolutionModel model;
    model.profile = profile;
    model.params = p;
    model.gauge = solve_gauge_ode(profile, p, n_steps);
    model.frame_solution = frame_solution;

    const GaugeSolution& fs = model.gauge[static_cast<size_t>(frame_solution)];
    std::vector<double> bad;
    for (size_t i = 0; i < fs.theta.size(); ++i) {
        if (fs.theta[i] > theta_min && fs.theta[i] < M_PI - theta_min &&
            std::abs(fs.x[i][1]) < 1e-10)
            bad.push_back(fs.theta[i]);
    }
    if (!bad.empty()) {
        std::ostringstream msg;
        msg << "adapted basis degenerates (k = 0) at theta =";
        for (double t : bad) msg << " " << t;
        throw AdaptedBasisDegenerate(msg.str());
    }

    MechanicalSystem sys;
    sys.n = 5;
    sys.r = 3;
    sys.n_gauge = 1;
    sys.name = "revolution-" + profile.name;
    sys.coord_names = {"phi", "theta", "psi", "x", "y"};
    sys.domain.contains = [theta_min](const Vec& q) {
        return q[kTheta] > theta_min && q[kTheta] < M_PI - theta_min;
    };

    const double I1 = p.I1, I3 = p.I3, m = p.m;
    const ShapeProfile pr = profile;

    sys.metric.g = [I1, I3, m, pr](const Vec& q) {
        const double th = q[kTheta];
        const double s = std::sin(th), c = std::cos(th);
        const double a2 = pr.a2_theta(th);
        Mat g = Mat::Zero(5, 5);
        g(kPhi, kPhi) = I1 * s * s + I3 * c * c;
        g(kTheta, kTheta) = I1 + m * a2 * a2;
        g(kPsi, kPsi) = I3;
        g(kPhi, kPsi) = g(kPsi, kPhi) = I3 * c;
        g(kX, kX) = g(kY, kY) = m;
        return g;
    };
    sys.metric.dg = [I1, I3, m, pr](const Vec& q, int i) {
        Mat d = Mat::Zero(5, 5);
        if (i == kTheta) {
            const double th = q[kTheta];
            const double s = std::sin(th), c = std::cos(th);
            const double a2 = pr.a2_theta(th);
            // a2' = cos b - sin^2 (f1 + cos f1' - f2'), all as functions of g3
            const double g3 = c;
            const double da2 = c * pr.b_theta(th) -
                               s * s * (pr.f1(g3) + c * pr.df1(g3) - pr.df2(g3));
            d(kPhi, kPhi) = 2.0 * (I1 - I3) * s * c;
            d(kTheta, kTheta) = 2.0 * m * a2 * da2;
            d(kPhi, kPsi) = d(kPsi, kPhi) = -I3 * s;
        }
        return d;
    };

    if (p.V_theta) {
        auto V = p.V_theta;
        sys.potential = [V](const Vec& q) { return V(q[kTheta]); };
        if (p.dV_theta) {
            auto dV = p.dV_theta;
            sys.potential_grad = [dV](const Vec& q) {
                Vec g = Vec::Zero(5);
                g[kTheta] = dV(q[kTheta]);
                return g;
            };
        }
    }

    // W1 = d/dphi - a2 (cos phi dx + sin phi dy)
    // W2 = d/dpsi - a1 (cos phi dx + sin phi dy)
    // Y3 = d/dtheta + z (sin phi dx - cos phi dy)
    const auto da1 = [pr](double th) {
        const double c = std::cos(th), s = std::sin(th);
        return c * pr.f1(c) - s * s * pr.df1(c);
    };
    const auto da2 = [pr](double th) {
        const double c = std::cos(th), s = std::sin(th);
        return c * pr.b_theta(th) - s * s * (pr.f1(c) + c * pr.df1(c) - pr.df2(c));
    };

    VectorField w1;
    w1.coeffs = [pr](const Vec& q) {
        Vec v = Vec::Zero(5);
        v[kPhi] = 1.0;
        const double a2 = pr.a2_theta(q[kTheta]);
        v[kX] = -a2 * std::cos(q[kPhi]);
        v[kY] = -a2 * std::sin(q[kPhi]);
        return v;
    };
    w1.jacobian = [pr, da2](const Vec& q) {
        const double sp = std::sin(q[kPhi]), cp = std::cos(q[kPhi]);
        const double a2 = pr.a2_theta(q[kTheta]);
        const double d = da2(q[kTheta]);
        Mat J = Mat::Zero(5, 5);
        J(kX, kPhi) = a2 * sp;
        J(kY, kPhi) = -a2 * cp;
        J(kX, kTheta) = -d * cp;
        J(kY, kTheta) = -d * sp;
        return J;
    };

    VectorField w2;
    w2.coeffs = [pr](const Vec& q) {
        Vec v = Vec::Zero(5);
        v[kPsi] = 1.0;
        const double a1 = pr.a1_theta(q[kTheta]);
        v[kX] = -a1 * std::cos(q[kPhi]);
        v[kY] = -a1 * std::sin(q[kPhi]);
        return v;
    };
    w2.jacobian = [pr, da1](const Vec& q) {
        const double sp = std::sin(q[kPhi]), cp = std::cos(q[kPhi]);
        const double a1 = pr.a1_theta(q[kTheta]);
        const double d = da1(q[kTheta]);
        Mat J = Mat::Zero(5, 5);
        J(kX, kPhi) = a1 * sp;
        J(kY, kPhi) = -a1 * cp;
        J(kX, kTheta) = -d * cp;
        J(kY, kTheta) = -d * sp;
        return J;
    };

    VectorField y3;
    y3.coeffs = [pr](const Vec& q) {
        Vec v = Vec::Zero(5);
        v[kTheta] = 1.0;
        const double z = pr.z_theta(q[kTheta]);
        v[kX] = z * std::sin(q[kPhi]);
        v[kY] = -z * std::cos(q[kPhi]);
        return v;
    };
    y3.jacobian = [pr](const Vec& q) {
        const double sp = std::sin(q[kPhi]), cp = std::cos(q[kPhi]);
        const double z = pr.z_theta(q[kTheta]);
        const double a2 = pr.a2_theta(q[kTheta]); // z' = a2
        Mat J = Mat::Zero(5, 5);
        J(kX, kPhi) = z * cp;
        J(kY, kPhi) = z * sp;
        J(kX, kTheta) = a2 * sp;
        J(kY, kTheta) = -a2 * cp;
        return J;
    };

    const ShapeProfile prc = profile;
    const RevolutionParams pc = p;
    const GaugeSolution fscopy = fs;
    VectorField z1;
    z1.coeffs = [fscopy, w1, w2](const Vec& q) {
        const Eigen::Vector2d gk = fscopy.eval(q[kTheta]);
        return (gk[0] * w1.coeffs(q) + gk[1] * w2.coeffs(q)).eval();
    };
    z1.jacobian = [fscopy, w1, w2, prc, pc](const Vec& q) {
        const double th = q[kTheta];
        const Eigen::Vector2d gk = fscopy.eval(th);
        // (g,k)' from the ODE right-hand side, consistent with the interpolant
        const Eigen::Vector2d dgk = l_matrix(prc, pc, th) * gk;
        Mat J = gk[0] * w1.jacobian(q) + gk[1] * w2.jacobian(q);
        J.col(kTheta) += dgk[0] * w1.coeffs(q) + dgk[1] * w2.coeffs(q);
        return J;
    };

    sys.frame = {z1, w1, y3};

    VectorField dx, dy;
    dx.coeffs = [](const Vec&) { Vec v = Vec::Zero(5); v[kX] = 1.0; return v; };
    dx.jacobian = zero_jacobian;
    dy.coeffs = [](const Vec&) { Vec v = Vec::Zero(5); v[kY] = 1.0; return v; };
    dy.jacobian = zero_jacobian;
    sys.complement = {dx, dy};

    VectorField rot, spin;
    rot.coeffs = [](const Vec& q) {
        Vec v = Vec::Zero(5);
        v[kPhi] = 1.0;
        v[kX] = -q[kY];
        v[kY] = q[kX];
        return v;
    };
    rot.jacobian = [](const Vec&) {
        Mat J = Mat::Zero(5, 5);
        J(kX, kY) = -1.0;
        J(kY, kX) = 1.0;
        return J;
    };
    spin.coeffs = [](const Vec&) { Vec v = Vec::Zero(5); v[kPsi] = 1.0; return v; };
    spin.jacobian = zero_jacobian;
    sys.orbit_generators = {rot, spin, dx, dy};

    model.system = std::move(sys);
    return model;
}

ReducedRevolution reduce_revolution(const RevolutionModel& model, const PhaseState& state) {
    const MechanicalSystem& sys = model.system;
    FrameData fd = frame_at(sys, state.q);
    const Vec qdot = fd.rho * (fd.gram_inv * state.pi);
    const double th = state.q[kTheta], ps = state.q[kPsi];
    const double st = std::sin(th), ct = std::cos(th);
    const double sp = std::sin(ps), cp = std::cos(ps);
    const double dphi = qdot[kPhi], dth = qdot[kTheta], dpsi = qdot[kPsi];

    Eigen::Vector3d omega(dth * cp + dphi * sp * st, -dth * sp + dphi * cp * st,
                          dphi * ct + dpsi);
    ReducedRevolution out;
    out.gamma = {st * sp, st * cp, ct};
    const double f1 = model.profile.f1(ct), f2 = model.profile.f2(ct);
    const Eigen::Vector3d rho_c(f1 * out.gamma[0], f1 * out.gamma[1], f2);
    const Eigen::Vector3d inertia(model.params.I1, model.params.I1, model.params.I3);
    out.M = inertia.cwiseProduct(omega) + model.params.m * rho_c.cross(omega.cross(rho_c));
    out.sigma[0] = out.gamma[2];
    out.sigma[1] = out.gamma[0] * out.M[1] - out.gamma[1] * out.M[0];
    out.sigma[2] = out.gamma[0] * out.M[0] + out.gamma[1] * out.M[1];
    out.sigma[3] = out.M[2];
    out.sigma[4] = out.M[0] * out.M[0] + out.M[1] * out.M[1];
    return out;
}

Eigen::Vector3d revolution_omega(const RevolutionModel& model, const Eigen::Vector3d& M,
                                 const Eigen::Vector3d& gamma) {
    const double f1 = model.profile.f1(gamma[2]), f2 = model.profile.f2(gamma[2]);
    const Eigen::Vector3d rho_c(f1 * gamma[0], f1 * gamma[1], f2);
    const double m = model.params.m;
    const double r2 = rho_c.squaredNorm();
    const Eigen::Vector3d A(1.0 / (model.params.I1 + m * r2), 1.0 / (model.params.I1 + m * r2),
                            1.0 / (model.params.I3 + m * r2));
    const Eigen::Vector3d AM = A.cwiseProduct(M);
    const Eigen::Vector3d Ar = A.cwiseProduct(rho_c);
    const double denom = 1.0 - m * Ar.dot(rho_c);
    if (denom < 1e-12) throw DegenerateDenominator("1 - m (A rho, rho) vanished");
    return AM + m * AM.dot(rho_c) / denom * Ar;
}

Eigen::Matrix<double, 6, 6> reduced_bracket_revolution(const RevolutionModel& model,
                                                       const Eigen::Vector3d& M,
                                                       const Eigen::Vector3d& gamma) {
    const double g3 = gamma[2];
    const ShapeProfile& pr = model.profile;
    const RevolutionParams& p = model.params;
    const double f1 = pr.f1(g3), f2 = pr.f2(g3);
    const double rm = pr.rm(g3);
    const double rs = pr.ratio(g3); // (Rp - Rm) / (1 - g3^2)
    const double s2 = 1.0 - g3 * g3;
    const double z = s2 * f1 + g3 * f2;
    const double K = p.I1 * p.I3 + p.m * p.I1 * f1 * f1 * s2 + p.m * p.I3 * f2 * f2;

    const Eigen::Vector3d rho_c(f1 * gamma[0], f1 * gamma[1], f2);
    const Eigen::Vector3d omega = revolution_omega(model, M, gamma);
    const double spin = omega.dot(gamma);
    const double mrho = M.dot(rho_c);

    // coefficient m (Rp - Rm) z / K spread over the pole-regular pieces
    const double czk = p.m * z / K;
    Eigen::Vector3d S;
    const double mg = M[0] * gamma[0] + M[1] * gamma[1];
    S[0] = rs * p.I3 * mg * gamma[0];
    S[1] = rs * p.I3 * mg * gamma[1];
    S[2] = rs * s2 * p.I1 * M[2];

    auto eps = [](int i, int j, int k) {
        return ((i + 1) % 3 == j && (j + 1) % 3 == k) ? 1.0
             : ((j + 1) % 3 == i && (i + 1) % 3 == k) ? -1.0 : 0.0;
    };
    Eigen::Matrix<double, 6, 6> J = Eigen::Matrix<double, 6, 6>::Zero();
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            if (i == j) continue;
            double mm = 0.0, mgam = 0.0;
            for (int k = 0; k < 3; ++k) {
                const double e = eps(i, j, k);
                if (e != 0.0) {
                    mm += e * (-M[k] + p.m * rm * spin * rho_c[k] +
                               czk * (rs * s2 * mrho * rho_c[k] + S[k]));
                    mgam += -e * gamma[k];
                }
            }
            J(i, j) = mm;
            J(i, 3 + j) = mgam;
            J(3 + j, i) = -mgam;
        }
    if (!J.allFinite())
        throw PoleRegularizationFailure("reduced bracket entries are not finite");
    return J;
}

double revolution_h_mg(const RevolutionModel& model, const Eigen::Vector3d& M,
                       const Eigen::Vector3d& gamma) {
    double v = 0.0;
    if (model.params.V_theta)
        v = model.params.V_theta(std::acos(std::clamp(gamma[2], -1.0, 1.0)));
    return 0.5 * M.dot(revolution_omega(model, M, gamma)) + v;
}

double hamiltonian_sigma(const RevolutionModel& model, const Eigen::Matrix<double, 5, 1>& sigma) {
    const double s1 = sigma[0];
    const ShapeProfile& pr = model.profile;
    const RevolutionParams& p = model.params;
    const double f1 = pr.f1(s1), f2 = pr.f2(s1);
    const double q2 = (1.0 - s1 * s1) * f1 * f1 + f2 * f2; // |rho|^2
    const double K1 = p.I1 + p.m * q2;
    const double K3 = p.I3 + p.m * q2;
    const double K = p.I1 * p.I3 + p.m * p.I1 * f1 * f1 * (1.0 - s1 * s1) + p.m * p.I3 * f2 * f2;
    const double num = sigma[2] * f1 * K3 + sigma[3] * f2 * K1;
    double v = 0.0;
    if (p.V_theta) v = p.V_theta(std::acos(std::clamp(s1, -1.0, 1.0)));
    return 0.5 * (sigma[4] / K1 + sigma[3] * sigma[3] / K3) +
           0.5 * p.m * num * num / (K * K1 * K3) + v;
}

double casimir_sigma(const RevolutionModel& model, int j,
                     const Eigen::Matrix<double, 5, 1>& sigma) {
    const double theta = std::acos(std::clamp(sigma[0], -1.0, 1.0));
    const Eigen::Vector2d gk = model.gauge[static_cast<size_t>(j)].eval(theta);
    return gk[0] * sigma[2] + (gk[0] * sigma[0] + gk[1]) * sigma[3];
}

double casimir_mg(const RevolutionModel& model, int j, const Eigen::Vector3d& M,
                  const Eigen::Vector3d& gamma) {
    const double theta = std::acos(std::clamp(gamma[2], -1.0, 1.0));
    const Eigen::Vector2d gk = model.gauge[static_cast<size_t>(j)].eval(theta);
    return gk[0] * M.dot(gamma) + gk[1] * M[2];
}

Eigen::Matrix<double, 6, 1> casimir_mg_gradient(const RevolutionModel& model, int j,
                                                const Eigen::Vector3d& M,
                                                const Eigen::Vector3d& gamma) {
    const double theta = std::acos(std::clamp(gamma[2], -1.0, 1.0));
    const GaugeSolution& sol = model.gauge[static_cast<size_t>(j)];
    const Eigen::Vector2d gk = sol.eval(theta);
    const Eigen::Vector2d dgk = gauge_solution_dgamma3(model.profile, model.params, sol, gamma[2]);
    Eigen::Matrix<double, 6, 1> grad;
    grad.head<3>() = gk[0] * gamma;
    grad[2] += gk[1];
    grad.tail<3>() = gk[0] * M;
    grad[5] += dgk[0] * M.dot(gamma) + dgk[1] * M[2];
    return grad;
}

} // namespace nonholo
