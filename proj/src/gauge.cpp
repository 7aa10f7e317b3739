#include "nonholo/gauge.hpp"

#include <cmath>

namespace nonholo {

double momentum_value(const MechanicalSystem& sys, const GaugeGenerator& z,
                      const PhaseState& state) {
    require_in_chart(sys, state.q);
    if (state.pi.size() != sys.r) throw DimensionMismatch("momentum has wrong dimension");
    return z.coeffs_in_frame(state.q).dot(state.pi);
}

SkewReport skew_test(const MechanicalSystem& sys, const GaugeGenerator& z,
                     const std::vector<Vec>& samples, double tol) {
    if (!z.tangent_to_orbit)
        throw NotOrbitTangent("skew criterion applies to sections of S = D cap (g.q)");
    SkewReport rep;
    rep.tolerance = tol;
    const VectorField zf = generator_field(sys, z);
    double scaled_tol = tol;
    for (const Vec& q : samples) {
        require_in_chart(sys, q);
        const Mat g = sys.metric.g(q);
        Mat rho(sys.n, sys.r);
        for (int a = 0; a < sys.r; ++a) rho.col(a) = sys.frame[a].coeffs(q);
        Mat c(sys.r, sys.r); // C_{Z a b} = <[Z,X_a],X_b>
        for (int a = 0; a < sys.r; ++a) {
            const Vec br = lie_bracket(zf, sys.frame[a], q, &sys.domain);
            c.row(a) = (g * br).transpose() * rho;
        }
        const double res = (c + c.transpose()).cwiseAbs().maxCoeff();
        const double scale = std::max(1.0, (rho.transpose() * g * rho).cwiseAbs().maxCoeff());
        scaled_tol = std::max(scaled_tol, tol * scale);
        if (res > rep.max_residual) {
            rep.max_residual = res;
            Eigen::Index ia, ib;
            (c + c.transpose()).cwiseAbs().maxCoeff(&ia, &ib);
            rep.worst_alpha = static_cast<int>(ia);
            rep.worst_beta = static_cast<int>(ib);
        }
    }
    rep.tolerance = scaled_tol;
    rep.pass = rep.max_residual <= scaled_tol;
    return rep;
}

double momentum_drift(const MechanicalSystem& sys, const GaugeGenerator& z,
                      const PhaseState& state) {
    require_in_chart(sys, state.q);
    const Vec& q = state.q;
    FrameData fd = frame_at(sys, q);
    const Vec u = fd.rho * (fd.gram_inv * state.pi); // velocity reconstruction in coordinates

    const VectorField zf = generator_field(sys, z);
    const Vec zq = zf.coeffs(q);
    const Mat jz = field_jacobian(zf, q, &sys.domain);
    const Mat g = sys.metric.g(q);

    double lie_quad = 0.0; // (L_Z g)(u,u)
    for (int k = 0; k < sys.n; ++k)
        if (zq[k] != 0.0) lie_quad += zq[k] * u.dot(metric_derivative(sys, q, k) * u);
    lie_quad += 2.0 * u.dot(g * (jz * u));

    return 0.5 * lie_quad - zq.dot(potential_gradient(sys, q));
}

} // namespace nonholo
