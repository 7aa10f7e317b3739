#include "nonholo/geometry.hpp"

#include <cmath>
#include <memory>

namespace nonholo {

namespace {

// Per-component step for central differences of vector fields.
double fd_step(double qi, double scale) { return scale * std::max(1.0, std::abs(qi)); }

void check_stencil(const ChartDomain* domain, const Vec& q) {
    if (domain && !domain->ok(q))
        throw OutOfChart("finite-difference stencil point left the chart domain");
}

} // namespace

void require_in_chart(const MechanicalSystem& sys, const Vec& q) {
    if (q.size() != sys.n) throw DimensionMismatch("chart point has wrong dimension");
    if (!sys.domain.ok(q)) throw OutOfChart("point outside chart domain of " + sys.name);
}

Mat field_jacobian(const VectorField& X, const Vec& q, const ChartDomain* domain) {
    if (X.jacobian) return X.jacobian(q);
    const int n = static_cast<int>(q.size());
    Mat J(n, n);
    Vec qp = q, qm = q;
    for (int j = 0; j < n; ++j) {
        const double h = fd_step(q[j], 1e-5);
        qp[j] = q[j] + h;
        qm[j] = q[j] - h;
        check_stencil(domain, qp);
        check_stencil(domain, qm);
        J.col(j) = (X.coeffs(qp) - X.coeffs(qm)) / (2.0 * h);
        qp[j] = q[j];
        qm[j] = q[j];
    }
    return J;
}

Vec lie_bracket(const VectorField& X, const VectorField& Y, const Vec& q,
                const ChartDomain* domain) {
    const Vec xq = X.coeffs(q);
    const Vec yq = Y.coeffs(q);
    return field_jacobian(Y, q, domain) * xq - field_jacobian(X, q, domain) * yq;
}

Mat orthogonal_complement(const MechanicalSystem& sys, const Vec& q) {
    if (sys.n == sys.r) return Mat(sys.n, 0);
    // Kernel of the r x n matrix rho^T g: vectors metric-orthogonal to D.
    Mat rho(sys.n, sys.r);
    for (int a = 0; a < sys.r; ++a) rho.col(a) = sys.frame[a].coeffs(q);
    Mat A = rho.transpose() * sys.metric.g(q);
    Eigen::FullPivLU<Mat> lu(A);
    Mat ker = lu.kernel();
    if (ker.cols() != sys.n - sys.r)
        throw DegenerateFrame("metric-orthogonal complement has unexpected dimension");
    return ker;
}

FrameData frame_at(const MechanicalSystem& sys, const Vec& q) {
    require_in_chart(sys, q);
    FrameData fd;
    fd.rho.resize(sys.n, sys.r);
    for (int a = 0; a < sys.r; ++a) fd.rho.col(a) = sys.frame[a].coeffs(q);

    Mat full(sys.n, sys.n);
    full.leftCols(sys.r) = fd.rho;
    if (!sys.complement.empty()) {
        for (int a = 0; a < sys.n - sys.r; ++a)
            full.col(sys.r + a) = sys.complement[a].coeffs(q);
    } else if (sys.n > sys.r) {
        full.rightCols(sys.n - sys.r) = orthogonal_complement(sys, q);
    }

    Eigen::PartialPivLU<Mat> lu(full);
    const double rc = lu.rcond();
    if (!(rc > 1.0 / sys.frame_cond_bound))
        throw DegenerateFrame("[rho|W] is numerically singular (rcond " + std::to_string(rc) + ")");
    fd.rho_bar = lu.inverse().topRows(sys.r);

    const Mat g = sys.metric.g(q);
    fd.gram = fd.rho.transpose() * g * fd.rho;
    fd.gram = 0.5 * (fd.gram + fd.gram.transpose()).eval();
    Eigen::LLT<Mat> llt(fd.gram);
    if (llt.info() != Eigen::Success)
        throw DegenerateFrame("frame Gram matrix is not positive definite");
    fd.gram_inv = llt.solve(Mat::Identity(sys.r, sys.r));

    fd.c_down = Tensor3(sys.r);
    fd.c_up = Tensor3(sys.r);
    for (int a = 0; a < sys.r; ++a) {
        for (int b = a + 1; b < sys.r; ++b) {
            const Vec br = lie_bracket(sys.frame[a], sys.frame[b], q, &sys.domain);
            const Vec low = g * br;
            for (int c = 0; c < sys.r; ++c) {
                const double val = low.dot(fd.rho.col(c));
                fd.c_down(a, b, c) = val;
                fd.c_down(b, a, c) = -val;
            }
        }
    }
    for (int d = 0; d < sys.r; ++d)
        for (int a = 0; a < sys.r; ++a)
            for (int b = a + 1; b < sys.r; ++b) {
                double s = 0.0;
                for (int c = 0; c < sys.r; ++c) s += fd.gram_inv(d, c) * fd.c_down(a, b, c);
                fd.c_up(d, a, b) = s;
                fd.c_up(d, b, a) = -s;
            }
    return fd;
}

Mat metric_derivative(const MechanicalSystem& sys, const Vec& q, int i) {
    if (sys.metric.dg) return sys.metric.dg(q, i);
    const double h = fd_step(q[i], 1e-6);
    Vec qp = q, qm = q;
    qp[i] += h;
    qm[i] -= h;
    check_stencil(&sys.domain, qp);
    check_stencil(&sys.domain, qm);
    return (sys.metric.g(qp) - sys.metric.g(qm)) / (2.0 * h);
}

double potential_value(const MechanicalSystem& sys, const Vec& q) {
    return sys.potential ? sys.potential(q) : 0.0;
}

Vec potential_gradient(const MechanicalSystem& sys, const Vec& q) {
    if (!sys.potential) return Vec::Zero(sys.n);
    if (sys.potential_grad) return sys.potential_grad(q);
    Vec grad(sys.n);
    Vec qp = q, qm = q;
    for (int i = 0; i < sys.n; ++i) {
        const double h = fd_step(q[i], 1e-6);
        qp[i] = q[i] + h;
        qm[i] = q[i] - h;
        check_stencil(&sys.domain, qp);
        check_stencil(&sys.domain, qm);
        grad[i] = (sys.potential(qp) - sys.potential(qm)) / (2.0 * h);
        qp[i] = q[i];
        qm[i] = q[i];
    }
    return grad;
}

Mat lie_derivative_metric_on_d(const MechanicalSystem& sys, const VectorField& Z, const Vec& q) {
    require_in_chart(sys, q);
    const Vec zq = Z.coeffs(q);
    const Mat jz = field_jacobian(Z, q, &sys.domain);
    const Mat g = sys.metric.g(q);

    // (L_Z g)_ij = Z^k dg_ij/dq^k + g_kj dZ^k/dq^i + g_ik dZ^k/dq^j
    Mat lie = Mat::Zero(sys.n, sys.n);
    for (int k = 0; k < sys.n; ++k)
        if (zq[k] != 0.0) lie += zq[k] * metric_derivative(sys, q, k);
    lie += jz.transpose() * g + g * jz;

    Mat rho(sys.n, sys.r);
    for (int a = 0; a < sys.r; ++a) rho.col(a) = sys.frame[a].coeffs(q);
    return rho.transpose() * lie * rho;
}

Vec generator_coords(const MechanicalSystem& sys, const GaugeGenerator& z, const Vec& q) {
    Mat rho(sys.n, sys.r);
    for (int a = 0; a < sys.r; ++a) rho.col(a) = sys.frame[a].coeffs(q);
    return rho * z.coeffs_in_frame(q);
}

VectorField generator_field(const MechanicalSystem& sys, const GaugeGenerator& z) {
    VectorField f;
    auto held = std::make_shared<const MechanicalSystem>(sys);
    f.coeffs = [held, z](const Vec& q) { return generator_coords(*held, z, q); };
    // d(rho * z)/dq = sum_a (d rho_a) z^a + rho * dz, available when the frame
    // and the coefficients both carry jacobians.
    bool analytic = static_cast<bool>(z.coeffs_jacobian);
    for (const auto& X : sys.frame) analytic = analytic && static_cast<bool>(X.jacobian);
    if (analytic) {
        f.jacobian = [held, z](const Vec& q) {
            const MechanicalSystem& sys = *held;
            const Vec zc = z.coeffs_in_frame(q);
            Mat rho(sys.n, sys.r);
            Mat J = Mat::Zero(sys.n, sys.n);
            for (int a = 0; a < sys.r; ++a) {
                rho.col(a) = sys.frame[a].coeffs(q);
                J += zc[a] * sys.frame[a].jacobian(q);
            }
            J += rho * z.coeffs_jacobian(q);
            return J;
        };
    }
    return f;
}

double orbit_tangency_residual(const MechanicalSystem& sys, const Vec& zq, const Vec& q) {
    if (sys.orbit_generators.empty()) return zq.norm();
    Mat span(sys.n, static_cast<int>(sys.orbit_generators.size()));
    for (int j = 0; j < span.cols(); ++j) span.col(j) = sys.orbit_generators[j].coeffs(q);
    Vec res = zq - span * span.colPivHouseholderQr().solve(zq);
    return res.norm();
}

} // namespace nonholo
