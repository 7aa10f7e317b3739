#include "nonholo/brackets.hpp"

#include <array>
#include <cmath>
#include <memory>
#include <random>

namespace nonholo {

namespace {

Mat lower_right_from(const Tensor3& t, const Mat& gram_inv, const Vec& pi, double sign) {
    const int r = static_cast<int>(pi.size());
    Mat out = Mat::Zero(r, r);
    for (int a = 0; a < r; ++a)
        for (int b = a + 1; b < r; ++b) {
            double s = 0.0;
            for (int g = 0; g < r; ++g) {
                double raised = 0.0;
                for (int d = 0; d < r; ++d) raised += gram_inv(g, d) * t(a, b, d);
                s += raised * pi[g];
            }
            out(a, b) = sign * s;
            out(b, a) = -sign * s;
        }
    return out;
}

} // namespace

BivectorBlocks pi_nh(const MechanicalSystem& sys, const PhaseState& state) {
    require_in_chart(sys, state.q);
    if (state.pi.size() != sys.r) throw DimensionMismatch("momentum has wrong dimension");
    FrameData fd = frame_at(sys, state.q);
    BivectorBlocks blocks;
    blocks.rho = fd.rho;
    blocks.lower_right = lower_right_from(fd.c_down, fd.gram_inv, state.pi, -1.0);
    return blocks;
}

ThreeForm lambda_from_generators(const MechanicalSystem& sys, int n_generators, double tol) {
    if (n_generators < 0 || n_generators > sys.r)
        throw DimensionMismatch("generator count outside [0, r]");
    const int ell = n_generators;
    ThreeForm lam;
    // No nonzero alternating 3-tensor below dimension 3; with no generators
    // the canonical choice is Lambda = 0.
    if (sys.r <= 2 || ell == 0) return lam;
    // shared copy so the form stays valid independently of the argument's lifetime
    auto held = std::make_shared<const MechanicalSystem>(sys);
    lam.b_down = [held, ell, tol](const Vec& q) {
        const MechanicalSystem& sys = *held;
        FrameData fd = frame_at(sys, q);
        const int r = sys.r;
        Tensor3 b(r);
        // Independent components: sorted triples i<j<k with a gauge index
        // (necessarily i < ell); B_{ijk} = C_{ijk}. Triples of non-gauge
        // indices stay zero (canonical single-chart choice).
        for (int i = 0; i < ell && i < r; ++i)
            for (int j = i + 1; j < r; ++j)
                for (int k = j + 1; k < r; ++k) {
                    const double v = fd.c_down(i, j, k);
                    b(i, j, k) = v;
                    b(j, k, i) = v;
                    b(k, i, j) = v;
                    b(j, i, k) = -v;
                    b(i, k, j) = -v;
                    b(k, j, i) = -v;
                }
        // The alternating extension must reproduce <[Z_b,X_beta],X_gamma> for
        // every gauge row; a violation means some Z_b is not a gauge generator.
        const double scale = std::max(1.0, fd.c_down.max_abs());
        for (int bidx = 0; bidx < ell; ++bidx)
            for (int be = 0; be < r; ++be)
                for (int ga = 0; ga < r; ++ga) {
                    const double want = fd.c_down(bidx, be, ga);
                    if (std::abs(b(bidx, be, ga) - want) > tol * scale)
                        throw InconsistentGenerators(
                            "B_{b beta gamma} = -B_{b gamma beta} fails for generator " +
                            std::to_string(bidx + 1) + "; skew criterion violated");
                }
        return b;
    };
    return lam;
}

Tensor3 three_form_at(const MechanicalSystem& sys, const ThreeForm& lam, const Vec& q) {
    if (lam.zero()) return Tensor3(sys.r);
    return lam.b_down(q);
}

BivectorBlocks gauge_transform(const MechanicalSystem& sys, const ThreeForm& lam,
                               const PhaseState& state) {
    require_in_chart(sys, state.q);
    if (state.pi.size() != sys.r) throw DimensionMismatch("momentum has wrong dimension");
    FrameData fd = frame_at(sys, state.q);
    BivectorBlocks blocks;
    blocks.rho = fd.rho;
    blocks.lower_right = lower_right_from(fd.c_down, fd.gram_inv, state.pi, -1.0);
    if (!lam.zero()) {
        const Tensor3 b = lam.b_down(state.q);
        blocks.lower_right += lower_right_from(b, fd.gram_inv, state.pi, 1.0);
    }
    return blocks;
}

Vec hamiltonian_vf(const BivectorBlocks& blocks, const Vec& df) {
    const int n = static_cast<int>(blocks.rho.rows());
    const int r = static_cast<int>(blocks.rho.cols());
    if (df.size() != n + r) throw DimensionMismatch("df has wrong dimension");
    Vec out(n + r);
    out.head(n) = blocks.rho * df.tail(r);
    out.tail(r) = -blocks.rho.transpose() * df.head(n) + blocks.lower_right * df.tail(r);
    return out;
}

double hamiltonian(const MechanicalSystem& sys, const PhaseState& state) {
    FrameData fd = frame_at(sys, state.q);
    return 0.5 * state.pi.dot(fd.gram_inv * state.pi) + potential_value(sys, state.q);
}

namespace {

Mat gram_only(const MechanicalSystem& sys, const Vec& q) {
    require_in_chart(sys, q);
    Mat rho(sys.n, sys.r);
    for (int a = 0; a < sys.r; ++a) rho.col(a) = sys.frame[a].coeffs(q);
    Mat g = rho.transpose() * sys.metric.g(q) * rho;
    return 0.5 * (g + g.transpose());
}

bool analytic_q_gradient(const MechanicalSystem& sys) {
    if (!sys.metric.dg) return false;
    for (const auto& X : sys.frame)
        if (!X.jacobian) return false;
    return !sys.potential || static_cast<bool>(sys.potential_grad);
}

} // namespace

Vec hamiltonian_gradient(const MechanicalSystem& sys, const PhaseState& state) {
    const Vec& q = state.q;
    Vec grad(sys.n + sys.r);
    FrameData fd = frame_at(sys, q);
    const Vec u = fd.gram_inv * state.pi;
    grad.tail(sys.r) = u;

    if (analytic_q_gradient(sys)) {
        // dH/dq^i = -1/2 u^T (dG/dq^i) u + dV/dq^i with u = G^{-1} pi.
        const Mat g = sys.metric.g(q);
        std::vector<Mat> jrho(sys.r);
        for (int a = 0; a < sys.r; ++a) jrho[a] = sys.frame[a].jacobian(q);
        const Vec dv = potential_gradient(sys, q);
        for (int i = 0; i < sys.n; ++i) {
            const Mat dgi = sys.metric.dg(q, i);
            Mat dG(sys.r, sys.r);
            for (int a = 0; a < sys.r; ++a)
                for (int b = 0; b < sys.r; ++b)
                    dG(a, b) = jrho[a].col(i).dot(g * fd.rho.col(b)) +
                               fd.rho.col(a).dot(dgi * fd.rho.col(b)) +
                               fd.rho.col(a).dot(g * jrho[b].col(i));
            grad[i] = -0.5 * u.dot(dG * u) + dv[i];
        }
        return grad;
    }

    Vec qp = q, qm = q;
    for (int i = 0; i < sys.n; ++i) {
        const double h = 1e-6 * std::max(1.0, std::abs(q[i]));
        qp[i] = q[i] + h;
        qm[i] = q[i] - h;
        const Mat gp = gram_only(sys, qp);
        const Mat gm = gram_only(sys, qm);
        const double hp = 0.5 * state.pi.dot(gp.llt().solve(state.pi)) + potential_value(sys, qp);
        const double hm = 0.5 * state.pi.dot(gm.llt().solve(state.pi)) + potential_value(sys, qm);
        grad[i] = (hp - hm) / (2.0 * h);
        qp[i] = q[i];
        qm[i] = q[i];
    }
    return grad;
}

Vec scalar_gradient(const ScalarField& f, const Vec& x, double fd_step) {
    if (f.gradient) return f.gradient(x);
    const int n = static_cast<int>(x.size());
    Vec g(n);
    Vec xp = x, xm = x;
    for (int i = 0; i < n; ++i) {
        const double h = fd_step * std::max(1.0, std::abs(x[i]));
        xp[i] = x[i] + h;
        xm[i] = x[i] - h;
        g[i] = (f.value(xp) - f.value(xm)) / (2.0 * h);
        xp[i] = x[i];
        xm[i] = x[i];
    }
    return g;
}

double bracket_of(const std::function<Mat(const Vec&)>& bracket_matrix,
                  const ScalarField& f, const ScalarField& g, const Vec& x) {
    return scalar_gradient(f, x).dot(bracket_matrix(x) * scalar_gradient(g, x));
}

ThreeForm random_three_form(const MechanicalSystem& sys, std::uint64_t seed) {
    ThreeForm lam;
    if (sys.r <= 2) return lam;
    struct Wave {
        int i, j, k;
        double a0, a1;
        Vec w;
        double phase;
    };
    std::mt19937_64 eng(seed);
    auto uni = [&eng](double lo, double hi) {
        return lo + (hi - lo) * static_cast<double>(eng() >> 11) * 0x1.0p-53;
    };
    std::vector<Wave> waves;
    for (int i = 0; i < sys.r; ++i)
        for (int j = i + 1; j < sys.r; ++j)
            for (int k = j + 1; k < sys.r; ++k) {
                Wave w;
                w.i = i;
                w.j = j;
                w.k = k;
                w.a0 = uni(-0.5, 0.5);
                w.a1 = uni(0.2, 0.8);
                w.w = Vec(sys.n);
                for (int c = 0; c < sys.n; ++c) w.w[c] = uni(-1.0, 1.0);
                w.phase = uni(0.0, 2.0 * M_PI);
                waves.push_back(w);
            }
    const int r = sys.r;
    lam.b_down = [waves, r](const Vec& q) {
        Tensor3 b(r);
        for (const Wave& w : waves) {
            const double v = w.a0 + w.a1 * std::sin(w.w.dot(q) + w.phase);
            b(w.i, w.j, w.k) = v;
            b(w.j, w.k, w.i) = v;
            b(w.k, w.i, w.j) = v;
            b(w.j, w.i, w.k) = -v;
            b(w.i, w.k, w.j) = -v;
            b(w.k, w.j, w.i) = -v;
        }
        return b;
    };
    return lam;
}

double jacobiator(const std::function<Mat(const Vec&)>& bracket_matrix,
                  const ScalarField& f, const ScalarField& g, const ScalarField& h,
                  const Vec& x, double fd_step) {
    const std::array<const ScalarField*, 3> fns = {&f, &g, &h};
    double sum = 0.0;
    for (int c = 0; c < 3; ++c) {
        const ScalarField& outer = *fns[c];
        const ScalarField& u = *fns[(c + 1) % 3];
        const ScalarField& v = *fns[(c + 2) % 3];
        ScalarField inner;
        inner.value = [&bracket_matrix, &u, &v](const Vec& y) {
            return bracket_of(bracket_matrix, u, v, y);
        };
        ScalarField inner_fd = inner;
        inner_fd.gradient = [inner, fd_step](const Vec& y) {
            return scalar_gradient(inner, y, fd_step);
        };
        sum += bracket_of(bracket_matrix, outer, inner_fd, x);
    }
    return sum;
}

} // namespace nonholo
