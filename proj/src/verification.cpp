#include "nonholo/verification.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace nonholo {

nlohmann::json CheckReport::to_json() const {
    return nlohmann::json{{"check", check},         {"system", system},
                          {"n_samples", n_samples}, {"seed", seed},
                          {"max_residual", max_residual}, {"threshold", threshold},
                          {"pass", pass},           {"expected_fail", expected_fail}};
}

StateSampler default_state_sampler(const MechanicalSystem& sys) {
    const int n = sys.n, r = sys.r;
    return [n, r](Rng& rng) {
        PhaseState s;
        s.q = Vec(n);
        s.q[0] = rng.uniform(0.0, 2.0 * M_PI);       // phi
        s.q[1] = rng.uniform(0.3, M_PI - 0.3);       // theta, away from the poles
        s.q[2] = rng.uniform(0.0, 2.0 * M_PI);       // psi
        for (int i = 3; i < n; ++i) s.q[i] = rng.uniform(-1.0, 1.0);
        s.pi = rng.uniform_vec(r, -1.0, 1.0);
        return s;
    };
}

Mat contraction_block(const MechanicalSystem& sys, const ThreeForm& lam, const PhaseState& state) {
    FrameData fd = frame_at(sys, state.q);
    Mat b = Mat::Zero(sys.r, sys.r);
    if (lam.zero()) return b;
    const Tensor3 t = lam.b_down(state.q);
    for (int a = 0; a < sys.r; ++a)
        for (int c = a + 1; c < sys.r; ++c) {
            double s = 0.0;
            for (int g = 0; g < sys.r; ++g) {
                double raised = 0.0;
                for (int d = 0; d < sys.r; ++d) raised += fd.gram_inv(g, d) * t(a, c, d);
                s += raised * state.pi[g];
            }
            b(a, c) = s;
            b(c, a) = -s;
        }
    return b;
}

CheckReport verify_theorem_main(const MechanicalSystem& sys, const ThreeForm& lam,
                                const StateSampler& sampler, int n_samples, std::uint64_t seed,
                                double threshold) {
    CheckReport rep;
    rep.check = "casimir";
    rep.system = sys.name;
    rep.n_samples = n_samples;
    rep.seed = seed;
    rep.threshold = threshold;
    Rng rng(seed);
    for (int i = 0; i < n_samples; ++i) {
        const PhaseState s = sampler(rng);
        const BivectorBlocks blocks = gauge_transform(sys, lam, s);
        for (int b = 0; b < sys.n_gauge; ++b) {
            Vec df = Vec::Zero(sys.n + sys.r);
            df[sys.n + b] = 1.0;
            const Vec xf = hamiltonian_vf(blocks, df);
            const double vert = xf.tail(sys.r).cwiseAbs().maxCoeff();
            const double base = (xf.head(sys.n) - blocks.rho.col(b)).cwiseAbs().maxCoeff();
            rep.max_residual = std::max({rep.max_residual, vert, base});
        }
    }
    rep.pass = rep.max_residual <= threshold;
    return rep;
}

CheckReport verify_dynamics_equivalence(const MechanicalSystem& sys, const ThreeForm& lam,
                                        const StateSampler& sampler, int n_samples,
                                        std::uint64_t seed, double threshold) {
    CheckReport rep;
    rep.check = "dynamics-equivalence";
    rep.system = sys.name;
    rep.n_samples = n_samples;
    rep.seed = seed;
    rep.threshold = threshold;
    Rng rng(seed);
    for (int i = 0; i < n_samples; ++i) {
        const PhaseState s = sampler(rng);
        const Vec dh = hamiltonian_gradient(sys, s);
        const Vec a = hamiltonian_vf(gauge_transform(sys, lam, s), dh);
        const Vec b = hamiltonian_vf(pi_nh(sys, s), dh);
        rep.max_residual = std::max(rep.max_residual, (a - b).cwiseAbs().maxCoeff());
    }
    rep.pass = rep.max_residual <= threshold;
    return rep;
}

CheckReport verify_invertibility(const MechanicalSystem& sys, const ThreeForm& lam,
                                 const StateSampler& sampler, int n_samples, std::uint64_t seed,
                                 double threshold) {
    CheckReport rep;
    rep.check = "invertibility";
    rep.system = sys.name;
    rep.n_samples = n_samples;
    rep.seed = seed;
    rep.threshold = threshold;
    Rng rng(seed);
    const int dim = sys.n + sys.r;
    for (int i = 0; i < n_samples; ++i) {
        const PhaseState s = sampler(rng);
        FrameData fd = frame_at(sys, s.q);
        const Mat bmat = contraction_block(sys, lam, s);
        Mat xi_flat = Mat::Zero(dim, dim);
        xi_flat.topLeftCorner(sys.n, sys.n) = fd.rho_bar.transpose() * bmat * fd.rho_bar;
        const Mat pi_sharp = pi_nh(sys, s).full();
        const Mat T = Mat::Identity(dim, dim) + pi_sharp * xi_flat;

        const double det_res = std::abs(Eigen::PartialPivLU<Mat>(T).determinant() - 1.0);
        const Mat inv = T.inverse();
        const double inv_res = (T * inv - Mat::Identity(dim, dim)).cwiseAbs().maxCoeff();
        // definition path (Id + Pi# Xi^b)^{-1} Pi# against the block formula
        const double def_res =
            (inv * pi_sharp - gauge_transform(sys, lam, s).full()).cwiseAbs().maxCoeff();
        rep.max_residual = std::max({rep.max_residual, det_res, inv_res, def_res});
    }
    rep.pass = rep.max_residual <= threshold;
    return rep;
}

CheckReport verify_rank2_jacobi(const std::string& system_name,
                                const std::function<Mat(const Vec&)>& bracket,
                                const std::vector<ScalarField>& coords,
                                const std::function<Vec(Rng&)>& point_sampler, int n_triples,
                                std::uint64_t seed, double threshold, bool expected_fail) {
    CheckReport rep;
    rep.check = "rank2-jacobi";
    rep.system = system_name;
    rep.n_samples = n_triples;
    rep.seed = seed;
    rep.threshold = threshold;
    rep.expected_fail = expected_fail;
    Rng rng(seed);
    const int nf = static_cast<int>(coords.size());
    for (int i = 0; i < n_triples; ++i) {
        int a = rng.uniform_int(0, nf - 1);
        int b = rng.uniform_int(0, nf - 2);
        if (b >= a) ++b;
        int c = rng.uniform_int(0, nf - 3);
        if (c >= std::min(a, b)) ++c;
        if (c >= std::max(a, b)) ++c;
        const Vec x = point_sampler(rng);
        const double jac = jacobiator(bracket, coords[a], coords[b], coords[c], x);
        rep.max_residual = std::max(rep.max_residual, std::abs(jac));
    }
    rep.pass = rep.max_residual <= threshold;
    return rep;
}

namespace {

ScalarField coordinate_field(int idx, int dim) {
    ScalarField f;
    f.value = [idx](const Vec& x) { return x[idx]; };
    f.gradient = [idx, dim](const Vec&) {
        Vec g = Vec::Zero(dim);
        g[idx] = 1.0;
        return g;
    };
    return f;
}

} // namespace

std::vector<ScalarField> mg_coordinate_fields() {
    std::vector<ScalarField> out;
    for (int i = 0; i < 6; ++i) out.push_back(coordinate_field(i, 6));
    return out;
}

std::vector<ScalarField> sigma_invariant_fields() {
    // x = (M1, M2, M3, g1, g2, g3)
    std::vector<ScalarField> out(5);
    out[0].value = [](const Vec& x) { return x[5]; };
    out[0].gradient = [](const Vec&) {
        Vec g = Vec::Zero(6);
        g[5] = 1.0;
        return g;
    };
    out[1].value = [](const Vec& x) { return x[3] * x[1] - x[4] * x[0]; };
    out[1].gradient = [](const Vec& x) {
        Vec g = Vec::Zero(6);
        g[0] = -x[4];
        g[1] = x[3];
        g[3] = x[1];
        g[4] = -x[0];
        return g;
    };
    out[2].value = [](const Vec& x) { return x[3] * x[0] + x[4] * x[1]; };
    out[2].gradient = [](const Vec& x) {
        Vec g = Vec::Zero(6);
        g[0] = x[3];
        g[1] = x[4];
        g[3] = x[0];
        g[4] = x[1];
        return g;
    };
    out[3].value = [](const Vec& x) { return x[2]; };
    out[3].gradient = [](const Vec&) {
        Vec g = Vec::Zero(6);
        g[2] = 1.0;
        return g;
    };
    out[4].value = [](const Vec& x) { return x[0] * x[0] + x[1] * x[1]; };
    out[4].gradient = [](const Vec& x) {
        Vec g = Vec::Zero(6);
        g[0] = 2.0 * x[0];
        g[1] = 2.0 * x[1];
        return g;
    };
    return out;
}

std::function<Vec(Rng&)> mg_sampler(double gamma3_max) {
    return [gamma3_max](Rng& rng) {
        Vec x(6);
        for (int i = 0; i < 3; ++i) x[i] = rng.uniform(-1.0, 1.0);
        const double g3 = rng.uniform(-gamma3_max, gamma3_max);
        const double phase = rng.uniform(0.0, 2.0 * M_PI);
        const double s = std::sqrt(1.0 - g3 * g3);
        x[3] = s * std::sin(phase);
        x[4] = s * std::cos(phase);
        x[5] = g3;
        return x;
    };
}

} // namespace nonholo
