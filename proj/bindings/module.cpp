#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nonholo/chaplygin.hpp"
#include "nonholo/dynamics.hpp"
#include "nonholo/revolution.hpp"
#include "nonholo/verification.hpp"
#include "nonholo/version.hpp"

namespace py = pybind11;
using namespace nonholo;

namespace {

py::array_t<double> tensor_to_array(const Tensor3& t) {
    const int r = t.dim();
    py::array_t<double> out({r, r, r});
    auto buf = out.mutable_unchecked<3>();
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j)
            for (int k = 0; k < r; ++k) buf(i, j, k) = t(i, j, k);
    return out;
}

py::dict frame_dict(const FrameData& fd) {
    py::dict d;
    d["rho"] = fd.rho;
    d["rho_bar"] = fd.rho_bar;
    d["gram"] = fd.gram;
    d["gram_inv"] = fd.gram_inv;
    d["c_down"] = tensor_to_array(fd.c_down);
    d["c_up"] = tensor_to_array(fd.c_up);
    return d;
}

py::dict report_dict(const CheckReport& r) {
    py::dict d;
    d["check"] = r.check;
    d["system"] = r.system;
    d["n_samples"] = r.n_samples;
    d["seed"] = r.seed;
    d["max_residual"] = r.max_residual;
    d["threshold"] = r.threshold;
    d["pass"] = r.pass;
    d["expected_fail"] = r.expected_fail;
    d["ok"] = r.ok();
    return d;
}

IntegratorConfig make_config(double t_end, double step, const std::string& method, int stride,
                             double rtol, double atol) {
    IntegratorConfig cfg;
    cfg.t_end = t_end;
    cfg.step = step;
    cfg.sample_stride = stride;
    cfg.rtol = rtol;
    cfg.atol = atol;
    if (method == "rk4")
        cfg.method = IntegratorMethod::Rk4Fixed;
    else if (method == "rkf45")
        cfg.method = IntegratorMethod::Rkf45Adaptive;
    else
        throw ConfigError("method must be rk4 or rkf45");
    return cfg;
}

py::dict trajectory_dict(const Trajectory& traj, int n, int r) {
    py::dict d;
    const auto n_samples = static_cast<py::ssize_t>(traj.times.size());
    py::array_t<double> times(n_samples);
    py::array_t<double> qs({n_samples, static_cast<py::ssize_t>(n)});
    py::array_t<double> pis({n_samples, static_cast<py::ssize_t>(r)});
    auto tbuf = times.mutable_unchecked<1>();
    auto qbuf = qs.mutable_unchecked<2>();
    auto pbuf = pis.mutable_unchecked<2>();
    for (py::ssize_t i = 0; i < n_samples; ++i) {
        tbuf(i) = traj.times[static_cast<size_t>(i)];
        for (int c = 0; c < n; ++c) qbuf(i, c) = traj.states[static_cast<size_t>(i)].q[c];
        for (int c = 0; c < r; ++c) pbuf(i, c) = traj.states[static_cast<size_t>(i)].pi[c];
    }
    d["t"] = times;
    d["q"] = qs;
    d["pi"] = pis;
    py::dict mons;
    for (const auto& [name, series] : traj.monitors) {
        py::array_t<double> arr(static_cast<py::ssize_t>(series.size()));
        auto buf = arr.mutable_unchecked<1>();
        for (py::ssize_t i = 0; i < arr.size(); ++i) buf(i) = series[static_cast<size_t>(i)];
        mons[name.c_str()] = arr;
    }
    d["monitors"] = mons;
    return d;
}

// Shared implementation behind the two model classes.
struct SystemHandle {
    MechanicalSystem system;
    ThreeForm lam;

    py::dict frame(const Vec& q) const { return frame_dict(frame_at(system, q)); }

    double energy(const Vec& q, const Vec& pi) const { return hamiltonian(system, {q, pi}); }

    Mat bracket_nh(const Vec& q, const Vec& pi) const { return pi_nh(system, {q, pi}).full(); }

    Mat bracket_lambda(const Vec& q, const Vec& pi) const {
        return gauge_transform(system, lam, {q, pi}).full();
    }

    Vec field(const Vec& q, const Vec& pi) const { return nh_vector_field(system, {q, pi}); }

    py::array_t<double> lambda_at(const Vec& q) const {
        return tensor_to_array(three_form_at(system, lam, q));
    }

    py::dict run(const Vec& q, const Vec& pi, double t_end, double step,
                 const std::string& method, int stride, double rtol, double atol,
                 const std::vector<Monitor>& extra) const {
        std::vector<Monitor> mons;
        const MechanicalSystem& sys = system;
        mons.push_back({"H", [&sys](const PhaseState& s) { return hamiltonian(sys, s); }});
        for (const auto& m : extra) mons.push_back(m);
        const Trajectory traj =
            integrate(system, {q, pi}, make_config(t_end, step, method, stride, rtol, atol), mons);
        return trajectory_dict(traj, system.n, system.r);
    }

    py::dict check(const std::string& which, int n_samples, std::uint64_t seed,
                   const std::string& lambda_kind) const {
        ThreeForm use = lam;
        if (lambda_kind == "zero")
            use = ThreeForm{};
        else if (lambda_kind == "random")
            use = random_three_form(system, seed + 1);
        else if (lambda_kind != "generators")
            throw ConfigError("lambda_kind must be generators, zero or random");
        const StateSampler sampler = default_state_sampler(system);
        if (which == "casimir") return report_dict(verify_theorem_main(system, use, sampler, n_samples, seed));
        if (which == "dynamics-equivalence")
            return report_dict(verify_dynamics_equivalence(system, use, sampler, n_samples, seed));
        if (which == "invertibility")
            return report_dict(verify_invertibility(system, use, sampler, n_samples, seed));
        throw ConfigError("unknown check: " + which);
    }
};

struct PyChaplygin {
    ChaplyginParams params;
    SystemHandle h;

    PyChaplygin(double I1, double I3, double m, double R) {
        params.I1 = I1;
        params.I3 = I3;
        params.m = m;
        params.R = R;
        h.system = build_chaplygin(params);
        h.lam = lambda_from_generators(h.system, 1);
    }

    py::dict reduce(const Vec& q, const Vec& pi) const {
        const ReducedStateMG red = reduce_to_mg(params, {q, pi});
        py::dict d;
        d["M"] = Eigen::Vector3d(red.M);
        d["gamma"] = Eigen::Vector3d(red.gamma);
        return d;
    }

    Mat reduced_bracket(const Eigen::Vector3d& M, const Eigen::Vector3d& gamma) const {
        return reduced_bracket_mg(params, M, gamma);
    }

    double momentum(const Vec& q, const Vec& pi) const {
        return momentum_value(h.system, chaplygin_z1(), {q, pi});
    }

    double skew_residual(int n_samples, std::uint64_t seed) const {
        Rng rng(seed);
        std::vector<Vec> pts;
        const StateSampler sampler = default_state_sampler(h.system);
        for (int i = 0; i < n_samples; ++i) pts.push_back(sampler(rng).q);
        return skew_test(h.system, chaplygin_z1(), pts).max_residual;
    }

    py::dict run(const Vec& q, const Vec& pi, double t_end, double step,
                 const std::string& method, int stride, double rtol, double atol) const {
        std::vector<Monitor> extra;
        const MechanicalSystem& sys = h.system;
        extra.push_back({"p_Z1", [&sys](const PhaseState& s) {
                             return momentum_value(sys, chaplygin_z1(), s);
                         }});
        return h.run(q, pi, t_end, step, method, stride, rtol, atol, extra);
    }
};

ShapeProfile profile_from(const std::string& name, double radius, double offset, double a,
                          double c) {
    if (name == "sphere") return ShapeProfile::sphere(radius);
    if (name == "offset-sphere") return ShapeProfile::offset_sphere(radius, offset);
    if (name == "ellipsoid") return ShapeProfile::ellipsoid(a, c);
    throw ConfigError("profile must be sphere, offset-sphere or ellipsoid");
}

struct PyRevolution {
    RevolutionModel model;
    SystemHandle h;

    PyRevolution(const std::string& profile, double I1, double I3, double m, double radius,
                 double offset, double a, double c, const std::string& potential, double g0) {
        RevolutionParams p;
        p.I1 = I1;
        p.I3 = I3;
        p.m = m;
        const ShapeProfile pr = profile_from(profile, radius, offset, a, c);
        if (potential == "gravity") {
            p.V_theta = [m, g0, pr](double th) { return m * g0 * pr.z_theta(th); };
            p.dV_theta = [m, g0, pr](double th) { return m * g0 * pr.a2_theta(th); };
        } else if (potential != "none") {
            throw ConfigError("potential must be none or gravity");
        }
        model = build_revolution(pr, p);
        h.system = model.system;
        h.lam = lambda_from_generators(h.system, 1);
    }

    py::dict gauge_solutions() const {
        py::dict d;
        const auto n = static_cast<py::ssize_t>(model.gauge[0].theta.size());
        py::array_t<double> theta(n), g1(n), k1(n), g2(n), k2(n);
        for (py::ssize_t i = 0; i < n; ++i) {
            const auto idx = static_cast<size_t>(i);
            theta.mutable_at(i) = model.gauge[0].theta[idx];
            g1.mutable_at(i) = model.gauge[0].x[idx][0];
            k1.mutable_at(i) = model.gauge[0].x[idx][1];
            g2.mutable_at(i) = model.gauge[1].x[idx][0];
            k2.mutable_at(i) = model.gauge[1].x[idx][1];
        }
        d["theta"] = theta;
        d["g1"] = g1;
        d["k1"] = k1;
        d["g2"] = g2;
        d["k2"] = k2;
        d["evenness_residuals"] = std::vector<double>{model.gauge[0].evenness_residual,
                                                      model.gauge[1].evenness_residual};
        d["periodicity_residuals"] = std::vector<double>{model.gauge[0].periodicity_residual,
                                                         model.gauge[1].periodicity_residual};
        return d;
    }

    py::dict reduce(const Vec& q, const Vec& pi) const {
        const ReducedRevolution red = reduce_revolution(model, {q, pi});
        py::dict d;
        d["M"] = Eigen::Vector3d(red.M);
        d["gamma"] = Eigen::Vector3d(red.gamma);
        d["sigma"] = Eigen::Matrix<double, 5, 1>(red.sigma);
        return d;
    }

    Mat reduced_bracket(const Eigen::Vector3d& M, const Eigen::Vector3d& gamma) const {
        return reduced_bracket_revolution(model, M, gamma);
    }

    double h_sigma(const Eigen::Matrix<double, 5, 1>& sigma) const {
        return hamiltonian_sigma(model, sigma);
    }

    double casimir(int j, const Eigen::Matrix<double, 5, 1>& sigma) const {
        return casimir_sigma(model, j, sigma);
    }

    double skew_residual(int n_samples, std::uint64_t seed) const {
        Rng rng(seed);
        std::vector<Vec> pts;
        const StateSampler sampler = default_state_sampler(h.system);
        for (int i = 0; i < n_samples; ++i) pts.push_back(sampler(rng).q);
        return skew_test(h.system, revolution_z1(), pts).max_residual;
    }

    py::dict run(const Vec& q, const Vec& pi, double t_end, double step,
                 const std::string& method, int stride, double rtol, double atol) const {
        std::vector<Monitor> extra;
        const RevolutionModel& m = model;
        for (int j = 0; j < 2; ++j)
            extra.push_back({j == 0 ? "p_Z1" : "p_Z2", [&m, j](const PhaseState& s) {
                                 const ReducedRevolution red = reduce_revolution(m, s);
                                 return casimir_mg(m, j, red.M, red.gamma);
                             }});
        return h.run(q, pi, t_end, step, method, stride, rtol, atol, extra);
    }

    py::dict rank2_jacobi(int n_triples, std::uint64_t seed) const {
        const RevolutionModel& m = model;
        auto bracket = [&m](const Vec& x) -> Mat {
            return reduced_bracket_revolution(m, x.head<3>(), x.tail<3>());
        };
        return report_dict(verify_rank2_jacobi("revolution-sigma", bracket,
                                               sigma_invariant_fields(), mg_sampler(), n_triples,
                                               seed));
    }
};

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "almost-Poisson brackets for nonholonomic systems with gauge momenta";
    m.attr("__version__") = kVersion;

    py::register_exception<OutOfChart>(m, "OutOfChartError");
    py::register_exception<DegenerateFrame>(m, "DegenerateFrameError");
    py::register_exception<FloquetViolation>(m, "FloquetViolationError");
    py::register_exception<ConfigError>(m, "ConfigValueError");

    py::class_<PyChaplygin>(m, "Chaplygin",
                            "Axisymmetric Chaplygin sphere rolling on the plane; chart "
                            "(phi, theta, psi, x, y), momenta in the adapted frame (Z1, Y2, Y3)")
        .def(py::init<double, double, double, double>(), py::arg("I1") = 2.0,
             py::arg("I3") = 1.0, py::arg("m") = 1.0, py::arg("R") = 1.0)
        .def("frame", [](const PyChaplygin& s, const Vec& q) { return s.h.frame(q); },
             py::arg("q"), "frame data at a chart point")
        .def("hamiltonian",
             [](const PyChaplygin& s, const Vec& q, const Vec& pi) { return s.h.energy(q, pi); })
        .def("bracket_nh", [](const PyChaplygin& s, const Vec& q,
                              const Vec& pi) { return s.h.bracket_nh(q, pi); },
             "full coefficient matrix of the nonholonomic bivector")
        .def("bracket_lambda", [](const PyChaplygin& s, const Vec& q,
                                  const Vec& pi) { return s.h.bracket_lambda(q, pi); },
             "full coefficient matrix after the gauge transformation")
        .def("lambda_coefficients",
             [](const PyChaplygin& s, const Vec& q) { return s.h.lambda_at(q); })
        .def("vector_field",
             [](const PyChaplygin& s, const Vec& q, const Vec& pi) { return s.h.field(q, pi); })
        .def("momentum", &PyChaplygin::momentum, py::arg("q"), py::arg("pi"),
             "gauge momentum p_Z1 = pi_1")
        .def("skew_residual", &PyChaplygin::skew_residual, py::arg("n_samples") = 50,
             py::arg("seed") = 1)
        .def("reduce", &PyChaplygin::reduce, py::arg("q"), py::arg("pi"))
        .def("reduced_bracket", &PyChaplygin::reduced_bracket, py::arg("M"), py::arg("gamma"))
        .def("integrate", &PyChaplygin::run, py::arg("q"), py::arg("pi"), py::arg("t_end"),
             py::arg("step") = 1e-3, py::arg("method") = "rk4", py::arg("stride") = 10,
             py::arg("rtol") = 1e-8, py::arg("atol") = 1e-10)
        .def("verify",
             [](const PyChaplygin& s, const std::string& which, int n, std::uint64_t seed,
                const std::string& lk) { return s.h.check(which, n, seed, lk); },
             py::arg("check"), py::arg("n_samples") = 200, py::arg("seed") = 1,
             py::arg("lambda_kind") = "generators");

    py::class_<PyRevolution>(m, "Revolution",
                             "Convex solid of revolution rolling on the plane")
        .def(py::init<const std::string&, double, double, double, double, double, double, double,
                      const std::string&, double>(),
             py::arg("profile") = "sphere", py::arg("I1") = 2.0, py::arg("I3") = 1.0,
             py::arg("m") = 1.0, py::arg("radius") = 1.0, py::arg("offset") = 0.3,
             py::arg("a") = 1.0, py::arg("c") = 1.5, py::arg("potential") = "none",
             py::arg("g0") = 9.81)
        .def("frame", [](const PyRevolution& s, const Vec& q) { return s.h.frame(q); })
        .def("hamiltonian",
             [](const PyRevolution& s, const Vec& q, const Vec& pi) { return s.h.energy(q, pi); })
        .def("bracket_nh", [](const PyRevolution& s, const Vec& q,
                              const Vec& pi) { return s.h.bracket_nh(q, pi); })
        .def("bracket_lambda", [](const PyRevolution& s, const Vec& q,
                                  const Vec& pi) { return s.h.bracket_lambda(q, pi); })
        .def("lambda_coefficients",
             [](const PyRevolution& s, const Vec& q) { return s.h.lambda_at(q); })
        .def("vector_field",
             [](const PyRevolution& s, const Vec& q, const Vec& pi) { return s.h.field(q, pi); })
        .def("gauge_solutions", &PyRevolution::gauge_solutions)
        .def("skew_residual", &PyRevolution::skew_residual, py::arg("n_samples") = 50,
             py::arg("seed") = 1)
        .def("reduce", &PyRevolution::reduce, py::arg("q"), py::arg("pi"))
        .def("reduced_bracket", &PyRevolution::reduced_bracket, py::arg("M"), py::arg("gamma"))
        .def("hamiltonian_sigma", &PyRevolution::h_sigma, py::arg("sigma"))
        .def("casimir", &PyRevolution::casimir, py::arg("j"), py::arg("sigma"))
        .def("rank2_jacobi", &PyRevolution::rank2_jacobi, py::arg("n_triples") = 100,
             py::arg("seed") = 1)
        .def("integrate", &PyRevolution::run, py::arg("q"), py::arg("pi"), py::arg("t_end"),
             py::arg("step") = 1e-3, py::arg("method") = "rk4", py::arg("stride") = 10,
             py::arg("rtol") = 1e-8, py::arg("atol") = 1e-10)
        .def("verify",
             [](const PyRevolution& s, const std::string& which, int n, std::uint64_t seed,
                const std::string& lk) { return s.h.check(which, n, seed, lk); },
             py::arg("check"), py::arg("n_samples") = 200, py::arg("seed") = 1,
             py::arg("lambda_kind") = "generators");
}
