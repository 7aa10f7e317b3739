#include "nonholo/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace nonholo {

PhaseState pack_state(const Vec& x, int n, int r) {
    PhaseState s;
    s.q = x.head(n);
    s.pi = x.tail(r);
    return s;
}

Vec unpack_state(const PhaseState& s) {
    Vec x(s.q.size() + s.pi.size());
    x << s.q, s.pi;
    return x;
}

Vec nh_vector_field(const MechanicalSystem& sys, const PhaseState& state) {
    FrameData fd = frame_at(sys, state.q);
    const Vec dh = hamiltonian_gradient(sys, state);
    Vec out(sys.n + sys.r);
    out.head(sys.n) = fd.rho * dh.tail(sys.r);
    Mat c(sys.r, sys.r); // C_{alpha beta} = C^gamma_{alpha beta} pi_gamma
    for (int a = 0; a < sys.r; ++a)
        for (int b = 0; b < sys.r; ++b) {
            double s = 0.0;
            for (int g = 0; g < sys.r; ++g) s += fd.c_up(g, a, b) * state.pi[g];
            c(a, b) = s;
        }
    out.tail(sys.r) = -fd.rho.transpose() * dh.head(sys.n) - c * dh.tail(sys.r);
    return out;
}

namespace {

Vec rk4_step(const std::function<Vec(const Vec&)>& f, const Vec& x, double h) {
    const Vec k1 = f(x);
    const Vec k2 = f(x + 0.5 * h * k1);
    const Vec k3 = f(x + 0.5 * h * k2);
    const Vec k4 = f(x + h * k3);
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Fehlberg 4(5) pair; returns the 5th-order solution and the error estimate.
std::pair<Vec, double> rkf45_step(const std::function<Vec(const Vec&)>& f, const Vec& x,
                                  double h, double rtol, double atol) {
    const Vec k1 = f(x);
    const Vec k2 = f(x + h * (k1 / 4.0));
    const Vec k3 = f(x + h * (3.0 / 32.0 * k1 + 9.0 / 32.0 * k2));
    const Vec k4 = f(x + h * (1932.0 / 2197.0 * k1 - 7200.0 / 2197.0 * k2 + 7296.0 / 2197.0 * k3));
    const Vec k5 = f(x + h * (439.0 / 216.0 * k1 - 8.0 * k2 + 3680.0 / 513.0 * k3 -
                              845.0 / 4104.0 * k4));
    const Vec k6 = f(x + h * (-8.0 / 27.0 * k1 + 2.0 * k2 - 3544.0 / 2565.0 * k3 +
                              1859.0 / 4104.0 * k4 - 11.0 / 40.0 * k5));
    const Vec x5 = x + h * (16.0 / 135.0 * k1 + 6656.0 / 12825.0 * k3 + 28561.0 / 56430.0 * k4 -
                            9.0 / 50.0 * k5 + 2.0 / 55.0 * k6);
    const Vec x4 = x + h * (25.0 / 216.0 * k1 + 1408.0 / 2565.0 * k3 + 2197.0 / 4104.0 * k4 -
                            1.0 / 5.0 * k5);
    double err = 0.0;
    for (int i = 0; i < x.size(); ++i) {
        const double sc = atol + rtol * std::max(std::abs(x[i]), std::abs(x5[i]));
        err = std::max(err, std::abs(x5[i] - x4[i]) / sc);
    }
    return {x5, err};
}

} // namespace

Vec integrate_flow(const std::function<Vec(const Vec&)>& rhs, Vec x, double t_end,
                   const IntegratorConfig& cfg) {
    if (cfg.method == IntegratorMethod::Rk4Fixed) {
        const long nsteps = std::lround(t_end / cfg.step);
        const double h = t_end / static_cast<double>(std::max(nsteps, 1L));
        for (long i = 0; i < std::max(nsteps, 1L); ++i) x = rk4_step(rhs, x, h);
        return x;
    }
    double t = 0.0;
    double h = std::min(cfg.step, t_end);
    double prev_err = 1.0;
    while (t < t_end) {
        h = std::min(h, t_end - t);
        auto [xn, err] = rkf45_step(rhs, x, h, cfg.rtol, cfg.atol);
        if (err <= 1.0) {
            t += h;
            x = xn;
            const double fac = 0.9 * std::pow(err + 1e-16, -0.7 / 5.0) *
                               std::pow(prev_err + 1e-16, 0.4 / 5.0);
            h *= std::clamp(fac, 0.2, 5.0);
            prev_err = err;
        } else {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.25));
        }
        if (h < 1e-14) throw StepUnderflow("adaptive step fell below 1e-14", Trajectory{});
    }
    return x;
}

Trajectory integrate(const MechanicalSystem& sys, const PhaseState& state0,
                     const IntegratorConfig& cfg, const std::vector<Monitor>& monitors) {
    if (!(cfg.step > 0.0)) throw ConfigError("integrator step must be positive");
    if (cfg.method == IntegratorMethod::Rkf45Adaptive &&
        !(cfg.rtol > 0.0 && cfg.rtol <= 1e-2 && cfg.atol > 0.0 && cfg.atol <= 1e-2))
        throw ConfigError("tolerances must lie in (0, 1e-2]");
    require_in_chart(sys, state0.q);

    const auto rhs = [&sys](const Vec& x) {
        return nh_vector_field(sys, pack_state(x, sys.n, sys.r));
    };

    Trajectory traj;
    const auto record = [&](double t, const Vec& x) {
        const PhaseState s = pack_state(x, sys.n, sys.r);
        require_in_chart(sys, s.q); // keep the stored series consistent on abort
        std::vector<double> values;
        values.reserve(monitors.size());
        for (const auto& m : monitors) values.push_back(m.fn(s));
        traj.times.push_back(t);
        traj.states.push_back(s);
        for (size_t i = 0; i < monitors.size(); ++i)
            traj.monitors[monitors[i].name].push_back(values[i]);
    };

    Vec x = unpack_state(state0);
    double t = 0.0;
    record(t, x);

    const int stride = std::max(1, cfg.sample_stride);
    long accepted = 0;

    try {
        if (cfg.method == IntegratorMethod::Rk4Fixed) {
            const long nsteps = std::max(1L, std::lround(cfg.t_end / cfg.step));
            const double h = cfg.t_end / static_cast<double>(nsteps);
            for (long i = 0; i < nsteps; ++i) {
                x = rk4_step(rhs, x, h);
                t = (i + 1) * h;
                ++accepted;
                if (accepted % stride == 0 || i + 1 == nsteps) record(t, x);
            }
        } else {
            double h = std::min(cfg.step, cfg.t_end);
            double prev_err = 1.0;
            while (t < cfg.t_end) {
                h = std::min(h, cfg.t_end - t);
                auto [xn, err] = rkf45_step(rhs, x, h, cfg.rtol, cfg.atol);
                if (err <= 1.0) {
                    t += h;
                    x = xn;
                    ++accepted;
                    if (accepted % stride == 0 || t >= cfg.t_end) record(t, x);
                    const double fac = 0.9 * std::pow(err + 1e-16, -0.7 / 5.0) *
                                       std::pow(prev_err + 1e-16, 0.4 / 5.0);
                    h *= std::clamp(fac, 0.2, 5.0);
                    prev_err = err;
                } else {
                    h *= std::max(0.2, 0.9 * std::pow(err, -0.25));
                }
                if (h < 1e-14)
                    throw StepUnderflow("adaptive step fell below 1e-14 at t = " + std::to_string(t),
                                        std::move(traj));
            }
        }
    } catch (const OutOfChart& e) {
        throw ChartExit("trajectory reached the chart boundary at t = " + std::to_string(t) +
                            ": " + e.what(),
                        std::move(traj));
    }
    return traj;
}

} // namespace nonholo
