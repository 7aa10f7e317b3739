#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "nonholo/chaplygin.hpp"
#include "nonholo/dynamics.hpp"
#include "nonholo/revolution.hpp"
#include "nonholo/verification.hpp"
#include "nonholo/version.hpp"

#include "config.hpp"

using nlohmann::json;
using namespace nonholo;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitVerify = 4;

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::uint64_t effective_seed(const Config& cfg) {
    if (const char* env = std::getenv("NONHOLO_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw ConfigError("NONHOLO_SEED is not an integer");
        }
    }
    return static_cast<std::uint64_t>(cfg.get_long("seed", 20240601));
}

ChaplyginParams chaplygin_params(const Config& cfg) {
    ChaplyginParams p;
    p.I1 = cfg.get_double("chaplygin.I1", 2.0);
    p.I3 = cfg.get_double("chaplygin.I3", 1.0);
    p.m = cfg.get_double("chaplygin.m", 1.0);
    p.R = cfg.get_double("chaplygin.R", 1.0);
    if (!(p.I1 > 0 && p.I3 > 0 && p.m > 0 && p.R > 0))
        throw ConfigError("chaplygin parameters must be positive");
    const std::string pot = cfg.get_string("chaplygin.potential", "none");
    if (pot == "cos-theta") {
        const double v0 = cfg.get_double("chaplygin.v0", 1.0);
        p.V = [v0](double th, double) { return v0 * std::cos(th); };
        p.dV = [v0](double th, double) { return Eigen::Vector2d(-v0 * std::sin(th), 0.0); };
    } else if (pot != "none") {
        throw ConfigError("chaplygin.potential must be none or cos-theta");
    }
    return p;
}

ShapeProfile revolution_profile(const Config& cfg) {
    const std::string name = cfg.get_string("revolution.profile", "sphere");
    if (name == "sphere") return ShapeProfile::sphere(cfg.get_double("revolution.radius", 1.0));
    if (name == "offset-sphere")
        return ShapeProfile::offset_sphere(cfg.get_double("revolution.radius", 1.0),
                                           cfg.get_double("revolution.offset", 0.3));
    if (name == "ellipsoid")
        return ShapeProfile::ellipsoid(cfg.get_double("revolution.a", 1.0),
                                       cfg.get_double("revolution.c", 1.5));
    throw ConfigError("revolution.profile must be sphere, ellipsoid or offset-sphere");
}

RevolutionParams revolution_params(const Config& cfg, const ShapeProfile& profile) {
    RevolutionParams p;
    p.I1 = cfg.get_double("revolution.I1", 2.0);
    p.I3 = cfg.get_double("revolution.I3", 1.0);
    p.m = cfg.get_double("revolution.m", 1.0);
    if (!(p.I1 > 0 && p.I3 > 0 && p.m > 0))
        throw ConfigError("revolution parameters must be positive");
    const std::string pot = cfg.get_string("revolution.potential", "none");
    if (pot == "gravity") {
        const double g0 = cfg.get_double("revolution.g0", 9.81);
        const double m = p.m;
        const ShapeProfile pr = profile;
        p.V_theta = [m, g0, pr](double th) { return m * g0 * pr.z_theta(th); };
        p.dV_theta = [m, g0, pr](double th) { return m * g0 * pr.a2_theta(th); };
    } else if (pot != "none") {
        throw ConfigError("revolution.potential must be none or gravity");
    }
    return p;
}

IntegratorConfig integrator_config(const Config& cfg) {
    IntegratorConfig ic;
    const std::string method = cfg.get_string("integrate.method", "rk4");
    if (method == "rk4")
        ic.method = IntegratorMethod::Rk4Fixed;
    else if (method == "rkf45")
        ic.method = IntegratorMethod::Rkf45Adaptive;
    else
        throw ConfigError("integrate.method must be rk4 or rkf45");
    ic.step = cfg.get_double("integrate.step", 1e-3);
    ic.rtol = cfg.get_double("integrate.rtol", 1e-8);
    ic.atol = cfg.get_double("integrate.atol", 1e-10);
    ic.t_end = cfg.get_double("integrate.t_end", 10.0);
    ic.sample_stride = static_cast<int>(cfg.get_long("integrate.sample_stride", 10));
    if (!(ic.step > 0)) throw ConfigError("integrate.step must be positive");
    if (!(ic.t_end > 0)) throw ConfigError("integrate.t_end must be positive");
    return ic;
}

PhaseState initial_state(const Config& cfg, int n, int r) {
    const std::vector<double> q = cfg.get_doubles("state.q", {0.4, 1.1, 0.7, 0.0, 0.0});
    const std::vector<double> pi = cfg.get_doubles("state.pi", {0.6, 0.3, -0.4});
    if (static_cast<int>(q.size()) != n || static_cast<int>(pi.size()) != r)
        throw ConfigError("state.q / state.pi have wrong dimensions");
    PhaseState s;
    s.q = Eigen::Map<const Vec>(q.data(), n);
    s.pi = Eigen::Map<const Vec>(pi.data(), r);
    return s;
}

struct LoadedSystem {
    std::string kind; // chaplygin | revolution
    ChaplyginParams chap;
    std::optional<RevolutionModel> rev;
    MechanicalSystem system;
};

LoadedSystem load_system(const Config& cfg, const std::string& kind_override = "") {
    LoadedSystem out;
    out.kind = kind_override.empty() ? cfg.require_string("system") : kind_override;
    const double theta_min = cfg.get_double("chart.theta_min", 1e-3);
    if (out.kind == "chaplygin") {
        out.chap = chaplygin_params(cfg);
        out.system = build_chaplygin(out.chap, theta_min);
    } else if (out.kind == "revolution") {
        const ShapeProfile profile = revolution_profile(cfg);
        out.rev = build_revolution(profile, revolution_params(cfg, profile),
                                   static_cast<int>(cfg.get_long("revolution.ode_steps", 4000)),
                                   theta_min);
        out.system = out.rev->system;
    } else {
        throw ConfigError("system must be chaplygin or revolution");
    }
    return out;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << content;
}

int cmd_simulate(const Config& cfg, const std::string& output_prefix) {
    LoadedSystem sys = load_system(cfg);
    const IntegratorConfig ic = integrator_config(cfg);
    const PhaseState s0 = initial_state(cfg, sys.system.n, sys.system.r);

    std::vector<Monitor> monitors;
    const MechanicalSystem& m = sys.system;
    monitors.push_back({"H", [&m](const PhaseState& s) { return hamiltonian(m, s); }});
    if (sys.kind == "chaplygin") {
        const GaugeGenerator z1 = chaplygin_z1();
        monitors.push_back(
            {"p_Z1", [&m, z1](const PhaseState& s) { return momentum_value(m, z1, s); }});
    } else {
        const RevolutionModel& model = *sys.rev;
        for (int j = 0; j < 2; ++j) {
            monitors.push_back({j == 0 ? "p_Z1" : "p_Z2", [&model, j](const PhaseState& s) {
                                    const ReducedRevolution red = reduce_revolution(model, s);
                                    return casimir_mg(model, j, red.M, red.gamma);
                                }});
        }
    }

    std::string status = "completed";
    std::string failure;
    Trajectory traj;
    try {
        traj = integrate(sys.system, s0, ic, monitors);
    } catch (const ChartExit& e) {
        status = "chart-exit";
        failure = e.what();
        traj = e.partial;
    } catch (const StepUnderflow& e) {
        status = "step-underflow";
        failure = e.what();
        traj = e.partial;
    }

    // trajectory CSV
    std::ostringstream csv;
    csv << "t";
    for (const auto& name : sys.system.coord_names) csv << "," << name;
    for (int a = 1; a <= sys.system.r; ++a) csv << ",pi" << a;
    for (const auto& mon : monitors) csv << "," << mon.name;
    csv << ",M1,M2,M3,gamma1,gamma2,gamma3";
    if (sys.kind == "revolution") csv << ",sigma1,sigma2,sigma3,sigma4,sigma5";
    csv << "\n";
    for (size_t i = 0; i < traj.times.size(); ++i) {
        csv << fmt(traj.times[i]);
        const PhaseState& s = traj.states[i];
        for (int c = 0; c < sys.system.n; ++c) csv << "," << fmt(s.q[c]);
        for (int a = 0; a < sys.system.r; ++a) csv << "," << fmt(s.pi[a]);
        for (const auto& mon : monitors) csv << "," << fmt(traj.monitors.at(mon.name)[i]);
        if (sys.kind == "chaplygin") {
            const ReducedStateMG red = reduce_to_mg(sys.chap, s);
            for (int c = 0; c < 3; ++c) csv << "," << fmt(red.M[c]);
            for (int c = 0; c < 3; ++c) csv << "," << fmt(red.gamma[c]);
        } else {
            const ReducedRevolution red = reduce_revolution(*sys.rev, s);
            for (int c = 0; c < 3; ++c) csv << "," << fmt(red.M[c]);
            for (int c = 0; c < 3; ++c) csv << "," << fmt(red.gamma[c]);
            for (int c = 0; c < 5; ++c) csv << "," << fmt(red.sigma[c]);
        }
        csv << "\n";
    }
    write_file(output_prefix + ".csv", csv.str());

    json summary;
    summary["version"] = kVersion;
    summary["system"] = sys.system.name;
    summary["method"] = (ic.method == IntegratorMethod::Rk4Fixed) ? "rk4-fixed" : "rkf45-adaptive";
    summary["step"] = ic.step;
    summary["t_end"] = ic.t_end;
    summary["samples"] = traj.times.size();
    summary["status"] = status;
    if (!failure.empty()) summary["failure"] = failure;
    for (const auto& [name, series] : traj.monitors) {
        if (series.empty()) continue;
        double max_drift = 0.0;
        for (double v : series) max_drift = std::max(max_drift, std::abs(v - series.front()));
        json entry;
        entry["initial"] = series.front();
        entry["final"] = series.back();
        entry["max_abs_drift"] = max_drift;
        if (name == "H" && std::abs(series.front()) > 0)
            entry["max_rel_drift"] = max_drift / std::abs(series.front());
        summary["monitors"][name] = entry;
    }
    write_file(output_prefix + ".json", summary.dump(2) + "\n");

    if (status != "completed") {
        std::cerr << "integration failed (" << status << "): " << failure << "\n";
        return kExitRuntime;
    }
    std::cout << output_prefix << ".csv written (" << traj.times.size() << " samples)\n";
    return 0;
}

CheckReport run_rank2_check(const Config& cfg, const std::string& target, std::uint64_t seed,
                            int n_triples) {
    if (target == "chaplygin-intermediate" || target == "chaplygin") {
        const ChaplyginParams p = chaplygin_params(cfg);
        const bool expected_fail = std::abs(p.I1 - p.I3) > 1e-12;
        auto bracket = [p](const Vec& x) -> Mat {
            return reduced_bracket_mg(p, x.head<3>(), x.tail<3>());
        };
        return verify_rank2_jacobi("chaplygin-intermediate", bracket, mg_coordinate_fields(),
                                   mg_sampler(), n_triples, seed, 1e-7, expected_fail);
    }
    // revolution: the ultimate reduced bracket, probed through sigma triples
    const ShapeProfile profile = revolution_profile(cfg);
    const RevolutionModel model = build_revolution(profile, revolution_params(cfg, profile));
    auto bracket = [model](const Vec& x) -> Mat {
        return reduced_bracket_revolution(model, x.head<3>(), x.tail<3>());
    };
    return verify_rank2_jacobi("revolution-sigma", bracket, sigma_invariant_fields(), mg_sampler(),
                               n_triples, seed, 1e-7, false);
}

int cmd_verify(const Config& cfg, const std::string& check, const std::string& system_override,
               const std::string& lambda_choice, int jobs, const std::string& output_path) {
    const std::uint64_t seed = effective_seed(cfg);
    const int n_samples = static_cast<int>(cfg.get_long("verify.n_samples", 1000));
    const int n_triples = static_cast<int>(cfg.get_long("verify.n_triples", 200));

    std::string kind = system_override;
    if (kind == "chaplygin-intermediate") kind = "chaplygin";
    LoadedSystem sys = load_system(cfg, kind);

    ThreeForm lam;
    if (lambda_choice == "generators")
        lam = lambda_from_generators(sys.system, sys.system.n_gauge);
    else if (lambda_choice == "random")
        lam = random_three_form(sys.system, seed + 1);
    else if (lambda_choice != "zero")
        throw ConfigError("--lambda must be generators, zero or random");

    const StateSampler sampler = default_state_sampler(sys.system);
    std::vector<std::function<CheckReport()>> tasks;
    const std::string rank2_target =
        system_override.empty() ? sys.kind : system_override;

    if (check == "casimir" || check == "all")
        tasks.push_back([&sys, &lam, &sampler, n_samples, seed] {
            return verify_theorem_main(sys.system, lam, sampler, n_samples, seed);
        });
    if (check == "dynamics-equivalence" || check == "all")
        tasks.push_back([&sys, &lam, &sampler, n_samples, seed] {
            return verify_dynamics_equivalence(sys.system, lam, sampler, n_samples, seed);
        });
    if (check == "invertibility" || check == "all")
        tasks.push_back([&sys, &lam, &sampler, n_samples, seed] {
            return verify_invertibility(sys.system, lam, sampler, n_samples, seed);
        });
    if (check == "rank2-jacobi" || check == "all")
        tasks.push_back([&cfg, &rank2_target, seed, n_triples] {
            return run_rank2_check(cfg, rank2_target, seed, n_triples);
        });
    if (tasks.empty()) throw ConfigError("unknown check: " + check);

    std::vector<CheckReport> reports(tasks.size());
    if (jobs > 1) {
        std::vector<std::future<CheckReport>> futures;
        futures.reserve(tasks.size());
        for (auto& t : tasks) futures.push_back(std::async(std::launch::async, t));
        for (size_t i = 0; i < futures.size(); ++i) reports[i] = futures[i].get();
    } else {
        for (size_t i = 0; i < tasks.size(); ++i) reports[i] = tasks[i]();
    }

    json out = json::array();
    bool all_ok = true;
    for (const auto& r : reports) {
        out.push_back(r.to_json());
        all_ok = all_ok && r.ok();
    }
    json doc;
    doc["version"] = kVersion;
    doc["reports"] = out;
    const std::string text = doc.dump(2) + "\n";
    std::cout << text;
    if (!output_path.empty()) write_file(output_path, text);
    return all_ok ? 0 : kExitVerify;
}

int cmd_gauge_ode(const Config& cfg, const std::string& output_prefix) {
    if (cfg.require_string("system") != "revolution")
        throw ConfigError("gauge-ode requires system = revolution");
    const ShapeProfile profile = revolution_profile(cfg);
    const RevolutionParams params = revolution_params(cfg, profile);
    const int n_steps = static_cast<int>(cfg.get_long("revolution.ode_steps", 4000));
    const auto sols = solve_gauge_ode(profile, params, n_steps);

    std::ostringstream csv;
    csv << "theta,g1,k1,g2,k2\n";
    for (size_t i = 0; i < sols[0].theta.size(); ++i)
        csv << fmt(sols[0].theta[i]) << "," << fmt(sols[0].x[i][0]) << "," << fmt(sols[0].x[i][1])
            << "," << fmt(sols[1].x[i][0]) << "," << fmt(sols[1].x[i][1]) << "\n";
    write_file(output_prefix + ".csv", csv.str());

    json doc;
    doc["version"] = kVersion;
    doc["profile"] = profile.name;
    doc["n_steps"] = n_steps;
    for (int j = 0; j < 2; ++j) {
        json entry;
        entry["evenness_residual"] = sols[j].evenness_residual;
        entry["periodicity_residual"] = sols[j].periodicity_residual;
        doc["solutions"].push_back(entry);
    }
    write_file(output_prefix + ".json", doc.dump(2) + "\n");
    std::cout << output_prefix << ".csv written\n";
    return 0;
}

int cmd_bracket_table(const Config& cfg) {
    LoadedSystem sys = load_system(cfg);
    const PhaseState s = initial_state(cfg, sys.system.n, sys.system.r);
    const ThreeForm lam = lambda_from_generators(sys.system, sys.system.n_gauge);
    const FrameData fd = frame_at(sys.system, s.q);
    const BivectorBlocks nh = pi_nh(sys.system, s);
    const BivectorBlocks gl = gauge_transform(sys.system, lam, s);

    auto mat_json = [](const Mat& m) {
        json rows = json::array();
        for (int i = 0; i < m.rows(); ++i) {
            json row = json::array();
            for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
            rows.push_back(row);
        }
        return rows;
    };

    json doc;
    doc["version"] = kVersion;
    doc["system"] = sys.system.name;
    doc["q"] = std::vector<double>(s.q.data(), s.q.data() + s.q.size());
    doc["pi"] = std::vector<double>(s.pi.data(), s.pi.data() + s.pi.size());
    doc["gram"] = mat_json(fd.gram);
    doc["gram_inv"] = mat_json(fd.gram_inv);
    doc["pi_nh"] = {{"rho", mat_json(nh.rho)}, {"lower_right", mat_json(nh.lower_right)}};
    doc["pi_lambda"] = {{"rho", mat_json(gl.rho)}, {"lower_right", mat_json(gl.lower_right)}};
    std::cout << doc.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"almost-Poisson brackets for nonholonomic systems"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string output = "";

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "configuration file");
        cmd->add_option("--set", overrides, "override config entries as key=value");
    };

    auto* sim = app.add_subcommand("simulate", "integrate the nonholonomic flow");
    add_common(sim);
    double t_end_override = -1.0;
    sim->add_option("--t-end", t_end_override, "integration time override");
    sim->add_option("--output", output, "output prefix (default from config)");

    auto* ver = app.add_subcommand("verify", "run theorem-level checks");
    add_common(ver);
    std::string check = "all", system_override = "", lambda_choice = "generators";
    int jobs = 1;
    ver->add_option("--check", check, "all|casimir|dynamics-equivalence|invertibility|rank2-jacobi");
    ver->add_option("--system", system_override,
                    "chaplygin|revolution|chaplygin-intermediate override");
    ver->add_option("--lambda", lambda_choice, "generators|zero|random");
    ver->add_option("--jobs", jobs, "run checks in parallel");
    ver->add_option("--output", output, "also write the JSON report here");

    auto* ode = app.add_subcommand("gauge-ode", "solve the gauge-momentum ODE");
    add_common(ode);
    ode->add_option("--output", output, "output prefix");

    auto* bt = app.add_subcommand("bracket-table", "dump bracket blocks at a state");
    add_common(bt);

    CLI11_PARSE(app, argc, argv);

    try {
        Config cfg = config_path.empty() ? Config() : Config::from_file(config_path);
        for (const auto& o : overrides) cfg.apply_override(o);

        if (sim->parsed()) {
            if (t_end_override > 0.0) cfg.set("integrate.t_end", fmt(t_end_override));
            const std::string prefix =
                output.empty() ? cfg.get_string("output.prefix", "trajectory") : output;
            return cmd_simulate(cfg, prefix);
        }
        if (ver->parsed()) return cmd_verify(cfg, check, system_override, lambda_choice, jobs, output);
        if (ode->parsed()) {
            const std::string prefix =
                output.empty() ? cfg.get_string("output.prefix", "gauge_ode") : output;
            return cmd_gauge_ode(cfg, prefix);
        }
        if (bt->parsed()) return cmd_bracket_table(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const FloquetViolation& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const Error& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
