#include "swarmform/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "swarmform/analysis.hpp"
#include "swarmform/errors.hpp"

namespace swarmform::cli {

namespace {

using nlohmann::json;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

const json& require_field(const json& j, const std::string& key) {
    if (!j.contains(key)) {
        throw ValidationError("missing field '" + key + "'");
    }
    return j.at(key);
}

double require_number(const json& j, const std::string& key) {
    const json& v = require_field(j, key);
    if (!v.is_number()) {
        throw ValidationError("field '" + key + "' must be a number");
    }
    return v.get<double>();
}

long require_integer(const json& j, const std::string& key) {
    const json& v = require_field(j, key);
    if (!v.is_number_integer()) {
        throw ValidationError("field '" + key + "' must be an integer");
    }
    return v.get<long>();
}

Eigen::Vector2d require_vec2(const json& j, const std::string& key) {
    const json& v = require_field(j, key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() ||
        !v[1].is_number()) {
        throw ValidationError("field '" + key +
                              "' must be an array of two numbers");
    }
    return {v[0].get<double>(), v[1].get<double>()};
}

controller::GainConfig parse_gains(const json& j, int n_agents,
                                   const graph::FormationSpec& spec) {
    controller::GainConfig gains;
    gains.a = require_number(j, "a");
    if (!(gains.a > 0.0)) throw ValidationError("gains.a must be > 0");
    gains.b = require_number(j, "b");
    if (!(gains.b > 0.0)) throw ValidationError("gains.b must be > 0");

    const json& k = require_field(j, "k");
    if (k.is_number()) {
        gains.k = Eigen::VectorXd::Constant(n_agents, k.get<double>());
    } else if (k.is_array()) {
        if (static_cast<int>(k.size()) != n_agents) {
            throw ValidationError("gains.k must have one entry per agent");
        }
        gains.k.resize(n_agents);
        for (int i = 0; i < n_agents; ++i) {
            if (!k[i].is_number()) {
                throw ValidationError("gains.k entries must be numbers");
            }
            gains.k(i) = k[i].get<double>();
        }
    } else {
        throw ValidationError("gains.k must be a number or an array");
    }
    if (!(gains.k.minCoeff() > 0.0)) {
        throw ValidationError("gains.k must be > 0");
    }

    if (j.contains("epsilon")) {
        gains.epsilon = require_number(j, "epsilon");
        if (!(gains.epsilon > 0.0)) {
            throw ValidationError("gains.epsilon must be > 0");
        }
    } else {
        // Default timescale separation when the file leaves epsilon out.
        gains.epsilon =
            controller::default_epsilon(spec, gains.a, gains.b, gains.k);
    }
    return gains;
}

sim::InitialCondition parse_initial(const json& j, int n_agents) {
    const json& type = require_field(j, "type");
    if (type == "random") {
        sim::RandomInit init;
        init.radius = require_number(j, "radius");
        if (!(init.radius > 0.0)) {
            throw ValidationError("initial.radius must be > 0");
        }
        const json& seed = require_field(j, "seed");
        if (!seed.is_number_integer() || seed.get<long long>() < 0) {
            throw ValidationError(
                "initial.seed must be a nonnegative integer");
        }
        init.seed = seed.get<std::uint64_t>();
        return init;
    }
    if (type == "explicit") {
        const json& poses = require_field(j, "poses");
        if (!poses.is_array() || static_cast<int>(poses.size()) != n_agents) {
            throw ValidationError("initial.poses must list one [x, y, theta] "
                                  "triple per agent");
        }
        sim::ExplicitInit init;
        init.poses.resize(n_agents);
        for (int i = 0; i < n_agents; ++i) {
            const json& p = poses[i];
            if (!p.is_array() || p.size() != 3 || !p[0].is_number() ||
                !p[1].is_number() || !p[2].is_number()) {
                throw ValidationError("initial.poses[" + std::to_string(i) +
                                      "] must be [x, y, theta]");
            }
            init.poses[i].position =
                Eigen::Vector2d(p[0].get<double>(), p[1].get<double>());
            init.poses[i].heading =
                dynamics::wrap_angle(p[2].get<double>());
        }
        return init;
    }
    throw ValidationError("initial.type must be \"random\" or \"explicit\"");
}

void edge_endpoints(const graph::FormationSpec& spec, int e, int* tail,
                    int* head) {
    *tail = -1;
    *head = -1;
    for (int i = 0; i < spec.n_agents; ++i) {
        if (spec.incidence(i, e) > 0.5) *tail = i;
        if (spec.incidence(i, e) < -0.5) *head = i;
    }
}

}  // namespace

sim::Scenario parse_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario file: " + path);

    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("scenario file " + path + ": " + e.what());
    }

    const long n_agents = require_integer(j, "n_agents");
    if (n_agents < 2) throw ValidationError("n_agents must be at least 2");

    const json& edges = require_field(j, "edges");
    if (!edges.is_array() || edges.empty()) {
        throw ValidationError("edges must be a non-empty array");
    }
    const int m = static_cast<int>(edges.size());
    Eigen::MatrixXd incidence = Eigen::MatrixXd::Zero(n_agents, m);
    for (int e = 0; e < m; ++e) {
        const json& pair = edges[e];
        if (!pair.is_array() || pair.size() != 2 ||
            !pair[0].is_number_integer() || !pair[1].is_number_integer()) {
            throw ValidationError("edges[" + std::to_string(e) +
                                  "] must be [tail, head]");
        }
        const long tail = pair[0].get<long>();
        const long head = pair[1].get<long>();
        if (tail < 1 || tail > n_agents || head < 1 || head > n_agents ||
            tail == head) {
            throw ValidationError("edges[" + std::to_string(e) +
                                  "]: endpoints must be distinct agents in "
                                  "[1, n_agents]");
        }
        incidence(tail - 1, e) = 1.0;
        incidence(head - 1, e) = -1.0;
    }

    const json& disp = require_field(j, "displacements");
    if (!disp.is_array() || static_cast<int>(disp.size()) != m) {
        throw ValidationError("displacements must list one [dx, dy] per edge");
    }
    std::vector<Eigen::Vector2d> d(m);
    for (int e = 0; e < m; ++e) {
        const json& v = disp[e];
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() ||
            !v[1].is_number()) {
            throw ValidationError("displacements[" + std::to_string(e) +
                                  "] must be [dx, dy]");
        }
        d[e] = Eigen::Vector2d(v[0].get<double>(), v[1].get<double>());
    }

    sim::Scenario sc;
    try {
        sc.spec = graph::build_spec(incidence, d);
    } catch (const MalformedIncidence& e) {
        throw ValidationError(std::string("edges: MalformedIncidence: ") +
                              e.what());
    } catch (const DisconnectedGraph& e) {
        throw ValidationError(std::string("edges: DisconnectedGraph: ") +
                              e.what());
    } catch (const UnrealizableDisplacements& e) {
        throw ValidationError(
            std::string("displacements: UnrealizableDisplacements: ") +
            e.what());
    }

    const json& gains = require_field(j, "gains");
    if (!gains.is_object()) throw ValidationError("gains must be an object");
    sc.gains = parse_gains(gains, static_cast<int>(n_agents), sc.spec);

    sc.target = require_vec2(j, "target");

    const json& initial = require_field(j, "initial");
    if (!initial.is_object()) {
        throw ValidationError("initial must be an object");
    }
    sc.initial = parse_initial(initial, static_cast<int>(n_agents));

    sc.t_final = require_number(j, "t_final");
    if (!(sc.t_final >= 0.0)) throw ValidationError("t_final must be >= 0");
    sc.dt = require_number(j, "dt");
    if (!(sc.dt > 0.0)) throw ValidationError("dt must be > 0");

    sc.name = std::filesystem::path(path).stem().string();
    return sc;
}

sim::Scenario load_scenario(const std::string& name_or_path) {
    if (auto builtin = sim::find_builtin(name_or_path)) {
        return *builtin;
    }
    if (std::filesystem::exists(name_or_path)) {
        return parse_scenario_file(name_or_path);
    }
    throw ValidationError("scenario '" + name_or_path +
                          "' is neither a builtin name nor an existing file");
}

std::string scenario_to_json(const sim::Scenario& sc) {
    std::ostringstream out;
    out << "{\n";
    out << "  \"n_agents\": " << sc.spec.n_agents << ",\n";

    out << "  \"edges\": [";
    for (int e = 0; e < sc.spec.n_edges(); ++e) {
        int tail, head;
        edge_endpoints(sc.spec, e, &tail, &head);
        out << (e ? ", " : "") << "[" << tail + 1 << ", " << head + 1 << "]";
    }
    out << "],\n";

    out << "  \"displacements\": [";
    for (int e = 0; e < sc.spec.n_edges(); ++e) {
        const Eigen::Vector2d& d = sc.spec.displacements[e];
        out << (e ? ", " : "") << "[" << fmt17(d.x()) << ", " << fmt17(d.y())
            << "]";
    }
    out << "],\n";

    out << "  \"gains\": {\"a\": " << fmt17(sc.gains.a)
        << ", \"b\": " << fmt17(sc.gains.b)
        << ", \"epsilon\": " << fmt17(sc.gains.epsilon) << ", \"k\": [";
    for (int i = 0; i < sc.gains.k.size(); ++i) {
        out << (i ? ", " : "") << fmt17(sc.gains.k(i));
    }
    out << "]},\n";

    out << "  \"target\": [" << fmt17(sc.target.x()) << ", "
        << fmt17(sc.target.y()) << "],\n";

    out << "  \"initial\": ";
    if (const auto* random = std::get_if<sim::RandomInit>(&sc.initial)) {
        out << "{\"type\": \"random\", \"radius\": " << fmt17(random->radius)
            << ", \"seed\": " << random->seed << "},\n";
    } else {
        const auto& poses = std::get<sim::ExplicitInit>(sc.initial).poses;
        out << "{\"type\": \"explicit\", \"poses\": [";
        for (size_t i = 0; i < poses.size(); ++i) {
            out << (i ? ", " : "") << "[" << fmt17(poses[i].position.x())
                << ", " << fmt17(poses[i].position.y()) << ", "
                << fmt17(poses[i].heading) << "]";
        }
        out << "]},\n";
    }

    out << "  \"t_final\": " << fmt17(sc.t_final) << ",\n";
    out << "  \"dt\": " << fmt17(sc.dt) << "\n";
    out << "}\n";
    return out.str();
}

namespace {

void write_trajectory_csv(std::ostream& out, const sim::Trajectory& traj) {
    const int n = traj.samples.front().state.n_agents();
    out << "t";
    for (int i = 1; i <= n; ++i) {
        out << ",x_" << i << ",y_" << i << ",theta_" << i << ",u_x" << i
            << ",u_y" << i;
    }
    out << ",cost,grad_norm,formation_residual,target_distance\n";
    for (const sim::Sample& s : traj.samples) {
        out << fmt17(s.time);
        for (int i = 0; i < n; ++i) {
            const auto& pose = s.state.poses[i];
            out << "," << fmt17(pose.position.x()) << ","
                << fmt17(pose.position.y()) << "," << fmt17(pose.heading)
                << "," << fmt17(s.state.inputs(2 * i)) << ","
                << fmt17(s.state.inputs(2 * i + 1));
        }
        out << "," << fmt17(s.cost_total) << "," << fmt17(s.gradient_norm)
            << "," << fmt17(s.formation_residual) << ","
            << fmt17(s.target_distance) << "\n";
    }
}

void write_summary_json(std::ostream& out, const sim::Scenario& sc,
                        sim::Mode mode,
                        const analysis::SteadyStateReport& report,
                        const sim::ConvergenceVerdict& verdict) {
    out << "{\n";
    out << "  \"scenario\": \"" << sc.name << "\",\n";
    out << "  \"mode\": \""
        << (mode == sim::Mode::Centralized ? "centralized" : "distributed")
        << "\",\n";
    out << "  \"dt\": " << fmt17(sc.dt) << ",\n";
    out << "  \"t_final\": " << fmt17(sc.t_final) << ",\n";
    out << "  \"epsilon\": " << fmt17(sc.gains.epsilon) << ",\n";

    out << "  \"steady_state\": {\n";
    out << "    \"r_inf\": [";
    for (int i = 0; i < report.r_inf.size(); ++i) {
        out << (i ? ", " : "") << fmt17(report.r_inf(i));
    }
    out << "],\n";
    out << "    \"formation_residual\": " << fmt17(report.formation_residual)
        << ",\n";
    out << "    \"target_distance\": " << fmt17(report.target_distance)
        << ",\n";
    out << "    \"d_q_norm\": " << fmt17(report.d_q_norm) << ",\n";
    out << "    \"gain_ratio\": " << fmt17(report.gain_ratio) << ",\n";
    out << "    \"shrink_factor\": " << fmt17(report.shrink_factor) << ",\n";
    out << "    \"in_formation\": "
        << (report.in_formation ? "true" : "false") << "\n";
    out << "  },\n";

    out << "  \"verdict\": {\n";
    out << "    \"converged\": " << (verdict.converged ? "true" : "false")
        << ",\n";
    out << "    \"t_converged\": "
        << (verdict.t_converged ? fmt17(*verdict.t_converged) : "null")
        << ",\n";
    out << "    \"final_formation_residual\": "
        << fmt17(verdict.final_formation_residual) << ",\n";
    out << "    \"final_target_distance\": "
        << fmt17(verdict.final_target_distance) << ",\n";
    out << "    \"r_inf_deviation\": " << fmt17(verdict.r_inf_deviation)
        << "\n";
    out << "  }\n";
    out << "}\n";
}

int run_sweep(const RunConfig& config, const sim::Scenario& base) {
    const auto& a_values = config.sweep_a;
    for (size_t i = 0; i < a_values.size(); ++i) {
        if (!(a_values[i] > 0.0)) {
            throw ValidationError("sweep a values must be > 0");
        }
        if (i > 0 && a_values[i] < a_values[i - 1]) {
            throw ValidationError("sweep a values must be non-decreasing");
        }
    }

    const auto curve = analysis::formation_error_curve(
        base.spec, base.target, base.gains.b, a_values);

    std::ostringstream csv;
    csv << "a,gain_ratio,formation_residual,target_distance,"
           "sim_formation_residual,sim_target_distance\n";
    for (size_t i = 0; i < curve.size(); ++i) {
        sim::Scenario sc = base;
        sc.gains.a = curve[i].a;
        // Each row re-derives its own timescale; a fixed epsilon would
        // violate the separation heuristic as a grows.
        sc.gains.epsilon = controller::default_epsilon(
            sc.spec, sc.gains.a, sc.gains.b, sc.gains.k);
        const sim::Trajectory traj = sim::integrate(sc, config.mode);
        const sim::Sample& last = traj.samples.back();

        csv << fmt17(curve[i].a) << "," << fmt17(curve[i].gain_ratio) << ","
            << fmt17(curve[i].formation_residual) << ","
            << fmt17(curve[i].target_distance) << ","
            << fmt17(last.formation_residual) << ","
            << fmt17(last.target_distance) << "\n";
        std::cout << base.name << " sweep a=" << fmt17(curve[i].a)
                  << ": gain_ratio=" << fmt17(curve[i].gain_ratio)
                  << " formation_residual=" << fmt17(last.formation_residual)
                  << "\n";
    }

    const auto path = std::filesystem::path(config.output_dir) / "curve.csv";
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << csv.str();
    return kExitConverged;
}

}  // namespace

int run(const RunConfig& config) {
    try {
        sim::Scenario sc = load_scenario(config.scenario);
        if (config.dt) {
            if (!(*config.dt > 0.0)) throw ValidationError("--dt must be > 0");
            sc.dt = *config.dt;
        }
        if (config.t_final) {
            if (!(*config.t_final >= 0.0)) {
                throw ValidationError("--t-final must be >= 0");
            }
            sc.t_final = *config.t_final;
        }
        if (config.seed) {
            if (auto* random = std::get_if<sim::RandomInit>(&sc.initial)) {
                random->seed = *config.seed;
            } else {
                std::cerr << "note: --seed ignored, scenario has explicit "
                             "initial poses\n";
            }
        }
        std::filesystem::create_directories(config.output_dir);

        if (!config.sweep_a.empty()) return run_sweep(config, sc);

        const sim::Trajectory traj = sim::integrate(sc, config.mode);
        const sim::ConvergenceVerdict verdict =
            sim::detect_convergence(traj, sc.spec, sc.gains, sc.target);
        const analysis::SteadyStateReport report =
            analysis::steady_state_report(sc.spec, sc.gains, sc.target);

        const auto dir = std::filesystem::path(config.output_dir);
        if (config.emit.count("trajectory_csv")) {
            std::ofstream out(dir / "trajectory.csv");
            if (!out) throw Error("cannot write trajectory.csv");
            write_trajectory_csv(out, traj);
        }
        if (config.emit.count("summary_json")) {
            std::ofstream out(dir / "summary.json");
            if (!out) throw Error("cannot write summary.json");
            write_summary_json(out, sc, config.mode, report, verdict);
        }

        std::cout << sc.name << " ("
                  << (config.mode == sim::Mode::Centralized ? "centralized"
                                                            : "distributed")
                  << "): "
                  << (verdict.converged ? "converged" : "did not converge");
        if (verdict.t_converged) {
            std::cout << " at t=" << fmt17(*verdict.t_converged);
        }
        std::cout << ", formation_residual="
                  << fmt17(verdict.final_formation_residual)
                  << ", r_inf_deviation=" << fmt17(verdict.r_inf_deviation)
                  << "\n";
        return verdict.converged ? kExitConverged : kExitNotConverged;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
}

int main_cli(int argc, char** argv) {
    CLI::App app{"Formation-control simulation and steady-state analysis "
                 "for unicycle swarms"};

    RunConfig config;
    std::string mode = "centralized";
    double dt = 0.0, t_final = 0.0;
    std::uint64_t seed = 0;
    std::vector<std::string> emit;

    app.add_option("--scenario", config.scenario,
                   "builtin name (pentagon, e-shape-good, e-shape-bad) or "
                   "path to a scenario JSON file")
        ->required();
    app.add_option("--mode", mode, "input-derivative realization")
        ->check(CLI::IsMember({"centralized", "distributed"}));
    auto* dt_opt = app.add_option("--dt", dt, "integration step override");
    auto* tf_opt =
        app.add_option("--t-final", t_final, "horizon override, seconds");
    auto* seed_opt =
        app.add_option("--seed", seed, "override the random-init seed");
    app.add_option("--out", config.output_dir, "output directory");
    app.add_option("--emit", emit,
                   "comma list of trajectory_csv,summary_json,curve_csv")
        ->delimiter(',')
        ->check(CLI::IsMember({"trajectory_csv", "summary_json",
                               "curve_csv"}));
    app.add_option("--sweep-a", config.sweep_a,
                   "comma list of formation gains; runs a sweep and writes "
                   "curve.csv")
        ->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    config.mode = (mode == "distributed") ? sim::Mode::Distributed
                                          : sim::Mode::Centralized;
    if (dt_opt->count()) config.dt = dt;
    if (tf_opt->count()) config.t_final = t_final;
    if (seed_opt->count()) config.seed = seed;
    if (!emit.empty()) {
        config.emit = std::set<std::string>(emit.begin(), emit.end());
    } else if (!config.sweep_a.empty()) {
        config.emit = {"curve_csv"};
    }
    return run(config);
}

}  // namespace swarmform::cli
