#include "swarmform/sim.hpp"

#include <cmath>
#include <random>
#include <string>

#include "swarmform/analysis.hpp"
#include "swarmform/distributed.hpp"
#include "swarmform/errors.hpp"

namespace swarmform::sim {

namespace {

// Raw generator words mapped straight to [0, 1); std::uniform_real_
// distribution is implementation-defined and would break cross-platform
// byte-identical replays.
double next_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Flat layout used by the integrator: [x_i, y_i, theta_i] per agent, then
// the stacked inputs.
Eigen::VectorXd flatten(const SwarmState& state) {
    const int n = state.n_agents();
    Eigen::VectorXd y(5 * n);
    for (int i = 0; i < n; ++i) {
        y(3 * i) = state.poses[i].position.x();
        y(3 * i + 1) = state.poses[i].position.y();
        y(3 * i + 2) = state.poses[i].heading;
    }
    y.tail(2 * n) = state.inputs;
    return y;
}

SwarmState unflatten(const Eigen::VectorXd& y, int n, double time) {
    SwarmState state;
    state.poses.resize(n);
    for (int i = 0; i < n; ++i) {
        state.poses[i].position = Eigen::Vector2d(y(3 * i), y(3 * i + 1));
        state.poses[i].heading = y(3 * i + 2);
    }
    state.inputs = y.tail(2 * n);
    state.time = time;
    return state;
}

Sample make_sample(const SwarmState& state, const graph::FormationSpec& spec,
                   const controller::GainConfig& gains,
                   const Eigen::Vector2d& target) {
    const Eigen::VectorXd r = state.stacked_positions();
    Sample s;
    s.time = state.time;
    s.state = state;
    s.cost_total = controller::cost(r, spec, gains, target).total;
    s.gradient_norm = controller::cost_gradient(r, spec, gains, target).norm();

    double formation_sq = 0.0;
    for (int e = 0; e < spec.n_edges(); ++e) {
        int tail = -1, head = -1;
        for (int i = 0; i < spec.n_agents; ++i) {
            if (spec.incidence(i, e) > 0.5) tail = i;
            if (spec.incidence(i, e) < -0.5) head = i;
        }
        formation_sq += (state.poses[tail].position -
                         state.poses[head].position - spec.displacements[e])
                            .squaredNorm();
    }
    s.formation_residual = std::sqrt(formation_sq);

    double target_sq = 0.0;
    for (int i = 0; i < spec.n_agents; ++i) {
        target_sq += (state.poses[i].position - target).squaredNorm();
    }
    s.target_distance = std::sqrt(target_sq);
    return s;
}

void check_finite(const SwarmState& state, long step) {
    bool ok = state.inputs.allFinite();
    for (const auto& pose : state.poses) {
        ok = ok && pose.position.allFinite() && std::isfinite(pose.heading);
    }
    if (!ok) {
        throw UnstableStep("non-finite state at step " + std::to_string(step) +
                           " (t = " + std::to_string(state.time) + ")");
    }
}

}  // namespace

std::vector<dynamics::AgentPose> random_initial_poses(int n_agents,
                                                      double radius,
                                                      std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<dynamics::AgentPose> poses(n_agents);
    for (auto& pose : poses) {
        double x, y;
        do {
            x = radius * (2.0 * next_unit(rng) - 1.0);
            y = radius * (2.0 * next_unit(rng) - 1.0);
        } while (x * x + y * y > radius * radius);
        pose.position = Eigen::Vector2d(x, y);
        pose.heading = M_PI * (1.0 - 2.0 * next_unit(rng));  // in (-pi, pi]
    }
    return poses;
}

SwarmState initial_state(const Scenario& scenario) {
    SwarmState state;
    if (const auto* random = std::get_if<RandomInit>(&scenario.initial)) {
        state.poses = random_initial_poses(scenario.spec.n_agents,
                                           random->radius, random->seed);
    } else {
        const auto& poses = std::get<ExplicitInit>(scenario.initial).poses;
        if (static_cast<int>(poses.size()) != scenario.spec.n_agents) {
            throw DimensionMismatch(
                "initial poses: expected " +
                std::to_string(scenario.spec.n_agents) + " entries, got " +
                std::to_string(poses.size()));
        }
        state.poses = poses;
    }
    state.inputs = state.stacked_positions();
    state.time = 0.0;
    return state;
}

SwarmState rk4_coupled_step(const SwarmState& state,
                            const controller::GainConfig& gains, double dt,
                            const InputLaw& input_law) {
    const int n = state.n_agents();
    const auto derivative = [&](const SwarmState& s) {
        Eigen::VectorXd dy(5 * n);
        for (int i = 0; i < n; ++i) {
            const dynamics::ErrorState err = dynamics::error_vars(
                s.poses[i], s.inputs.segment<2>(2 * i));
            const dynamics::LowLevelCommand cmd =
                dynamics::low_level_control(err, gains.k(i));
            const dynamics::PoseDerivative pd =
                dynamics::plant_derivative(s.poses[i], cmd);
            dy(3 * i) = pd.velocity.x();
            dy(3 * i + 1) = pd.velocity.y();
            dy(3 * i + 2) = pd.heading_rate;
        }
        dy.tail(2 * n) = input_law(s);
        return dy;
    };

    const Eigen::VectorXd y0 = flatten(state);
    const Eigen::VectorXd k1 = derivative(state);
    const Eigen::VectorXd k2 = derivative(
        unflatten(y0 + 0.5 * dt * k1, n, state.time + 0.5 * dt));
    const Eigen::VectorXd k3 = derivative(
        unflatten(y0 + 0.5 * dt * k2, n, state.time + 0.5 * dt));
    const Eigen::VectorXd k4 =
        derivative(unflatten(y0 + dt * k3, n, state.time + dt));

    SwarmState next = unflatten(
        y0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), n,
        state.time + dt);
    for (auto& pose : next.poses) {
        pose.heading = dynamics::wrap_angle(pose.heading);
    }
    return next;
}

Trajectory integrate(const Scenario& scenario, Mode mode) {
    const graph::FormationSpec& spec = scenario.spec;
    const controller::GainConfig& gains = scenario.gains;
    controller::validate_gains(spec, gains);
    if (!(scenario.dt > 0.0)) {
        throw ValidationError("dt must be > 0");
    }
    if (!(scenario.t_final >= 0.0)) {
        throw ValidationError("t_final must be >= 0");
    }
    const double ell = controller::lipschitz_constant(spec, gains);
    const double dt_limit =
        0.1 / std::max(gains.k_max(), gains.epsilon * ell);
    if (scenario.t_final > 0.0 &&
        scenario.dt > dt_limit * (1.0 + 1e-12)) {
        throw ValidationError("dt " + std::to_string(scenario.dt) +
                              " exceeds stability heuristic " +
                              std::to_string(dt_limit));
    }

    InputLaw law;
    std::vector<distributed::IncidentDisplacements> tables;
    if (mode == Mode::Centralized) {
        law = [&spec, &gains, &scenario](const SwarmState& s) {
            return controller::input_derivative_centralized(
                s.stacked_positions(), spec, gains, scenario.target);
        };
    } else {
        tables = distributed::local_displacement_tables(spec);
        law = [&spec, &gains, &scenario, &tables](const SwarmState& s) {
            const auto views =
                distributed::collect_views(s, spec, scenario.target);
            Eigen::VectorXd u_dot(2 * spec.n_agents);
            for (int i = 0; i < spec.n_agents; ++i) {
                u_dot.segment<2>(2 * i) = distributed::local_input_derivative(
                    views[i], tables[i], gains);
            }
            return u_dot;
        };
    }

    long n_steps = 0;
    if (scenario.t_final > 0.0) {
        n_steps = static_cast<long>(
            std::ceil(scenario.t_final / scenario.dt - 1e-9));
        n_steps = std::max(n_steps, 1L);
        const long stride = kRecordStride;
        n_steps = ((n_steps + stride - 1) / stride) * stride;
    }

    SwarmState state = initial_state(scenario);
    Trajectory traj;
    traj.samples.reserve(static_cast<size_t>(n_steps / kRecordStride) + 1);
    traj.samples.push_back(make_sample(state, spec, gains, scenario.target));
    for (long s = 1; s <= n_steps; ++s) {
        state = rk4_coupled_step(state, gains, scenario.dt, law);
        check_finite(state, s);
        if (s % kRecordStride == 0) {
            traj.samples.push_back(
                make_sample(state, spec, gains, scenario.target));
        }
    }
    return traj;
}

ConvergenceVerdict detect_convergence(const Trajectory& traj,
                                      const graph::FormationSpec& spec,
                                      const controller::GainConfig& gains,
                                      const Eigen::Vector2d& target,
                                      double tol) {
    const size_t n_samples = traj.samples.size();
    const size_t window =
        std::min<size_t>(kConvergenceWindow, n_samples);

    ConvergenceVerdict verdict;
    const Sample& last = traj.samples.back();
    verdict.final_formation_residual = last.formation_residual;
    verdict.final_target_distance = last.target_distance;
    verdict.r_inf_deviation =
        (last.state.stacked_positions() -
         analysis::optimal_configuration(spec, gains, target))
            .norm();

    size_t run = 0;
    for (size_t i = 0; i < n_samples; ++i) {
        const Sample& s = traj.samples[i];
        const double threshold =
            tol * (1.0 + s.state.stacked_positions().norm());
        run = (s.gradient_norm <= threshold) ? run + 1 : 0;
        if (run >= window) {
            verdict.converged = true;
            verdict.t_converged = traj.samples[i - (window - 1)].time;
            break;
        }
    }
    return verdict;
}

namespace {

Scenario make_pentagon() {
    // 5 agents, 7 edges: the outer cycle (1,2),(2,3),(3,4),(4,5),(5,1) plus
    // the chords (1,4) and (4,2).
    Eigen::MatrixXd incidence(5, 7);
    incidence << 1, 0, 0, 0, -1, 1, 0,
                -1, 1, 0, 0, 0, 0, -1,
                 0, -1, 1, 0, 0, 0, 0,
                 0, 0, -1, 1, 0, -1, 1,
                 0, 0, 0, -1, 1, 0, 0;
    const std::vector<Eigen::Vector2d> d = {
        {-1.0, 0.0}, {-0.3, -1.0}, {0.8, -0.3}, {0.8, 0.3},
        {-0.3, 1.0}, {-0.5, -1.3}, {-0.5, 1.3}};

    Scenario sc;
    sc.name = "pentagon";
    sc.spec = graph::build_spec(incidence, d);
    sc.gains.a = 5.0;
    sc.gains.b = 0.1;
    sc.gains.k = Eigen::VectorXd::Ones(5);
    sc.gains.epsilon =
        controller::default_epsilon(sc.spec, sc.gains.a, sc.gains.b,
                                    sc.gains.k);
    sc.target = Eigen::Vector2d(5.65, 5.03);
    sc.initial = RandomInit{1.0, 42};
    sc.t_final = 32000.0;
    sc.dt = 0.05;
    return sc;
}

// Twelve agents in an E shape: a six-node spine on the y axis with two-node
// arms at the bottom, middle and top, each arm braced to the spine and the
// arm tips tied together.
Scenario make_e_shape(const std::string& name, double a, double b,
                      double t_final) {
    const std::vector<Eigen::Vector2d> shape = {
        {0, 0}, {0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5},   // spine 1..6
        {1, 0}, {2, 0},                                   // bottom arm 7, 8
        {1, 3}, {2, 3},                                   // middle arm 9, 10
        {1, 5}, {2, 5}};                                  // top arm 11, 12
    const std::vector<std::pair<int, int>> edges = {
        {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6},           // spine
        {1, 7}, {7, 8}, {4, 9}, {9, 10}, {6, 11}, {11, 12},  // arms
        {2, 7}, {5, 11}, {3, 9},                          // braces
        {8, 10}, {10, 12}};                               // tip ties

    const int n = static_cast<int>(shape.size());
    const int m = static_cast<int>(edges.size());
    Eigen::MatrixXd incidence = Eigen::MatrixXd::Zero(n, m);
    std::vector<Eigen::Vector2d> d(m);
    for (int e = 0; e < m; ++e) {
        const int tail = edges[e].first - 1;
        const int head = edges[e].second - 1;
        incidence(tail, e) = 1.0;
        incidence(head, e) = -1.0;
        d[e] = shape[tail] - shape[head];
    }

    Scenario sc;
    sc.name = name;
    sc.spec = graph::build_spec(incidence, d);
    sc.gains.a = a;
    sc.gains.b = b;
    sc.gains.k = Eigen::VectorXd::Ones(n);
    sc.gains.epsilon = controller::default_epsilon(sc.spec, a, b, sc.gains.k);
    sc.target = Eigen::Vector2d(6.0, 6.0);
    sc.initial = RandomInit{1.0, 7};
    sc.t_final = t_final;
    sc.dt = 0.1;
    return sc;
}

}  // namespace

const std::vector<Scenario>& builtin_scenarios() {
    // Gain ratios a*lambda2/b: pentagon ~79, e-shape-good ~41 (well inside
    // the in-formation regime), e-shape-bad ~1 (formation term too weak).
    static const std::vector<Scenario> scenarios = {
        make_pentagon(),
        make_e_shape("e-shape-good", 120.0, 1.0, 100000.0),
        make_e_shape("e-shape-bad", 2.9, 1.0, 4000.0),
    };
    return scenarios;
}

std::optional<Scenario> find_builtin(const std::string& name) {
    for (const Scenario& sc : builtin_scenarios()) {
        if (sc.name == name) return sc;
    }
    return std::nullopt;
}

}  // namespace swarmform::sim
