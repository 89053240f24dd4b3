#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "swarmform/controller.hpp"
#include "swarmform/graph.hpp"
#include "swarmform/state.hpp"

namespace swarmform::sim {

enum class Mode { Centralized, Distributed };

// Relative gradient-norm tolerance used by convergence detection:
// ||grad|| <= tol * (1 + ||r||).
inline constexpr double kConvergenceTol = 1e-6;

// Every kRecordStride-th step is recorded; horizons round up to a whole
// number of strides so samples stay equally spaced.
inline constexpr int kRecordStride = 10;

// Number of consecutive qualifying samples required to declare convergence.
inline constexpr int kConvergenceWindow = 100;

// Agents start uniformly in a disc of this radius around the origin, with
// headings uniform in (-pi, pi], from a seeded generator.
struct RandomInit {
    double radius = 1.0;
    std::uint64_t seed = 0;
};

struct ExplicitInit {
    std::vector<dynamics::AgentPose> poses;
};

using InitialCondition = std::variant<RandomInit, ExplicitInit>;

struct Scenario {
    std::string name;
    graph::FormationSpec spec;
    controller::GainConfig gains;
    Eigen::Vector2d target = Eigen::Vector2d::Zero();
    InitialCondition initial = RandomInit{};
    double t_final = 0.0;  // seconds; 0 means a single initial sample
    double dt = 0.01;      // seconds, > 0
};

struct Sample {
    double time = 0.0;
    SwarmState state;
    double cost_total = 0.0;
    double gradient_norm = 0.0;
    double formation_residual = 0.0;  // ||B_hat^T r - d||
    double target_distance = 0.0;     // ||r - 1 (x) q||
};

struct Trajectory {
    std::vector<Sample> samples;
};

struct ConvergenceVerdict {
    bool converged = false;
    std::optional<double> t_converged;  // set iff converged
    double final_formation_residual = 0.0;
    double final_target_distance = 0.0;
    double r_inf_deviation = 0.0;  // ||r(t_final) - r_inf||
};

// Deterministic draw: rejection-sampled positions in the disc, headings in
// (-pi, pi]. Identical across platforms for a given seed (raw generator
// words are mapped to doubles directly, no distribution adapters).
std::vector<dynamics::AgentPose> random_initial_poses(int n_agents,
                                                      double radius,
                                                      std::uint64_t seed);

// Resolves the initial condition; inputs start at the initial positions,
// making the tracking error zero at t = 0.
SwarmState initial_state(const Scenario& scenario);

// The stacked input derivative as a function of the current state; the two
// modes plug different laws into the same integrator.
using InputLaw = std::function<Eigen::VectorXd(const SwarmState&)>;

// One RK4 step of the coupled (pose, input) ODE. Headings are wrapped once
// at the end of the step. Both simulation modes route through this stepper,
// so they differ only in how the input derivative is summed.
SwarmState rk4_coupled_step(const SwarmState& state,
                            const controller::GainConfig& gains, double dt,
                            const InputLaw& input_law);

// Fixed-step integration over ceil(t_final/dt) steps (rounded up to a whole
// number of recording strides). Validates the step-size heuristic
// dt <= 0.1 / max(k_max, epsilon * ell) (ValidationError) and aborts on
// non-finite state (UnstableStep).
Trajectory integrate(const Scenario& scenario, Mode mode);

// First sample index where ||grad|| <= tol * (1 + ||r||) holds for
// min(kConvergenceWindow, #samples) consecutive samples marks convergence.
// r_inf_deviation compares the last sample to the closed-form optimum.
ConvergenceVerdict detect_convergence(const Trajectory& traj,
                                      const graph::FormationSpec& spec,
                                      const controller::GainConfig& gains,
                                      const Eigen::Vector2d& target,
                                      double tol = kConvergenceTol);

// Named reference setups: "pentagon" (5 agents, 7 edges), "e-shape-good"
// (12 agents, gain ratio ~41) and "e-shape-bad" (same graph, gain ratio ~1).
const std::vector<Scenario>& builtin_scenarios();

// nullopt when no builtin carries that name.
std::optional<Scenario> find_builtin(const std::string& name);

}  // namespace swarmform::sim
