#pragma once

#include <functional>

#include <Eigen/Dense>

namespace swarmform::dynamics {

// Maps an angle to (-pi, pi], with the boundary sent to +pi.
double wrap_angle(double angle);

// Planar unicycle pose: position p = [x, y] and heading theta.
struct AgentPose {
    Eigen::Vector2d position = Eigen::Vector2d::Zero();
    double heading = 0.0;  // radians in (-pi, pi]
};

// Polar tracking error towards a reference point: distance rho and bearing
// error phi (angle from the heading to the reference direction).
struct ErrorState {
    double rho = 0.0;  // meters, >= 0
    double phi = 0.0;  // radians in (-pi, pi]
};

struct LowLevelCommand {
    double v = 0.0;      // forward velocity, m/s
    double omega = 0.0;  // turn rate, rad/s
};

struct PoseDerivative {
    Eigen::Vector2d velocity = Eigen::Vector2d::Zero();
    double heading_rate = 0.0;
};

struct ErrorDerivative {
    double rho_dot = 0.0;
    double phi_dot = 0.0;
};

// rho = ||reference - position||, phi = wrap(atan2(e_y, e_x) - heading)
// with e = reference - position. Below rho = 1e-12 the bearing is undefined
// and phi is set to 0, which makes the tracking command vanish at the goal.
ErrorState error_vars(const AgentPose& pose, const Eigen::Vector2d& reference);

// v = k rho cos(phi), omega = k (cos(phi) + 1) sin(phi). Requires k > 0.
LowLevelCommand low_level_control(const ErrorState& err, double gain_k);

// x_dot = v cos(theta), y_dot = v sin(theta), theta_dot = omega.
PoseDerivative plant_derivative(const AgentPose& pose,
                                const LowLevelCommand& cmd);

// Error dynamics under the tracking law with a fixed reference:
// rho_dot = -k rho cos^2(phi), phi_dot = -k sin(phi). Requires k > 0.
ErrorDerivative closed_loop_error_derivative(const ErrorState& err,
                                             double gain_k);

// rho(t) = rho0 * exp(-k * integral_0^t cos^2(phi(s)) ds), the closed-form
// distance decay along a known bearing trajectory. The integral is taken by
// adaptive quadrature; phi_trajectory must be integrable on [0, t].
double explicit_rho_solution(double rho0,
                             const std::function<double(double)>& phi_trajectory,
                             double gain_k, double t);

}  // namespace swarmform::dynamics
