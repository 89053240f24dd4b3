#include "swarmform/dynamics.hpp"

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace swarmform::dynamics {

double wrap_angle(double angle) {
    const double two_pi = 2.0 * M_PI;
    double w = std::remainder(angle, two_pi);  // in [-pi, pi]
    if (w <= -M_PI) w = M_PI;
    return w;
}

ErrorState error_vars(const AgentPose& pose,
                      const Eigen::Vector2d& reference) {
    const Eigen::Vector2d e = reference - pose.position;
    ErrorState err;
    err.rho = e.norm();
    if (err.rho < 1e-12) {
        err.phi = 0.0;  // bearing undefined at the goal
    } else {
        err.phi = wrap_angle(std::atan2(e.y(), e.x()) - pose.heading);
    }
    return err;
}

LowLevelCommand low_level_control(const ErrorState& err, double gain_k) {
    const double c = std::cos(err.phi);
    const double s = std::sin(err.phi);
    return {gain_k * err.rho * c, gain_k * (c + 1.0) * s};
}

PoseDerivative plant_derivative(const AgentPose& pose,
                                const LowLevelCommand& cmd) {
    PoseDerivative d;
    d.velocity.x() = cmd.v * std::cos(pose.heading);
    d.velocity.y() = cmd.v * std::sin(pose.heading);
    d.heading_rate = cmd.omega;
    return d;
}

ErrorDerivative closed_loop_error_derivative(const ErrorState& err,
                                             double gain_k) {
    const double c = std::cos(err.phi);
    return {-gain_k * err.rho * c * c, -gain_k * std::sin(err.phi)};
}

double explicit_rho_solution(
    double rho0, const std::function<double(double)>& phi_trajectory,
    double gain_k, double t) {
    if (t == 0.0) return rho0;
    const auto integrand = [&](double s) {
        const double c = std::cos(phi_trajectory(s));
        return c * c;
    };
    const double integral =
        boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
            integrand, 0.0, t, /*max_depth=*/18, /*tol=*/1e-12);
    return rho0 * std::exp(-gain_k * integral);
}

}  // namespace swarmform::dynamics
