#pragma once

#include <vector>

#include <Eigen/Dense>

#include "swarmform/controller.hpp"
#include "swarmform/graph.hpp"

namespace swarmform::analysis {

// Residual fraction below which a configuration counts as in formation:
// formation_residual <= kInFormationResidualFrac * ||d||.
inline constexpr double kInFormationResidualFrac = 0.02;

// Gain ratio a*lambda2/b above which the formation term dominates enough
// to reach that residual in practice.
inline constexpr double kInFormationGainRatio = 30.0;

// Closed-form asymptotic configuration and how far it is from the ideal.
struct SteadyStateReport {
    Eigen::VectorXd r_inf;            // unique minimiser of the cost
    double formation_residual = 0.0;  // ||B_hat^T r_inf - d||
    double target_distance = 0.0;     // ||r_inf - 1 (x) q||
    double d_q_norm = 0.0;            // ||r_star - 1 (x) q||
    double gain_ratio = 0.0;          // a * lambda2 / b
    double shrink_factor = 0.0;       // max over L-eigenvalues of al/(al+b)
    bool in_formation = false;
};

// r_inf = (a L_hat + b I)^{-1} (a B_hat d + b 1 (x) q), the unique
// stationary point of the cost. Symmetric positive definite solve; throws
// SingularSystem only on numerical failure (b > 0 rules out exact
// singularity).
Eigen::VectorXd optimal_configuration(const graph::FormationSpec& spec,
                                      const controller::GainConfig& gains,
                                      const Eigen::Vector2d& target);

// Full closed-form report. The spectral-norm shrinkage identity
// target_distance <= shrink_factor * d_q_norm < d_q_norm is checked
// internally and cannot fail for valid inputs.
SteadyStateReport steady_state_report(const graph::FormationSpec& spec,
                                      const controller::GainConfig& gains,
                                      const Eigen::Vector2d& target);

// One row of a gain sweep at fixed b.
struct CurvePoint {
    double a = 0.0;
    double gain_ratio = 0.0;           // a * lambda2 / b
    double formation_residual = 0.0;   // at the closed-form r_inf
    double target_distance = 0.0;      // at the closed-form r_inf
    bool in_formation_regime = false;  // gain_ratio >= kInFormationGainRatio
};

// Evaluates the closed-form formation residual across a values (all > 0).
// For increasing a the residual decreases towards zero; the curve makes
// that trade-off against target_distance explicit.
std::vector<CurvePoint> formation_error_curve(
    const graph::FormationSpec& spec, const Eigen::Vector2d& target, double b,
    const std::vector<double>& a_values);

}  // namespace swarmform::analysis
