#pragma once

#include <Eigen/Dense>

#include "swarmform/graph.hpp"

namespace swarmform::controller {

// Cost weights and timescales. `a` weighs the formation error, `b` the
// distance to the target, `epsilon` is the gradient-flow gain, and `k`
// holds the per-agent tracking gains. All strictly positive.
struct GainConfig {
    double a = 1.0;
    double b = 1.0;
    double epsilon = 0.1;
    Eigen::VectorXd k;  // N entries

    double k_min() const { return k.minCoeff(); }
    double k_max() const { return k.maxCoeff(); }
};

struct CostBreakdown {
    double formation_term = 0.0;  // (a/2) sum over edges ||p_i - p_j - d_e||^2
    double target_term = 0.0;     // (b/2) sum over agents ||p_i - q||^2
    double total = 0.0;
};

// Throws NonpositiveInput unless a, b, epsilon and every k entry are > 0
// and k has one entry per agent (DimensionMismatch otherwise).
void validate_gains(const graph::FormationSpec& spec, const GainConfig& gains);

// Quadratic formation cost evaluated at the stacked positions r in R^{2N}.
CostBreakdown cost(const Eigen::VectorXd& r, const graph::FormationSpec& spec,
                   const GainConfig& gains, const Eigen::Vector2d& target);

// grad = a (L_hat r - B_hat d) + b (r - 1 (x) target).
Eigen::VectorXd cost_gradient(const Eigen::VectorXd& r,
                              const graph::FormationSpec& spec,
                              const GainConfig& gains,
                              const Eigen::Vector2d& target);

// Steady-state input-output map of the tracked plant: the swarm settles at
// its reference positions, so h(u) = u and the sensitivity is the identity.
Eigen::VectorXd steady_state_map(const Eigen::VectorXd& u);

// u_dot = -epsilon * cost_gradient(r).
Eigen::VectorXd input_derivative_centralized(const Eigen::VectorXd& r,
                                             const graph::FormationSpec& spec,
                                             const GainConfig& gains,
                                             const Eigen::Vector2d& target);

// Spectral norm of a L_hat + b I, which is a lambda_max(L) + b.
double lipschitz_constant(const graph::FormationSpec& spec,
                          const GainConfig& gains);

// sqrt(gamma / (mu * ell)): admissible upper bound on epsilon given Lyapunov
// certificate constants for the tracking layer. Throws NonpositiveInput.
double epsilon_bound(double gamma, double mu, double ell);

// Cost Hessian a (L (x) I_2) + b I; positive definite with least
// eigenvalue b.
Eigen::MatrixXd hessian(const graph::FormationSpec& spec,
                        const GainConfig& gains);

// Conservative default timescale separation: 0.1 * k_min / ell. The bound
// of epsilon_bound needs certificate constants the model does not provide,
// so simulations default to this heuristic.
double default_epsilon(const graph::FormationSpec& spec, double a, double b,
                       const Eigen::VectorXd& k);

}  // namespace swarmform::controller
