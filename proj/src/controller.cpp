#include "swarmform/controller.hpp"

#include <cmath>
#include <string>

#include "swarmform/errors.hpp"

namespace swarmform::controller {

void validate_gains(const graph::FormationSpec& spec,
                    const GainConfig& gains) {
    if (!(gains.a > 0.0)) throw NonpositiveInput("gain a must be > 0");
    if (!(gains.b > 0.0)) throw NonpositiveInput("gain b must be > 0");
    if (!(gains.epsilon > 0.0)) {
        throw NonpositiveInput("gain epsilon must be > 0");
    }
    if (gains.k.size() != spec.n_agents) {
        throw DimensionMismatch("expected " + std::to_string(spec.n_agents) +
                                " tracking gains, got " +
                                std::to_string(gains.k.size()));
    }
    if (!(gains.k.minCoeff() > 0.0)) {
        throw NonpositiveInput("tracking gains k must be > 0");
    }
}

CostBreakdown cost(const Eigen::VectorXd& r, const graph::FormationSpec& spec,
                   const GainConfig& gains, const Eigen::Vector2d& target) {
    if (r.size() != 2 * spec.n_agents) {
        throw DimensionMismatch("r has " + std::to_string(r.size()) +
                                " entries, expected " +
                                std::to_string(2 * spec.n_agents));
    }
    const Eigen::MatrixXd bhat_t = graph::kron_plane(spec.incidence).transpose();
    const Eigen::VectorXd d = spec.stacked_displacements();
    const Eigen::VectorXd q_stack =
        Eigen::Vector2d(target).replicate(spec.n_agents, 1);

    CostBreakdown c;
    c.formation_term = 0.5 * gains.a * (bhat_t * r - d).squaredNorm();
    c.target_term = 0.5 * gains.b * (r - q_stack).squaredNorm();
    c.total = c.formation_term + c.target_term;
    return c;
}

Eigen::VectorXd cost_gradient(const Eigen::VectorXd& r,
                              const graph::FormationSpec& spec,
                              const GainConfig& gains,
                              const Eigen::Vector2d& target) {
    const int n = spec.n_agents;
    if (r.size() != 2 * n) {
        throw DimensionMismatch("r has " + std::to_string(r.size()) +
                                " entries, expected " + std::to_string(2 * n));
    }
    // Formation part accumulated edge-wise: for edge e = (i -> j) agent i
    // receives a*(p_i - p_j - d_e) and agent j receives a*(p_j - p_i + d_e).
    // Terms land per agent in edge-label order, matching the summation order
    // of the distributed per-agent law exactly (not just to roundoff).
    Eigen::VectorXd formation = Eigen::VectorXd::Zero(2 * n);
    for (int e = 0; e < spec.n_edges(); ++e) {
        int tail = -1, head = -1;
        for (int i = 0; i < n; ++i) {
            if (spec.incidence(i, e) > 0.5) tail = i;
            if (spec.incidence(i, e) < -0.5) head = i;
        }
        const Eigen::Vector2d p_tail = r.segment<2>(2 * tail);
        const Eigen::Vector2d p_head = r.segment<2>(2 * head);
        const Eigen::Vector2d& d_e = spec.displacements[e];
        formation.segment<2>(2 * tail) += (p_tail - p_head) - d_e;
        formation.segment<2>(2 * head) += (p_head - p_tail) + d_e;
    }
    Eigen::VectorXd grad(2 * n);
    for (int i = 0; i < n; ++i) {
        const Eigen::Vector2d to_target = r.segment<2>(2 * i) - target;
        grad.segment<2>(2 * i) =
            gains.a * formation.segment<2>(2 * i) + gains.b * to_target;
    }
    return grad;
}

Eigen::VectorXd steady_state_map(const Eigen::VectorXd& u) { return u; }

Eigen::VectorXd input_derivative_centralized(const Eigen::VectorXd& r,
                                             const graph::FormationSpec& spec,
                                             const GainConfig& gains,
                                             const Eigen::Vector2d& target) {
    return -gains.epsilon * cost_gradient(r, spec, gains, target);
}

double lipschitz_constant(const graph::FormationSpec& spec,
                          const GainConfig& gains) {
    return gains.a * graph::laplacian(spec).lambda_max + gains.b;
}

double epsilon_bound(double gamma, double mu, double ell) {
    if (!(gamma > 0.0)) throw NonpositiveInput("gamma must be > 0");
    if (!(mu > 0.0)) throw NonpositiveInput("mu must be > 0");
    if (!(ell > 0.0)) throw NonpositiveInput("ell must be > 0");
    return std::sqrt(gamma / (mu * ell));
}

Eigen::MatrixXd hessian(const graph::FormationSpec& spec,
                        const GainConfig& gains) {
    const Eigen::MatrixXd lap = spec.incidence * spec.incidence.transpose();
    const int dim = 2 * spec.n_agents;
    return gains.a * graph::kron_plane(lap) +
           gains.b * Eigen::MatrixXd::Identity(dim, dim);
}

double default_epsilon(const graph::FormationSpec& spec, double a, double b,
                       const Eigen::VectorXd& k) {
    const double ell = a * graph::laplacian(spec).lambda_max + b;
    return 0.1 * k.minCoeff() / ell;
}

}  // namespace swarmform::controller
