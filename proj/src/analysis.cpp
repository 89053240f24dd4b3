#include "swarmform/analysis.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>

#include "swarmform/errors.hpp"

namespace swarmform::analysis {

Eigen::VectorXd optimal_configuration(const graph::FormationSpec& spec,
                                      const controller::GainConfig& gains,
                                      const Eigen::Vector2d& target) {
    controller::validate_gains(spec, gains);
    const Eigen::MatrixXd h = controller::hessian(spec, gains);
    const Eigen::VectorXd rhs =
        gains.a * (graph::kron_plane(spec.incidence) *
                   spec.stacked_displacements()) +
        gains.b * Eigen::Vector2d(target).replicate(spec.n_agents, 1);

    const Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
    if (ldlt.info() != Eigen::Success) {
        throw SingularSystem("cost Hessian factorization failed");
    }
    const Eigen::VectorXd r_inf = ldlt.solve(rhs);
    const double residual = (h * r_inf - rhs).norm();
    if (!(residual <= 1e-8 * (1.0 + rhs.norm()))) {
        throw SingularSystem("cost Hessian solve residual " +
                             std::to_string(residual));
    }
    return r_inf;
}

SteadyStateReport steady_state_report(const graph::FormationSpec& spec,
                                      const controller::GainConfig& gains,
                                      const Eigen::Vector2d& target) {
    SteadyStateReport report;
    report.r_inf = optimal_configuration(spec, gains, target);

    const Eigen::MatrixXd bhat_t =
        graph::kron_plane(spec.incidence).transpose();
    const Eigen::VectorXd d = spec.stacked_displacements();
    const Eigen::VectorXd q_stack =
        Eigen::Vector2d(target).replicate(spec.n_agents, 1);

    report.formation_residual = (bhat_t * report.r_inf - d).norm();
    report.target_distance = (report.r_inf - q_stack).norm();
    report.d_q_norm = graph::desired_configuration(spec, target).d_q.norm();

    const graph::SpectralSummary spectral = graph::laplacian(spec);
    report.gain_ratio = gains.a * spectral.lambda2 / gains.b;
    report.shrink_factor = gains.a * spectral.lambda_max /
                           (gains.a * spectral.lambda_max + gains.b);
    report.in_formation =
        report.formation_residual <= kInFormationResidualFrac * d.norm();

    // r_inf - 1 (x) q = (I - (a L_hat + b I)^{-1} b) d_q, so the offset from
    // the target contracts by at most shrink_factor < 1. A violation here
    // can only mean a solver bug.
    if (report.d_q_norm > 0.0) {
        const double slack = 1e-10 * (1.0 + report.d_q_norm);
        if (!(report.target_distance <
              report.shrink_factor * report.d_q_norm + slack)) {
            throw std::logic_error("shrinkage bound violated");
        }
        if (!(report.target_distance < report.d_q_norm)) {
            throw std::logic_error("target distance exceeds ||d_q||");
        }
    }
    return report;
}

std::vector<CurvePoint> formation_error_curve(
    const graph::FormationSpec& spec, const Eigen::Vector2d& target, double b,
    const std::vector<double>& a_values) {
    if (!(b > 0.0)) throw NonpositiveInput("gain b must be > 0");
    for (double a : a_values) {
        if (!(a > 0.0)) throw NonpositiveInput("every a value must be > 0");
    }
    const double lambda2 = graph::laplacian(spec).lambda2;
    const Eigen::MatrixXd bhat_t =
        graph::kron_plane(spec.incidence).transpose();
    const Eigen::VectorXd d = spec.stacked_displacements();
    const Eigen::VectorXd q_stack =
        Eigen::Vector2d(target).replicate(spec.n_agents, 1);

    std::vector<CurvePoint> curve;
    curve.reserve(a_values.size());
    for (double a : a_values) {
        controller::GainConfig gains;
        gains.a = a;
        gains.b = b;
        gains.epsilon = 1.0;  // irrelevant to the closed form
        gains.k = Eigen::VectorXd::Ones(spec.n_agents);
        const Eigen::VectorXd r_inf =
            optimal_configuration(spec, gains, target);
        CurvePoint pt;
        pt.a = a;
        pt.gain_ratio = a * lambda2 / b;
        pt.formation_residual = (bhat_t * r_inf - d).norm();
        pt.target_distance = (r_inf - q_stack).norm();
        pt.in_formation_regime = pt.gain_ratio >= kInFormationGainRatio;
        curve.push_back(pt);
    }
    return curve;
}

}  // namespace swarmform::analysis
