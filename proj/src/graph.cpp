#include "swarmform/graph.hpp"

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "swarmform/errors.hpp"

namespace swarmform::graph {

namespace {

constexpr double kRealizabilityTol = 1e-8;

bool is_connected(const Eigen::MatrixXd& incidence) {
    const int n = static_cast<int>(incidence.rows());
    const int m = static_cast<int>(incidence.cols());
    if (n < 2) return false;  // a lone agent has no formation graph
    std::vector<std::vector<int>> adj(n);
    for (int e = 0; e < m; ++e) {
        int tail = -1, head = -1;
        for (int i = 0; i < n; ++i) {
            if (incidence(i, e) > 0.5) tail = i;
            if (incidence(i, e) < -0.5) head = i;
        }
        adj[tail].push_back(head);
        adj[head].push_back(tail);
    }
    std::vector<char> seen(n, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
        const int i = stack.back();
        stack.pop_back();
        for (int j : adj[i]) {
            if (!seen[j]) {
                seen[j] = 1;
                ++count;
                stack.push_back(j);
            }
        }
    }
    return count == n;
}

}  // namespace

Eigen::VectorXd FormationSpec::stacked_displacements() const {
    Eigen::VectorXd d(2 * displacements.size());
    for (size_t e = 0; e < displacements.size(); ++e) {
        d.segment<2>(2 * static_cast<Eigen::Index>(e)) = displacements[e];
    }
    return d;
}

FormationSpec build_spec(const Eigen::MatrixXd& incidence,
                         const std::vector<Eigen::Vector2d>& displacements) {
    const int n = static_cast<int>(incidence.rows());
    const int m = static_cast<int>(incidence.cols());
    if (static_cast<int>(displacements.size()) != m) {
        throw DimensionMismatch("expected " + std::to_string(m) +
                                " displacement vectors, got " +
                                std::to_string(displacements.size()));
    }
    for (int e = 0; e < m; ++e) {
        int plus = 0, minus = 0;
        for (int i = 0; i < n; ++i) {
            const double v = incidence(i, e);
            if (v == 1.0) {
                ++plus;
            } else if (v == -1.0) {
                ++minus;
            } else if (v != 0.0) {
                throw MalformedIncidence("edge " + std::to_string(e + 1) +
                                         ": entry not in {-1,0,+1}");
            }
        }
        if (plus != 1 || minus != 1) {
            throw MalformedIncidence("edge " + std::to_string(e + 1) +
                                     ": needs exactly one tail (+1) and one "
                                     "head (-1)");
        }
    }
    if (!is_connected(incidence)) {
        throw DisconnectedGraph("formation graph is not connected");
    }

    FormationSpec spec{n, incidence, displacements};

    // Realizable iff B_hat^T r = d has a solution; test by least squares.
    const Eigen::MatrixXd bhat_t = kron_plane(incidence).transpose();
    const Eigen::VectorXd d = spec.stacked_displacements();
    if (m > 0) {
        const Eigen::VectorXd r =
            bhat_t.completeOrthogonalDecomposition().solve(d);
        const double residual = (bhat_t * r - d).lpNorm<Eigen::Infinity>();
        if (residual > kRealizabilityTol * std::max(1.0, d.norm())) {
            throw UnrealizableDisplacements(
                "displacements are inconsistent around a cycle (residual " +
                std::to_string(residual) + ")");
        }
    }
    return spec;
}

SpectralSummary laplacian(const FormationSpec& spec) {
    SpectralSummary s;
    s.laplacian = spec.incidence * spec.incidence.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s.laplacian);
    const Eigen::VectorXd& ev = eig.eigenvalues();  // ascending
    s.lambda2 = ev(1);
    s.lambda_max = ev(ev.size() - 1);
    return s;
}

Eigen::MatrixXd kron_plane(const Eigen::MatrixXd& m) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(2 * m.rows(), 2 * m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            out(2 * i, 2 * j) = m(i, j);
            out(2 * i + 1, 2 * j + 1) = m(i, j);
        }
    }
    return out;
}

DesiredConfiguration desired_configuration(const FormationSpec& spec,
                                           const Eigen::Vector2d& target) {
    const Eigen::MatrixXd bhat = kron_plane(spec.incidence);
    const Eigen::MatrixXd lhat = kron_plane(
        (spec.incidence * spec.incidence.transpose()).eval());
    const Eigen::VectorXd d = spec.stacked_displacements();

    // Minimum-norm solution of L_hat x = B_hat d. The nullspace of L_hat is
    // spanned by the two centroid translations, so minimum norm means zero
    // centroid and x is exactly d_q.
    const Eigen::VectorXd x =
        lhat.completeOrthogonalDecomposition().solve((bhat * d).eval());

    DesiredConfiguration cfg;
    cfg.d_q = x;
    cfg.r_star = x + Eigen::Vector2d(target).replicate(spec.n_agents, 1);

    const double residual =
        (bhat.transpose() * cfg.r_star - d).lpNorm<Eigen::Infinity>();
    if (residual > kRealizabilityTol * std::max(1.0, d.norm())) {
        throw UnrealizableDisplacements(
            "displacements are inconsistent around a cycle (residual " +
            std::to_string(residual) + ")");
    }
    return cfg;
}

}  // namespace swarmform::graph
