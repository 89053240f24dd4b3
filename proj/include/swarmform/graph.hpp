#pragma once

#include <vector>

#include <Eigen/Dense>

namespace swarmform::graph {

// Oriented formation graph plus desired inter-agent displacements.
//
// Column e of `incidence` holds +1 at the tail and -1 at the head of edge e,
// so (incidence^T r)_e stacks p_tail - p_head. `displacements[e]` is the
// desired value of that difference, in meters. Edge labels are 1-based
// externally (column e stores edge label e+1).
struct FormationSpec {
    int n_agents = 0;
    Eigen::MatrixXd incidence;                    // N x M, entries in {-1,0,+1}
    std::vector<Eigen::Vector2d> displacements;   // M entries, edge order

    int n_edges() const { return static_cast<int>(incidence.cols()); }

    // d stacked as [d_1; d_2; ...; d_M] in R^{2M}.
    Eigen::VectorXd stacked_displacements() const;
};

// Laplacian L = B B^T with its extreme nonzero eigenvalues.
struct SpectralSummary {
    Eigen::MatrixXd laplacian;   // N x N
    double lambda2 = 0.0;        // algebraic connectivity
    double lambda_max = 0.0;     // largest eigenvalue
};

// Positions in target formation centred on the target, and their offset
// from the all-at-target stack: d_q = r_star - 1 (x) target.
struct DesiredConfiguration {
    Eigen::VectorXd r_star;   // R^{2N}
    Eigen::VectorXd d_q;      // R^{2N}, zero centroid
};

// Validates and packages a formation description.
//
// Checks, in order: every incidence column has exactly one +1 and one -1
// (MalformedIncidence), the undirected graph is connected
// (DisconnectedGraph), and the displacement set is consistent around every
// cycle, i.e. B_hat^T r = d admits a solution (UnrealizableDisplacements).
// Realizability is decided by a least-squares solve with residual
// infinity-norm tolerance 1e-8 * max(1, ||d||).
FormationSpec build_spec(const Eigen::MatrixXd& incidence,
                         const std::vector<Eigen::Vector2d>& displacements);

// L = B B^T and its sorted spectrum endpoints via a dense symmetric solver.
SpectralSummary laplacian(const FormationSpec& spec);

// M (x) I_2: each scalar entry m becomes the 2x2 block m*I.
Eigen::MatrixXd kron_plane(const Eigen::MatrixXd& m);

// The unique r_star with B_hat^T r_star = d and centroid at `target`.
//
// Solves L_hat x = B_hat d for the minimum-norm x (which has zero centroid,
// since the centroid directions span the nullspace of L_hat), then shifts
// by 1 (x) target. d_q = r_star - 1 (x) target.
DesiredConfiguration desired_configuration(const FormationSpec& spec,
                                           const Eigen::Vector2d& target);

}  // namespace swarmform::graph
