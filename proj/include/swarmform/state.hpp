#pragma once

#include <vector>

#include <Eigen/Dense>

#include "swarmform/dynamics.hpp"

namespace swarmform::sim {

// Full state of the closed loop: one pose per agent plus the stacked
// reference inputs u in R^{2N} driven by the gradient flow.
struct SwarmState {
    std::vector<dynamics::AgentPose> poses;
    Eigen::VectorXd inputs;
    double time = 0.0;

    int n_agents() const { return static_cast<int>(poses.size()); }

    // Positions stacked as [p_1; ...; p_N] in R^{2N}.
    Eigen::VectorXd stacked_positions() const {
        Eigen::VectorXd r(2 * poses.size());
        for (size_t i = 0; i < poses.size(); ++i) {
            r.segment<2>(2 * static_cast<Eigen::Index>(i)) = poses[i].position;
        }
        return r;
    }
};

}  // namespace swarmform::sim
