#pragma once

#include <vector>

#include <Eigen/Dense>

#include "swarmform/controller.hpp"
#include "swarmform/graph.hpp"
#include "swarmform/state.hpp"

namespace swarmform::distributed {

// One neighbor-to-receiver measurement: the receiver's position minus the
// sender's, tagged with the shared edge's 1-based label.
struct NeighborMessage {
    int edge_label = 0;
    Eigen::Vector2d relative_displacement = Eigen::Vector2d::Zero();
};

// Everything agent i may legally see in one synchronous round: its own
// offset from the target and one message per incident edge. No absolute
// position of any other agent is reachable from a view.
struct AgentView {
    Eigen::Vector2d self_to_target = Eigen::Vector2d::Zero();  // p_i - q
    std::vector<NeighborMessage> in_messages;   // edges where i is the head
    std::vector<NeighborMessage> out_messages;  // edges where i is the tail
};

// The displacement rows an agent stores locally for its incident edges.
struct EdgeDisplacement {
    int label = 0;  // 1-based edge label
    Eigen::Vector2d d = Eigen::Vector2d::Zero();
};
using IncidentDisplacements = std::vector<EdgeDisplacement>;

// Snapshot one synchronous communication round: every agent's view of the
// same instant. Message lists are ordered by edge label.
std::vector<AgentView> collect_views(const sim::SwarmState& swarm,
                                     const graph::FormationSpec& spec,
                                     const Eigen::Vector2d& target);

// Per-agent copies of the displacement rows, ordered by edge label. The
// formation spec is static shared knowledge; each agent keeps only its rows.
std::vector<IncidentDisplacements> local_displacement_tables(
    const graph::FormationSpec& spec);

// Agent i's input derivative from local data only:
//   u_dot_i = -eps * ( a * [ sum_out (p_i - p_j - d_e)
//                          + sum_in  (p_i - p_j + d_e) ]
//                    + b * (p_i - q) ).
// Terms are accumulated in edge-label order so the stacked result equals
// the centralized gradient law bit for bit. Throws MissingNeighborMessage
// when the view and the displacement rows disagree on incident edges.
Eigen::Vector2d local_input_derivative(const AgentView& view,
                                       const IncidentDisplacements& d_rows,
                                       const controller::GainConfig& gains);

// One synchronous round per RK4 stage: exchange views, advance the coupled
// (pose, input) state by one step of length dt. dt = 0 returns the state
// unchanged.
sim::SwarmState step_distributed(const sim::SwarmState& swarm,
                            const graph::FormationSpec& spec,
                            const controller::GainConfig& gains,
                            const Eigen::Vector2d& target, double dt);

}  // namespace swarmform::distributed
