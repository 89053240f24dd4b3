#include "swarmform/distributed.hpp"

#include <string>

#include "swarmform/errors.hpp"
#include "swarmform/sim.hpp"

namespace swarmform::distributed {

std::vector<AgentView> collect_views(const sim::SwarmState& swarm,
                                     const graph::FormationSpec& spec,
                                     const Eigen::Vector2d& target) {
    const int n = spec.n_agents;
    std::vector<AgentView> views(n);
    for (int i = 0; i < n; ++i) {
        views[i].self_to_target = swarm.poses[i].position - target;
    }
    // Edge loop in label order keeps every agent's message lists sorted.
    for (int e = 0; e < spec.n_edges(); ++e) {
        int tail = -1, head = -1;
        for (int i = 0; i < n; ++i) {
            if (spec.incidence(i, e) > 0.5) tail = i;
            if (spec.incidence(i, e) < -0.5) head = i;
        }
        const Eigen::Vector2d& p_tail = swarm.poses[tail].position;
        const Eigen::Vector2d& p_head = swarm.poses[head].position;
        views[tail].out_messages.push_back({e + 1, p_tail - p_head});
        views[head].in_messages.push_back({e + 1, p_head - p_tail});
    }
    return views;
}

std::vector<IncidentDisplacements> local_displacement_tables(
    const graph::FormationSpec& spec) {
    std::vector<IncidentDisplacements> tables(spec.n_agents);
    for (int e = 0; e < spec.n_edges(); ++e) {
        for (int i = 0; i < spec.n_agents; ++i) {
            if (spec.incidence(i, e) != 0.0) {
                tables[i].push_back({e + 1, spec.displacements[e]});
            }
        }
    }
    return tables;
}

Eigen::Vector2d local_input_derivative(const AgentView& view,
                                       const IncidentDisplacements& d_rows,
                                       const controller::GainConfig& gains) {
    if (view.in_messages.size() + view.out_messages.size() != d_rows.size()) {
        throw MissingNeighborMessage(
            "agent has " + std::to_string(d_rows.size()) +
            " incident edges but received " +
            std::to_string(view.in_messages.size() + view.out_messages.size()) +
            " messages");
    }
    auto displacement_for = [&](int label) -> const Eigen::Vector2d& {
        for (const EdgeDisplacement& row : d_rows) {
            if (row.label == label) return row.d;
        }
        throw MissingNeighborMessage("no displacement row for edge " +
                                     std::to_string(label));
    };

    // Merge the two label-sorted message lists so terms accumulate in edge
    // label order; the stacked result then equals the centralized gradient
    // law bit for bit.
    Eigen::Vector2d formation = Eigen::Vector2d::Zero();
    size_t oi = 0, ii = 0;
    while (oi < view.out_messages.size() || ii < view.in_messages.size()) {
        const bool take_out =
            ii == view.in_messages.size() ||
            (oi < view.out_messages.size() &&
             view.out_messages[oi].edge_label < view.in_messages[ii].edge_label);
        if (take_out) {
            const NeighborMessage& msg = view.out_messages[oi++];
            formation += msg.relative_displacement - displacement_for(msg.edge_label);
        } else {
            const NeighborMessage& msg = view.in_messages[ii++];
            formation += msg.relative_displacement + displacement_for(msg.edge_label);
        }
    }
    const Eigen::Vector2d grad =
        gains.a * formation + gains.b * view.self_to_target;
    return -gains.epsilon * grad;
}

sim::SwarmState step_distributed(const sim::SwarmState& swarm,
                                 const graph::FormationSpec& spec,
                                 const controller::GainConfig& gains,
                                 const Eigen::Vector2d& target, double dt) {
    if (dt == 0.0) return swarm;
    const auto tables = local_displacement_tables(spec);
    const sim::InputLaw law = [&spec, &gains, &target,
                               &tables](const sim::SwarmState& s) {
        const auto views = collect_views(s, spec, target);
        Eigen::VectorXd u_dot(2 * spec.n_agents);
        for (int i = 0; i < spec.n_agents; ++i) {
            u_dot.segment<2>(2 * i) =
                local_input_derivative(views[i], tables[i], gains);
        }
        return u_dot;
    };
    return sim::rk4_coupled_step(swarm, gains, dt, law);
}

}  // namespace swarmform::distributed
