#pragma once

// Undirected agent communication graph and neighborhood queries.

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace gea {

using AgentId = std::size_t;

enum class TopologyKind { ring, star, complete, random_connected };

TopologyKind parse_topology(std::string_view name);
std::string_view topology_name(TopologyKind kind);

class Graph {
  public:
    // Validates symmetry (edges are stored both ways), connectivity and
    // |N_k| >= 2 for every agent; throws InvalidSpec otherwise.
    Graph(std::size_t num_agents, std::vector<std::pair<AgentId, AgentId>> edges, bool self_inclusive = true);

    std::size_t num_agents() const noexcept { return adjacency_.size(); }
    bool self_inclusive() const noexcept { return self_inclusive_; }
    std::size_t num_edges() const noexcept { return num_edges_; }
    bool has_edge(AgentId j, AgentId k) const;

    // N_k sorted ascending; includes k when self_inclusive.
    const std::vector<AgentId>& neighborhood(AgentId k) const;
    std::size_t neighborhood_size(AgentId k) const { return neighborhood(k).size(); }

  private:
    std::vector<std::vector<AgentId>> adjacency_;
    std::vector<std::vector<AgentId>> neighborhoods_;
    std::size_t num_edges_ = 0;
    bool self_inclusive_;
};

// Returns true iff one component spans all agents. Works on raw edge lists so
// it can vet candidate topologies before a Graph is built.
bool check_connected(std::size_t num_agents, const std::vector<std::pair<AgentId, AgentId>>& edges);
bool check_connected(const Graph& g);

// ring/star need K >= 3, complete needs K >= 2, random_connected needs
// K >= 2. random_connected is a random recursive spanning tree over a
// shuffled agent order plus independent extra edges with probability
// extra_edge_prob.
Graph build_topology(TopologyKind kind, std::size_t num_agents, double extra_edge_prob, std::uint64_t seed,
                     bool self_inclusive = true);

}  // namespace gea
