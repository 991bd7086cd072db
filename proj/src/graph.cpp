#include "gea/graph.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <string>

#include "gea/errors.hpp"
#include "gea/rng.hpp"

namespace gea {

TopologyKind parse_topology(std::string_view name) {
    if (name == "ring") return TopologyKind::ring;
    if (name == "star") return TopologyKind::star;
    if (name == "complete") return TopologyKind::complete;
    if (name == "random_connected") return TopologyKind::random_connected;
    throw InvalidSpec("unknown topology: " + std::string(name));
}

std::string_view topology_name(TopologyKind kind) {
    switch (kind) {
        case TopologyKind::ring: return "ring";
        case TopologyKind::star: return "star";
        case TopologyKind::complete: return "complete";
        case TopologyKind::random_connected: return "random_connected";
    }
    return "unknown";
}

Graph::Graph(std::size_t num_agents, std::vector<std::pair<AgentId, AgentId>> edges, bool self_inclusive)
    : adjacency_(num_agents), neighborhoods_(num_agents), self_inclusive_(self_inclusive) {
    if (num_agents == 0) throw InvalidSpec("graph needs at least one agent");
    std::set<std::pair<AgentId, AgentId>> unique;
    for (auto [j, k] : edges) {
        if (j >= num_agents || k >= num_agents) throw InvalidSpec("edge endpoint out of range");
        if (j == k) continue;
        unique.insert({std::min(j, k), std::max(j, k)});
    }
    for (auto [j, k] : unique) {
        adjacency_[j].push_back(k);
        adjacency_[k].push_back(j);
    }
    num_edges_ = unique.size();
    for (AgentId k = 0; k < num_agents; ++k) {
        std::sort(adjacency_[k].begin(), adjacency_[k].end());
        neighborhoods_[k] = adjacency_[k];
        if (self_inclusive) {
            neighborhoods_[k].push_back(k);
            std::sort(neighborhoods_[k].begin(), neighborhoods_[k].end());
        }
        if (neighborhoods_[k].size() < 2)
            throw InvalidSpec("agent " + std::to_string(k) + " has |N_k| = " + std::to_string(neighborhoods_[k].size()) +
                              "; the neighborhood variance needs at least 2");
    }
    if (!check_connected(*this)) throw InvalidSpec("communication graph is not connected");
}

bool Graph::has_edge(AgentId j, AgentId k) const {
    if (j >= num_agents() || k >= num_agents()) throw IndexError("agent out of range");
    return std::binary_search(adjacency_[j].begin(), adjacency_[j].end(), k);
}

const std::vector<AgentId>& Graph::neighborhood(AgentId k) const {
    if (k >= num_agents()) throw IndexError("agent " + std::to_string(k) + " out of range");
    return neighborhoods_[k];
}

bool check_connected(std::size_t num_agents, const std::vector<std::pair<AgentId, AgentId>>& edges) {
    if (num_agents == 0) return false;
    std::vector<std::vector<AgentId>> adj(num_agents);
    for (auto [j, k] : edges) {
        if (j >= num_agents || k >= num_agents) return false;
        adj[j].push_back(k);
        adj[k].push_back(j);
    }
    std::vector<bool> seen(num_agents, false);
    std::queue<AgentId> q;
    seen[0] = true;
    q.push(0);
    std::size_t visited = 1;
    while (!q.empty()) {
        const AgentId u = q.front();
        q.pop();
        for (AgentId v : adj[u]) {
            if (!seen[v]) {
                seen[v] = true;
                ++visited;
                q.push(v);
            }
        }
    }
    return visited == num_agents;
}

bool check_connected(const Graph& g) {
    std::vector<std::pair<AgentId, AgentId>> edges;
    for (AgentId k = 0; k < g.num_agents(); ++k)
        for (AgentId j : g.neighborhood(k))
            if (j > k) edges.emplace_back(k, j);
    return check_connected(g.num_agents(), edges);
}

Graph build_topology(TopologyKind kind, std::size_t num_agents, double extra_edge_prob, std::uint64_t seed,
                     bool self_inclusive) {
    const std::size_t k = num_agents;
    std::vector<std::pair<AgentId, AgentId>> edges;
    switch (kind) {
        case TopologyKind::ring:
            if (k < 3) throw InvalidSpec("ring topology needs K >= 3");
            for (AgentId i = 0; i < k; ++i) edges.emplace_back(i, (i + 1) % k);
            break;
        case TopologyKind::star:
            if (k < 3) throw InvalidSpec("star topology needs K >= 3");
            for (AgentId i = 1; i < k; ++i) edges.emplace_back(0, i);
            break;
        case TopologyKind::complete:
            if (k < 2) throw InvalidSpec("complete topology needs K >= 2");
            for (AgentId i = 0; i < k; ++i)
                for (AgentId j = i + 1; j < k; ++j) edges.emplace_back(i, j);
            break;
        case TopologyKind::random_connected: {
            if (k < 2) throw InvalidSpec("random_connected topology needs K >= 2");
            if (!(extra_edge_prob >= 0.0 && extra_edge_prob <= 1.0))
                throw InvalidSpec("extra_edge_prob must lie in [0, 1]");
            Rng rng(seed);
            std::vector<AgentId> order(k);
            for (AgentId i = 0; i < k; ++i) order[i] = i;
            for (std::size_t i = k; i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);
            std::set<std::pair<AgentId, AgentId>> tree;
            for (std::size_t i = 1; i < k; ++i) {
                const AgentId parent = order[rng.uniform_index(i)];
                const AgentId child = order[i];
                tree.insert({std::min(parent, child), std::max(parent, child)});
            }
            edges.assign(tree.begin(), tree.end());
            for (AgentId i = 0; i < k; ++i)
                for (AgentId j = i + 1; j < k; ++j)
                    if (!tree.contains({i, j}) && rng.bernoulli(extra_edge_prob)) edges.emplace_back(i, j);
            break;
        }
    }
    return Graph(k, std::move(edges), self_inclusive);
}

}  // namespace gea
