#pragma once

#include <cstddef>
#include <vector>

namespace opaq::detail {

using Adjacency = std::vector<std::vector<std::size_t>>;

/// Strongly connected components (iterative Tarjan). Returns the component
/// index of each vertex; components are numbered in reverse topological
/// order (sinks first). Vertices with alive[v] == false are skipped and get
/// component npos.
struct SccResult {
  std::vector<std::size_t> component;
  std::size_t count = 0;
};

inline constexpr std::size_t npos = static_cast<std::size_t>(-1);

SccResult strongly_connected_components(const Adjacency& graph, const std::vector<bool>& alive);
SccResult strongly_connected_components(const Adjacency& graph);

/// True when the component containing v has an internal edge (a cycle).
bool is_nontrivial(const Adjacency& graph, const SccResult& scc, std::size_t v);

/// Vertices that can reach some vertex in `target` (backward BFS), restricted to alive.
std::vector<bool> can_reach(const Adjacency& graph, const std::vector<bool>& target, const std::vector<bool>& alive);

/// Vertices reachable from `sources`.
std::vector<bool> reachable_from(const Adjacency& graph, const std::vector<std::size_t>& sources);

}  // namespace opaq::detail
