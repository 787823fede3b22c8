#include "graph.hpp"

#include <algorithm>
#include <deque>

namespace opaq::detail {

SccResult strongly_connected_components(const Adjacency& graph, const std::vector<bool>& alive) {
  const std::size_t n = graph.size();
  SccResult result;
  result.component.assign(n, npos);
  std::vector<std::size_t> index(n, npos), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::size_t counter = 0;

  struct Frame {
    std::size_t vertex;
    std::size_t next_edge;
  };
  std::vector<Frame> call;

  for (std::size_t root = 0; root < n; ++root) {
    if (!alive[root] || index[root] != npos) continue;
    call.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      Frame& f = call.back();
      const auto& out = graph[f.vertex];
      if (f.next_edge < out.size()) {
        const std::size_t w = out[f.next_edge++];
        if (!alive[w]) continue;
        if (index[w] == npos) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.vertex] = std::min(low[f.vertex], index[w]);
        }
        continue;
      }
      const std::size_t v = f.vertex;
      call.pop_back();
      if (!call.empty()) low[call.back().vertex] = std::min(low[call.back().vertex], low[v]);
      if (low[v] == index[v]) {
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          result.component[w] = result.count;
        } while (w != v);
        ++result.count;
      }
    }
  }
  return result;
}

SccResult strongly_connected_components(const Adjacency& graph) {
  return strongly_connected_components(graph, std::vector<bool>(graph.size(), true));
}

bool is_nontrivial(const Adjacency& graph, const SccResult& scc, std::size_t v) {
  const std::size_t c = scc.component[v];
  if (c == npos) return false;
  for (std::size_t u = 0; u < graph.size(); ++u) {
    if (scc.component[u] != c) continue;
    for (std::size_t w : graph[u])
      if (scc.component[w] == c) return true;
  }
  return false;
}

std::vector<bool> can_reach(const Adjacency& graph, const std::vector<bool>& target, const std::vector<bool>& alive) {
  const std::size_t n = graph.size();
  Adjacency reverse(n);
  for (std::size_t u = 0; u < n; ++u)
    if (alive[u])
      for (std::size_t w : graph[u])
        if (alive[w]) reverse[w].push_back(u);
  std::vector<bool> seen(n, false);
  std::deque<std::size_t> queue;
  for (std::size_t v = 0; v < n; ++v)
    if (alive[v] && target[v]) {
      seen[v] = true;
      queue.push_back(v);
    }
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    for (std::size_t u : reverse[v])
      if (!seen[u]) {
        seen[u] = true;
        queue.push_back(u);
      }
  }
  return seen;
}

std::vector<bool> reachable_from(const Adjacency& graph, const std::vector<std::size_t>& sources) {
  std::vector<bool> seen(graph.size(), false);
  std::deque<std::size_t> queue;
  for (std::size_t s : sources)
    if (!seen[s]) {
      seen[s] = true;
      queue.push_back(s);
    }
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    for (std::size_t w : graph[v])
      if (!seen[w]) {
        seen[w] = true;
        queue.push_back(w);
      }
  }
  return seen;
}

}  // namespace opaq::detail
