#include "nashflow/maxflow.hpp"

#include <queue>
#include <stdexcept>

namespace nashflow {

MaxFlow::MaxFlow(int num_nodes, int source, int sink)
    : n_(num_nodes), s_(source), t_(sink), adj_(static_cast<std::size_t>(num_nodes)) {}

int MaxFlow::add_arc(int tail, int head, const Rat& capacity) {
  if (capacity.sign() < 0) throw std::invalid_argument("MaxFlow: negative capacity");
  auto& fwd = adj_[static_cast<std::size_t>(tail)];
  auto& bwd = adj_[static_cast<std::size_t>(head)];
  fwd.push_back({head, capacity, static_cast<int>(bwd.size()), true});
  bwd.push_back({tail, Rat(0), static_cast<int>(fwd.size()) - 1, false});
  handles_.push_back({tail, static_cast<int>(fwd.size()) - 1});
  original_caps_.push_back(capacity);
  return static_cast<int>(handles_.size()) - 1;
}

void MaxFlow::set_capacity(int h, const Rat& capacity) {
  auto [v, i] = handles_[static_cast<std::size_t>(h)];
  Edge& e = adj_[static_cast<std::size_t>(v)][static_cast<std::size_t>(i)];
  Edge& r = adj_[static_cast<std::size_t>(e.to)][static_cast<std::size_t>(e.rev)];
  e.cap = capacity;
  r.cap = Rat(0);
  original_caps_[static_cast<std::size_t>(h)] = capacity;
}

bool MaxFlow::bfs_levels(std::vector<int>& level) const {
  level.assign(static_cast<std::size_t>(n_), -1);
  std::queue<int> q;
  level[static_cast<std::size_t>(s_)] = 0;
  q.push(s_);
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (const Edge& e : adj_[static_cast<std::size_t>(v)]) {
      if (e.cap.sign() > 0 && level[static_cast<std::size_t>(e.to)] < 0) {
        level[static_cast<std::size_t>(e.to)] = level[static_cast<std::size_t>(v)] + 1;
        q.push(e.to);
      }
    }
  }
  return level[static_cast<std::size_t>(t_)] >= 0;
}

Rat MaxFlow::dfs_push(int v, const Rat& limit, std::vector<int>& it, const std::vector<int>& level) {
  if (v == t_) return limit;
  for (int& i = it[static_cast<std::size_t>(v)]; i < static_cast<int>(adj_[static_cast<std::size_t>(v)].size()); ++i) {
    Edge& e = adj_[static_cast<std::size_t>(v)][static_cast<std::size_t>(i)];
    if (e.cap.sign() <= 0 || level[static_cast<std::size_t>(e.to)] != level[static_cast<std::size_t>(v)] + 1)
      continue;
    Rat pushed = dfs_push(e.to, min(limit, e.cap), it, level);
    if (pushed.sign() > 0) {
      e.cap -= pushed;
      adj_[static_cast<std::size_t>(e.to)][static_cast<std::size_t>(e.rev)].cap += pushed;
      return pushed;
    }
  }
  return Rat(0);
}

Rat MaxFlow::solve() {
  // Reset to original capacities so solve() is idempotent.
  for (std::size_t h = 0; h < handles_.size(); ++h) {
    auto [v, i] = handles_[h];
    Edge& e = adj_[static_cast<std::size_t>(v)][static_cast<std::size_t>(i)];
    Edge& r = adj_[static_cast<std::size_t>(e.to)][static_cast<std::size_t>(e.rev)];
    e.cap = original_caps_[h];
    r.cap = Rat(0);
  }
  Rat total(0);
  std::vector<int> level;
  if (s_ == t_) return total;
  while (bfs_levels(level)) {
    std::vector<int> it(static_cast<std::size_t>(n_), 0);
    while (true) {
      // No finite bound is needed: capacity into the sink bounds every push.
      Rat inf(1);
      for (const Edge& e : adj_[static_cast<std::size_t>(s_)]) inf += e.cap;
      Rat pushed = dfs_push(s_, inf, it, level);
      if (pushed.sign() == 0) break;
      total += pushed;
    }
  }
  flow_cache_.assign(handles_.size(), Rat(0));
  for (std::size_t h = 0; h < handles_.size(); ++h) {
    auto [v, i] = handles_[h];
    const Edge& e = adj_[static_cast<std::size_t>(v)][static_cast<std::size_t>(i)];
    flow_cache_[h] = original_caps_[h] - e.cap;
  }
  return total;
}

const Rat& MaxFlow::flow_on(int h) const { return flow_cache_[static_cast<std::size_t>(h)]; }

std::vector<bool> MaxFlow::residual_source_side() const {
  std::vector<bool> seen(static_cast<std::size_t>(n_), false);
  std::queue<int> q;
  seen[static_cast<std::size_t>(s_)] = true;
  q.push(s_);
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (const Edge& e : adj_[static_cast<std::size_t>(v)]) {
      if (e.cap.sign() > 0 && !seen[static_cast<std::size_t>(e.to)]) {
        seen[static_cast<std::size_t>(e.to)] = true;
        q.push(e.to);
      }
    }
  }
  return seen;
}

}  // namespace nashflow
