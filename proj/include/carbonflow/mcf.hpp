#pragma once

// Minimum-cost flow over a directed network with node supplies.
//
// The solver runs successive shortest paths on the residual network with
// Johnson-style node potentials, so every inner search is a Dijkstra over
// non-negative reduced costs. Capacities and supplies are integers, so each
// augmentation moves an integral amount and the returned flow is integral.
// Negative-cost arcs are handled by pre-saturating them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace carbonflow {

using FlowUnits = std::int64_t;

struct Arc {
  int tail = 0;
  int head = 0;
  FlowUnits capacity = 0;
  double cost = 0.0;

  [[nodiscard]] bool unbounded() const;
};

class FlowNetwork {
 public:
  static constexpr FlowUnits kUnbounded = std::numeric_limits<FlowUnits>::max();

  int add_node(FlowUnits supply = 0) {
    supplies_.push_back(supply);
    return static_cast<int>(supplies_.size()) - 1;
  }

  void set_supply(int node, FlowUnits supply) { supplies_.at(node) = supply; }
  void add_supply(int node, FlowUnits delta) { supplies_.at(node) += delta; }

  int add_arc(int tail, int head, FlowUnits capacity, double cost) {
    if (tail < 0 || head < 0 || tail >= num_nodes() || head >= num_nodes())
      throw std::out_of_range("arc endpoint is not a node");
    if (tail == head) throw std::invalid_argument("self-loop arcs are not allowed");
    if (capacity < 0) throw std::invalid_argument("negative arc capacity");
    if (!std::isfinite(cost)) throw std::invalid_argument("non-finite arc cost");
    arcs_.push_back({tail, head, capacity, cost});
    return static_cast<int>(arcs_.size()) - 1;
  }

  [[nodiscard]] int num_nodes() const { return static_cast<int>(supplies_.size()); }
  [[nodiscard]] int num_arcs() const { return static_cast<int>(arcs_.size()); }
  [[nodiscard]] FlowUnits supply(int node) const { return supplies_[node]; }
  [[nodiscard]] const std::vector<FlowUnits>& supplies() const { return supplies_; }
  [[nodiscard]] const Arc& arc(int a) const { return arcs_[a]; }
  [[nodiscard]] const std::vector<Arc>& arcs() const { return arcs_; }

  [[nodiscard]] FlowUnits total_supply() const {
    FlowUnits sum = 0;
    for (FlowUnits s : supplies_)
      if (s > 0) sum += s;
    return sum;
  }

  [[nodiscard]] bool is_balanced() const {
    FlowUnits sum = 0;
    for (FlowUnits s : supplies_) sum += s;
    return sum == 0;
  }

 private:
  std::vector<FlowUnits> supplies_;
  std::vector<Arc> arcs_;
};

inline bool Arc::unbounded() const { return capacity == FlowNetwork::kUnbounded; }

struct FlowSolution {
  std::vector<FlowUnits> flow;    // per arc, insertion order
  double objective = 0.0;
  std::vector<double> potentials;  // per node
};

class InfeasibleFlow : public std::runtime_error {
 public:
  InfeasibleFlow(FlowUnits required, FlowUnits routed)
      : std::runtime_error("infeasible: " + std::to_string(routed) + " of " +
                           std::to_string(required) + " supply units routable"),
        required_(required),
        routed_(routed) {}
  [[nodiscard]] FlowUnits required() const { return required_; }
  [[nodiscard]] FlowUnits routed() const { return routed_; }

 private:
  FlowUnits required_;
  FlowUnits routed_;
};

class UnboundedFlow : public std::runtime_error {
 public:
  UnboundedFlow() : std::runtime_error("unbounded: negative-cost cycle of unbounded arcs") {}
};

inline constexpr double kCostTolerance = 1e-9;

inline double flow_cost(const FlowNetwork& net, const std::vector<FlowUnits>& flow) {
  double total = 0.0;
  for (int a = 0; a < net.num_arcs(); ++a)
    total += net.arc(a).cost * static_cast<double>(flow[a]);
  return total;
}

namespace detail {

// True if `arcs`, given as (tail, head, cost), contain a cycle of negative
// total cost. Bellman-Ford from a virtual root.
template <typename ArcList>
bool has_negative_cycle(int num_nodes, const ArcList& arcs, double tol) {
  std::vector<double> dist(num_nodes, 0.0);
  for (int round = 0; round <= num_nodes; ++round) {
    bool relaxed = false;
    for (const auto& [tail, head, cost] : arcs) {
      if (dist[tail] + cost < dist[head] - tol) {
        dist[head] = dist[tail] + cost;
        relaxed = true;
      }
    }
    if (!relaxed) return false;
  }
  return true;
}

struct ResidualEdge {
  int to;
  FlowUnits cap;
  double cost;
};

}  // namespace detail

inline FlowSolution solve_min_cost_flow(const FlowNetwork& net) {
  if (!net.is_balanced()) throw std::invalid_argument("network supplies do not sum to zero");

  const int n = net.num_nodes();
  const int m = net.num_arcs();
  bool any_negative = false;
  FlowUnits finite_caps = 0;
  for (const Arc& a : net.arcs()) {
    any_negative |= a.cost < 0.0;
    if (!a.unbounded()) finite_caps += a.capacity;
  }
  if (any_negative) {
    std::vector<std::tuple<int, int, double>> open;
    for (const Arc& a : net.arcs())
      if (a.unbounded()) open.emplace_back(a.tail, a.head, a.cost);
    if (detail::has_negative_cycle(n, open, 0.0)) throw UnboundedFlow();
  }
  // No optimal flow needs more than this on an unbounded arc.
  const FlowUnits unbounded_cap = net.total_supply() + (any_negative ? finite_caps : 0);

  const int source = n;
  const int sink = n + 1;
  std::vector<detail::ResidualEdge> edges;
  std::vector<std::vector<int>> out(n + 2);
  edges.reserve(2 * (m + n));
  auto push_pair = [&](int tail, int head, FlowUnits cap, double cost) {
    out[tail].push_back(static_cast<int>(edges.size()));
    edges.push_back({head, cap, cost});
    out[head].push_back(static_cast<int>(edges.size()));
    edges.push_back({tail, 0, -cost});
  };

  std::vector<FlowUnits> excess = net.supplies();
  for (const Arc& a : net.arcs()) {
    const FlowUnits cap = a.unbounded() ? unbounded_cap : a.capacity;
    push_pair(a.tail, a.head, cap, a.cost);
    if (a.cost < 0.0) {
      auto& fwd = edges[edges.size() - 2];
      auto& rev = edges[edges.size() - 1];
      rev.cap = cap;
      fwd.cap = 0;
      excess[a.tail] -= cap;
      excess[a.head] += cap;
    }
  }
  FlowUnits required = 0;
  for (int v = 0; v < n; ++v) {
    if (excess[v] > 0) {
      push_pair(source, v, excess[v], 0.0);
      required += excess[v];
    } else if (excess[v] < 0) {
      push_pair(v, sink, -excess[v], 0.0);
    }
  }

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> pot(n + 2, 0.0);
  std::vector<double> dist(n + 2);
  std::vector<int> via(n + 2);
  std::vector<char> done(n + 2);
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;

  FlowUnits routed = 0;
  while (routed < required) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(via.begin(), via.end(), -1);
    std::fill(done.begin(), done.end(), 0);
    heap = {};
    dist[source] = 0.0;
    heap.emplace(0.0, source);
    while (!heap.empty()) {
      const auto [d, v] = heap.top();
      heap.pop();
      if (done[v]) continue;
      done[v] = 1;
      if (v == sink) break;
      for (int e : out[v]) {
        const auto& edge = edges[e];
        if (edge.cap == 0 || done[edge.to]) continue;
        const double reduced = std::max(0.0, edge.cost + pot[v] - pot[edge.to]);
        if (d + reduced < dist[edge.to]) {
          dist[edge.to] = d + reduced;
          via[edge.to] = e;
          heap.emplace(dist[edge.to], edge.to);
        }
      }
    }
    if (!done[sink]) throw InfeasibleFlow(required, routed);

    const double horizon = dist[sink];
    for (int v = 0; v < n + 2; ++v) pot[v] += done[v] ? dist[v] : horizon;

    FlowUnits push = required - routed;
    for (int v = sink; v != source; v = edges[via[v] ^ 1].to)
      push = std::min(push, edges[via[v]].cap);
    for (int v = sink; v != source; v = edges[via[v] ^ 1].to) {
      edges[via[v]].cap -= push;
      edges[via[v] ^ 1].cap += push;
    }
    routed += push;
  }

  FlowSolution sol;
  sol.flow.resize(m);
  for (int a = 0; a < m; ++a) sol.flow[a] = edges[2 * a + 1].cap;
  sol.objective = flow_cost(net, sol.flow);
  sol.potentials.assign(pot.begin(), pot.begin() + n);
  return sol;
}

// Independent optimality test: bounds, conservation, the potential-based
// reduced-cost condition (when potentials are supplied) and a negative-cycle
// scan of the residual network with raw costs.
inline bool check_certificate(const FlowNetwork& net, const FlowSolution& sol) {
  const int n = net.num_nodes();
  const int m = net.num_arcs();
  if (static_cast<int>(sol.flow.size()) != m) return false;
  if (!sol.potentials.empty() && static_cast<int>(sol.potentials.size()) != n) return false;

  std::vector<FlowUnits> balance = net.supplies();
  for (int a = 0; a < m; ++a) {
    const Arc& arc = net.arc(a);
    const FlowUnits f = sol.flow[a];
    if (f < 0 || (!arc.unbounded() && f > arc.capacity)) return false;
    balance[arc.tail] -= f;
    balance[arc.head] += f;
  }
  if (std::any_of(balance.begin(), balance.end(), [](FlowUnits b) { return b != 0; }))
    return false;

  const double objective = flow_cost(net, sol.flow);
  if (std::abs(objective - sol.objective) > kCostTolerance * std::max(1.0, std::abs(objective)))
    return false;

  std::vector<std::tuple<int, int, double>> residual;
  for (int a = 0; a < m; ++a) {
    const Arc& arc = net.arc(a);
    const FlowUnits f = sol.flow[a];
    const bool forward_open = arc.unbounded() || f < arc.capacity;
    const bool backward_open = f > 0;
    if (!sol.potentials.empty()) {
      const double reduced = arc.cost + sol.potentials[arc.tail] - sol.potentials[arc.head];
      if (forward_open && reduced < -kCostTolerance) return false;
      if (backward_open && reduced > kCostTolerance) return false;
    }
    if (forward_open) residual.emplace_back(arc.tail, arc.head, arc.cost);
    if (backward_open) residual.emplace_back(arc.head, arc.tail, -arc.cost);
  }
  return !detail::has_negative_cycle(n, residual, kCostTolerance);
}

struct MaxFlowResult {
  FlowUnits value = 0;
  std::vector<FlowUnits> flow;  // per arc
};

// Edmonds-Karp max flow from `source` to `sink`; supplies and costs ignored.
inline MaxFlowResult max_flow(const FlowNetwork& net, int source, int sink) {
  const int n = net.num_nodes();
  const int m = net.num_arcs();
  FlowUnits bound = 1;
  for (const Arc& a : net.arcs())
    if (!a.unbounded()) bound += a.capacity;

  std::vector<FlowUnits> cap(2 * m);
  std::vector<int> to(2 * m);
  std::vector<std::vector<int>> out(n);
  for (int a = 0; a < m; ++a) {
    const Arc& arc = net.arc(a);
    cap[2 * a] = arc.unbounded() ? bound : arc.capacity;
    to[2 * a] = arc.head;
    to[2 * a + 1] = arc.tail;
    out[arc.tail].push_back(2 * a);
    out[arc.head].push_back(2 * a + 1);
  }

  MaxFlowResult res;
  std::vector<int> via(n);
  while (true) {
    std::fill(via.begin(), via.end(), -1);
    std::queue<int> bfs;
    bfs.push(source);
    via[source] = -2;
    while (!bfs.empty() && via[sink] == -1) {
      const int v = bfs.front();
      bfs.pop();
      for (int e : out[v]) {
        if (cap[e] > 0 && via[to[e]] == -1) {
          via[to[e]] = e;
          bfs.push(to[e]);
        }
      }
    }
    if (via[sink] == -1) break;
    FlowUnits push = std::numeric_limits<FlowUnits>::max();
    for (int v = sink; v != source; v = to[via[v] ^ 1]) push = std::min(push, cap[via[v]]);
    for (int v = sink; v != source; v = to[via[v] ^ 1]) {
      cap[via[v]] -= push;
      cap[via[v] ^ 1] += push;
    }
    res.value += push;
  }
  res.flow.resize(m);
  for (int a = 0; a < m; ++a) res.flow[a] = cap[2 * a + 1];
  return res;
}

// DIMACS min-cost-flow text format ("p min", "n", "a" lines; 1-based nodes).
// Unbounded capacities are written as the network's total supply.
inline void write_dimacs(std::ostream& os, const FlowNetwork& net) {
  os << "c carbonflow min-cost flow network\n";
  os << "p min " << net.num_nodes() << ' ' << net.num_arcs() << '\n';
  for (int v = 0; v < net.num_nodes(); ++v)
    if (net.supply(v) != 0) os << "n " << v + 1 << ' ' << net.supply(v) << '\n';
  const FlowUnits big = net.total_supply();
  const auto old_precision = os.precision(17);
  for (const Arc& a : net.arcs()) {
    os << "a " << a.tail + 1 << ' ' << a.head + 1 << " 0 " << (a.unbounded() ? big : a.capacity)
       << ' ' << a.cost << '\n';
  }
  os.precision(old_precision);
}

inline FlowNetwork read_dimacs(std::istream& is) {
  FlowNetwork net;
  std::string line;
  int line_no = 0;
  bool have_problem = false;
  auto fail = [&](const std::string& what) {
    throw std::runtime_error("DIMACS line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == 'c') continue;
    std::istringstream ls(line);
    char kind = 0;
    ls >> kind;
    if (kind == 'p') {
      std::string format;
      int nodes = 0;
      int arcs = 0;
      if (!(ls >> format >> nodes >> arcs) || format != "min" || nodes < 0) fail("bad problem line");
      for (int v = 0; v < nodes; ++v) net.add_node();
      have_problem = true;
    } else if (kind == 'n') {
      int id = 0;
      FlowUnits supply = 0;
      if (!have_problem || !(ls >> id >> supply) || id < 1 || id > net.num_nodes())
        fail("bad node line");
      net.set_supply(id - 1, supply);
    } else if (kind == 'a') {
      int tail = 0;
      int head = 0;
      FlowUnits low = 0;
      FlowUnits cap = 0;
      double cost = 0.0;
      if (!have_problem || !(ls >> tail >> head >> low >> cap >> cost)) fail("bad arc line");
      if (low != 0) fail("arc lower bounds are not supported");
      if (tail < 1 || head < 1 || tail > net.num_nodes() || head > net.num_nodes())
        fail("arc endpoint out of range");
      net.add_arc(tail - 1, head - 1, cap, cost);
    } else {
      fail("unknown line type");
    }
  }
  if (!have_problem) throw std::runtime_error("DIMACS input has no problem line");
  return net;
}

}  // namespace carbonflow
