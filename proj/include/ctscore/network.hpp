#ifndef CTSCORE_NETWORK_HPP
#define CTSCORE_NETWORK_HPP

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ctscore/errors.hpp"
#include "ctscore/gramian.hpp"

namespace ctscore {

struct Edge {
  int src;  // 1-based
  int dst;  // 1-based
  double weight;
  bool operator==(const Edge&) const = default;
};

struct SelfLoop {
  int node;  // 1-based
  double weight;
  bool operator==(const SelfLoop&) const = default;
};

/// Weighted directed graph. Self-loops are kept apart and go straight to
/// the diagonal of A.
struct EdgeList {
  int n = 0;
  std::vector<Edge> edges;
  std::vector<SelfLoop> self_loops;

  bool operator==(const EdgeList&) const = default;

  /// Throws ParseError (line 0) on out-of-range indices, non-finite
  /// weights, duplicate edges or duplicate self-loops.
  void validate() const {
    if (n <= 0) throw ParseError("edge list needs at least one node", 0);
    std::set<std::pair<int, int>> seen;
    auto in_range = [this](int v) { return v >= 1 && v <= n; };
    for (const auto& e : edges) {
      if (!in_range(e.src) || !in_range(e.dst)) {
        throw ParseError("edge " + std::to_string(e.src) + "->" + std::to_string(e.dst) +
                             " outside 1.." + std::to_string(n),
                         0);
      }
      if (!std::isfinite(e.weight)) throw ParseError("non-finite edge weight", 0);
      if (e.src == e.dst) throw ParseError("self-loops belong in self_loops", 0);
      if (!seen.insert({e.src, e.dst}).second) {
        throw ParseError("duplicate edge " + std::to_string(e.src) + "->" + std::to_string(e.dst), 0);
      }
    }
    for (const auto& s : self_loops) {
      if (!in_range(s.node)) throw ParseError("self-loop node outside range", 0);
      if (!std::isfinite(s.weight)) throw ParseError("non-finite self-loop weight", 0);
      if (!seen.insert({s.node, s.node}).second) {
        throw ParseError("duplicate self-loop at node " + std::to_string(s.node), 0);
      }
    }
  }
};

/// Text format: one `src dst weight` triple per line with 1-based indices,
/// `src src weight` for a self-loop, `#` comments, and an optional
/// `nodes N` line (otherwise N is the largest index seen).
inline EdgeList parse_edge_list(std::istream& in) {
  EdgeList out;
  int declared = 0;
  int largest = 0;
  std::set<std::pair<int, int>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string first;
    if (!(fields >> first)) continue;
    if (first == "nodes") {
      if (!(fields >> declared) || declared <= 0) throw ParseError("bad node count", line_no);
      std::string extra;
      if (fields >> extra) throw ParseError("trailing text after node count", line_no);
      continue;
    }
    int src = 0;
    int dst = 0;
    double weight = 0.0;
    std::string extra;
    try {
      std::size_t used = 0;
      src = std::stoi(first, &used);
      if (used != first.size()) throw std::invalid_argument(first);
    } catch (const std::exception&) {
      throw ParseError("expected `src dst weight`, got '" + first + "'", line_no);
    }
    if (!(fields >> dst >> weight) || (fields >> extra)) {
      throw ParseError("expected `src dst weight`", line_no);
    }
    if (src < 1 || dst < 1) throw ParseError("node indices are 1-based", line_no);
    if (!std::isfinite(weight)) throw ParseError("non-finite weight", line_no);
    if (!seen.insert({src, dst}).second) {
      throw ParseError("duplicate edge " + std::to_string(src) + " " + std::to_string(dst),
                       line_no);
    }
    largest = std::max({largest, src, dst});
    if (src == dst) {
      out.self_loops.push_back({src, weight});
    } else {
      out.edges.push_back({src, dst, weight});
    }
  }
  if (declared > 0 && largest > declared) {
    throw ParseError("node index " + std::to_string(largest) + " exceeds declared count " +
                         std::to_string(declared),
                     0);
  }
  out.n = declared > 0 ? declared : largest;
  out.validate();
  return out;
}

inline EdgeList read_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open edge list '" + path + "'");
  return parse_edge_list(in);
}

/// Inverse of parse_edge_list; weights are written with round-trip precision.
inline std::string format_edge_list(const EdgeList& edges) {
  std::ostringstream out;
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "nodes " << edges.n << "\n";
  for (const auto& e : edges.edges) out << e.src << " " << e.dst << " " << e.weight << "\n";
  for (const auto& s : edges.self_loops) out << s.node << " " << s.node << " " << s.weight << "\n";
  return out.str();
}

/// A = -L for consensus dynamics x_i' = sum_{j->i} w (x_j - x_i): A_ij is
/// the weight of j -> i, A_ii is minus the incoming weight of i plus its
/// self-loop. Nodes without incoming edges get a zero off-diagonal row.
inline NetworkSystem build_laplacian_dynamics(const EdgeList& edges) {
  edges.validate();
  MatrixXd a = MatrixXd::Zero(edges.n, edges.n);
  for (const auto& e : edges.edges) {
    a(e.dst - 1, e.src - 1) += e.weight;
    a(e.dst - 1, e.dst - 1) -= e.weight;
  }
  for (const auto& s : edges.self_loops) a(s.node - 1, s.node - 1) += s.weight;
  return NetworkSystem(std::move(a));
}

inline std::vector<std::string> builtin_network_names() {
  return {"fig1", "fig1-selfloop9", "twonode-diag"};
}

/// fig1: the ten-node directed test network, every edge weight 0.2.
/// fig1-selfloop9: the same with a self-loop of weight -1 at node 9.
/// twonode-diag: two isolated nodes, A = diag(0, -1).
inline EdgeList builtin_network(const std::string& name) {
  if (name == "fig1" || name == "fig1-selfloop9") {
    EdgeList out;
    out.n = 10;
    constexpr double c = 0.2;
    constexpr std::pair<int, int> links[] = {{1, 5}, {2, 10}, {3, 8}, {4, 6}, {7, 1},
                                             {7, 2}, {7, 3},  {7, 4}, {9, 1}, {10, 6}};
    for (const auto& [src, dst] : links) out.edges.push_back({src, dst, c});
    if (name == "fig1-selfloop9") out.self_loops.push_back({9, -1.0});
    return out;
  }
  if (name == "twonode-diag") {
    EdgeList out;
    out.n = 2;
    out.self_loops.push_back({2, -1.0});
    return out;
  }
  std::string known;
  for (const auto& n : builtin_network_names()) known += (known.empty() ? "" : ", ") + n;
  throw UsageError("unknown builtin network '" + name + "' (known: " + known + ")");
}

}  // namespace ctscore

#endif  // CTSCORE_NETWORK_HPP
