#include "cohortlens/rule_graph.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>

#include "cohortlens/error.hpp"

namespace cohortlens::graph {

std::vector<std::size_t> RuleGraph::degrees() const {
  std::vector<std::size_t> deg(nodes.size(), 0);
  for (const auto& e : edges) {
    ++deg[e.from];
    ++deg[e.to];
  }
  return deg;
}

std::vector<std::vector<std::size_t>> RuleGraph::adjacency() const {
  std::vector<std::vector<std::size_t>> adj(nodes.size());
  for (const auto& e : edges) {
    adj[e.from].push_back(e.to);
    adj[e.to].push_back(e.from);
  }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return adj;
}

RuleGraph build_graph(const std::vector<arm::AssociationRule>& rules) {
  if (rules.empty()) throw Error(ErrorCode::EmptyRuleList, "no rules to draw");
  arm::ItemMask used = 0;
  for (const auto& r : rules) used |= r.antecedent | r.consequent;

  RuleGraph g;
  std::map<std::size_t, std::size_t> node_of_symptom;
  for (auto s : arm::items_of(used)) {
    node_of_symptom[s] = g.nodes.size();
    Node n;
    n.id = "s:" + std::string(symptoms()[s].id);
    n.kind = NodeKind::Symptom;
    n.symptom = s;
    g.nodes.push_back(std::move(n));
  }
  for (const auto& r : rules) {
    const std::size_t rule_node = g.nodes.size();
    Node n;
    n.id = "r:" + std::to_string(r.rule_id);
    n.kind = NodeKind::Rule;
    n.rule_id = r.rule_id;
    n.support = r.support().value();
    n.lift = r.lift.value();
    g.nodes.push_back(std::move(n));
    for (auto s : arm::items_of(r.antecedent)) g.edges.push_back({node_of_symptom[s], rule_node});
    for (auto s : arm::items_of(r.consequent)) g.edges.push_back({rule_node, node_of_symptom[s]});
  }
  return g;
}

std::vector<std::pair<arm::ItemMask, arm::ItemMask>> rules_from_graph(const RuleGraph& g) {
  std::vector<std::pair<arm::ItemMask, arm::ItemMask>> out;
  std::vector<std::size_t> slot(g.size(), 0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.nodes[i].kind == NodeKind::Rule) {
      slot[i] = out.size();
      out.emplace_back(0, 0);
    }
  }
  for (const auto& e : g.edges) {
    if (g.nodes[e.to].kind == NodeKind::Rule) {
      out[slot[e.to]].first |= arm::ItemMask{1} << g.nodes[e.from].symptom;
    } else {
      out[slot[e.from]].second |= arm::ItemMask{1} << g.nodes[e.to].symptom;
    }
  }
  return out;
}

std::vector<std::vector<int>> graph_distances(const RuleGraph& g) {
  const auto adj = g.adjacency();
  const std::size_t n = g.size();
  std::vector<std::vector<int>> dist(n, std::vector<int>(n, -1));
  for (std::size_t s = 0; s < n; ++s) {
    auto& d = dist[s];
    std::deque<std::size_t> queue{s};
    d[s] = 0;
    while (!queue.empty()) {
      const auto u = queue.front();
      queue.pop_front();
      for (auto v : adj[u]) {
        if (d[v] < 0) {
          d[v] = d[u] + 1;
          queue.push_back(v);
        }
      }
    }
  }
  return dist;
}

std::vector<double> mean_graph_distance(const RuleGraph& g) {
  const auto dist = graph_distances(g);
  const std::size_t n = g.size();
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      total += dist[i][j] < 0 ? static_cast<double>(n) : dist[i][j];
    }
    out[i] = total / static_cast<double>(n - 1);
  }
  return out;
}

std::vector<std::array<double, 2>> classical_mds(const std::vector<std::vector<double>>& dist) {
  const auto n = static_cast<Eigen::Index>(dist.size());
  std::vector<std::array<double, 2>> out(dist.size(), {0.0, 0.0});
  if (n < 2) return out;

  Eigen::MatrixXd sq(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) sq(i, j) = dist[i][j] * dist[i][j];
  }
  const Eigen::VectorXd row_mean = sq.rowwise().mean();
  const Eigen::RowVectorXd col_mean = sq.colwise().mean();
  const double grand = sq.mean();
  Eigen::MatrixXd b(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      b(i, j) = -0.5 * (sq(i, j) - row_mean(i) - col_mean(j) + grand);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(b);
  const auto& values = solver.eigenvalues();
  const auto& vectors = solver.eigenvectors();
  for (int axis = 0; axis < 2 && axis < n; ++axis) {
    const Eigen::Index col = n - 1 - axis;
    const double lambda = values(col);
    if (lambda <= 1e-12) continue;
    Eigen::VectorXd v = vectors.col(col) * std::sqrt(lambda);
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < n; ++i) {
      if (std::abs(v(i)) > std::abs(v(arg)) + 1e-12) arg = i;
    }
    if (v(arg) < 0) v = -v;
    for (Eigen::Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)][axis] = v(i);
  }
  return out;
}

double kruskal_stress(const std::vector<std::array<double, 2>>& pos,
                      const std::vector<std::vector<double>>& dist) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    for (std::size_t j = i + 1; j < pos.size(); ++j) {
      const double e = std::hypot(pos[i][0] - pos[j][0], pos[i][1] - pos[j][1]);
      num += (e - dist[i][j]) * (e - dist[i][j]);
      den += dist[i][j] * dist[i][j];
    }
  }
  return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Unit direction derived from (seed, a, b).
std::array<double, 2> seeded_direction(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  const std::uint64_t h = splitmix64(splitmix64(seed ^ splitmix64(a)) ^ b);
  const double angle = static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 * 3.14159265358979323846;
  return {std::cos(angle), std::sin(angle)};
}

/// Weighted stress gradient descent (weights 1/d^2) with a linearly
/// decaying step and a per-node displacement cap.
void refine(std::vector<std::array<double, 2>>& pos, const std::vector<std::vector<double>>& dist,
            const std::vector<std::size_t>& ids, std::uint64_t seed, const LayoutOptions& options) {
  const std::size_t n = pos.size();
  if (n < 2) return;
  constexpr double kMaxMove = 0.5;
  std::vector<std::array<double, 2>> grad(n);
  for (std::size_t it = 0; it < options.iterations; ++it) {
    const double step =
        options.initial_step * (1.0 - static_cast<double>(it) / static_cast<double>(options.iterations));
    for (auto& g : grad) g = {0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double target = dist[i][j];
        double dx = pos[i][0] - pos[j][0];
        double dy = pos[i][1] - pos[j][1];
        double len = std::hypot(dx, dy);
        if (len < 1e-9) {
          const auto u = seeded_direction(seed, ids[i], ids[j]);
          dx = u[0];
          dy = u[1];
          // Coincident nodes: push apart along the seeded direction.
          const double w = 1.0 / (target * target);
          grad[i][0] -= w * target * dx;
          grad[i][1] -= w * target * dy;
          grad[j][0] += w * target * dx;
          grad[j][1] += w * target * dy;
          continue;
        }
        const double w = 1.0 / (target * target);
        const double coeff = 2.0 * w * (len - target) / len;
        grad[i][0] += coeff * dx;
        grad[i][1] += coeff * dy;
        grad[j][0] -= coeff * dx;
        grad[j][1] -= coeff * dy;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      double mx = -step * grad[i][0];
      double my = -step * grad[i][1];
      const double m = std::hypot(mx, my);
      if (m > kMaxMove) {
        mx *= kMaxMove / m;
        my *= kMaxMove / m;
      }
      pos[i][0] += mx;
      pos[i][1] += my;
    }
  }
}

}  // namespace

LayoutResult layout(const RuleGraph& g, std::uint64_t seed, const LayoutOptions& options) {
  LayoutResult result;
  result.seed = seed;
  const std::size_t n = g.size();
  result.positions.assign(n, {0.0, 0.0});
  result.mds_positions.assign(n, {0.0, 0.0});
  if (n == 0) return result;

  const auto hops = graph_distances(g);

  // Connected components, each listed in ascending node order.
  std::vector<int> component(n, -1);
  std::vector<std::vector<std::size_t>> components;
  for (std::size_t i = 0; i < n; ++i) {
    if (component[i] >= 0) continue;
    std::vector<std::size_t> members;
    for (std::size_t j = 0; j < n; ++j) {
      if (hops[i][j] >= 0) {
        component[j] = static_cast<int>(components.size());
        members.push_back(j);
      }
    }
    components.push_back(std::move(members));
  }
  std::stable_sort(components.begin(), components.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });

  double stress_num = 0.0;
  double stress_den = 0.0;
  double cursor = 0.0;
  for (const auto& members : components) {
    const std::size_t m = members.size();
    std::vector<std::vector<double>> dist(m, std::vector<double>(m));
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = 0; b < m; ++b) dist[a][b] = hops[members[a]][members[b]];
    }
    auto pos = classical_mds(dist);
    for (std::size_t a = 0; a < m; ++a) result.mds_positions[members[a]] = pos[a];
    const double s = kruskal_stress(pos, dist);
    double den = 0.0;
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = a + 1; b < m; ++b) den += dist[a][b] * dist[a][b];
    }
    stress_num += s * s * den;
    stress_den += den;

    refine(pos, dist, members, seed, options);

    double min_x = std::numeric_limits<double>::infinity();
    double max_x = -min_x;
    double min_y = min_x;
    double max_y = -min_x;
    for (const auto& p : pos) {
      min_x = std::min(min_x, p[0]);
      max_x = std::max(max_x, p[0]);
      min_y = std::min(min_y, p[1]);
      max_y = std::max(max_y, p[1]);
    }
    const double shift_x = cursor - min_x;
    const double shift_y = -0.5 * (min_y + max_y);
    for (std::size_t a = 0; a < m; ++a) {
      result.positions[members[a]] = {pos[a][0] + shift_x, pos[a][1] + shift_y};
    }
    cursor += (max_x - min_x) + options.component_gap;
  }
  result.mds_stress = stress_den > 0.0 ? std::sqrt(stress_num / stress_den) : 0.0;

  // Separate any nodes closer than min_separation; later nodes move.
  for (std::size_t i = 1; i < n; ++i) {
    const auto u = seeded_direction(seed, i, 0);
    for (int attempt = 0; attempt < 1000; ++attempt) {
      bool clear = true;
      for (std::size_t j = 0; j < i; ++j) {
        if (std::hypot(result.positions[i][0] - result.positions[j][0],
                       result.positions[i][1] - result.positions[j][1]) < options.min_separation) {
          clear = false;
          break;
        }
      }
      if (clear) break;
      result.positions[i][0] += options.min_separation * u[0];
      result.positions[i][1] += options.min_separation * u[1];
    }
  }

  result.bbox = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                 -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& p : result.positions) {
    result.bbox[0] = std::min(result.bbox[0], p[0]);
    result.bbox[1] = std::min(result.bbox[1], p[1]);
    result.bbox[2] = std::max(result.bbox[2], p[0]);
    result.bbox[3] = std::max(result.bbox[3], p[1]);
  }
  return result;
}

NodeVisual node_visuals(double support, double lift, std::pair<double, double> support_range,
                        std::pair<double, double> lift_range, const VisualParams& params) {
  auto normalize = [](double v, std::pair<double, double> range) {
    const double span = range.second - range.first;
    if (!(span > 0.0)) return 0.5;
    return std::clamp((v - range.first) / span, 0.0, 1.0);
  };
  NodeVisual out;
  out.radius = params.radius_min + (params.radius_max - params.radius_min) * normalize(support, support_range);
  out.shade = normalize(lift, lift_range);
  return out;
}

}  // namespace cohortlens::graph
