#include "ricci_bound/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "ricci_bound/error.hpp"

namespace ricci {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMassEpsilon = 1e-15;

struct Atom {
  double position;
  double signed_mass;
};

std::vector<Atom> signed_atoms(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                               std::span<const double> coords) {
  std::vector<Atom> atoms;
  atoms.reserve(mu.size() + nu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu.support[i] >= coords.size()) throw DomainError("support index outside coordinates");
    atoms.push_back({coords[mu.support[i]], mu.weights[i]});
  }
  for (std::size_t i = 0; i < nu.size(); ++i) {
    if (nu.support[i] >= coords.size()) throw DomainError("support index outside coordinates");
    atoms.push_back({coords[nu.support[i]], -nu.weights[i]});
  }
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.position < b.position; });
  return atoms;
}

std::vector<std::size_t> support_union(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  std::vector<std::size_t> points = mu.support;
  points.insert(points.end(), nu.support.begin(), nu.support.end());
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  return points;
}

template <typename Distance>
TransportSolution certify(const DiscreteMeasure& mu, const DiscreteMeasure& nu, Distance&& d) {
  mu.validate();
  nu.validate();

  Matrix cost(mu.size(), nu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (std::size_t j = 0; j < nu.size(); ++j) cost(i, j) = d(mu.support[i], nu.support[j]);
  }
  TransportSolution sol = solve_transport(mu.weights, nu.weights, cost);

  sol.potential_points = support_union(mu, nu);
  const std::size_t n = sol.potential_points.size();
  sol.potential.assign(n, kInf);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t j = 0; j < nu.size(); ++j) {
      sol.potential[p] =
          std::min(sol.potential[p], d(sol.potential_points[p], nu.support[j]) - sol.psi[j]);
    }
  }

  auto f_at = [&](std::size_t point) {
    const auto it = std::lower_bound(sol.potential_points.begin(), sol.potential_points.end(), point);
    return sol.potential[static_cast<std::size_t>(it - sol.potential_points.begin())];
  };
  double dual = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) dual += mu.weights[i] * f_at(mu.support[i]);
  for (std::size_t j = 0; j < nu.size(); ++j) dual -= nu.weights[j] * f_at(nu.support[j]);
  sol.dual_value = dual;

  double excess = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const double gap = std::abs(sol.potential[a] - sol.potential[b]) -
                         d(sol.potential_points[a], sol.potential_points[b]);
      excess = std::max(excess, gap);
    }
  }
  sol.lipschitz_excess = excess;
  return sol;
}

}  // namespace

DiscreteMeasure DiscreteMeasure::dirac(std::size_t point) { return {{point}, {1.0}}; }

DiscreteMeasure DiscreteMeasure::from_dense(std::span<const double> masses) {
  DiscreteMeasure m;
  for (std::size_t i = 0; i < masses.size(); ++i) {
    if (masses[i] != 0.0) {
      m.support.push_back(i);
      m.weights.push_back(masses[i]);
    }
  }
  return m;
}

void DiscreteMeasure::validate(double tolerance) const {
  if (support.size() != weights.size()) throw DomainError("support and weights differ in length");
  if (support.empty()) throw DomainError("measure has empty support");
  double sum = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) throw DomainError("measure has a negative or non-finite weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > tolerance) throw DomainError("measure is not normalized");
}

double DiscreteMeasure::mean(std::span<const double> coords) const {
  double m = 0.0;
  for (std::size_t i = 0; i < size(); ++i) m += weights[i] * coords[support[i]];
  return m;
}

double w1_line(const DiscreteMeasure& mu, const DiscreteMeasure& nu, std::span<const double> coords) {
  mu.validate();
  nu.validate();
  const auto atoms = signed_atoms(mu, nu, coords);
  double cdf_gap = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < atoms.size(); ++i) {
    cdf_gap += atoms[i].signed_mass;
    total += std::abs(cdf_gap) * (atoms[i + 1].position - atoms[i].position);
  }
  return total;
}

bool stochastic_dominance_check(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                std::span<const double> coords) {
  const auto atoms = signed_atoms(mu, nu, coords);
  // F_mu - F_nu must stay >= 0 after each group of coincident atoms
  double cdf_gap = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    cdf_gap += atoms[i].signed_mass;
    const bool group_end = i + 1 == atoms.size() || atoms[i + 1].position != atoms[i].position;
    if (group_end && cdf_gap < -1e-12) return false;
  }
  return true;
}

TransportSolution solve_transport(std::span<const double> supply, std::span<const double> demand,
                                  const Matrix& cost) {
  const std::size_t m = supply.size();
  const std::size_t n = demand.size();
  if (m == 0 || n == 0) throw DomainError("transport needs nonempty supply and demand");
  if (cost.rows() != m || cost.cols() != n) throw DomainError("cost matrix shape mismatch");

  // node layout: 0 = source, 1..m supply, m+1..m+n demand, m+n+1 = sink
  const std::size_t source = 0;
  const std::size_t sink = m + n + 1;
  const std::size_t nodes = m + n + 2;
  auto supply_node = [](std::size_t i) { return 1 + i; };
  auto demand_node = [m](std::size_t j) { return 1 + m + j; };

  Matrix flow(m, n, 0.0);
  std::vector<double> shipped(m, 0.0);
  std::vector<double> received(n, 0.0);
  std::vector<double> height(nodes, 0.0);
  std::vector<double> dist(nodes);
  std::vector<long> parent(nodes);
  std::vector<char> done(nodes);

  const double total = std::min(std::accumulate(supply.begin(), supply.end(), 0.0),
                                std::accumulate(demand.begin(), demand.end(), 0.0));
  double moved = 0.0;
  const std::size_t max_rounds = 4 * (m + n) * (m + n) + 16;

  for (std::size_t round = 0; round < max_rounds && moved < total - kMassEpsilon; ++round) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(parent.begin(), parent.end(), -1);
    std::fill(done.begin(), done.end(), 0);
    dist[source] = 0.0;

    // dense Dijkstra on reduced costs
    for (;;) {
      std::size_t u = nodes;
      double best = kInf;
      for (std::size_t v = 0; v < nodes; ++v) {
        if (!done[v] && dist[v] < best) {
          best = dist[v];
          u = v;
        }
      }
      if (u == nodes) break;
      done[u] = 1;
      auto relax = [&](std::size_t v, double edge_cost) {
        const double reduced = std::max(0.0, edge_cost + height[u] - height[v]);
        if (dist[u] + reduced < dist[v]) {
          dist[v] = dist[u] + reduced;
          parent[v] = static_cast<long>(u);
        }
      };
      if (u == source) {
        for (std::size_t i = 0; i < m; ++i) {
          if (supply[i] - shipped[i] > kMassEpsilon) relax(supply_node(i), 0.0);
        }
      } else if (u <= m) {
        const std::size_t i = u - 1;
        for (std::size_t j = 0; j < n; ++j) relax(demand_node(j), cost(i, j));
        if (shipped[i] > 0.0) relax(source, 0.0);
      } else if (u < sink) {
        const std::size_t j = u - 1 - m;
        for (std::size_t i = 0; i < m; ++i) {
          if (flow(i, j) > 0.0) relax(supply_node(i), -cost(i, j));
        }
        if (demand[j] - received[j] > kMassEpsilon) relax(sink, 0.0);
      }
    }
    if (dist[sink] == kInf) break;

    const double reach = dist[sink];
    for (std::size_t v = 0; v < nodes; ++v) height[v] += std::min(dist[v], reach);

    // bottleneck along the path sink <- ... <- source
    double push = total - moved;
    for (std::size_t v = sink; v != source;) {
      const auto u = static_cast<std::size_t>(parent[v]);
      if (u == source) {
        push = std::min(push, supply[v - 1] - shipped[v - 1]);
      } else if (v == sink) {
        push = std::min(push, demand[u - 1 - m] - received[u - 1 - m]);
      } else if (u > m) {
        push = std::min(push, flow(v - 1, u - 1 - m));
      }
      v = u;
    }
    if (!(push > 0.0)) break;

    for (std::size_t v = sink; v != source;) {
      const auto u = static_cast<std::size_t>(parent[v]);
      if (u == source) {
        shipped[v - 1] += push;
      } else if (v == sink) {
        received[u - 1 - m] += push;
      } else if (u <= m) {
        flow(u - 1, v - 1 - m) += push;
      } else {
        flow(v - 1, u - 1 - m) = std::max(0.0, flow(v - 1, u - 1 - m) - push);
      }
      v = u;
    }
    moved += push;
  }

  TransportSolution sol;
  sol.plan = std::move(flow);
  double value = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) value += sol.plan(i, j) * cost(i, j);
  }
  sol.value = value;
  sol.phi.resize(m);
  sol.psi.resize(n);
  for (std::size_t i = 0; i < m; ++i) sol.phi[i] = -height[supply_node(i)];
  for (std::size_t j = 0; j < n; ++j) sol.psi[j] = height[demand_node(j)];
  return sol;
}

TransportSolution w1_flow_certified(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                    const MetricChain& chain) {
  const std::size_t n = chain.size();
  for (auto p : mu.support) {
    if (p >= n) throw DomainError("support index outside the chain");
  }
  for (auto p : nu.support) {
    if (p >= n) throw DomainError("support index outside the chain");
  }
  return certify(mu, nu, [&](std::size_t a, std::size_t b) { return chain.dist(a, b); });
}

double w1_flow(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const MetricChain& chain) {
  return w1_flow_certified(mu, nu, chain).value;
}

TransportSolution w1_flow_certified(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                    std::span<const double> coords) {
  for (auto p : mu.support) {
    if (p >= coords.size()) throw DomainError("support index outside coordinates");
  }
  for (auto p : nu.support) {
    if (p >= coords.size()) throw DomainError("support index outside coordinates");
  }
  return certify(mu, nu,
                 [&](std::size_t a, std::size_t b) { return std::abs(coords[a] - coords[b]); });
}

}  // namespace ricci
