#include "ricci_bound/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <string>

#include "ricci_bound/error.hpp"

namespace ricci {
namespace {

void normalize(std::vector<double>& v) {
  const double total = std::accumulate(v.begin(), v.end(), 0.0);
  for (double& x : v) x /= total;
}

// nonzero kernel entries per row, so repeated products skip the zeros
struct SparseKernel {
  std::vector<std::size_t> offsets;
  std::vector<std::size_t> columns;
  std::vector<double> values;

  explicit SparseKernel(const Matrix& k) {
    offsets.push_back(0);
    for (std::size_t i = 0; i < k.rows(); ++i) {
      for (std::size_t j = 0; j < k.cols(); ++j) {
        if (k(i, j) != 0.0) {
          columns.push_back(j);
          values.push_back(k(i, j));
        }
      }
      offsets.push_back(columns.size());
    }
  }

  void apply(const std::vector<double>& pi, std::vector<double>& out) const {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i + 1 < offsets.size(); ++i) {
      if (pi[i] == 0.0) continue;
      for (std::size_t e = offsets[i]; e < offsets[i + 1]; ++e) out[columns[e]] += pi[i] * values[e];
    }
  }
};

}  // namespace

const char* to_string(StationaryMethod method) {
  switch (method) {
    case StationaryMethod::BirthDeathExact: return "birth_death_exact";
    case StationaryMethod::PowerIteration: return "power_iteration";
    case StationaryMethod::Cesaro: return "cesaro";
  }
  return "unknown";
}

double tv_distance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw DomainError("TV distance between vectors of different length");
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) total += std::abs(a[i] - b[i]);
  return 0.5 * total;
}

std::vector<double> push_forward(const MetricChain& chain, const std::vector<double>& pi) {
  if (pi.size() != chain.size()) throw DomainError("vector size does not match chain");
  std::vector<double> out(chain.size());
  SparseKernel(chain.kernel).apply(pi, out);
  return out;
}

StationaryResult stationary_birth_death(const MetricChain& chain) {
  const std::size_t n = chain.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if ((i > j + 1 || j > i + 1) && chain.kernel(i, j) != 0.0) {
        throw DomainError("kernel is not tridiagonal: entry (" + std::to_string(i) + ", " +
                          std::to_string(j) + ") is nonzero");
      }
    }
  }

  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  std::vector<double> log_pi(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double up = chain.kernel(i, i + 1);
    const double down = chain.kernel(i + 1, i);
    if (up == 0.0 || log_pi[i] == kNegInf) {
      log_pi[i + 1] = kNegInf;
    } else if (down == 0.0) {
      throw DomainError("state " + std::to_string(i + 1) +
                        " is entered from below but never left downward; detailed balance fails");
    } else {
      log_pi[i + 1] = log_pi[i] + std::log(up) - std::log(down);
    }
  }

  const double top = *std::max_element(log_pi.begin(), log_pi.end());
  StationaryResult r;
  r.method = StationaryMethod::BirthDeathExact;
  r.distribution.resize(n);
  for (std::size_t i = 0; i < n; ++i) r.distribution[i] = std::exp(log_pi[i] - top);
  normalize(r.distribution);
  r.residual = tv_distance(r.distribution, push_forward(chain, r.distribution));
  return r;
}

StationaryResult stationary_power(const MetricChain& chain, double tol, std::size_t max_iters,
                                  const std::optional<std::vector<double>>& initial) {
  const std::size_t n = chain.size();
  std::vector<double> v(n, 1.0 / static_cast<double>(n));
  if (initial) {
    if (initial->size() != n) throw DomainError("initial vector size does not match chain");
    v = *initial;
    normalize(v);
  }
  const SparseKernel kernel(chain.kernel);
  std::vector<double> next(n);
  double residual = std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it <= max_iters; ++it) {
    kernel.apply(v, next);
    normalize(next);
    residual = tv_distance(v, next);
    if (residual <= tol) {
      StationaryResult r;
      r.method = StationaryMethod::PowerIteration;
      r.distribution = std::move(v);
      r.residual = residual;
      r.iterations = it;
      return r;
    }
    std::swap(v, next);
  }
  throw ConvergenceError("power iteration did not reach TV residual " + std::to_string(tol) +
                             " within " + std::to_string(max_iters) + " iterations",
                         residual);
}

StationaryResult stationary_cesaro(const MetricChain& chain, std::size_t start, std::size_t n) {
  if (start >= chain.size()) throw DomainError("start index out of range");
  std::vector<double> v(chain.size(), 0.0);
  v[start] = 1.0;
  std::vector<double> sum = v;
  std::vector<double> next(v.size());
  const SparseKernel kernel(chain.kernel);
  for (std::size_t i = 1; i <= n; ++i) {
    kernel.apply(v, next);
    std::swap(v, next);
    for (std::size_t j = 0; j < v.size(); ++j) sum[j] += v[j];
  }
  for (double& x : sum) x /= static_cast<double>(n + 1);

  StationaryResult r;
  r.method = StationaryMethod::Cesaro;
  r.distribution = std::move(sum);
  r.residual = tv_distance(r.distribution, push_forward(chain, r.distribution));
  r.iterations = n;
  return r;
}

TailCurve empirical_tail(const StationaryResult& result, const MetricChain& chain,
                         std::size_t origin, const std::vector<double>& levels) {
  const std::size_t n = chain.size();
  if (origin >= n) throw DomainError("origin index out of range");
  if (result.distribution.size() != n) throw DomainError("distribution size does not match chain");

  // accumulate from the far end so tiny tails keep their precision
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return chain.dist(a, origin) > chain.dist(b, origin);
  });
  std::vector<double> dist_desc(n);
  std::vector<double> cumulative(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    dist_desc[i] = chain.dist(order[i], origin);
    acc += result.distribution[order[i]];
    cumulative[i] = acc;
  }

  TailCurve curve;
  curve.kind = TailKind::Empirical;
  for (double l : levels) {
    // count of points with distance >= l - 1e-9
    const auto it = std::partition_point(dist_desc.begin(), dist_desc.end(),
                                         [&](double d) { return d >= l - 1e-9; });
    const auto count = static_cast<std::size_t>(it - dist_desc.begin());
    const double mass = count == 0 ? 0.0 : std::min(1.0, cumulative[count - 1]);
    curve.levels.push_back(l);
    curve.values.push_back(mass);
    curve.log_values.push_back(std::log(mass));
  }
  return curve;
}

double truncation_mass(const StationaryResult& result, std::size_t count) {
  const auto& d = result.distribution;
  const std::size_t first = d.size() > count ? d.size() - count : 0;
  double mass = 0.0;
  for (std::size_t i = first; i < d.size(); ++i) mass += d[i];
  return mass;
}

void write_stationary_csv(std::ostream& out, const StationaryResult& result,
                          const MetricChain& chain) {
  out << "point,mass\n" << std::setprecision(17);
  for (std::size_t i = 0; i < result.distribution.size(); ++i) {
    out << chain.points[i] << ',' << result.distribution[i] << '\n';
  }
}

}  // namespace ricci
