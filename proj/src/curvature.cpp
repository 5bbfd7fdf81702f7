#include "ricci_bound/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ricci_bound/error.hpp"
#include "ricci_bound/parallel.hpp"
#include "ricci_bound/transport.hpp"

namespace ricci {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool same_distance(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)); }

double transport_between(const MetricChain& chain, const DiscreteMeasure& a, const DiscreteMeasure& b,
                         TransportMethod method) {
  if (method == TransportMethod::Automatic) {
    method = chain.coords ? TransportMethod::Line : TransportMethod::Flow;
  }
  if (method == TransportMethod::Line) {
    if (!chain.coords) throw DomainError("line transport requested on a chain without coordinates");
    return w1_line(a, b, *chain.coords);
  }
  return w1_flow(a, b, chain);
}

}  // namespace

Envelope::Envelope(std::vector<double> breakpoints, std::vector<double> values)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
  if (breakpoints_.empty() || breakpoints_.size() != values_.size()) {
    throw DomainError("envelope needs matching, nonempty breakpoints and values");
  }
  if (breakpoints_.front() != 0.0) throw DomainError("envelope must start at r = 0");
  for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
    if (!(breakpoints_[i] > breakpoints_[i - 1])) {
      throw DomainError("envelope breakpoints must increase strictly");
    }
  }
}

std::size_t Envelope::segment(double r) const {
  const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), r);
  return it == breakpoints_.begin() ? 0 : static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
}

double Envelope::operator()(double r) const { return values_[segment(r)]; }

double Envelope::integral(double a, double b) const {
  if (b <= a) return 0.0;
  double total = 0.0;
  for (std::size_t i = segment(a); i < breakpoints_.size(); ++i) {
    const double lo = std::max(a, breakpoints_[i]);
    const double hi = i + 1 < breakpoints_.size() ? std::min(b, breakpoints_[i + 1]) : b;
    if (hi > lo) total += values_[i] * (hi - lo);
    if (i + 1 >= breakpoints_.size() || breakpoints_[i + 1] >= b) break;
  }
  return total;
}

double Envelope::iterated_integral(double a, double b) const {
  if (b <= a) return 0.0;
  // on each constant piece [lo, hi]: integral of (E(lo) + K (u - lo)) du
  double total = 0.0;
  double inner = 0.0;
  for (std::size_t i = segment(a); i < breakpoints_.size(); ++i) {
    const double lo = std::max(a, breakpoints_[i]);
    const double hi = i + 1 < breakpoints_.size() ? std::min(b, breakpoints_[i + 1]) : b;
    if (hi > lo) {
      const double len = hi - lo;
      total += inner * len + 0.5 * values_[i] * len * len;
      inner += values_[i] * len;
    }
    if (i + 1 >= breakpoints_.size() || breakpoints_[i + 1] >= b) break;
  }
  return total;
}

double Envelope::support_end() const {
  if (values_.back() > 0.0) return kInf;
  std::size_t i = values_.size() - 1;
  while (i > 0 && values_[i - 1] == 0.0) --i;
  return breakpoints_[i];
}

bool Envelope::is_nonincreasing() const {
  for (std::size_t i = 1; i < values_.size(); ++i) {
    if (values_[i] > values_[i - 1]) return false;
  }
  return true;
}

double kappa_pair(const MetricChain& chain, std::size_t x, std::size_t y, TransportMethod method) {
  if (x >= chain.size() || y >= chain.size()) throw DomainError("point index out of range");
  if (x == y) throw DomainError("coarse curvature needs two distinct points");
  const double w1 = transport_between(chain, chain.row(x), chain.row(y), method);
  return 1.0 - w1 / chain.dist(x, y);
}

LocalCurvature local_curvature(const MetricChain& chain, double epsilon, TransportMethod method) {
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  const std::size_t n = chain.size();
  const double reach = epsilon * (1.0 + 1e-12);

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = x + 1; y < n; ++y) {
      if (chain.dist(x, y) <= reach) pairs.emplace_back(x, y);
    }
  }

  std::vector<DiscreteMeasure> rows(n);
  parallel_for(n, [&](std::size_t x) { rows[x] = chain.row(x); });

  std::vector<double> kappas(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t p) {
    const auto [x, y] = pairs[p];
    kappas[p] = 1.0 - transport_between(chain, rows[x], rows[y], method) / chain.dist(x, y);
  });

  LocalCurvature local;
  local.values.assign(n, kInf);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [x, y] = pairs[p];
    local.values[x] = std::min(local.values[x], kappas[p]);
    local.values[y] = std::min(local.values[y], kappas[p]);
  }
  for (std::size_t x = 0; x < n; ++x) {
    if (local.values[x] == kInf) local.isolated.push_back(x);
  }
  return local;
}

Envelope curvature_envelope(const MetricChain& chain, std::size_t origin, const LocalCurvature& local) {
  const std::size_t n = chain.size();
  if (origin >= n) throw DomainError("origin index out of range");
  if (local.values.size() != n) throw DomainError("local curvature size mismatch");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return chain.dist(origin, a) < chain.dist(origin, b);
  });

  std::vector<double> breakpoints;
  std::vector<double> values;
  double running = kInf;
  for (std::size_t idx = 0; idx < n;) {
    const double r = chain.dist(origin, order[idx]);
    std::size_t end = idx;
    while (end < n && same_distance(chain.dist(origin, order[end]), r)) {
      running = std::min(running, local.values[order[end]]);
      ++end;
    }
    const double value = running == kInf ? 1.0 : std::clamp(running, 0.0, 1.0);
    const double at = breakpoints.empty() ? 0.0 : r;
    if (!values.empty() && values.back() == value) {
      // same level: extend the previous piece
    } else {
      breakpoints.push_back(at);
      values.push_back(value);
    }
    idx = end;
  }
  return Envelope(std::move(breakpoints), std::move(values));
}

Envelope curvature_envelope(const MetricChain& chain, double epsilon, std::size_t origin,
                            TransportMethod method) {
  return curvature_envelope(chain, origin, local_curvature(chain, epsilon, method));
}

namespace {

// W1(P_x, delta_target): the mean distance from the kernel row to the target
double mean_distance_to(const MetricChain& chain, std::size_t x, std::size_t target) {
  const auto row = chain.kernel.row(x);
  double total = 0.0;
  for (std::size_t y = 0; y < chain.size(); ++y) total += row[y] * chain.dist(y, target);
  return total;
}

}  // namespace

double drift_j0(const MetricChain& chain, std::size_t origin) {
  if (origin >= chain.size()) throw DomainError("origin index out of range");
  return mean_distance_to(chain, origin, origin);
}

double attraction_rho(const MetricChain& chain, double epsilon, std::size_t origin) {
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  if (origin >= chain.size()) throw DomainError("origin index out of range");
  // the inner circle d = epsilon is included: on a lattice the open annulus
  // misses the continuum infimum, and a smaller rho only weakens the drift claim
  const double inner = epsilon * (1.0 - 1e-12);
  const double outer = 2.0 * epsilon * (1.0 + 1e-12);

  double rho = kInf;
  for (std::size_t x = 0; x < chain.size(); ++x) {
    const double d = chain.dist(x, origin);
    if (!(d >= inner && d <= outer)) continue;
    rho = std::min(rho, d - mean_distance_to(chain, x, origin));
  }
  if (rho == kInf) {
    std::ostringstream os;
    os << "no point lies in the annulus " << epsilon << " <= d <= " << 2 * epsilon
       << " around the origin; increase epsilon";
    throw DomainError(os.str());
  }
  return rho;
}

double subgaussian_s2(const MetricChain& chain, SubGaussianMethod method, double user_value) {
  switch (method) {
    case SubGaussianMethod::UserSupplied:
      if (!(user_value > 0.0)) throw DomainError("user-supplied s^2 must be positive");
      return user_value;
    case SubGaussianMethod::GaussianVariance:
      if (!chain.kernel_variance) {
        throw DomainError("chain was not built from a Gaussian kernel; no variance recorded");
      }
      return *chain.kernel_variance;
    case SubGaussianMethod::HoeffdingSupport:
      break;
  }

  double widest = 0.0;
  for (std::size_t x = 0; x < chain.size(); ++x) {
    const auto row = chain.row(x);
    double diameter = 0.0;
    if (chain.coords) {
      const auto& c = *chain.coords;
      double lo = kInf;
      double hi = -kInf;
      for (auto p : row.support) {
        lo = std::min(lo, c[p]);
        hi = std::max(hi, c[p]);
      }
      diameter = hi - lo;
    } else {
      for (auto a : row.support) {
        for (auto b : row.support) diameter = std::max(diameter, chain.dist(a, b));
      }
    }
    widest = std::max(widest, diameter);
  }
  const double s2 = widest * widest / 4.0;
  if (!(s2 > 0.0)) throw DomainError("every kernel row is a point mass; s^2 = 0 is degenerate");
  return s2;
}

CurvatureProfile compute_profile(const MetricChain& chain, double epsilon, std::size_t origin,
                                 const ProfileOptions& options) {
  CurvatureProfile profile;
  profile.epsilon = epsilon;
  profile.origin = origin;

  auto local = local_curvature(chain, epsilon, options.transport);
  profile.envelope = curvature_envelope(chain, origin, local);
  profile.isolated = local.isolated;
  for (double k : local.values) {
    if (k != kInf) profile.min_local = std::min(profile.min_local, k);
  }
  profile.kappa_local = std::move(local.values);

  if (!profile.isolated.empty()) {
    std::ostringstream os;
    os << profile.isolated.size() << " point(s) have no neighbour within epsilon = " << epsilon
       << "; their local curvature is vacuous";
    profile.notes.push_back(os.str());
  }
  if (profile.min_local < 0.0) {
    std::ostringstream os;
    os << "negative local curvature (" << profile.min_local
       << ") clamped to 0 in the envelope; the concentration bounds assume K >= 0";
    profile.notes.push_back(os.str());
  }

  profile.rho = attraction_rho(chain, epsilon, origin);
  profile.j0 = drift_j0(chain, origin);
  profile.s2 = subgaussian_s2(chain, options.s2_method, options.user_s2);
  return profile;
}

nlohmann::json profile_to_json(const CurvatureProfile& profile) {
  nlohmann::json doc;
  doc["epsilon"] = profile.epsilon;
  doc["origin"] = profile.origin;
  doc["rho"] = profile.rho;
  doc["j0"] = profile.j0;
  doc["s2"] = profile.s2;
  doc["envelope"] = {{"breakpoints", profile.envelope.breakpoints()},
                     {"values", profile.envelope.values()}};
  nlohmann::json local = nlohmann::json::array();
  for (double k : profile.kappa_local) {
    if (std::isfinite(k)) {
      local.push_back(k);
    } else {
      local.push_back(nullptr);
    }
  }
  doc["kappa_local"] = std::move(local);
  doc["isolated"] = profile.isolated;
  doc["notes"] = profile.notes;
  return doc;
}

}  // namespace ricci
