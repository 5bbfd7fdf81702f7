#include "ricci_bound/chain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "ricci_bound/error.hpp"

namespace ricci {
namespace {

constexpr double kStochasticTolerance = 1e-12;
constexpr double kMetricTolerance = 1e-9;

// Upper Gaussian tail P(Z > z), accurate far into both tails.
double upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

// P(a < Z <= b) without catastrophic cancellation in either tail.
double gaussian_mass(double a, double b) {
  if (a >= 0.0) return upper_tail(a) - upper_tail(b);
  if (b <= 0.0) return upper_tail(-b) - upper_tail(-a);
  return 1.0 - upper_tail(-a) - upper_tail(b);
}

MetricChain line_chain(std::vector<double> coords) {
  MetricChain chain;
  const std::size_t n = coords.size();
  chain.points.reserve(n);
  chain.dist = Matrix(n, n);
  chain.kernel = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    std::ostringstream label;
    label << coords[i];
    chain.points.push_back(label.str());
    for (std::size_t j = 0; j < n; ++j) chain.dist(i, j) = std::abs(coords[i] - coords[j]);
  }
  chain.coords = std::move(coords);
  return chain;
}

std::string entry_name(const char* field, std::size_t i, std::size_t j) {
  std::ostringstream os;
  os << field << "[" << i << "][" << j << "]";
  return os.str();
}

Matrix parse_square(const nlohmann::json& doc, const char* field, std::size_t n) {
  if (!doc.contains(field)) throw ChainError(std::string("missing field '") + field + "'");
  const auto& rows = doc.at(field);
  if (!rows.is_array() || rows.size() != n) {
    std::ostringstream os;
    os << "field '" << field << "' must be an array of " << n << " rows";
    throw ChainError(os.str());
  }
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = rows[i];
    if (!row.is_array() || row.size() != n) {
      std::ostringstream os;
      os << "row " << i << " of '" << field << "' must have " << n << " entries";
      throw ChainError(os.str(), static_cast<long>(i));
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (!row[j].is_number()) {
        throw ChainError(entry_name(field, i, j) + " is not a number", static_cast<long>(i),
                         static_cast<long>(j));
      }
      const double v = row[j].get<double>();
      if (!std::isfinite(v)) {
        throw ChainError(entry_name(field, i, j) + " is not finite", static_cast<long>(i),
                         static_cast<long>(j));
      }
      m(i, j) = v;
    }
  }
  return m;
}

}  // namespace

DiscreteMeasure MetricChain::row(std::size_t x) const {
  return DiscreteMeasure::from_dense(kernel.row(x));
}

void MetricChain::validate(bool check_triangle) const {
  const std::size_t n = size();
  if (n == 0) throw ChainError("chain has no points");
  if (dist.rows() != n || dist.cols() != n) throw ChainError("distance matrix shape mismatch");
  if (kernel.rows() != n || kernel.cols() != n) throw ChainError("kernel matrix shape mismatch");
  if (origin_hint && *origin_hint >= n) throw ChainError("origin index out of range");
  if (coords && coords->size() != n) throw ChainError("coordinate count mismatch");

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double d = dist(i, j);
      if (!std::isfinite(d)) {
        throw ChainError(entry_name("dist", i, j) + " is not finite", static_cast<long>(i),
                         static_cast<long>(j));
      }
      if (i == j && d != 0.0) {
        throw ChainError(entry_name("dist", i, j) + " must be zero on the diagonal",
                         static_cast<long>(i), static_cast<long>(j));
      }
      if (i != j && d <= 0.0) {
        throw ChainError(entry_name("dist", i, j) + " must be positive off the diagonal",
                         static_cast<long>(i), static_cast<long>(j));
      }
      if (std::abs(d - dist(j, i)) > kMetricTolerance * std::max(1.0, std::abs(d))) {
        throw ChainError("distance matrix is not symmetric at " + entry_name("dist", i, j),
                         static_cast<long>(i), static_cast<long>(j));
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double p = kernel(i, j);
      if (!std::isfinite(p) || p < 0.0) {
        throw ChainError(entry_name("kernel", i, j) + " must be a nonnegative finite number",
                         static_cast<long>(i), static_cast<long>(j));
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kStochasticTolerance) {
      std::ostringstream os;
      os.precision(17);
      os << "kernel row " << i << " sums to " << sum << ", not 1";
      throw ChainError(os.str(), static_cast<long>(i));
    }
  }

  if (!check_triangle) return;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        if (dist(i, j) > dist(i, k) + dist(k, j) + kMetricTolerance) {
          std::ostringstream os;
          os << "triangle inequality fails: d(" << i << "," << j << ") > d(" << i << "," << k
             << ") + d(" << k << "," << j << ")";
          throw ChainError(os.str(), static_cast<long>(i), static_cast<long>(j));
        }
      }
    }
  }
}

MetricChain build_mmk_chain(int n0, int k, int truncation) {
  if (n0 <= 0) throw DomainError("M/M/k chain requires n0 > 0");
  if (k <= n0) throw DomainError("M/M/k chain requires k > n0");
  if (truncation < k) throw DomainError("M/M/k chain requires truncation >= k");

  std::vector<double> coords(static_cast<std::size_t>(truncation) + 1);
  for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = static_cast<double>(i);
  MetricChain chain = line_chain(std::move(coords));

  const double total = static_cast<double>(n0 + k);
  for (int n = 0; n <= truncation; ++n) {
    const auto i = static_cast<std::size_t>(n);
    const double up = n0 / total;
    const double stay = std::max(k - n, 0) / total;
    const double down = std::min(n, k) / total;
    if (n > 0) chain.kernel(i, i - 1) = down;
    chain.kernel(i, i) = stay;
    if (n < truncation) {
      chain.kernel(i, i + 1) = up;
    } else {
      chain.kernel(i, i) += up;
    }
  }
  chain.origin_hint = static_cast<std::size_t>(n0);
  return chain;
}

int default_mmk_truncation(int n0, int k) {
  if (n0 <= 0 || k <= n0) throw DomainError("M/M/k chain requires 0 < n0 < k");
  const double ratio = static_cast<double>(n0) / k;
  const double steps = std::log(1e-13) / std::log(ratio);
  return k + static_cast<int>(std::ceil(steps)) + 10;
}

MetricChain build_discrete_ou_chain(double alpha, double grid_half_width, double grid_step) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("OU chain requires alpha in (0, 1]");
  if (!(grid_step > 0.0)) throw DomainError("OU chain requires a positive grid step");
  if (grid_step > 1.0) {
    throw DomainError("OU grid step exceeds the kernel's unit standard deviation");
  }
  if (!(grid_half_width > 0.0)) throw DomainError("OU chain requires a positive grid width");

  const double cells = 2.0 * grid_half_width / grid_step;
  const auto intervals = static_cast<std::size_t>(std::llround(cells));
  if (intervals == 0 || std::abs(cells - static_cast<double>(intervals)) > 1e-9 * cells) {
    throw DomainError("OU grid step must divide the grid width evenly");
  }

  std::vector<double> coords(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i) {
    coords[i] = -grid_half_width + grid_step * static_cast<double>(i);
  }
  coords[intervals / 2] = intervals % 2 == 0 ? 0.0 : coords[intervals / 2];
  MetricChain chain = line_chain(coords);
  const std::size_t n = coords.size();
  const double inf = std::numeric_limits<double>::infinity();

  for (std::size_t x = 0; x < n; ++x) {
    const double center = (1.0 - alpha) * coords[x];
    for (std::size_t y = 0; y < n; ++y) {
      const double lo = y == 0 ? -inf : coords[y] - 0.5 * grid_step - center;
      const double hi = y + 1 == n ? inf : coords[y] + 0.5 * grid_step - center;
      chain.kernel(x, y) = std::max(0.0, gaussian_mass(lo, hi));
    }
    // absorb rounding so the row is stochastic to machine precision
    double sum = 0.0;
    for (std::size_t y = 0; y < n; ++y) sum += chain.kernel(x, y);
    for (std::size_t y = 0; y < n; ++y) chain.kernel(x, y) /= sum;
  }

  if (intervals % 2 == 0) chain.origin_hint = intervals / 2;
  chain.kernel_variance = 1.0;
  return chain;
}

MetricChain build_reflected_walk(double p, int truncation) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("reflected walk requires p in (0, 1)");
  if (truncation < 2) throw DomainError("reflected walk requires truncation >= 2");

  std::vector<double> coords(static_cast<std::size_t>(truncation) + 1);
  for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = static_cast<double>(i);
  MetricChain chain = line_chain(std::move(coords));
  const auto top = static_cast<std::size_t>(truncation);
  for (std::size_t i = 0; i <= top; ++i) {
    if (i == 0) {
      chain.kernel(0, 0) = 1.0 - p;
    } else {
      chain.kernel(i, i - 1) = 1.0 - p;
    }
    if (i == top) {
      chain.kernel(i, i) += p;
    } else {
      chain.kernel(i, i + 1) = p;
    }
  }
  chain.origin_hint = 0;
  return chain;
}

MetricChain parse_chain(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ChainError("chain document must be a JSON object");
  if (!doc.contains("points") || !doc.at("points").is_array()) {
    throw ChainError("missing array field 'points'");
  }

  MetricChain chain;
  for (const auto& label : doc.at("points")) {
    if (label.is_string()) {
      chain.points.push_back(label.get<std::string>());
    } else if (label.is_number()) {
      chain.points.push_back(label.dump());
    } else {
      throw ChainError("point labels must be strings or numbers");
    }
  }
  const std::size_t n = chain.points.size();
  chain.dist = parse_square(doc, "dist", n);
  chain.kernel = parse_square(doc, "kernel", n);

  if (doc.contains("origin") && !doc.at("origin").is_null()) {
    const auto& origin = doc.at("origin");
    if (origin.is_number_integer() || origin.is_number_unsigned()) {
      const auto idx = origin.get<long long>();
      if (idx < 0 || static_cast<std::size_t>(idx) >= n) throw ChainError("origin out of range");
      chain.origin_hint = static_cast<std::size_t>(idx);
    } else if (origin.is_string()) {
      const auto it = std::find(chain.points.begin(), chain.points.end(), origin.get<std::string>());
      if (it == chain.points.end()) throw ChainError("origin label not among points");
      chain.origin_hint = static_cast<std::size_t>(it - chain.points.begin());
    } else {
      throw ChainError("origin must be a point index or label");
    }
  }

  chain.validate(true);
  return chain;
}

MetricChain load_chain(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ChainError("cannot open chain file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const long line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n');
    std::ostringstream os;
    os << path.string() << ":" << line << ": JSON parse error: " << e.what();
    throw ChainError(os.str(), line);
  }
  return parse_chain(doc);
}

nlohmann::json chain_to_json(const MetricChain& chain) {
  nlohmann::json doc;
  doc["points"] = chain.points;
  auto dump = [&](const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
      const auto r = m.row(i);
      rows.push_back(std::vector<double>(r.begin(), r.end()));
    }
    return rows;
  };
  doc["dist"] = dump(chain.dist);
  doc["kernel"] = dump(chain.kernel);
  if (chain.origin_hint) doc["origin"] = *chain.origin_hint;
  return doc;
}

GeodesicReport check_epsilon_geodesic(const MetricChain& chain, double epsilon) {
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  const std::size_t n = chain.size();
  const double inf = std::numeric_limits<double>::infinity();

  Matrix path(n, n, inf);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double d = chain.dist(i, j);
      if (i == j || d <= epsilon * (1.0 + 1e-12)) path(i, j) = d;
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const double ik = path(i, k);
      if (ik == inf) continue;
      for (std::size_t j = 0; j < n; ++j) {
        const double through = ik + path(k, j);
        if (through < path(i, j)) path(i, j) = through;
      }
    }
  }

  GeodesicReport report{epsilon, true, std::nullopt};
  for (std::size_t i = 0; i < n && report.is_geodesic; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!(path(i, j) <= chain.dist(i, j) + kMetricTolerance)) {
        report.is_geodesic = false;
        report.witness_failure = std::make_pair(i, j);
        break;
      }
    }
  }
  return report;
}

}  // namespace ricci
