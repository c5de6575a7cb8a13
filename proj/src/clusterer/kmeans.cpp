#include "sigex/clusterer/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <stdexcept>

namespace sigex::clusterer {
namespace {

void check_points(const std::vector<Point>& points, int k, const char* who) {
  if (points.empty()) throw std::invalid_argument(std::string(who) + ": no points");
  const auto dim = points.front().size();
  for (const auto& p : points)
    if (p.size() != dim) throw std::invalid_argument(std::string(who) + ": ragged points");
  if (k < 1) throw std::invalid_argument(std::string(who) + ": k must be >= 1");
  const auto distinct = distinct_count(points);
  if (static_cast<std::size_t>(k) > distinct)
    throw std::invalid_argument(std::string(who) + ": k = " + std::to_string(k) + " exceeds " +
                                std::to_string(distinct) + " distinct points");
}

std::size_t nearest(const Point& x, const std::vector<Point>& centroids, double* dist = nullptr) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = squared_distance(x, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (dist) *dist = best_d;
  return best;
}

double assign(const std::vector<Point>& points, const std::vector<Point>& centroids,
              std::vector<int>& out) {
  out.resize(points.size());
  double inertia = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    double d = 0.0;
    out[i] = static_cast<int>(nearest(points[i], centroids, &d));
    inertia += d;
  }
  return inertia;
}

}  // namespace

InitMethod init_method_from_name(const std::string& name) {
  if (name == "farthest") return InitMethod::FarthestPoint;
  if (name == "dsquared") return InitMethod::DSquared;
  throw std::invalid_argument("unknown init method '" + name + "' (farthest|dsquared)");
}

double squared_distance(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

std::size_t distinct_count(const std::vector<Point>& points) {
  return std::set<Point>(points.begin(), points.end()).size();
}

std::vector<Point> farthest_point_init_from(const std::vector<Point>& points, int k,
                                            std::size_t first_index) {
  check_points(points, k, "farthest_point_init");
  if (first_index >= points.size())
    throw std::out_of_range("farthest_point_init: first index out of range");
  std::vector<Point> chosen{points[first_index]};
  std::vector<double> min_d(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    min_d[i] = squared_distance(points[i], chosen[0]);
  while (static_cast<int>(chosen.size()) < k) {
    const auto far = static_cast<std::size_t>(
        std::max_element(min_d.begin(), min_d.end()) - min_d.begin());
    chosen.push_back(points[far]);
    for (std::size_t i = 0; i < points.size(); ++i)
      min_d[i] = std::min(min_d[i], squared_distance(points[i], chosen.back()));
  }
  return chosen;
}

std::vector<Point> farthest_point_init(const std::vector<Point>& points, int k,
                                       std::uint64_t seed) {
  check_points(points, k, "farthest_point_init");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
  return farthest_point_init_from(points, k, pick(rng));
}

std::vector<Point> dsquared_init(const std::vector<Point>& points, int k, std::uint64_t seed) {
  check_points(points, k, "dsquared_init");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, points.size() - 1);
  std::vector<Point> chosen{points[pick(rng)]};
  std::vector<double> min_d(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    min_d[i] = squared_distance(points[i], chosen[0]);
  while (static_cast<int>(chosen.size()) < k) {
    std::discrete_distribution<std::size_t> draw(min_d.begin(), min_d.end());
    chosen.push_back(points[draw(rng)]);
    for (std::size_t i = 0; i < points.size(); ++i)
      min_d[i] = std::min(min_d[i], squared_distance(points[i], chosen.back()));
  }
  return chosen;
}

ClusterModel kmeans_fit(const std::vector<Point>& points, int k, const KMeansOptions& options) {
  check_points(points, k, "kmeans_fit");
  ClusterModel m;
  m.k = k;
  m.seed = options.seed;
  m.centroids = options.init == InitMethod::FarthestPoint
                    ? farthest_point_init(points, k, options.seed)
                    : dsquared_init(points, k, options.seed);
  const auto dim = points.front().size();

  std::vector<int> current;
  m.inertia_history.push_back(assign(points, m.centroids, current));
  for (int iter = 1; iter <= options.max_iter; ++iter) {
    std::vector<Point> sums(static_cast<std::size_t>(k), Point(dim, 0.0));
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto c = static_cast<std::size_t>(current[i]);
      ++counts[c];
      for (std::size_t d = 0; d < dim; ++d) sums[c][d] += points[i][d];
    }
    for (std::size_t c = 0; c < sums.size(); ++c) {
      if (counts[c] == 0) {
        // Steal the point worst served by its current centroid.
        std::size_t worst = 0;
        double worst_d = -1.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
          const double d =
              squared_distance(points[i], m.centroids[static_cast<std::size_t>(current[i])]);
          if (d > worst_d) {
            worst_d = d;
            worst = i;
          }
        }
        m.centroids[c] = points[worst];
        current[worst] = static_cast<int>(c);
        continue;
      }
      for (std::size_t d = 0; d < dim; ++d)
        m.centroids[c][d] = sums[c][d] / static_cast<double>(counts[c]);
    }
    std::vector<int> next;
    m.inertia_history.push_back(assign(points, m.centroids, next));
    m.iterations = iter;
    const bool fixed = next == current;
    current = std::move(next);
    if (fixed) break;
  }
  m.assignments = current;
  m.inertia = m.inertia_history.back();
  return m;
}

std::vector<double> membership_degree(const Point& x, const std::vector<Point>& centroids,
                                      double m) {
  if (centroids.empty()) throw std::invalid_argument("membership_degree: no centroids");
  if (!(m > 1.0)) throw std::invalid_argument("membership_degree: m must exceed 1");
  std::vector<double> dist(centroids.size());
  for (std::size_t k = 0; k < centroids.size(); ++k) {
    dist[k] = std::sqrt(squared_distance(x, centroids[k]));
    if (dist[k] == 0.0) {
      std::vector<double> u(centroids.size(), 0.0);
      u[k] = 1.0;
      return u;
    }
  }
  const double p = 2.0 / (m - 1.0);
  std::vector<double> u(centroids.size());
  for (std::size_t k = 0; k < centroids.size(); ++k) {
    double s = 0.0;
    for (double dj : dist) s += std::pow(dist[k] / dj, p);
    u[k] = 1.0 / s;
  }
  return u;
}

int knee_point(const std::vector<int>& ks, const std::vector<double>& inertias) {
  if (ks.empty() || ks.size() != inertias.size())
    throw std::invalid_argument("knee_point: mismatched curve");
  if (ks.size() < 3) return ks.front();
  const double k0 = ks.front(), k1 = ks.back();
  const auto [lo, hi] = std::minmax_element(inertias.begin(), inertias.end());
  const double span_y = *hi - *lo;
  auto nx = [&](std::size_t i) { return (ks[i] - k0) / (k1 - k0); };
  auto ny = [&](std::size_t i) { return span_y > 0.0 ? (inertias[i] - *lo) / span_y : 0.0; };
  const double ax = nx(0), ay = ny(0);
  const double dx = nx(ks.size() - 1) - ax, dy = ny(ks.size() - 1) - ay;
  const double len = std::hypot(dx, dy);
  int best = ks[1];
  double best_d = -1.0;
  for (std::size_t i = 1; i + 1 < ks.size(); ++i) {
    const double d = std::abs(dx * (ny(i) - ay) - dy * (nx(i) - ax)) / len;
    if (d > best_d + 1e-12) {
      best_d = d;
      best = ks[i];
    }
  }
  return best;
}

ElbowResult elbow_select(const std::vector<Point>& points, int k_min, int k_max,
                         const KMeansOptions& options) {
  if (k_min < 1 || k_max < k_min) throw std::invalid_argument("elbow_select: bad k range");
  ElbowResult r;
  for (int k = k_min; k <= k_max; ++k) {
    r.ks.push_back(k);
    r.inertias.push_back(kmeans_fit(points, k, options).inertia);
  }
  for (std::size_t i = 1; i < r.inertias.size(); ++i)
    if (r.inertias[i] > r.inertias[i - 1] * (1.0 + 1e-9) + 1e-12)
      r.warnings.push_back("inertia rises from k=" + std::to_string(r.ks[i - 1]) + " to k=" +
                           std::to_string(r.ks[i]) + " (local optimum)");
  r.k_star = knee_point(r.ks, r.inertias);
  return r;
}

RepresentativeSet representatives(const ClusterModel& model, const std::vector<Point>& points) {
  if (model.assignments.size() != points.size())
    throw std::invalid_argument("representatives: points do not match the model");
  auto id_of = [&](std::size_t i) {
    return model.ids.empty() ? std::to_string(i) : model.ids[i];
  };
  RepresentativeSet out;
  for (int c = 0; c < model.k; ++c) {
    bool found = false;
    Representative best;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (model.assignments[i] != c) continue;
      const double d =
          std::sqrt(squared_distance(points[i], model.centroids[static_cast<std::size_t>(c)]));
      const bool better = !found || d < best.distance ||
                          (d == best.distance &&
                           (model.ids.empty() ? i < best.index : id_of(i) < best.sample_id));
      if (better) {
        best = {c, id_of(i), i, d};
        found = true;
      }
    }
    if (found) out.push_back(best);
  }
  return out;
}

std::vector<Point> unit_normalize(std::vector<Point> points) {
  for (auto& p : points) {
    double n = 0.0;
    for (double v : p) n += v * v;
    n = std::sqrt(n);
    if (n > 0.0)
      for (double& v : p) v /= n;
  }
  return points;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("adjusted_rand_index: size mismatch");
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> ra, rb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1;
    ra[a[i]] += 1;
    rb[b[i]] += 1;
  }
  auto c2 = [](double n) { return n * (n - 1) / 2; };
  double index = 0, sa = 0, sb = 0;
  for (const auto& [_, n] : joint) index += c2(n);
  for (const auto& [_, n] : ra) sa += c2(n);
  for (const auto& [_, n] : rb) sb += c2(n);
  const double expected = sa * sb / c2(static_cast<double>(a.size()));
  const double max_index = (sa + sb) / 2;
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

nlohmann::json model_to_json(const ClusterModel& model) {
  return {{"k", model.k},
          {"seed", model.seed},
          {"inertia", model.inertia},
          {"iterations", model.iterations},
          {"inertia_history", model.inertia_history},
          {"centroids", model.centroids},
          {"assignments", model.assignments},
          {"ids", model.ids}};
}

ClusterModel model_from_json(const nlohmann::json& j) {
  ClusterModel m;
  m.k = j.at("k").get<int>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.inertia = j.at("inertia").get<double>();
  m.iterations = j.value("iterations", 0);
  m.inertia_history = j.value("inertia_history", std::vector<double>{});
  m.centroids = j.at("centroids").get<std::vector<Point>>();
  m.assignments = j.at("assignments").get<std::vector<int>>();
  m.ids = j.value("ids", std::vector<std::string>{});
  if (static_cast<int>(m.centroids.size()) != m.k)
    throw std::runtime_error("cluster model: centroid count does not match k");
  return m;
}

}  // namespace sigex::clusterer
