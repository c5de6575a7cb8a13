#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace sigex::clusterer {

using Point = std::vector<double>;

enum class InitMethod { FarthestPoint, DSquared };

InitMethod init_method_from_name(const std::string& name);

struct ClusterModel {
  std::vector<Point> centroids;
  std::vector<int> assignments;  // per input point
  std::vector<std::string> ids;  // per input point; may be empty
  double inertia = 0.0;
  int k = 0;
  std::uint64_t seed = 0;
  int iterations = 0;
  /// Inertia after each assignment step, starting with the initial centroids.
  std::vector<double> inertia_history;
};

struct Representative {
  int cluster = 0;
  std::string sample_id;
  std::size_t index = 0;  // into the fitted points
  double distance = 0.0;
};

using RepresentativeSet = std::vector<Representative>;

struct KMeansOptions {
  int max_iter = 300;
  std::uint64_t seed = 0;
  InitMethod init = InitMethod::FarthestPoint;
};

double squared_distance(const Point& a, const Point& b);

/// Number of distinct points (exact comparison).
std::size_t distinct_count(const std::vector<Point>& points);

/// Greedy farthest-point seeding from a given first point. Ties go to the
/// lower index. Throws std::invalid_argument when k exceeds the distinct count.
std::vector<Point> farthest_point_init_from(const std::vector<Point>& points, int k,
                                            std::size_t first_index);
/// As above with the first point drawn uniformly from `seed`.
std::vector<Point> farthest_point_init(const std::vector<Point>& points, int k,
                                       std::uint64_t seed);

/// Standard D^2-weighted seeding.
std::vector<Point> dsquared_init(const std::vector<Point>& points, int k, std::uint64_t seed);

/// Lloyd iterations to an assignment fixpoint or max_iter. Nearest-centroid
/// ties go to the lower cluster index. An empty cluster is re-seeded at the
/// point farthest from its own centroid.
ClusterModel kmeans_fit(const std::vector<Point>& points, int k, const KMeansOptions& options = {});

/// Fuzzy membership u_k = 1 / sum_j (d_k / d_j)^(2 / (m - 1)). A point on a
/// centroid gets membership 1 there (first such centroid).
std::vector<double> membership_degree(const Point& x, const std::vector<Point>& centroids,
                                      double m = 2.0);

struct ElbowResult {
  int k_star = 0;
  std::vector<int> ks;
  std::vector<double> inertias;
  std::vector<std::string> warnings;
};

/// Knee of the curve: both axes scaled to [0,1], then the interior k with
/// the largest perpendicular distance to the chord between the endpoints.
/// Ties go to the smallest k.
int knee_point(const std::vector<int>& ks, const std::vector<double>& inertias);

ElbowResult elbow_select(const std::vector<Point>& points, int k_min, int k_max,
                         const KMeansOptions& options = {});

/// Per cluster, the member nearest its centroid; ties go to the lowest id
/// (or index when ids are absent).
RepresentativeSet representatives(const ClusterModel& model, const std::vector<Point>& points);

/// Scales each vector to unit L2 norm; zero vectors are left as is.
std::vector<Point> unit_normalize(std::vector<Point> points);

/// Adjusted Rand index between two labelings of the same items.
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

nlohmann::json model_to_json(const ClusterModel& model);
ClusterModel model_from_json(const nlohmann::json& j);

}  // namespace sigex::clusterer
