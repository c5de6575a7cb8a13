#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "sigex/clusterer/kmeans.hpp"

using namespace sigex::clusterer;

namespace {

std::vector<Point> line(std::initializer_list<double> xs) {
  std::vector<Point> out;
  for (double x : xs) out.push_back({x});
  return out;
}

struct Blobs {
  std::vector<Point> points;
  std::vector<int> labels;
};

// three blobs of 40, sigma 0.05, centres one unit apart
Blobs three_blobs(std::uint64_t seed) {
  const std::vector<Point> centres{{0.0, 0.0}, {1.0, 0.0}, {0.5, std::sqrt(3.0) / 2.0}};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, 0.05);
  Blobs b;
  for (int i = 0; i < 120; ++i) {
    const int c = i % 3;
    b.points.push_back({centres[c][0] + d(rng), centres[c][1] + d(rng)});
    b.labels.push_back(c);
  }
  return b;
}

void check_monotone(const ClusterModel& m) {
  for (std::size_t i = 1; i < m.inertia_history.size(); ++i)
    CHECK(m.inertia_history[i] <= m.inertia_history[i - 1] + 1e-12);
}

}  // namespace

TEST_CASE("farthest-point seeding picks the far end") {
  const auto c = farthest_point_init_from(line({0, 1, 10}), 2, 0);
  CHECK(c[0][0] == 0.0);
  CHECK(c[1][0] == 10.0);
}

TEST_CASE("seeding with k equal to the point count selects every point") {
  const auto pts = line({3, -1, 7, 2});
  auto c = farthest_point_init(pts, 4, 9);
  std::sort(c.begin(), c.end());
  CHECK(c == line({-1, 2, 3, 7}));
}

TEST_CASE("square corners are all chosen from any start") {
  const std::vector<Point> sq{{0, 0}, {1, 0}, {0, 1}, {1, 1}, {0.5, 0.5}};
  for (std::size_t first = 0; first < 4; ++first) {
    auto c = farthest_point_init_from(sq, 4, first);
    std::sort(c.begin(), c.end());
    CHECK(c == std::vector<Point>{{0, 0}, {0, 1}, {1, 0}, {1, 1}});
  }
}

TEST_CASE("k beyond the distinct count is rejected") {
  CHECK_THROWS_AS(farthest_point_init(line({1, 1, 2}), 3, 0), std::invalid_argument);
  CHECK_THROWS_AS(kmeans_fit(line({1, 1, 2}), 3), std::invalid_argument);
  CHECK_THROWS_AS(dsquared_init(line({1}), 2, 0), std::invalid_argument);
}

TEST_CASE("two pairs split into their midpoints") {
  for (std::uint64_t seed : {0u, 1u, 2u, 3u}) {
    KMeansOptions o;
    o.seed = seed;
    auto m = kmeans_fit(line({0, 1, 10, 11}), 2, o);
    auto c = m.centroids;
    std::sort(c.begin(), c.end());
    CHECK(c == line({0.5, 10.5}));
    CHECK(m.inertia == 1.0);
    check_monotone(m);
  }
}

TEST_CASE("single cluster sits at the mean") {
  const auto pts = line({1, 2, 6});
  const auto m = kmeans_fit(pts, 1);
  CHECK(m.centroids[0][0] == 3.0);
  CHECK(m.inertia == doctest::Approx(4.0 + 1.0 + 9.0));
}

TEST_CASE("blobs are recovered and inertia never rises") {
  const auto b = three_blobs(4);
  for (auto init : {InitMethod::FarthestPoint, InitMethod::DSquared}) {
    KMeansOptions o;
    o.init = init;
    const auto m = kmeans_fit(b.points, 3, o);
    CHECK(adjusted_rand_index(m.assignments, b.labels) >= 0.95);
    check_monotone(m);
  }
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point> cloud(200, Point(4));
  for (auto& p : cloud)
    for (auto& v : p) v = u(rng);
  for (int k = 2; k <= 12; ++k) {
    KMeansOptions o;
    o.seed = static_cast<std::uint64_t>(k);
    o.init = k % 2 ? InitMethod::DSquared : InitMethod::FarthestPoint;
    check_monotone(kmeans_fit(cloud, k, o));
  }
}

TEST_CASE("uniform scaling keeps assignments") {
  const auto b = three_blobs(8);
  auto scaled = b.points;
  for (auto& p : scaled)
    for (auto& v : p) v *= 7.5;
  CHECK(kmeans_fit(b.points, 3).assignments == kmeans_fit(scaled, 3).assignments);
}

TEST_CASE("elbow finds three blobs") {
  const auto r = elbow_select(three_blobs(2).points, 1, 10);
  CHECK(r.k_star == 3);
  CHECK(r.ks.size() == 10);
}

TEST_CASE("knee of a straight line goes to the smallest interior k") {
  CHECK(knee_point({1, 2, 3, 4, 5}, {5, 4, 3, 2, 1}) == 2);
  CHECK(knee_point({1, 2, 3, 4}, {10, 2, 1, 0.5}) == 2);
}

TEST_CASE("membership degrees") {
  const std::vector<Point> c{{0.0}, {2.0}};
  auto u = membership_degree({1.0}, c);
  CHECK(u[0] == doctest::Approx(0.5));
  CHECK(u[1] == doctest::Approx(0.5));
  u = membership_degree({0.0}, c);
  CHECK(u == std::vector<double>{1.0, 0.0});
  u = membership_degree({0.0}, {{1.0}, {-2.0}});
  CHECK(u[0] == doctest::Approx(0.8));
  CHECK(u[0] + u[1] == doctest::Approx(1.0).epsilon(1e-9));
  const std::vector<Point> three{{0.3, 1.0}, {2.0, -1.0}, {-1.5, 0.2}};
  const std::vector<Point> swapped{three[2], three[0], three[1]};
  const auto a = membership_degree({0.1, 0.4}, three, 2.5);
  const auto b = membership_degree({0.1, 0.4}, swapped, 2.5);
  CHECK(a[0] + a[1] + a[2] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(b[1] == doctest::Approx(a[0]).epsilon(1e-12));
  CHECK(b[0] == doctest::Approx(a[2]).epsilon(1e-12));
  CHECK_THROWS(membership_degree({0.0}, c, 1.0));
}

TEST_CASE("representatives are the members nearest each centroid") {
  ClusterModel m;
  m.k = 1;
  m.centroids = {{11.0 / 3.0}};
  m.assignments = {0, 0, 0};
  const auto r = representatives(m, line({0, 1, 10}));
  REQUIRE(r.size() == 1);
  CHECK(r[0].index == 1);

  ClusterModel tie;
  tie.k = 2;
  tie.centroids = {{1.0}, {5.0}};
  tie.assignments = {0, 0, 1};
  tie.ids = {"b", "a", "z"};
  const auto t = representatives(tie, line({0, 2, 5}));
  CHECK(t[0].sample_id == "a");
  CHECK(t[1].sample_id == "z");
  CHECK(t[1].distance == 0.0);
}

TEST_CASE("adjusted Rand index basics") {
  CHECK(adjusted_rand_index({0, 0, 1, 1}, {5, 5, 2, 2}) == 1.0);
  CHECK(adjusted_rand_index({0, 1, 0, 1}, {0, 0, 1, 1}) < 0.0);
}

TEST_CASE("models round-trip through JSON") {
  const auto m = kmeans_fit(three_blobs(3).points, 3);
  const auto back = model_from_json(model_to_json(m));
  CHECK(back.centroids == m.centroids);
  CHECK(back.assignments == m.assignments);
  CHECK(back.inertia_history == m.inertia_history);
}
