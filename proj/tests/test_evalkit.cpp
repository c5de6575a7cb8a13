#include <doctest.h>

#include "metric_cases.hpp"
#include "sigex/evalkit/metrics.hpp"
#include "sigex/evalkit/sweep.hpp"

using namespace sigex;
using namespace sigex::evalkit;
using sigex::testing::parse4;

TEST_CASE("metrics on hand-built grids") {
  for (const auto& c : sigex::testing::metric_cases()) {
    INFO(c.name);
    CHECK(removed_noise_pct(c.retained, c.gt) == c.removed);
    CHECK(overwritten_tones_pct(c.retained, c.gt) == c.overwritten);
    CHECK(intersecting_regions(c.retained, c.others) == c.intersecting);
  }
}

TEST_CASE("keeping exactly the tones removes all noise") {
  const auto gt = parse4("0110/0110/0000/1000");
  CHECK(removed_noise_pct(gt, gt) == 100.0);
  CHECK(overwritten_tones_pct(gt, gt) == 0.0);
  CHECK(intersecting_regions(gt, {parse4("0000/0000/1111/0000")}) == 0);
}

TEST_CASE("metric preconditions") {
  const auto g = parse4("1000/0000/0000/0000");
  CHECK_THROWS(overwritten_tones_pct(g, Grid(4, 4, 0.0)));
  CHECK_THROWS(removed_noise_pct(g, Grid(4, 4, 1.0)));
  CHECK_THROWS(removed_noise_pct(g, Grid(3, 3)));
}

TEST_CASE("metrics read the retained indicator, not intensity") {
  Grid image(4, 4, 1.0);  // retained pixels happen to be white too
  const auto gt = parse4("1100/1100/0000/0000");
  const auto sig = maskforge::extract_signature(image, {parse4("1110/1100/0000/0000"), 0.5});
  const auto m = evaluate(sig, gt, {});
  CHECK(m.removed_noise_pct == 100.0 * 11.0 / 12.0);
  CHECK(m.overwritten_tones_pct == 0.0);
}

TEST_CASE("shrinking the retained set never lowers either percentage") {
  const auto gt = parse4("0110/0110/0110/0000");
  const std::vector<Grid> nested{parse4("1111/1111/1111/1111"), parse4("1111/1111/0111/0000"),
                                 parse4("0111/0110/0100/0000"), parse4("0010/0000/0000/0000"),
                                 parse4("0000/0000/0000/0000")};
  for (std::size_t i = 1; i < nested.size(); ++i) {
    CHECK(removed_noise_pct(nested[i], gt) >= removed_noise_pct(nested[i - 1], gt));
    CHECK(overwritten_tones_pct(nested[i], gt) >= overwritten_tones_pct(nested[i - 1], gt));
  }
}

TEST_CASE("component labelling is 4-connected") {
  std::vector<int> labels;
  CHECK(label_components(parse4("1000/0100/0010/0001"), labels) == 4);
  CHECK(label_components(parse4("1100/0110/0011/0001"), labels) == 1);
  CHECK(label_components(parse4("0000/0000/0000/0000"), labels) == 0);
}

TEST_CASE("sweep configuration names") {
  CHECK(approach_from_name("reverse") == Approach::Reverse);
  CHECK(approach_name(Approach::AeCentroid) == "ae-centroid");
  CHECK_THROWS(approach_from_name("other"));
  const auto cfgs = default_configs();
  CHECK(cfgs.size() == 5);
}
