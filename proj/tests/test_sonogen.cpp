#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "sigex/sonogen/corpus.hpp"
#include "sigex/sonogen/fft.hpp"
#include "sigex/sonogen/stft.hpp"
#include "sigex/sonogen/synth.hpp"

using namespace sigex;
using namespace sigex::sonogen;
namespace fs = std::filesystem;

namespace {

std::vector<Complex> naive_dft(const std::vector<Complex>& a) {
  const std::size_t n = a.size();
  std::vector<Complex> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    Complex s{0.0, 0.0};
    for (std::size_t j = 0; j < n; ++j) {
      const double ang = -2.0 * std::numbers::pi * static_cast<double>((k * j) % n) / n;
      s += a[j] * Complex(std::cos(ang), std::sin(ang));
    }
    out[k] = s;
  }
  return out;
}

double rel_error(const std::vector<Complex>& got, const std::vector<Complex>& want) {
  double diff = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < want.size(); ++i) {
    diff = std::max(diff, std::abs(got[i] - want[i]));
    ref = std::max(ref, std::abs(want[i]));
  }
  return diff / std::max(ref, 1e-300);
}

std::vector<Complex> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  std::vector<Complex> v(n);
  for (auto& x : v) x = {d(rng), d(rng)};
  return v;
}

TimeSeries sine(double freq, int rate, std::size_t n) {
  TimeSeries ts{std::vector<double>(n), rate};
  for (std::size_t i = 0; i < n; ++i)
    ts.samples[i] = std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / rate);
  return ts;
}

ClassSpec one_track(double freq) {
  ClassSpec c;
  c.class_id = 0;
  c.name = "single";
  TonalTrack t;
  t.base_freq = freq;
  c.tracks.push_back(t);
  return c;
}

}  // namespace

TEST_CASE("dft of an impulse is flat") {
  const std::vector<Complex> x{1, 0, 0, 0};
  const auto y = dft(x);
  for (const auto& v : y) CHECK(std::abs(v - Complex(1, 0)) < 1e-15);
}

TEST_CASE("dft of a constant is a spike at DC") {
  const std::vector<double> x{1, 1, 1, 1};
  const auto y = dft(x);
  CHECK(std::abs(y[0] - Complex(4, 0)) < 1e-15);
  for (int k = 1; k < 4; ++k) CHECK(std::abs(y[k]) < 1e-15);
}

TEST_CASE("dft matches the quadratic sum") {
  std::mt19937_64 rng(11);
  for (std::size_t n : {8u, 64u, 512u}) {
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const auto x = random_vector(n, rng);
      worst = std::max(worst, rel_error(dft(x), naive_dft(x)));
    }
    INFO("N = " << n);
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("idft inverts dft up to 4096 points") {
  std::mt19937_64 rng(5);
  for (std::size_t n = 1; n <= 4096; n *= 2) {
    const auto x = random_vector(n, rng);
    INFO("N = " << n);
    CHECK(rel_error(idft(dft(x)), x) < 1e-9);
  }
}

TEST_CASE("dft rejects lengths that are not powers of two") {
  const std::vector<Complex> x(6);
  CHECK_THROWS_AS(dft(x), std::length_error);
  CHECK_FALSE(is_power_of_two(0));
  CHECK(is_power_of_two(1));
  CHECK(is_power_of_two(1024));
}

TEST_CASE("bin-centred sine peaks at its bin in every frame") {
  StftParams p;  // 128 / 64 / 4096 Hz
  for (int k : {3, 17, 40, 63}) {
    const double f = static_cast<double>(k) * p.sample_rate / p.fft_size;
    const auto s = stft(sine(f, p.sample_rate, 2048), p);
    REQUIRE(s.grid.rows() == p.fft_size / 2 + 1);
    for (int c = 0; c < s.grid.cols(); ++c) {
      int best = 0;
      for (int r = 1; r < s.grid.rows(); ++r)
        if (s.grid(r, c) > s.grid(best, c)) best = r;
      CHECK(best == k);
    }
  }
}

TEST_CASE("silent input gives a flat image") {
  StftParams p;
  const TimeSeries z{std::vector<double>(1024, 0.0), p.sample_rate};
  const auto s = stft(z, p);
  for (double v : s.grid.cells()) CHECK(v == 0.5);
}

TEST_CASE("stft output shape follows frame count") {
  StftParams p;
  p.hop = 48;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> d;
  TimeSeries x{std::vector<double>(1000), p.sample_rate};
  for (auto& v : x.samples) v = d(rng);
  const auto s = stft(x, p);
  CHECK(s.grid.rows() == 65);
  CHECK(s.grid.cols() == (1000 - 128) / 48 + 1);
  for (double v : s.grid.cells()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("stft names the minimum length for short signals") {
  StftParams p;
  const TimeSeries x{std::vector<double>(100, 0.1), p.sample_rate};
  try {
    (void)stft(x, p);
    FAIL("expected an error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("128") != std::string::npos);
  }
}

TEST_CASE("clean single track keeps its energy inside the mask") {
  ImageGeometry g;
  const auto spec = one_track(100.0);
  const auto x = synth_signal(spec, g.duration(), 0.0, {}, 1);
  const auto mag = stft_magnitude(x, g.stft);
  const auto mask = ground_truth_mask(spec, g);
  double inside = 0.0, total = 0.0;
  for (int r = 0; r < g.rows; ++r)
    for (int c = 0; c < g.cols; ++c) {
      const double e = mag(r + g.first_bin, c) * mag(r + g.first_bin, c);
      total += e;
      if (mask.grid(r, c) > 0.5) inside += e;
    }
  CHECK(inside / total >= 0.95);
}

TEST_CASE("noise-only sample has no structure beyond noise") {
  ImageGeometry g;
  ClassSpec empty;
  const auto x = synth_signal(empty, g.duration(), 1.0, {}, 9);
  CHECK(x.samples.size() == g.signal_length());
  double mean = 0.0, var = 0.0;
  for (double v : x.samples) mean += v;
  mean /= x.samples.size();
  for (double v : x.samples) var += (v - mean) * (v - mean);
  var /= x.samples.size();
  CHECK(std::abs(mean) < 0.1);
  CHECK(var == doctest::Approx(1.0).epsilon(0.1));
  CHECK(ground_truth_mask(empty, g).grid.sum() == 0.0);
}

TEST_CASE("synthesis is reproducible from the seed") {
  ImageGeometry g;
  const auto classes = desk_classes();
  const auto a = synth_signal(classes[0], g.duration(), 0.3, {classes[1]}, 42);
  const auto b = synth_signal(classes[0], g.duration(), 0.3, {classes[1]}, 42);
  const auto c = synth_signal(classes[0], g.duration(), 0.3, {classes[1]}, 43);
  CHECK(a.samples == b.samples);
  CHECK(a.samples != c.samples);
}

TEST_CASE("tracks above Nyquist are rejected") {
  ImageGeometry g;
  CHECK_THROWS_AS(synth_signal(one_track(3000.0), g.duration(), 0.0, {}, 1),
                  std::invalid_argument);
}

TEST_CASE("constant track masks one three-bin band") {
  ImageGeometry g;
  const auto m = ground_truth_mask(one_track(100.0), g).grid;
  std::vector<int> rows;
  for (int r = 0; r < m.rows(); ++r) {
    int on = 0;
    for (int c = 0; c < m.cols(); ++c) on += m(r, c) > 0.5;
    if (on) {
      CHECK(on == m.cols());
      rows.push_back(r);
    }
  }
  REQUIRE(rows.size() == 3);
  CHECK(rows[1] == rows[0] + 1);
  CHECK(rows[2] == rows[0] + 2);
  // 100 Hz is nearest bin 3, which is row 2 once DC is dropped
  CHECK(rows[1] == 3 - g.first_bin);
}

TEST_CASE("two harmonics give two disjoint bands") {
  ImageGeometry g;
  ClassSpec c = one_track(10.0 * 32.0);  // bin 10
  c.tracks[0].harmonics = {{1, 1.0}, {2, 0.8}};
  const auto m = ground_truth_mask(c, g).grid;
  CHECK(m.sum() == 2.0 * 3.0 * g.cols);
  for (int col = 0; col < g.cols; ++col) {
    CHECK(m(10 - g.first_bin, col) == 1.0);
    CHECK(m(20 - g.first_bin, col) == 1.0);
    CHECK(m(15 - g.first_bin, col) == 0.0);
  }
}

TEST_CASE("desk corpus renders 200 consistent entries") {
  const auto dir = fs::temp_directory_path() / "sigex_test_corpus";
  const auto dir2 = fs::temp_directory_path() / "sigex_test_corpus2";
  fs::remove_all(dir);
  fs::remove_all(dir2);
  CorpusConfig cfg;
  cfg.classes = desk_classes();
  cfg.seed = 21;
  const auto m = render_corpus(cfg, dir);
  CHECK(m.entries.size() == 200);
  CHECK(m.class_ids().size() == 4);
  validate_manifest(load_manifest(dir / "manifest.json"));

  double in_sum = 0.0, out_sum = 0.0;
  long in_n = 0, out_n = 0;
  for (const auto& e : m.entries) {
    const auto s = load_spectrogram(m, e);
    const auto gt = load_mask(m, e);
    REQUIRE(s.grid.rows() == 64);
    REQUIRE(s.grid.cols() == 64);
    REQUIRE(gt.grid.same_shape(s.grid));
    for (std::size_t i = 0; i < s.grid.size(); ++i) {
      const double v = s.grid.cells()[i], g = gt.grid.cells()[i];
      REQUIRE(v >= 0.0);
      REQUIRE(v <= 1.0);
      REQUIRE((g == 0.0 || g == 1.0));
      if (g > 0.5) {
        in_sum += v;
        ++in_n;
      } else {
        out_sum += v;
        ++out_n;
      }
    }
  }
  CHECK(in_sum / in_n > out_sum / out_n);

  render_corpus(cfg, dir2);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  CHECK(slurp(dir / "manifest.json") == slurp(dir2 / "manifest.json"));
  fs::remove_all(dir);
  fs::remove_all(dir2);
}

TEST_CASE("single-class corpus is refused") {
  CorpusConfig cfg;
  cfg.classes = {desk_classes()[0]};
  CHECK_THROWS(render_corpus(cfg, fs::temp_directory_path() / "sigex_test_single"));
}
