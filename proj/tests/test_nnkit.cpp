#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "sigex/nnkit/architectures.hpp"
#include "sigex/nnkit/network.hpp"
#include "sigex/nnkit/optimizer.hpp"
#include "sigex/nnkit/serialize.hpp"
#include "sigex/nnkit/training.hpp"

using namespace sigex;
using namespace sigex::nnkit;

namespace {

Matrix random_matrix(int rows, int cols, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = d(rng);
  return m;
}

Matrix one_hot(const std::vector<int>& labels, int classes) {
  Matrix t = Matrix::Zero(classes, static_cast<int>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) t(labels[i], static_cast<int>(i)) = 1.0;
  return t;
}

// Worst relative disagreement between analytic and central-difference
// gradients over every parameter. Denominators are floored at 1e-6 so that
// entries which are zero in both do not count as disagreements.
double gradient_check(NetworkParams params, const Matrix& x, const Matrix& t, Loss loss,
                      double h = 1e-4) {
  const auto g = grad(params, x, t, loss);
  auto loss_at = [&](const NetworkParams& p) {
    Matrix dummy;
    return loss_and_grad(loss, infer(p, x), t, dummy);
  };
  double worst = 0.0;
  auto probe = [&](double& slot, double analytic) {
    const double keep = slot;
    slot = keep + h;
    const double up = loss_at(params);
    slot = keep - h;
    const double down = loss_at(params);
    slot = keep;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic - numeric) / denom);
  };
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto& p = params.layers[l];
    for (Eigen::Index i = 0; i < p.weight.size(); ++i) probe(p.weight.data()[i], g.layers[l].weight.data()[i]);
    for (Eigen::Index i = 0; i < p.bias.size(); ++i) probe(p.bias.data()[i], g.layers[l].bias.data()[i]);
  }
  return worst;
}

double input_gradient_check(const NetworkParams& params, Matrix x, const Matrix& t, Loss loss) {
  const auto trace = forward_trace(params, x);
  Matrix dout, dx;
  loss_and_grad(loss, trace.output(), t, dout);
  backward(params, trace, dout, &dx);
  double worst = 0.0;
  const double h = 1e-4;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Matrix dummy;
    const double keep = x.data()[i];
    x.data()[i] = keep + h;
    const double up = loss_and_grad(loss, infer(params, x), t, dummy);
    x.data()[i] = keep - h;
    const double down = loss_and_grad(loss, infer(params, x), t, dummy);
    x.data()[i] = keep;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(dx.data()[i]), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(dx.data()[i] - numeric) / denom);
  }
  return worst;
}

// conv relu pool flatten dense sigmoid dense softmax
NetworkSpec toy_classifier() {
  NetworkSpec s;
  s.input = {1, 6, 6};
  s.layers = {LayerDesc::conv(2, 3), LayerDesc::relu(),     LayerDesc::max_pool(2),
              LayerDesc::flatten(),  LayerDesc::dense(4),   LayerDesc::sigmoid(),
              LayerDesc::dense(3),   LayerDesc::softmax()};
  return s;
}

// dense reshape transposed-conv same-conv sigmoid
NetworkSpec toy_decoder() {
  NetworkSpec s;
  s.input = {1, 1, 5};
  s.layers = {LayerDesc::dense(8),
              LayerDesc::linear(),
              LayerDesc::reshape({2, 2, 2}),
              LayerDesc::conv_transpose(2, 4, 2),
              LayerDesc::relu(),
              LayerDesc::conv(1, 3, true),
              LayerDesc::sigmoid()};
  return s;
}

}  // namespace

TEST_CASE("analytic gradients agree with central differences for every layer kind") {
  std::mt19937_64 rng(3);
  double worst_cls = 0.0, worst_dec = 0.0, worst_mse = 0.0;
  for (int point = 0; point < 20; ++point) {
    const auto cls = NetworkParams::init(toy_classifier(), 100 + point);
    const Matrix x = random_matrix(36, 3, rng);
    worst_cls = std::max(worst_cls, gradient_check(cls, x, one_hot({0, 2, 1}, 3), Loss::CrossEntropy));

    const auto dec = NetworkParams::init(toy_decoder(), 200 + point);
    const Matrix z = random_matrix(5, 2, rng);
    const Matrix target = random_matrix(16, 2, rng, 0.0, 1.0);
    worst_dec = std::max(worst_dec, gradient_check(dec, z, target, Loss::BinaryCrossEntropy));
    worst_mse = std::max(worst_mse, gradient_check(dec, z, target, Loss::MeanSquared));
  }
  CHECK(worst_cls < 1e-3);
  CHECK(worst_dec < 1e-3);
  CHECK(worst_mse < 1e-3);
}

TEST_CASE("input gradients agree with central differences") {
  std::mt19937_64 rng(8);
  const auto cls = NetworkParams::init(toy_classifier(), 5);
  CHECK(input_gradient_check(cls, random_matrix(36, 2, rng), one_hot({1, 0}, 3),
                             Loss::CrossEntropy) < 1e-3);
  const auto dec = NetworkParams::init(toy_decoder(), 6);
  CHECK(input_gradient_check(dec, random_matrix(5, 2, rng), random_matrix(16, 2, rng, 0, 1),
                             Loss::MeanSquared) < 1e-3);
}

TEST_CASE("identity kernel forward on a 4x4 image") {
  NetworkSpec s;
  s.input = {1, 4, 4};
  s.layers = {LayerDesc::conv(1, 3), LayerDesc::relu()};
  auto p = NetworkParams::zeros(s);
  p.layers[0].weight(0, 4) = 1.0;  // centre tap
  p.layers[0].bias(0) = 0.5;
  // rows: [1 2 3 4], [5 -6 7 8], [9 10 -11 12], [13 14 15 16]
  Grid img(4, 4, {1, 2, 3, 4, 5, -6, 7, 8, 9, 10, -11, 12, 13, 14, 15, 16});
  const Matrix out = infer(p, image_column(img));
  REQUIRE(out.rows() == 4);
  CHECK(out(0, 0) == 0.0);   // relu(-6 + 0.5)
  CHECK(out(1, 0) == 7.5);
  CHECK(out(2, 0) == 10.5);
  CHECK(out(3, 0) == 0.0);   // relu(-11 + 0.5)

  // 3x3 box kernel: each output is the sum of its window
  p.layers[0].weight.setOnes();
  p.layers[0].bias(0) = 0.0;
  const Matrix box = infer(p, image_column(img));
  CHECK(box(0, 0) == 1 + 2 + 3 + 5 - 6 + 7 + 9 + 10 - 11);
  CHECK(box(3, 0) == -6 + 7 + 8 + 10 - 11 + 12 + 14 + 15 + 16);
}

TEST_CASE("zero-weight classifier scores uniformly") {
  const auto p = NetworkParams::zeros(spec_cnn(64, 64, 4));
  Grid img(64, 64, 0.3);
  img(10, 10) = 0.9;
  const auto r = forward(p, img, "x");
  REQUIRE(r.scores.size() == 4);
  for (double s : r.scores) CHECK(s == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("class scores always sum to one") {
  const auto p = NetworkParams::init(spec_cnn(64, 64, 4), 9);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 5; ++i) {
    const Matrix x = random_matrix(64 * 64, 1, rng, 0.0, 1.0);
    const auto r = forward(p, column_image(x.col(0), 64, 64));
    double sum = 0.0;
    for (double s : r.scores) sum += s;
    CHECK(std::abs(sum - 1.0) < 1e-6);
  }
}

TEST_CASE("softmax cross-entropy bias gradient is mean of prediction minus one-hot") {
  const auto spec = toy_classifier();
  const auto p = NetworkParams::zeros(spec);
  std::mt19937_64 rng(4);
  const Matrix x = random_matrix(36, 3, rng);
  const std::vector<int> labels{0, 1, 2};
  const auto g = grad(p, x, one_hot(labels, 3), Loss::CrossEntropy);
  const auto& bias = g.layers[6].bias;  // last dense
  for (int c = 0; c < 3; ++c) {
    double expected = 0.0;
    for (int l : labels) expected += (1.0 / 3.0 - (l == c ? 1.0 : 0.0)) / 3.0;
    CHECK(bias(c) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("duplicating a sample leaves the mean gradient unchanged") {
  const auto p = NetworkParams::init(toy_classifier(), 12);
  std::mt19937_64 rng(6);
  const Matrix one = random_matrix(36, 1, rng);
  Matrix two(36, 2);
  two << one, one;
  const auto g1 = grad(p, one, one_hot({1}, 3), Loss::CrossEntropy);
  const auto g2 = grad(p, two, one_hot({1, 1}, 3), Loss::CrossEntropy);
  CHECK(g1.loss == doctest::Approx(g2.loss).epsilon(1e-14));
  for (std::size_t l = 0; l < g1.layers.size(); ++l) {
    if (g1.layers[l].weight.size() == 0) continue;
    CHECK((g1.layers[l].weight - g2.layers[l].weight).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((g1.layers[l].bias - g2.layers[l].bias).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("non-finite loss raises a divergence error") {
  auto p = NetworkParams::init(toy_classifier(), 1);
  p.layers[0].weight(0, 0) = std::nan("");
  std::mt19937_64 rng(2);
  CHECK_THROWS_AS(grad(p, random_matrix(36, 1, rng), one_hot({0}, 3), Loss::CrossEntropy),
                  DivergenceError);
  CHECK_THROWS_AS(grad(p, Matrix(36, 0), Matrix(3, 0), Loss::CrossEntropy), std::invalid_argument);
}

TEST_CASE("forward is pure and taps follow the spec") {
  const auto spec = spec_cnn(64, 64, 4);
  const auto p = NetworkParams::init(spec, 2);
  Grid img(64, 64, 0.2);
  img(30, 5) = 1.0;
  const auto a = forward(p, img, "a");
  const auto b = forward(p, img, "a");
  CHECK(a.scores == b.scores);
  CHECK(a.embedding.values == b.embedding.values);
  CHECK(a.embedding.values.size() == static_cast<std::size_t>(kEmbeddingWidth));
  REQUIRE(a.activations.maps.size() == 32);
  CHECK(a.activations.maps[0].rows() == 29);
  CHECK(a.activations.maps[0] == b.activations.maps[0]);
  CHECK_THROWS_AS(forward(p, Grid(32, 64)), std::invalid_argument);
}

TEST_CASE("pixel map of the classifier trunk") {
  const auto spec = spec_cnn(64, 64, 4);
  const auto m = spec.pixel_map(spec.activation_tap());
  // conv3 (+1) pool2 (x2, +0.5) conv3 (+1 at scale 2) -> 2p + 3.5
  CHECK(m.scale == 2.0);
  CHECK(m.offset == 3.5);
}

TEST_CASE("parameter files round-trip exactly") {
  auto p = NetworkParams::init(toy_decoder(), 77);
  p.epochs = 3;
  p.extra["note"] = "x";
  p.snap_to_float();
  const auto path = std::filesystem::temp_directory_path() / "sigex_params_rt.nnp";
  save_params(p, path);
  const auto q = load_params(path);
  CHECK(q.spec.hash() == p.spec.hash());
  CHECK(q.epochs == 3);
  CHECK(q.extra == p.extra);
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    CHECK(q.layers[l].weight == p.layers[l].weight);
    CHECK(q.layers[l].bias == p.layers[l].bias);
  }
  std::filesystem::remove(path);
}

TEST_CASE("spec rejects layers that do not compose") {
  NetworkSpec s;
  s.input = {1, 4, 4};
  s.layers = {LayerDesc::conv(1, 5)};
  CHECK_THROWS_AS(s.shapes(), std::invalid_argument);
}

TEST_CASE("optimizer honours frozen layers and clipping") {
  auto p = NetworkParams::init(toy_classifier(), 3);
  const auto before = p.layers[0].weight;
  std::mt19937_64 rng(1);
  const auto g = grad(p, random_matrix(36, 2, rng), one_hot({0, 1}, 3), Loss::CrossEntropy);
  Optimizer opt({OptimizerKind::Adam, 1e-2}, p);
  opt.freeze(0);
  opt.step(p, g.layers);
  CHECK(p.layers[0].weight == before);
  CHECK(p.layers[4].weight != NetworkParams::init(toy_classifier(), 3).layers[4].weight);
  clip_weights(p, 0.01);
  CHECK(max_abs_parameter(p) <= 0.01);
}

TEST_CASE("classifier training is deterministic and fits a small set") {
  std::mt19937_64 rng(10);
  LabeledSet train;
  train.images = Matrix::Zero(16 * 16, 10);
  for (int i = 0; i < 10; ++i) {
    const int label = i % 2;
    train.labels.push_back(label);
    train.ids.push_back("s" + std::to_string(i));
    for (int r = 0; r < 16 * 16; ++r)
      train.images(r, i) = std::uniform_real_distribution<double>(0.0, 0.2)(rng);
    for (int c = 0; c < 16; ++c) train.images((4 + 7 * label) * 16 + c, i) = 1.0;
  }
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.batch_size = 4;
  cfg.seed = 5;
  const auto a = train_classifier(train, train, spec_cnn(16, 16, 2), cfg);
  const auto b = train_classifier(train, train, spec_cnn(16, 16, 2), cfg);
  CHECK(a.history.back().train_accuracy == 1.0);
  CHECK(a.history.back().loss == b.history.back().loss);
  CHECK(a.params.layers[0].weight == b.params.layers[0].weight);
}

TEST_CASE("autoencoder reduces reconstruction loss and decodes into [0,1]") {
  std::mt19937_64 rng(12);
  Matrix images = random_matrix(16 * 16, 12, rng, 0.0, 0.2);
  for (int i = 0; i < 12; ++i)
    for (int c = 0; c < 16; ++c) images((3 + i % 3) * 16 + c, i) = 1.0;
  AutoencoderConfig cfg;
  cfg.train.epochs = 40;
  cfg.train.batch_size = 4;
  cfg.train.seed = 1;
  const auto enc = NetworkParams::init(encoder_spec(16, 16), 3);
  const auto run = train_autoencoder(images, enc, decoder_spec(16, 16), cfg);
  REQUIRE(run.loss_history.size() == 40);
  CHECK(run.loss_history.back() < run.loss_history.front());
  const auto img = decode(run.decoder, std::vector<double>(kEmbeddingWidth, 0.3));
  CHECK(img.rows() == 16);
  CHECK(img.min() >= 0.0);
  CHECK(img.max() <= 1.0);
}
