#include "sigex/wgan/wgan.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include "sigex/core/spg_io.hpp"
#include "sigex/nnkit/architectures.hpp"
#include "sigex/nnkit/serialize.hpp"
#include "sigex/nnkit/training.hpp"

namespace sigex::wgan {
namespace {

using nnkit::Matrix;

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Matrix gather(const Matrix& images, const std::vector<std::size_t>& order, std::size_t begin,
              std::size_t end) {
  Matrix out(images.rows(), static_cast<Eigen::Index>(end - begin));
  for (std::size_t i = begin; i < end; ++i)
    out.col(static_cast<Eigen::Index>(i - begin)) = images.col(static_cast<Eigen::Index>(order[i]));
  return out;
}

class Trainer {
 public:
  Trainer(const Matrix& images, int rows, int cols, const WganConfig& config)
      : images_(images),
        config_(config),
        generator_(nnkit::NetworkParams::init(nnkit::generator_spec(rows, cols), config.seed)),
        critic_(nnkit::NetworkParams::init(nnkit::critic_spec(rows, cols), mix(config.seed, 1))),
        gen_opt_(config.generator_optimizer, generator_),
        critic_opt_(config.critic_optimizer, critic_),
        rng_(mix(config.seed, 2)) {
    nnkit::clip_weights(critic_, config.clip);
  }

  GanBundle run() {
    std::vector<std::size_t> order(static_cast<std::size_t>(images_.cols()));
    std::iota(order.begin(), order.end(), 0);
    const auto batch = static_cast<std::size_t>(config_.batch_size);
    for (int epoch = 1; epoch <= config_.epochs; ++epoch) {
      epoch_ = epoch;
      GanEpoch rec{epoch, 0.0, 0.0, 0.0, 0.0};
      critic_losses_.clear();
      generator_losses_.clear();
      max_abs_ = 0.0;
      std::shuffle(order.begin(), order.end(), rng_);

      const bool critic_phase = ((epoch - 1) / std::max(1, config_.critic_steps)) % 2 == 0;
      for (std::size_t start = 0; start < order.size(); start += batch) {
        const Matrix real = gather(images_, order, start, std::min(order.size(), start + batch));
        if (config_.alternation == Alternation::PerBatch) {
          for (int s = 0; s < config_.critic_steps; ++s) critic_step(real);
          generator_step(real.cols());
        } else if (critic_phase) {
          critic_step(real);
        } else {
          generator_step(real.cols());
        }
      }
      generator_.snap_to_float();
      critic_.snap_to_float();

      rec.critic_loss = critic_losses_.empty() ? 0.0 : mean(critic_losses_);
      rec.generator_loss = generator_losses_.empty() ? 0.0 : mean(generator_losses_);
      rec.max_abs_critic = max_abs_;
      rec.probe = probe(epoch);
      history_.push_back(rec);
    }
    generator_.seed = config_.seed;
    generator_.epochs = config_.epochs;
    critic_.seed = config_.seed;
    critic_.epochs = config_.epochs;
    return {generator_, critic_, history_, -1};
  }

 private:
  void check(double loss, const char* what) {
    if (!std::isfinite(loss))
      throw WganDivergence(std::string("train_wgan: ") + what + " loss diverged at epoch " +
                               std::to_string(epoch_),
                           epoch_, history_);
  }

  Matrix fakes(Eigen::Index n) {
    return nnkit::infer(generator_, latent_batch(static_cast<int>(n), rng_()));
  }

  void critic_step(const Matrix& real) {
    const Eigen::Index n = real.cols();
    Matrix both(real.rows(), 2 * n);
    both.leftCols(n) = real;
    both.rightCols(n) = fakes(n);
    const auto trace = nnkit::forward_trace(critic_, both);
    const Matrix& out = trace.output();
    Matrix g(1, 2 * n);
    double loss = 0.0;
    const double inv = 1.0 / static_cast<double>(n);
    if (config_.objective == Objective::Wasserstein) {
      loss = (out.rightCols(n).sum() - out.leftCols(n).sum()) * inv;
      g.leftCols(n).setConstant(-inv);
      g.rightCols(n).setConstant(inv);
    } else {
      for (Eigen::Index i = 0; i < n; ++i) {
        const double pr = sigmoid(out(0, i));
        const double pf = sigmoid(out(0, n + i));
        loss -= (std::log(std::max(pr, 1e-12)) + std::log(std::max(1.0 - pf, 1e-12))) * inv;
        g(0, i) = (pr - 1.0) * inv;
        g(0, n + i) = pf * inv;
      }
    }
    check(loss, "critic");
    critic_losses_.push_back(loss);
    critic_opt_.step(critic_, nnkit::backward(critic_, trace, g));
    nnkit::clip_weights(critic_, config_.clip);
    max_abs_ = std::max(max_abs_, nnkit::max_abs_parameter(critic_));
  }

  void generator_step(Eigen::Index n) {
    const auto gen_trace = nnkit::forward_trace(generator_, latent_batch(static_cast<int>(n), rng_()));
    const auto critic_trace = nnkit::forward_trace(critic_, gen_trace.output());
    const Matrix& out = critic_trace.output();
    const double inv = 1.0 / static_cast<double>(n);
    Matrix g(1, n);
    double loss = 0.0;
    if (config_.objective == Objective::Wasserstein) {
      loss = -out.sum() * inv;
      g.setConstant(-inv);
    } else {
      for (Eigen::Index i = 0; i < n; ++i) {
        const double p = sigmoid(out(0, i));
        loss -= std::log(std::max(p, 1e-12)) * inv;
        g(0, i) = (p - 1.0) * inv;
      }
    }
    check(loss, "generator");
    generator_losses_.push_back(loss);
    Matrix image_grad;
    nnkit::backward(critic_, critic_trace, g, &image_grad);
    gen_opt_.step(generator_, nnkit::backward(generator_, gen_trace, image_grad));
  }

  // Every real image against as many fresh fakes, from an epoch-keyed seed so
  // the probe does not disturb the training stream.
  double probe(int epoch) {
    const auto fake = nnkit::infer(
        generator_, latent_batch(static_cast<int>(images_.cols()), mix(config_.seed, 1000 + epoch)));
    return accuracy_probe(critic_scores(critic_, images_), critic_scores(critic_, fake));
  }

  const Matrix& images_;
  WganConfig config_;
  nnkit::NetworkParams generator_;
  nnkit::NetworkParams critic_;
  nnkit::Optimizer gen_opt_;
  nnkit::Optimizer critic_opt_;
  std::mt19937_64 rng_;
  std::vector<GanEpoch> history_;
  std::vector<double> critic_losses_;
  std::vector<double> generator_losses_;
  double max_abs_ = 0.0;
  int epoch_ = 0;
};

}  // namespace

Losses wasserstein_losses(const std::vector<double>& real_scores,
                          const std::vector<double>& fake_scores) {
  if (real_scores.empty() || fake_scores.empty())
    throw std::invalid_argument("wasserstein_losses: empty score array");
  const double fake = mean(fake_scores);
  return {fake - mean(real_scores), -fake};
}

double accuracy_probe(const std::vector<double>& real_scores,
                      const std::vector<double>& fake_scores) {
  if (real_scores.empty() || fake_scores.empty())
    throw std::invalid_argument("accuracy_probe: empty score array");
  if (real_scores.size() != fake_scores.size())
    throw std::invalid_argument("accuracy_probe: real and fake batches differ in size");
  const double threshold = 0.5 * (mean(real_scores) + mean(fake_scores));
  std::size_t correct = 0;
  for (double s : real_scores) correct += s > threshold;
  for (double s : fake_scores) correct += s < threshold;
  return static_cast<double>(correct) /
         static_cast<double>(real_scores.size() + fake_scores.size());
}

Matrix latent_batch(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix z(nnkit::kLatentDim, count);
  for (Eigen::Index c = 0; c < z.cols(); ++c)
    for (Eigen::Index r = 0; r < z.rows(); ++r) z(r, c) = u(rng);
  return z;
}

std::vector<double> critic_scores(const nnkit::NetworkParams& critic, const Matrix& images) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(images.cols()));
  constexpr Eigen::Index kChunk = 64;
  for (Eigen::Index start = 0; start < images.cols(); start += kChunk) {
    const Eigen::Index n = std::min(kChunk, images.cols() - start);
    const Matrix s = nnkit::infer(critic, images.middleCols(start, n));
    for (Eigen::Index i = 0; i < n; ++i) out.push_back(s(0, i));
  }
  return out;
}

GanBundle train_wgan(const Matrix& images, int rows, int cols, const WganConfig& config) {
  if (config.batch_size < 1 || config.critic_steps < 1 || config.epochs < 1)
    throw std::invalid_argument("train_wgan: batch_size, critic_steps and epochs must be >= 1");
  if (images.cols() < config.batch_size)
    throw std::invalid_argument("train_wgan: " + std::to_string(images.cols()) +
                                " samples, need at least batch_size = " +
                                std::to_string(config.batch_size));
  if (images.rows() != static_cast<Eigen::Index>(rows) * cols)
    throw std::invalid_argument("train_wgan: images are not " + std::to_string(rows) + "x" +
                                std::to_string(cols));
  return Trainer(images, rows, cols, config).run();
}

GanBundle train_wgan(const sonogen::DatasetManifest& manifest, int class_id,
                     const WganConfig& config) {
  const auto entries = manifest.select("train", class_id, false);
  const auto& geo = manifest.geometry;
  Matrix images(static_cast<Eigen::Index>(geo.rows) * geo.cols,
                static_cast<Eigen::Index>(entries.size()));
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto s = sonogen::load_spectrogram(manifest, *entries[i]);
    images.col(static_cast<Eigen::Index>(i)) = nnkit::image_column(s.grid);
  }
  auto bundle = train_wgan(images, geo.rows, geo.cols, config);
  bundle.class_id = class_id;
  bundle.generator.extra["class_id"] = class_id;
  bundle.critic.extra["class_id"] = class_id;
  return bundle;
}

std::vector<Grid> sample_synthetic(const GanBundle& bundle, int count, std::uint64_t seed) {
  std::vector<Grid> out;
  if (count <= 0) return out;
  const auto shape = bundle.generator.spec.output_shape();
  const Matrix images = nnkit::infer(bundle.generator, latent_batch(count, seed));
  for (Eigen::Index i = 0; i < images.cols(); ++i) {
    Grid g = nnkit::column_image(images.col(i), shape.height, shape.width);
    for (double& v : g.cells()) v = std::clamp(v, 0.0, 1.0);
    out.push_back(quantize_f32(g));
  }
  return out;
}

double final_probe(const GanBundle& bundle, int n) {
  if (bundle.history.empty()) throw std::invalid_argument("final_probe: empty history");
  const auto k = std::min<std::size_t>(bundle.history.size(), static_cast<std::size_t>(n));
  double sum = 0.0;
  for (auto it = bundle.history.end() - static_cast<long>(k); it != bundle.history.end(); ++it)
    sum += it->probe;
  return sum / static_cast<double>(k);
}

nlohmann::json history_to_json(const std::vector<GanEpoch>& history) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& h : history)
    out.push_back({{"epoch", h.epoch},
                   {"critic_loss", h.critic_loss},
                   {"generator_loss", h.generator_loss},
                   {"probe", h.probe},
                   {"max_abs_critic", h.max_abs_critic}});
  return out;
}

void save_bundle(const GanBundle& bundle, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nnkit::save_params(bundle.generator, dir / "generator.nnp");
  nnkit::save_params(bundle.critic, dir / "critic.nnp");
  std::ofstream out(dir / "history.json", std::ios::binary);
  if (!out) throw std::runtime_error("save_bundle: cannot write " + (dir / "history.json").string());
  out << nlohmann::json{{"class_id", bundle.class_id}, {"history", history_to_json(bundle.history)}}
             .dump(2)
      << '\n';
}

GanBundle load_bundle(const std::filesystem::path& dir) {
  GanBundle b;
  b.generator = nnkit::load_params(dir / "generator.nnp");
  b.critic = nnkit::load_params(dir / "critic.nnp");
  std::ifstream in(dir / "history.json");
  if (!in) throw std::runtime_error("load_bundle: missing " + (dir / "history.json").string());
  const auto doc = nlohmann::json::parse(in);
  b.class_id = doc.at("class_id").get<int>();
  for (const auto& h : doc.at("history"))
    b.history.push_back({h.at("epoch").get<int>(), h.at("critic_loss").get<double>(),
                         h.at("generator_loss").get<double>(), h.at("probe").get<double>(),
                         h.at("max_abs_critic").get<double>()});
  return b;
}

}  // namespace sigex::wgan
