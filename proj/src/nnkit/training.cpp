#include "sigex/nnkit/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace sigex::nnkit {
namespace {

Matrix gather(const Matrix& images, const std::vector<std::size_t>& order, std::size_t begin,
              std::size_t end) {
  Matrix out(images.rows(), static_cast<Eigen::Index>(end - begin));
  for (std::size_t i = begin; i < end; ++i)
    out.col(static_cast<Eigen::Index>(i - begin)) = images.col(static_cast<Eigen::Index>(order[i]));
  return out;
}

Matrix one_hot(const std::vector<int>& labels, const std::vector<std::size_t>& order,
               std::size_t begin, std::size_t end, int classes) {
  Matrix out = Matrix::Zero(classes, static_cast<Eigen::Index>(end - begin));
  for (std::size_t i = begin; i < end; ++i)
    out(labels[order[i]], static_cast<Eigen::Index>(i - begin)) = 1.0;
  return out;
}

double unit_scale(const Vector& e) {
  const double n = e.norm();
  return n > 0.0 ? 1.0 / n : 1.0;
}

}  // namespace

std::vector<int> predict(const NetworkParams& params, const Matrix& batch) {
  std::vector<int> out;
  constexpr Eigen::Index kChunk = 64;
  for (Eigen::Index start = 0; start < batch.cols(); start += kChunk) {
    const Eigen::Index n = std::min(kChunk, batch.cols() - start);
    const Matrix scores = infer(params, batch.middleCols(start, n));
    for (Eigen::Index b = 0; b < n; ++b) {
      Eigen::Index arg = 0;
      scores.col(b).maxCoeff(&arg);
      out.push_back(static_cast<int>(arg));
    }
  }
  return out;
}

double accuracy(const NetworkParams& params, const LabeledSet& set) {
  if (set.size() == 0) return 0.0;
  const auto pred = predict(params, set.images);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == set.labels[i];
  return static_cast<double>(hits) / static_cast<double>(set.size());
}

std::vector<int> class_ids(const NetworkParams& params) {
  if (params.extra.contains("class_ids")) return params.extra["class_ids"].get<std::vector<int>>();
  std::vector<int> ids(static_cast<std::size_t>(params.spec.output_shape().size()));
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

ClassifierRun train_classifier(const LabeledSet& train, const LabeledSet& test,
                               const NetworkSpec& spec, const TrainConfig& config) {
  const int classes = spec.output_shape().size();
  if (train.size() == 0) throw std::invalid_argument("train_classifier: empty training set");
  {
    std::vector<int> seen = train.labels;
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    if (seen.size() < 2) throw std::invalid_argument("train_classifier: need >= 2 classes");
    if (seen.front() < 0 || seen.back() >= classes)
      throw std::invalid_argument("train_classifier: label outside network output range");
  }

  ClassifierRun run{NetworkParams::init(spec, config.seed), {}};
  Optimizer opt(config.optimizer, run.params);
  std::mt19937_64 rng(config.seed ^ 0x5bd1e995ULL);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  const auto batch = static_cast<std::size_t>(std::max(1, config.batch_size));

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      Gradients g;
      try {
        g = grad(run.params, gather(train.images, order, start, end),
                 one_hot(train.labels, order, start, end, classes), Loss::CrossEntropy);
      } catch (const DivergenceError&) {
        throw DivergenceError("train_classifier: loss diverged at epoch " + std::to_string(epoch),
                              epoch);
      }
      opt.step(run.params, g.layers);
      loss_sum += g.loss;
      ++batches;
    }
    run.params.snap_to_float();
    EpochRecord rec{epoch, loss_sum / static_cast<double>(batches), accuracy(run.params, train),
                    test.size() ? accuracy(run.params, test) : 0.0};
    run.history.push_back(rec);
  }

  run.params.epochs = config.epochs;
  run.params.seed = config.seed;
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& r : run.history)
    hist.push_back({{"epoch", r.epoch},
                    {"loss", r.loss},
                    {"train_accuracy", r.train_accuracy},
                    {"test_accuracy", r.test_accuracy}});
  run.params.extra["history"] = hist;
  return run;
}

LabeledSet load_split(const sonogen::DatasetManifest& manifest, const std::string& split,
                      bool include_synthetic) {
  const auto ids = manifest.class_ids();
  const auto entries = manifest.select(split, -1, include_synthetic);
  LabeledSet set;
  const auto features = static_cast<Eigen::Index>(manifest.geometry.rows) * manifest.geometry.cols;
  set.images.resize(features, static_cast<Eigen::Index>(entries.size()));
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto image = sonogen::load_spectrogram(manifest, *entries[i]);
    if (static_cast<Eigen::Index>(image.grid.size()) != features)
      throw std::runtime_error("load_split: " + entries[i]->id + " has wrong dims");
    std::copy(image.grid.cells().begin(), image.grid.cells().end(),
              set.images.col(static_cast<Eigen::Index>(i)).data());
    const auto it = std::find(ids.begin(), ids.end(), entries[i]->class_id);
    set.labels.push_back(static_cast<int>(it - ids.begin()));
    set.ids.push_back(entries[i]->id);
  }
  return set;
}

ClassifierRun train_classifier(const sonogen::DatasetManifest& manifest, const NetworkSpec& spec,
                               const TrainConfig& config) {
  if (manifest.classes.size() < 2)
    throw std::invalid_argument("train_classifier: manifest has fewer than two classes");
  auto run = train_classifier(load_split(manifest, "train", true),
                              load_split(manifest, "test", false), spec, config);
  run.params.extra["class_ids"] = manifest.class_ids();
  return run;
}

NetworkParams encoder_from_classifier(const NetworkParams& classifier) {
  const int tap = classifier.spec.embedding_tap();
  if (tap < 0) throw std::invalid_argument("encoder_from_classifier: no embedding layer");
  NetworkParams enc;
  enc.spec = classifier.spec.prefix(tap + 1);
  enc.layers.assign(classifier.layers.begin(), classifier.layers.begin() + tap + 1);
  enc.seed = classifier.seed;
  enc.epochs = classifier.epochs;
  return enc;
}

AutoencoderRun train_autoencoder(const Matrix& images, NetworkParams encoder,
                                 const NetworkSpec& decoder, const AutoencoderConfig& config) {
  if (images.cols() == 0) throw std::invalid_argument("train_autoencoder: no images");
  if (encoder.spec.output_shape().size() != decoder.input.size())
    throw std::invalid_argument("train_autoencoder: encoder output " +
                                encoder.spec.output_shape().str() + " != decoder input " +
                                decoder.input.str());
  if (decoder.output_shape().size() != encoder.spec.input.size())
    throw std::invalid_argument("train_autoencoder: decoder output " +
                                decoder.output_shape().str() + " != image " +
                                encoder.spec.input.str());

  const auto& tc = config.train;
  AutoencoderRun run{std::move(encoder), NetworkParams::init(decoder, tc.seed), {}};
  Optimizer enc_opt(tc.optimizer, run.encoder);
  Optimizer dec_opt(tc.optimizer, run.decoder);
  std::mt19937_64 rng(tc.seed ^ 0x9e3779b9ULL);
  std::vector<std::size_t> order(static_cast<std::size_t>(images.cols()));
  std::iota(order.begin(), order.end(), 0);
  const auto batch = static_cast<std::size_t>(std::max(1, tc.batch_size));

  // A frozen encoder maps each image to a fixed code; compute those once.
  Matrix frozen_codes;
  if (config.freeze_encoder) {
    frozen_codes = infer(run.encoder, images);
    if (config.normalize_embeddings)
      for (Eigen::Index i = 0; i < frozen_codes.cols(); ++i)
        frozen_codes.col(i) *= unit_scale(frozen_codes.col(i));
  }

  for (int epoch = 1; epoch <= tc.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      const Matrix x = gather(images, order, start, end);
      Trace enc_trace;
      Matrix code;
      Vector scales;
      if (config.freeze_encoder) {
        code = gather(frozen_codes, order, start, end);
      } else {
        enc_trace = forward_trace(run.encoder, x);
        code = enc_trace.output();
        if (config.normalize_embeddings) {
          scales.resize(code.cols());
          for (Eigen::Index i = 0; i < code.cols(); ++i) {
            scales(i) = unit_scale(code.col(i));
            code.col(i) *= scales(i);
          }
        }
      }
      const Trace dec_trace = forward_trace(run.decoder, code);
      Matrix dout;
      const double loss = loss_and_grad(Loss::BinaryCrossEntropy, dec_trace.output(), x, dout);
      if (!std::isfinite(loss))
        throw DivergenceError("train_autoencoder: loss diverged at epoch " + std::to_string(epoch),
                              epoch);
      Matrix dcode;
      const auto dec_grads =
          backward(run.decoder, dec_trace, dout, config.freeze_encoder ? nullptr : &dcode);
      dec_opt.step(run.decoder, dec_grads);
      if (!config.freeze_encoder) {
        if (config.normalize_embeddings) {
          // d(u)/d(e) for u = e/|e| is (I - u u^T)/|e|.
          for (Eigen::Index i = 0; i < code.cols(); ++i) {
            const Vector u = code.col(i);
            dcode.col(i) = scales(i) * (dcode.col(i) - u * u.dot(dcode.col(i)));
          }
        }
        enc_opt.step(run.encoder, backward(run.encoder, enc_trace, dcode));
      }
      loss_sum += loss;
      ++batches;
    }
    run.encoder.snap_to_float();
    run.decoder.snap_to_float();
    run.loss_history.push_back(loss_sum / static_cast<double>(batches));
  }
  run.decoder.epochs = tc.epochs;
  run.decoder.seed = tc.seed;
  run.decoder.extra["loss_history"] = run.loss_history;
  run.decoder.extra["normalize_embeddings"] = config.normalize_embeddings;
  return run;
}

std::vector<double> encode(const NetworkParams& encoder, const Grid& image, bool normalize) {
  const Matrix code = infer(encoder, image_column(image));
  std::vector<double> out(code.data(), code.data() + code.size());
  if (normalize) {
    double n = 0.0;
    for (double v : out) n += v * v;
    n = std::sqrt(n);
    if (n > 0.0)
      for (double& v : out) v /= n;
  }
  return out;
}

Grid decode(const NetworkParams& decoder, const std::vector<double>& embedding) {
  if (static_cast<int>(embedding.size()) != decoder.spec.input.size())
    throw std::invalid_argument("decode: embedding length " + std::to_string(embedding.size()) +
                                " != decoder input " + std::to_string(decoder.spec.input.size()));
  Matrix code(static_cast<Eigen::Index>(embedding.size()), 1);
  std::copy(embedding.begin(), embedding.end(), code.data());
  const Matrix img = infer(decoder, code);
  const Shape out = decoder.spec.output_shape();
  return column_image(img.col(0), out.height, out.width);
}

}  // namespace sigex::nnkit
