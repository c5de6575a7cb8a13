#pragma once

#include <cstdint>
#include <vector>

#include "sigex/nnkit/optimizer.hpp"
#include "sigex/sonogen/corpus.hpp"

namespace sigex::nnkit {

struct TrainConfig {
  int epochs = 25;
  int batch_size = 16;
  OptimizerConfig optimizer;
  std::uint64_t seed = 0;
};

/// Images as columns; labels are class indices in [0, class_count).
struct LabeledSet {
  Matrix images;
  std::vector<int> labels;
  std::vector<std::string> ids;

  std::size_t size() const { return labels.size(); }
};

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
};

struct ClassifierRun {
  NetworkParams params;
  std::vector<EpochRecord> history;
};

/// Mini-batch training with a seeded shuffle each epoch. Records train and
/// test accuracy per epoch into the history and into params.extra. Throws
/// DivergenceError naming the epoch on a non-finite loss.
ClassifierRun train_classifier(const LabeledSet& train, const LabeledSet& test,
                               const NetworkSpec& spec, const TrainConfig& config);

/// Loads the manifest's train split (synthetic entries included) and test
/// split; class indices follow the manifest's class order.
ClassifierRun train_classifier(const sonogen::DatasetManifest& manifest, const NetworkSpec& spec,
                               const TrainConfig& config);

LabeledSet load_split(const sonogen::DatasetManifest& manifest, const std::string& split,
                      bool include_synthetic);

double accuracy(const NetworkParams& params, const LabeledSet& set);
std::vector<int> predict(const NetworkParams& params, const Matrix& batch);

/// Class id for each output index, as recorded at training time (defaults to 0..C-1).
std::vector<int> class_ids(const NetworkParams& params);

struct AutoencoderConfig {
  TrainConfig train{200, 40};
  /// Encoder weights are not updated (e.g. when taken from a trained classifier).
  bool freeze_encoder = false;
  /// Embeddings are scaled to unit L2 norm before decoding.
  bool normalize_embeddings = false;
};

struct AutoencoderRun {
  NetworkParams encoder;
  NetworkParams decoder;
  std::vector<double> loss_history;  // mean BCE per epoch
};

/// Reconstruction training (binary cross-entropy). `encoder` supplies the
/// initial encoder weights.
AutoencoderRun train_autoencoder(const Matrix& images, NetworkParams encoder,
                                 const NetworkSpec& decoder, const AutoencoderConfig& config);

/// Classifier layers up to and including the embedding activation.
NetworkParams encoder_from_classifier(const NetworkParams& classifier);

std::vector<double> encode(const NetworkParams& encoder, const Grid& image, bool normalize);
Grid decode(const NetworkParams& decoder, const std::vector<double>& embedding);

}  // namespace sigex::nnkit
