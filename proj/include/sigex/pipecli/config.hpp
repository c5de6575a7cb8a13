#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sigex/clusterer/kmeans.hpp"
#include "sigex/evalkit/sweep.hpp"
#include "sigex/nnkit/training.hpp"
#include "sigex/sonogen/corpus.hpp"
#include "sigex/wgan/wgan.hpp"

namespace sigex::pipecli {

struct ClusterParams {
  int k_min = 1;
  int k_max = 10;
  int max_iter = 300;
  clusterer::InitMethod init = clusterer::InitMethod::FarthestPoint;
  bool normalize = true;
};

struct AugmentParams {
  /// Synthetic samples per GAN-trained class, capped so they stay at most
  /// max_fraction of that class's training split.
  int synthetic_per_class = 12;
  double max_fraction = 0.5;
};

struct ExtractParams {
  double threshold = maskforge::kDefaultThreshold;
  maskforge::Fusion fusion = maskforge::Fusion::Max;
  scorecam::CamOptions cam;
};

struct SweepParams {
  std::vector<double> thresholds{0.65, 0.75, 0.85};
  bool reverse = true;
  bool ae_centroid = true;
  nnkit::AutoencoderConfig autoencoder;
  int panel_images = 4;
};

/// Every stage's parameters. Seeds are explicit: one global seed from which
/// each stage derives its own.
struct PipelineConfig {
  std::uint64_t seed = 7;
  sonogen::CorpusConfig corpus;
  nnkit::TrainConfig classifier;
  wgan::WganConfig wgan;
  /// Class ids that get a GAN; empty means every class.
  std::vector<int> wgan_classes;
  AugmentParams augment;
  ClusterParams cluster;
  ExtractParams extract;
  SweepParams sweep;
  nlohmann::json source = nlohmann::json::object();  // the document as read

  /// Per-stage config digest input: the sections a stage reads.
  nlohmann::json section(const std::string& stage) const;
  std::uint64_t stage_seed(const std::string& stage) const;
};

PipelineConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const PipelineConfig& cfg);
PipelineConfig load_config(const std::filesystem::path& path);

/// Applies the CLI overrides; a threshold override also replaces the sweep's
/// direct thresholds with that single value.
void apply_overrides(PipelineConfig& cfg, std::optional<std::uint64_t> seed,
                     std::optional<double> threshold);

}  // namespace sigex::pipecli
