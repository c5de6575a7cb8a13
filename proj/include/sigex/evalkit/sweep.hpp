#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sigex/evalkit/metrics.hpp"
#include "sigex/sonogen/corpus.hpp"

namespace sigex::evalkit {

enum class Approach { Direct, Reverse, AeCentroid };

std::string approach_name(Approach a);
Approach approach_from_name(const std::string& name);

struct SweepConfig {
  Approach approach = Approach::Direct;
  double threshold = maskforge::kDefaultThreshold;
  maskforge::Fusion fusion = maskforge::Fusion::Max;

  std::string label() const;
};

/// direct@{0.65,0.75,0.85}, reverse@0.75 and ae-centroid@0.75, all with `fusion`.
std::vector<SweepConfig> default_configs(maskforge::Fusion fusion = maskforge::Fusion::Max);

struct SweepArtifacts {
  const nnkit::NetworkParams* classifier = nullptr;
  /// Indexed by classifier output index.
  std::vector<maskforge::GeneralMask> generals;
  /// Autoencoder-centroid general masks; required only for AeCentroid configs.
  std::vector<maskforge::GeneralMask> ae_generals;
};

struct MeanMetrics {
  double removed_noise_pct = 0.0;
  double overwritten_tones_pct = 0.0;
  double intersecting_regions = 0.0;
};

struct ConfigResult {
  SweepConfig config;
  MeanMetrics mean;
  std::vector<ExtractionMetrics> per_image;
};

struct SweepReport {
  std::vector<ConfigResult> results;
  std::vector<std::string> test_ids;
  std::string corpus_hash;
  double classifier_accuracy = 0.0;
  /// First images of the test split: original followed by one signature per config.
  std::vector<std::vector<Grid>> panel_rows;

  const ConfigResult& find(Approach a, double threshold) const;
};

struct SweepOptions {
  int panel_images = 4;
  scorecam::CamOptions cam;
};

/// Evaluates every configuration on the test split (real samples only),
/// extracting for the classifier's predicted class.
SweepReport run_sweep(const sonogen::DatasetManifest& manifest, const SweepArtifacts& artifacts,
                      const std::vector<SweepConfig>& configs, const SweepOptions& options = {});

/// FNV-1a over the canonical manifest JSON.
std::string corpus_hash(const sonogen::DatasetManifest& manifest);

nlohmann::json report_to_json(const SweepReport& report);
std::string report_markdown(const SweepReport& report);
void write_report_panel(const SweepReport& report, const std::filesystem::path& path);

}  // namespace sigex::evalkit
