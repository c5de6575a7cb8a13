#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sigex/sonogen/synth.hpp"

namespace sigex::sonogen {

struct CorpusConfig {
  std::vector<ClassSpec> classes;
  int per_class = 50;
  /// Noise level of sample i is noise_schedule[i % size].
  std::vector<double> noise_schedule{0.3};
  /// Other classes mixed into each sample at SynthOptions::interference_gain.
  int interferers = 1;
  /// Harmonic amplitudes are scaled by U(1 - j, 1 + j) per sample, clamped to [0,1].
  double amplitude_jitter = 0.2;
  double train_fraction = 0.75;
  ImageGeometry geometry;
  SynthOptions synth;
  std::uint64_t seed = 1;
};

struct ManifestEntry {
  std::string id;
  std::string spectrogram;  // relative to the manifest directory
  std::string mask;         // empty for synthetic samples
  int class_id = 0;
  double noise_level = 0.0;
  std::uint64_t seed = 0;
  std::string split;  // "train" or "test"
  bool synthetic = false;
};

struct DatasetManifest {
  ImageGeometry geometry;
  SynthOptions synth;
  std::vector<ClassSpec> classes;
  std::vector<ManifestEntry> entries;
  std::uint64_t seed = 0;
  /// Directory that entry paths are relative to; not serialized.
  std::filesystem::path root;

  std::vector<const ManifestEntry*> select(const std::string& split, int class_id = -1,
                                           bool include_synthetic = false) const;
  std::vector<int> class_ids() const;
  const ClassSpec& class_spec(int class_id) const;
};

/// Renders spectrogram and mask files plus manifest.json and per-class
/// template masks into `out_dir`. Pure in (config); throws std::runtime_error
/// when the directory cannot be written.
DatasetManifest render_corpus(const CorpusConfig& config, const std::filesystem::path& out_dir);

nlohmann::json manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(const nlohmann::json& doc, const std::filesystem::path& root);
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
DatasetManifest load_manifest(const std::filesystem::path& path);

/// Reads every referenced file and checks dims; throws std::runtime_error on the first problem.
void validate_manifest(const DatasetManifest& manifest);

Spectrogram load_spectrogram(const DatasetManifest& manifest, const ManifestEntry& entry);
GroundTruthMask load_mask(const DatasetManifest& manifest, const ManifestEntry& entry);

/// Ground-truth mask of a class's nominal (unjittered) tracks.
GroundTruthMask class_template(const DatasetManifest& manifest, int class_id);

/// Four sonar-like classes with disjoint tonal bands on the default geometry.
std::vector<ClassSpec> desk_classes();

nlohmann::json class_spec_to_json(const ClassSpec& spec);
ClassSpec class_spec_from_json(const nlohmann::json& j);

}  // namespace sigex::sonogen
