#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sigex/scorecam/scorecam.hpp"

namespace sigex::maskforge {

enum class Fusion { Max, AddClip };

Fusion fusion_from_name(const std::string& name);
std::string fusion_name(Fusion f);

inline constexpr double kDefaultThreshold = 0.75;

struct GeneralMask {
  Grid grid;
  int class_index = 0;
  std::vector<std::string> sample_ids;
};

struct BinaryMask {
  Grid grid;  // 0/1
  double threshold = 0.0;
};

struct SignatureImage {
  Grid grid;      // whitened cells are exactly 1.0
  Grid retained;  // 1 where the input pixel was kept
  int class_index = 0;
  nlohmann::json provenance = nlohmann::json::object();
};

/// Elementwise mean. Throws on an empty list or mismatched dims.
GeneralMask general_mask(const std::vector<scorecam::SaliencyMap>& maps, int class_index);

scorecam::SaliencyMap combine(const GeneralMask& general, const scorecam::SaliencyMap& specific,
                              Fusion mode);

/// cell >= threshold -> 1.
BinaryMask binarize(const Grid& mask, double threshold);

/// Keeps the image where the mask is 1 and whitens the rest.
SignatureImage extract_signature(const Grid& image, const BinaryMask& mask, int class_index = 0);

/// Whitens the cells where `whiten` is 1 and keeps the rest.
SignatureImage whiten_region(const Grid& image, const Grid& whiten, int class_index = 0);

struct ExtractOptions {
  double threshold = kDefaultThreshold;
  Fusion fusion = Fusion::Max;
  scorecam::CamOptions cam;
};

/// Image CAM for `class_index`, fused with that class's general mask.
scorecam::SaliencyMap fused_mask(const nnkit::NetworkParams& params, const Grid& image,
                                 const GeneralMask& general, const ExtractOptions& options);

/// CAM -> combine -> binarize -> extract for one class.
SignatureImage extract(const nnkit::NetworkParams& params, const Grid& image,
                       const GeneralMask& general, const ExtractOptions& options);

/// Whitens the union of every other class's binarized fused mask.
/// `generals` is indexed by network output index.
SignatureImage reverse_extract(const nnkit::NetworkParams& params, const Grid& image,
                               int predicted_index, const std::vector<GeneralMask>& generals,
                               const ExtractOptions& options);

/// As above with the image CAMs already computed; `specifics` is indexed
/// like `generals`.
SignatureImage reverse_extract(const Grid& image, int predicted_index,
                               const std::vector<GeneralMask>& generals,
                               const std::vector<scorecam::SaliencyMap>& specifics,
                               const ExtractOptions& options);

/// Direct extraction from an already computed image CAM.
SignatureImage extract(const Grid& image, const GeneralMask& general,
                       const scorecam::SaliencyMap& specific, const ExtractOptions& options);

/// Decodes each centroid, runs Score-CAM on the decoded image, and averages.
GeneralMask ae_centroid_mask(const std::vector<std::vector<double>>& centroids,
                             const nnkit::NetworkParams& decoder,
                             const nnkit::NetworkParams& classifier, int class_index,
                             const scorecam::CamOptions& cam = {});

/// Writes <stem>.spg, <stem>.png and a <stem>.json provenance sidecar.
void save_signature(const SignatureImage& sig, const std::filesystem::path& stem);

}  // namespace sigex::maskforge
