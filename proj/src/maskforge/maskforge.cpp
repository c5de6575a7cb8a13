#include "sigex/maskforge/maskforge.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "sigex/core/png_io.hpp"
#include "sigex/core/spg_io.hpp"
#include "sigex/nnkit/training.hpp"

namespace sigex::maskforge {

Fusion fusion_from_name(const std::string& name) {
  if (name == "max") return Fusion::Max;
  if (name == "add-clip" || name == "add") return Fusion::AddClip;
  throw std::invalid_argument("unknown fusion mode '" + name + "' (max|add-clip)");
}

std::string fusion_name(Fusion f) { return f == Fusion::Max ? "max" : "add-clip"; }

GeneralMask general_mask(const std::vector<scorecam::SaliencyMap>& maps, int class_index) {
  if (maps.empty()) throw std::invalid_argument("general_mask: no saliency maps");
  GeneralMask g{Grid(maps.front().grid.rows(), maps.front().grid.cols(), 0.0), class_index, {}};
  for (const auto& m : maps) {
    require_same_shape(g.grid, m.grid, "general_mask");
    for (std::size_t i = 0; i < g.grid.size(); ++i) g.grid.cells()[i] += m.grid.cells()[i];
    g.sample_ids.push_back(m.sample_id);
  }
  for (double& v : g.grid.cells()) v /= static_cast<double>(maps.size());
  return g;
}

scorecam::SaliencyMap combine(const GeneralMask& general, const scorecam::SaliencyMap& specific,
                              Fusion mode) {
  require_same_shape(general.grid, specific.grid, "combine");
  scorecam::SaliencyMap out = specific;
  for (std::size_t i = 0; i < out.grid.size(); ++i) {
    const double a = general.grid.cells()[i], b = specific.grid.cells()[i];
    out.grid.cells()[i] = mode == Fusion::Max ? std::max(a, b) : std::min(1.0, a + b);
  }
  return out;
}

BinaryMask binarize(const Grid& mask, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw std::invalid_argument("binarize: threshold outside [0,1]");
  BinaryMask b{Grid(mask.rows(), mask.cols(), 0.0), threshold};
  for (std::size_t i = 0; i < mask.size(); ++i)
    b.grid.cells()[i] = mask.cells()[i] >= threshold ? 1.0 : 0.0;
  return b;
}

SignatureImage whiten_region(const Grid& image, const Grid& whiten, int class_index) {
  require_same_shape(image, whiten, "whiten_region");
  SignatureImage s{image, Grid(image.rows(), image.cols(), 1.0), class_index, {}};
  for (std::size_t i = 0; i < image.size(); ++i) {
    if (whiten.cells()[i] > 0.5) {
      s.grid.cells()[i] = 1.0;
      s.retained.cells()[i] = 0.0;
    }
  }
  return s;
}

SignatureImage extract_signature(const Grid& image, const BinaryMask& mask, int class_index) {
  require_same_shape(image, mask.grid, "extract_signature");
  Grid complement(mask.grid.rows(), mask.grid.cols());
  for (std::size_t i = 0; i < complement.size(); ++i)
    complement.cells()[i] = mask.grid.cells()[i] > 0.5 ? 0.0 : 1.0;
  auto s = whiten_region(image, complement, class_index);
  s.provenance["threshold"] = mask.threshold;
  return s;
}

scorecam::SaliencyMap fused_mask(const nnkit::NetworkParams& params, const Grid& image,
                                 const GeneralMask& general, const ExtractOptions& options) {
  const auto specific = scorecam::score_cam(params, image, general.class_index, options.cam);
  return combine(general, specific, options.fusion);
}

SignatureImage extract(const Grid& image, const GeneralMask& general,
                       const scorecam::SaliencyMap& specific, const ExtractOptions& options) {
  const auto mask = binarize(combine(general, specific, options.fusion).grid, options.threshold);
  auto s = extract_signature(image, mask, general.class_index);
  s.provenance = {{"approach", "direct"},
                  {"threshold", options.threshold},
                  {"fusion", fusion_name(options.fusion)},
                  {"class_index", general.class_index},
                  {"general_mask_samples", general.sample_ids}};
  return s;
}

SignatureImage extract(const nnkit::NetworkParams& params, const Grid& image,
                       const GeneralMask& general, const ExtractOptions& options) {
  return extract(image, general,
                 scorecam::score_cam(params, image, general.class_index, options.cam), options);
}

SignatureImage reverse_extract(const Grid& image, int predicted_index,
                               const std::vector<GeneralMask>& generals,
                               const std::vector<scorecam::SaliencyMap>& specifics,
                               const ExtractOptions& options) {
  if (generals.size() < 2) throw std::invalid_argument("reverse_extract: need >= 2 classes");
  if (specifics.size() != generals.size())
    throw std::invalid_argument("reverse_extract: one image CAM per class required");
  if (predicted_index < 0 || predicted_index >= static_cast<int>(generals.size()))
    throw std::out_of_range("reverse_extract: predicted class out of range");
  Grid unioned(image.rows(), image.cols(), 0.0);
  std::vector<int> used;
  for (std::size_t c = 0; c < generals.size(); ++c) {
    if (static_cast<int>(c) == predicted_index) continue;
    const auto mask =
        binarize(combine(generals[c], specifics[c], options.fusion).grid, options.threshold);
    require_same_shape(unioned, mask.grid, "reverse_extract");
    for (std::size_t i = 0; i < unioned.size(); ++i)
      unioned.cells()[i] = std::max(unioned.cells()[i], mask.grid.cells()[i]);
    used.push_back(static_cast<int>(c));
  }
  auto s = whiten_region(image, unioned, predicted_index);
  s.provenance = {{"approach", "reverse"},
                  {"threshold", options.threshold},
                  {"fusion", fusion_name(options.fusion)},
                  {"class_index", predicted_index},
                  {"whitened_classes", used}};
  return s;
}

SignatureImage reverse_extract(const nnkit::NetworkParams& params, const Grid& image,
                               int predicted_index, const std::vector<GeneralMask>& generals,
                               const ExtractOptions& options) {
  if (generals.size() < 2) throw std::invalid_argument("reverse_extract: need >= 2 classes");
  std::vector<scorecam::SaliencyMap> specifics;
  for (std::size_t c = 0; c < generals.size(); ++c)
    specifics.push_back(static_cast<int>(c) == predicted_index
                            ? scorecam::SaliencyMap{Grid(image.rows(), image.cols(), 0.0),
                                                    predicted_index, ""}
                            : scorecam::score_cam(params, image, static_cast<int>(c), options.cam));
  return reverse_extract(image, predicted_index, generals, specifics, options);
}

GeneralMask ae_centroid_mask(const std::vector<std::vector<double>>& centroids,
                             const nnkit::NetworkParams& decoder,
                             const nnkit::NetworkParams& classifier, int class_index,
                             const scorecam::CamOptions& cam) {
  if (centroids.empty()) throw std::invalid_argument("ae_centroid_mask: no centroids");
  const auto out = decoder.spec.output_shape();
  if (out.size() != classifier.spec.input.size() || out.channels != 1)
    throw std::invalid_argument("ae_centroid_mask: decoder output " + out.str() +
                                " does not match classifier input " +
                                classifier.spec.input.str());
  std::vector<scorecam::SaliencyMap> maps;
  for (std::size_t i = 0; i < centroids.size(); ++i) {
    if (static_cast<int>(centroids[i].size()) != decoder.spec.input.size())
      throw std::invalid_argument("ae_centroid_mask: centroid length " +
                                  std::to_string(centroids[i].size()) + " != decoder input " +
                                  decoder.spec.input.str());
    const Grid image = nnkit::decode(decoder, centroids[i]);
    maps.push_back(
        scorecam::score_cam(classifier, image, class_index, cam, "centroid_" + std::to_string(i)));
  }
  return general_mask(maps, class_index);
}

void save_signature(const SignatureImage& sig, const std::filesystem::path& stem) {
  if (stem.has_parent_path()) std::filesystem::create_directories(stem.parent_path());
  auto with = [&](const char* ext) {
    auto p = stem;
    p += ext;
    return p;
  };
  write_spg(with(".spg"), sig.grid);
  write_png(with(".png"), sig.grid);
  std::ofstream out(with(".json"), std::ios::binary);
  if (!out) throw std::runtime_error("save_signature: cannot write " + with(".json").string());
  nlohmann::json doc = sig.provenance;
  doc["retained_cells"] = static_cast<long>(sig.retained.sum());
  out << doc.dump(2) << '\n';
}

}  // namespace sigex::maskforge
