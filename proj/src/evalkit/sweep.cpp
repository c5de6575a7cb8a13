#include "sigex/evalkit/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "sigex/core/png_io.hpp"
#include "sigex/nnkit/training.hpp"

namespace sigex::evalkit {
namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

int argmax(const std::vector<double>& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

std::string approach_name(Approach a) {
  switch (a) {
    case Approach::Direct: return "direct";
    case Approach::Reverse: return "reverse";
    case Approach::AeCentroid: return "ae-centroid";
  }
  return "?";
}

Approach approach_from_name(const std::string& name) {
  if (name == "direct") return Approach::Direct;
  if (name == "reverse") return Approach::Reverse;
  if (name == "ae-centroid") return Approach::AeCentroid;
  throw std::invalid_argument("unknown approach '" + name + "'");
}

std::string SweepConfig::label() const {
  return approach_name(approach) + "@" + fixed(threshold, 2) + "/" + maskforge::fusion_name(fusion);
}

std::vector<SweepConfig> default_configs(maskforge::Fusion fusion) {
  return {{Approach::Direct, 0.65, fusion},
          {Approach::Direct, 0.75, fusion},
          {Approach::Direct, 0.85, fusion},
          {Approach::Reverse, 0.75, fusion},
          {Approach::AeCentroid, 0.75, fusion}};
}

const ConfigResult& SweepReport::find(Approach a, double threshold) const {
  for (const auto& r : results)
    if (r.config.approach == a && std::abs(r.config.threshold - threshold) < 1e-9) return r;
  throw std::out_of_range("sweep report has no " + approach_name(a) + "@" + fixed(threshold, 2));
}

std::string corpus_hash(const sonogen::DatasetManifest& manifest) {
  const std::string text = sonogen::manifest_to_json(manifest).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

SweepReport run_sweep(const sonogen::DatasetManifest& manifest, const SweepArtifacts& artifacts,
                      const std::vector<SweepConfig>& configs, const SweepOptions& options) {
  if (!artifacts.classifier) throw std::invalid_argument("run_sweep: missing artifact: classifier");
  const auto& clf = *artifacts.classifier;
  const auto ids = nnkit::class_ids(clf);
  const std::size_t classes = ids.size();
  if (artifacts.generals.size() != classes)
    throw std::invalid_argument("run_sweep: missing artifact: general masks (have " +
                                std::to_string(artifacts.generals.size()) + ", need " +
                                std::to_string(classes) + ")");
  const bool need_ae = std::any_of(configs.begin(), configs.end(), [](const SweepConfig& c) {
    return c.approach == Approach::AeCentroid;
  });
  if (need_ae && artifacts.ae_generals.size() != classes)
    throw std::invalid_argument("run_sweep: missing artifact: autoencoder-centroid masks");

  std::vector<Grid> templates;
  for (int id : ids) templates.push_back(sonogen::class_template(manifest, id).grid);

  SweepReport report;
  report.corpus_hash = corpus_hash(manifest);
  for (const auto& c : configs) report.results.push_back({c, {}, {}});

  const auto entries = manifest.select("test");
  if (entries.empty()) throw std::invalid_argument("run_sweep: empty test split");
  std::size_t correct = 0;
  for (const auto* e : entries) {
    const auto image = sonogen::load_spectrogram(manifest, *e).grid;
    const auto gt = sonogen::load_mask(manifest, *e).grid;
    report.test_ids.push_back(e->id);

    const auto fwd = nnkit::forward(clf, image, e->id);
    const int pred = argmax(fwd.scores);
    correct += ids[static_cast<std::size_t>(pred)] == e->class_id;
    std::vector<Grid> others;
    for (std::size_t c = 0; c < classes; ++c)
      if (static_cast<int>(c) != pred) others.push_back(templates[c]);

    std::vector<scorecam::SaliencyMap> cams;
    for (std::size_t c = 0; c < classes; ++c)
      cams.push_back(scorecam::score_cam(clf, image, static_cast<int>(c), options.cam, e->id));

    const bool in_panel = static_cast<int>(report.panel_rows.size()) < options.panel_images;
    if (in_panel) report.panel_rows.push_back({image});
    for (auto& r : report.results) {
      maskforge::ExtractOptions xo{r.config.threshold, r.config.fusion, options.cam};
      maskforge::SignatureImage sig;
      switch (r.config.approach) {
        case Approach::Direct:
          sig = maskforge::extract(image, artifacts.generals[static_cast<std::size_t>(pred)],
                                   cams[static_cast<std::size_t>(pred)], xo);
          break;
        case Approach::Reverse:
          sig = maskforge::reverse_extract(image, pred, artifacts.generals, cams, xo);
          break;
        case Approach::AeCentroid:
          sig = maskforge::extract(image, artifacts.ae_generals[static_cast<std::size_t>(pred)],
                                   cams[static_cast<std::size_t>(pred)], xo);
          break;
      }
      r.per_image.push_back(evaluate(sig, gt, others));
      if (in_panel) report.panel_rows.back().push_back(sig.grid);
    }
  }

  const auto n = static_cast<double>(entries.size());
  report.classifier_accuracy = static_cast<double>(correct) / n;
  for (auto& r : report.results) {
    for (const auto& m : r.per_image) {
      r.mean.removed_noise_pct += m.removed_noise_pct / n;
      r.mean.overwritten_tones_pct += m.overwritten_tones_pct / n;
      r.mean.intersecting_regions += m.intersecting_regions / n;
    }
  }
  return report;
}

nlohmann::json report_to_json(const SweepReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.results) {
    nlohmann::json per = nlohmann::json::array();
    for (const auto& m : r.per_image)
      per.push_back({m.removed_noise_pct, m.overwritten_tones_pct, m.intersecting_regions});
    rows.push_back({{"approach", approach_name(r.config.approach)},
                    {"threshold", r.config.threshold},
                    {"fusion", maskforge::fusion_name(r.config.fusion)},
                    {"removed_noise_pct", r.mean.removed_noise_pct},
                    {"overwritten_tones_pct", r.mean.overwritten_tones_pct},
                    {"intersecting_regions", r.mean.intersecting_regions},
                    {"per_image", per}});
  }
  return {{"format", "sigex-sweep/1"},
          {"corpus_hash", report.corpus_hash},
          {"classifier_accuracy", report.classifier_accuracy},
          {"test_ids", report.test_ids},
          {"per_image_columns", {"removed_noise_pct", "overwritten_tones_pct", "intersecting_regions"}},
          {"results", rows}};
}

std::string report_markdown(const SweepReport& report) {
  std::ostringstream out;
  out << "| Approach | Threshold | Fusion | Removed Noise | Overwritten Tones | Intersecting Tonal "
         "Regions |\n";
  out << "|---|---|---|---|---|---|\n";
  for (const auto& r : report.results)
    out << "| " << approach_name(r.config.approach) << " | " << fixed(r.config.threshold, 2)
        << " | " << maskforge::fusion_name(r.config.fusion) << " | "
        << fixed(r.mean.removed_noise_pct, 1) << "% | " << fixed(r.mean.overwritten_tones_pct, 1)
        << "% | " << fixed(r.mean.intersecting_regions, 2) << " |\n";
  out << "\n" << report.test_ids.size() << " test images, classifier accuracy "
      << fixed(100.0 * report.classifier_accuracy, 1) << "%, corpus " << report.corpus_hash
      << "\n";
  return out.str();
}

void write_report_panel(const SweepReport& report, const std::filesystem::path& path) {
  if (report.panel_rows.empty()) return;
  std::vector<Grid> tiles;
  for (const auto& row : report.panel_rows) tiles.insert(tiles.end(), row.begin(), row.end());
  write_png_panel(path, tiles, static_cast<int>(report.panel_rows.front().size()));
}

}  // namespace sigex::evalkit
