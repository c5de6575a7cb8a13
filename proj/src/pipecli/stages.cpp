#include "sigex/pipecli/stages.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <sstream>
#include <ostream>
#include <stdexcept>

#include "sigex/core/png_io.hpp"
#include "sigex/core/spg_io.hpp"
#include "sigex/nnkit/architectures.hpp"
#include "sigex/nnkit/serialize.hpp"

namespace sigex::pipecli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_json(const fs::path& path, const json& doc) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return json::parse(in);
}

std::string class_file(int class_id) { return "class_" + std::to_string(class_id); }

struct Run {
  const StageContext& ctx;
  const PipelineConfig& cfg;
  fs::path out;

  std::ostream* log() const { return ctx.log; }
  void note(const std::string& msg) const {
    if (ctx.log) *ctx.log << msg << '\n';
  }
  fs::path dir(const std::string& stage) const { return ctx.stage_dir / stage; }

  sonogen::DatasetManifest corpus() const {
    return sonogen::load_manifest(dir("synth") / "manifest.json");
  }
  nnkit::NetworkParams classifier() const {
    return nnkit::load_params(dir("augment") / "classifier.nnp");
  }
  int index_of(const nnkit::NetworkParams& clf, int class_id) const {
    const auto ids = nnkit::class_ids(clf);
    const auto it = std::find(ids.begin(), ids.end(), class_id);
    if (it == ids.end()) throw std::runtime_error("class " + std::to_string(class_id) + " not in classifier");
    return static_cast<int>(it - ids.begin());
  }
  std::vector<maskforge::GeneralMask> general_masks(const nnkit::NetworkParams& clf) const {
    std::vector<maskforge::GeneralMask> out;
    const auto ids = nnkit::class_ids(clf);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const auto stem = dir("extract") / "general" / class_file(ids[i]);
      const auto meta = read_json(fs::path(stem).concat(".json"));
      out.push_back({read_spg(fs::path(stem).concat(".spg")), static_cast<int>(i),
                     meta.at("samples").get<std::vector<std::string>>()});
    }
    return out;
  }
};

void stage_synth(const Run& r) {
  auto cc = r.cfg.corpus;
  cc.seed = r.cfg.stage_seed("synth");
  const auto m = sonogen::render_corpus(cc, r.out);
  sonogen::validate_manifest(m);
  r.note("synth: " + std::to_string(m.entries.size()) + " samples, " +
         std::to_string(m.classes.size()) + " classes");
}

nnkit::ClassifierRun train(const Run& r, const sonogen::DatasetManifest& m) {
  auto tc = r.cfg.classifier;
  tc.seed = r.cfg.stage_seed("train-cnn");
  const auto& g = m.geometry;
  return nnkit::train_classifier(m, nnkit::spec_cnn(g.rows, g.cols, static_cast<int>(m.classes.size())), tc);
}

void stage_train_cnn(const Run& r) {
  const auto m = r.corpus();
  const auto run = train(r, m);
  fs::create_directories(r.out);
  nnkit::save_params(run.params, r.out / "classifier.nnp");
  write_json(r.out / "history.json", run.params.extra["history"]);
  r.note("train-cnn: test accuracy " + std::to_string(run.history.back().test_accuracy));
}

std::vector<int> wgan_classes(const Run& r, const sonogen::DatasetManifest& m) {
  return r.cfg.wgan_classes.empty() ? m.class_ids() : r.cfg.wgan_classes;
}

void stage_train_wgan(const Run& r) {
  const auto m = r.corpus();
  json summary = json::array();
  for (int id : wgan_classes(r, m)) {
    auto wc = r.cfg.wgan;
    wc.seed = r.cfg.stage_seed("train-wgan") + static_cast<std::uint64_t>(id);
    const auto bundle = wgan::train_wgan(m, id, wc);
    wgan::save_bundle(bundle, r.out / class_file(id));
    const double probe = wgan::final_probe(bundle);
    summary.push_back({{"class_id", id}, {"final_probe", probe}});
    r.note("train-wgan: class " + std::to_string(id) + " final probe " + std::to_string(probe));
  }
  write_json(r.out / "summary.json", summary);
}

void stage_augment(const Run& r) {
  auto m = r.corpus();
  const fs::path corpus_rel = fs::relative(r.dir("synth"), r.out.parent_path());
  // Real entries keep pointing into the corpus directory.
  for (auto& e : m.entries) {
    e.spectrogram = (fs::path("..") / corpus_rel / e.spectrogram).generic_string();
    if (!e.mask.empty()) e.mask = (fs::path("..") / corpus_rel / e.mask).generic_string();
  }
  json added = json::object();
  for (int id : wgan_classes(r, m)) {
    const auto real = m.select("train", id).size();
    const double f = r.cfg.augment.max_fraction;
    const int cap = f >= 1.0 ? r.cfg.augment.synthetic_per_class
                             : static_cast<int>(static_cast<double>(real) * f / (1.0 - f));
    const int count = std::min(r.cfg.augment.synthetic_per_class, cap);
    const auto bundle = wgan::load_bundle(r.dir("train-wgan") / class_file(id));
    const auto images = wgan::sample_synthetic(
        bundle, count, r.cfg.stage_seed("augment") + static_cast<std::uint64_t>(id));
    for (std::size_t i = 0; i < images.size(); ++i) {
      char name[64];
      std::snprintf(name, sizeof name, "c%d_syn_%04zu", id, i);
      const auto rel = fs::path("synthetic") / (std::string(name) + ".spg");
      fs::create_directories(r.out / "synthetic");
      write_spg(r.out / rel, images[i]);
      sonogen::ManifestEntry e;
      e.id = name;
      e.spectrogram = rel.generic_string();
      e.class_id = id;
      e.split = "train";
      e.synthetic = true;
      m.entries.push_back(e);
    }
    added[std::to_string(id)] = count;
  }
  m.root = r.out;
  sonogen::save_manifest(m, r.out / "manifest.json");

  const auto baseline = nnkit::load_params(r.dir("train-cnn") / "classifier.nnp");
  const auto run = train(r, m);
  nnkit::save_params(run.params, r.out / "classifier.nnp");
  const double base_acc = baseline.extra.at("history").back().at("test_accuracy").get<double>();
  const double aug_acc = run.history.back().test_accuracy;
  write_json(r.out / "summary.json", {{"synthetic_per_class", added},
                                      {"baseline_test_accuracy", base_acc},
                                      {"augmented_test_accuracy", aug_acc}});
  r.note("augment: test accuracy " + std::to_string(base_acc) + " -> " + std::to_string(aug_acc));
}

void stage_cluster(const Run& r) {
  const auto m = r.corpus();
  const auto clf = r.classifier();
  for (int id : m.class_ids()) {
    std::vector<clusterer::Point> points;
    std::vector<std::string> ids;
    for (const auto* e : m.select("train", id)) {
      const auto fwd = nnkit::forward(clf, sonogen::load_spectrogram(m, *e).grid, e->id);
      points.push_back(fwd.embedding.values);
      ids.push_back(e->id);
    }
    if (r.cfg.cluster.normalize) points = clusterer::unit_normalize(points);
    clusterer::KMeansOptions ko{r.cfg.cluster.max_iter, r.cfg.stage_seed("cluster"),
                                r.cfg.cluster.init};
    const int k_max = std::min<int>(r.cfg.cluster.k_max,
                                    static_cast<int>(clusterer::distinct_count(points)));
    const int k_min = std::min(r.cfg.cluster.k_min, k_max);
    const auto elbow = clusterer::elbow_select(points, k_min, k_max, ko);
    auto model = clusterer::kmeans_fit(points, elbow.k_star, ko);
    model.ids = ids;
    json reps = json::array();
    for (const auto& rep : clusterer::representatives(model, points))
      reps.push_back({{"cluster", rep.cluster}, {"sample_id", rep.sample_id}, {"distance", rep.distance}});
    write_json(r.out / (class_file(id) + ".json"),
               {{"class_id", id},
                {"class_index", r.index_of(clf, id)},
                {"elbow",
                 {{"ks", elbow.ks}, {"inertias", elbow.inertias}, {"k_star", elbow.k_star},
                  {"warnings", elbow.warnings}}},
                {"model", clusterer::model_to_json(model)},
                {"representatives", reps}});
    r.note("cluster: class " + std::to_string(id) + " k* = " + std::to_string(elbow.k_star));
  }
}

void stage_extract(const Run& r) {
  const auto m = r.corpus();
  const auto clf = r.classifier();
  const auto ids = nnkit::class_ids(clf);
  std::map<std::string, const sonogen::ManifestEntry*> by_id;
  for (const auto& e : m.entries) by_id[e.id] = &e;

  std::vector<maskforge::GeneralMask> generals;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto doc = read_json(r.dir("cluster") / (class_file(ids[i]) + ".json"));
    std::vector<scorecam::SaliencyMap> maps;
    for (const auto& rep : doc.at("representatives")) {
      const auto sid = rep.at("sample_id").get<std::string>();
      const auto image = sonogen::load_spectrogram(m, *by_id.at(sid)).grid;
      maps.push_back(scorecam::score_cam(clf, image, static_cast<int>(i), r.cfg.extract.cam, sid));
    }
    auto g = maskforge::general_mask(maps, static_cast<int>(i));
    g.grid = quantize_f32(g.grid);
    const auto stem = r.out / "general" / class_file(ids[i]);
    fs::create_directories(stem.parent_path());
    write_spg(fs::path(stem).concat(".spg"), g.grid);
    write_png(fs::path(stem).concat(".png"), g.grid);
    write_json(fs::path(stem).concat(".json"),
               {{"class_id", ids[i]}, {"class_index", i}, {"samples", g.sample_ids}});
    generals.push_back(std::move(g));
  }

  maskforge::ExtractOptions xo{r.cfg.extract.threshold, r.cfg.extract.fusion, r.cfg.extract.cam};
  std::vector<std::pair<std::string, Grid>> inputs;
  if (r.ctx.image) {
    inputs.push_back({r.ctx.image->stem().string(), read_spg(*r.ctx.image)});
  } else {
    for (const auto* e : m.select("test")) inputs.push_back({e->id, sonogen::load_spectrogram(m, *e).grid});
  }
  json summary = json::array();
  for (const auto& [name, image] : inputs) {
    const auto fwd = nnkit::forward(clf, image, name);
    const int pred = static_cast<int>(std::max_element(fwd.scores.begin(), fwd.scores.end()) -
                                      fwd.scores.begin());
    const auto& general = generals[static_cast<std::size_t>(pred)];
    const auto specific = scorecam::score_cam(clf, image, pred, xo.cam, name);
    auto sig = maskforge::extract(image, general, specific, xo);
    if (r.ctx.image) {
      const auto fused = maskforge::combine(general, specific, xo.fusion);
      fs::create_directories(r.out / "signatures");
      write_png(r.out / "signatures" / (name + "_cam.png"), specific.grid);
      write_png(r.out / "signatures" / (name + "_mask.png"), fused.grid);
    }
    sig.provenance["sample_id"] = name;
    sig.provenance["predicted_class"] = ids[static_cast<std::size_t>(pred)];
    maskforge::save_signature(sig, r.out / "signatures" / name);
    summary.push_back({{"sample_id", name},
                       {"predicted_class", ids[static_cast<std::size_t>(pred)]},
                       {"retained_cells", static_cast<long>(sig.retained.sum())}});
  }
  write_json(r.out / "summary.json",
             {{"threshold", xo.threshold}, {"fusion", maskforge::fusion_name(xo.fusion)},
              {"signatures", summary}});
  r.note("extract: " + std::to_string(inputs.size()) + " signatures at threshold " +
         std::to_string(xo.threshold));
}

void stage_sweep(const Run& r) {
  const auto m = r.corpus();
  const auto clf = r.classifier();
  const auto ids = nnkit::class_ids(clf);
  evalkit::SweepArtifacts art{&clf, r.general_masks(clf), {}};

  std::vector<evalkit::SweepConfig> configs;
  for (double t : r.cfg.sweep.thresholds)
    configs.push_back({evalkit::Approach::Direct, t, r.cfg.extract.fusion});
  if (r.cfg.sweep.reverse)
    configs.push_back({evalkit::Approach::Reverse, r.cfg.extract.threshold, r.cfg.extract.fusion});

  if (r.cfg.sweep.ae_centroid) {
    const auto train = nnkit::load_split(m, "train", false);
    auto ac = r.cfg.sweep.autoencoder;
    ac.train.seed = r.cfg.stage_seed("sweep");
    ac.normalize_embeddings = r.cfg.cluster.normalize;
    const auto& g = m.geometry;
    const auto ae = nnkit::train_autoencoder(train.images, nnkit::encoder_from_classifier(clf),
                                             nnkit::decoder_spec(g.rows, g.cols), ac);
    nnkit::save_params(ae.decoder, r.out / "decoder.nnp");
    write_json(r.out / "autoencoder_loss.json", ae.loss_history);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const auto doc = read_json(r.dir("cluster") / (class_file(ids[i]) + ".json"));
      const auto centroids = doc.at("model").at("centroids").get<std::vector<clusterer::Point>>();
      auto mask = maskforge::ae_centroid_mask(centroids, ae.decoder, clf, static_cast<int>(i),
                                              r.cfg.extract.cam);
      mask.grid = quantize_f32(mask.grid);
      const auto stem = r.out / "ae_general" / class_file(ids[i]);
      fs::create_directories(stem.parent_path());
      write_spg(fs::path(stem).concat(".spg"), mask.grid);
      write_png(fs::path(stem).concat(".png"), mask.grid);
      art.ae_generals.push_back(std::move(mask));
    }
    configs.push_back({evalkit::Approach::AeCentroid, r.cfg.extract.threshold, r.cfg.extract.fusion});
  }

  evalkit::SweepOptions so;
  so.panel_images = r.cfg.sweep.panel_images;
  so.cam = r.cfg.extract.cam;
  const auto report = evalkit::run_sweep(m, art, configs, so);
  write_json(r.out / "report.json", evalkit::report_to_json(report));
  evalkit::write_report_panel(report, r.out / "panel.png");
  r.note("sweep:\n" + evalkit::report_markdown(report));
}

void stage_report(const Run& r) {
  const auto doc = read_json(r.dir("sweep") / "report.json");
  const auto augment = read_json(r.dir("augment") / "summary.json");
  std::ostringstream md;
  md << "# Signature extraction report\n\n";
  md << "| Approach | Threshold | Fusion | Removed Noise | Overwritten Tones | Intersecting Tonal Regions |\n";
  md << "|---|---|---|---|---|---|\n";
  char buf[256];
  for (const auto& row : doc.at("results")) {
    std::snprintf(buf, sizeof buf, "| %s | %.2f | %s | %.1f%% | %.1f%% | %.2f |\n",
                  row.at("approach").get<std::string>().c_str(), row.at("threshold").get<double>(),
                  row.at("fusion").get<std::string>().c_str(),
                  row.at("removed_noise_pct").get<double>(),
                  row.at("overwritten_tones_pct").get<double>(),
                  row.at("intersecting_regions").get<double>());
    md << buf;
  }
  std::snprintf(buf, sizeof buf,
                "\nTest images: %zu. Classifier test accuracy: %.1f%% (before augmentation %.1f%%).\n",
                doc.at("test_ids").size(), 100.0 * doc.at("classifier_accuracy").get<double>(),
                100.0 * augment.at("baseline_test_accuracy").get<double>());
  md << buf;
  md << "Corpus hash: " << doc.at("corpus_hash").get<std::string>() << "\n\n";
  md << "`panel.png`: each row is one test image followed by its signature under every "
        "configuration, in table order.\n";
  fs::create_directories(r.out);
  {
    std::ofstream out(r.out / "report.md", std::ios::binary);
    out << md.str();
  }
  fs::copy_file(r.dir("sweep") / "panel.png", r.out / "panel.png",
                fs::copy_options::overwrite_existing);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(r.dir("extract") / "general"))
    if (e.path().extension() == ".spg") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<Grid> generals;
  for (const auto& f : files) generals.push_back(read_spg(f));
  if (!generals.empty()) write_png_panel(r.out / "general_masks.png", generals);
  r.note(md.str());
}

using StageFn = void (*)(const Run&);

const std::map<std::string, StageFn>& stage_table() {
  static const std::map<std::string, StageFn> t = {
      {"synth", stage_synth},     {"train-cnn", stage_train_cnn}, {"train-wgan", stage_train_wgan},
      {"augment", stage_augment}, {"cluster", stage_cluster},     {"extract", stage_extract},
      {"sweep", stage_sweep},     {"report", stage_report}};
  return t;
}

}  // namespace

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names = {"synth",   "train-cnn", "train-wgan", "augment",
                                                 "cluster", "extract",   "sweep",      "report"};
  return names;
}

const std::vector<std::string>& upstream_of(const std::string& stage) {
  static const std::map<std::string, std::vector<std::string>> deps = {
      {"synth", {}},
      {"train-cnn", {"synth"}},
      {"train-wgan", {"synth"}},
      {"augment", {"synth", "train-cnn", "train-wgan"}},
      {"cluster", {"synth", "augment"}},
      {"extract", {"synth", "augment", "cluster"}},
      {"sweep", {"synth", "augment", "cluster", "extract"}},
      {"report", {"augment", "extract", "sweep"}}};
  const auto it = deps.find(stage);
  if (it == deps.end()) throw std::invalid_argument("unknown stage '" + stage + "'");
  return it->second;
}

std::string config_digest(const PipelineConfig& cfg, const std::string& stage) {
  return sha256_hex(cfg.section(stage).dump());
}

LedgerEntry run_stage(const std::string& stage, const StageContext& ctx) {
  const auto& deps = upstream_of(stage);
  Ledger ledger(ctx.stage_dir);
  ledger.load();
  for (const auto& up : deps) ledger.require(up, config_digest(ctx.config, up), stage);
  // An upstream stage is also stale when one of its own inputs was rerun after it.
  auto position = [&](const std::string& s) {
    const auto& es = ledger.entries();
    for (std::size_t i = es.size(); i-- > 0;)
      if (es[i].stage == s) return static_cast<long>(i);
    return -1L;
  };
  for (const auto& up : deps)
    for (const auto& input : upstream_of(up))
      if (position(input) > position(up))
        throw StaleArtifactError(stage + ": stage '" + up + "' predates the latest '" + input +
                                 "' run; rerun '" + up + "'");

  const auto out = ctx.stage_dir / stage;
  fs::remove_all(out);
  fs::create_directories(out);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    stage_table().at(stage)(Run{ctx, ctx.config, out});
  } catch (const std::exception& e) {
    throw std::runtime_error(stage + ": " + e.what());
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  LedgerEntry entry;
  entry.stage = stage;
  entry.artifact = stage;
  entry.hash = hash_tree(out);
  entry.config_hash = config_digest(ctx.config, stage);
  entry.seed = ctx.config.stage_seed(stage);
  entry.wall_time = wall;
  ledger.append(entry);
  ledger.save();
  return ledger.entries().back();
}

std::vector<LedgerEntry> run_all(const StageContext& ctx) {
  std::vector<LedgerEntry> out;
  for (const auto& s : stage_names()) out.push_back(run_stage(s, ctx));
  return out;
}

}  // namespace sigex::pipecli
