#include "sigex/pipecli/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace sigex::pipecli {
namespace {

using nlohmann::json;

const std::set<std::string> kSections = {"format",  "seed",    "corpus",  "classifier",
                                         "wgan",    "augment", "cluster", "extract",
                                         "sweep"};

std::string optimizer_name(nnkit::OptimizerKind k) {
  switch (k) {
    case nnkit::OptimizerKind::Adam: return "adam";
    case nnkit::OptimizerKind::Sgd: return "sgd";
    case nnkit::OptimizerKind::RmsProp: return "rmsprop";
  }
  return "adam";
}

json optimizer_to_json(const nnkit::OptimizerConfig& o) {
  return {{"kind", optimizer_name(o.kind)},
          {"learning_rate", o.learning_rate},
          {"beta1", o.beta1},
          {"beta2", o.beta2},
          {"epsilon", o.epsilon},
          {"rho", o.rho}};
}

nnkit::OptimizerConfig optimizer_from_json(const json& j, nnkit::OptimizerConfig o) {
  if (j.contains("kind")) o.kind = nnkit::optimizer_kind_from_name(j.at("kind").get<std::string>());
  o.learning_rate = j.value("learning_rate", o.learning_rate);
  o.beta1 = j.value("beta1", o.beta1);
  o.beta2 = j.value("beta2", o.beta2);
  o.epsilon = j.value("epsilon", o.epsilon);
  o.rho = j.value("rho", o.rho);
  return o;
}

json train_to_json(const nnkit::TrainConfig& t) {
  return {{"epochs", t.epochs}, {"batch_size", t.batch_size},
          {"optimizer", optimizer_to_json(t.optimizer)}};
}

nnkit::TrainConfig train_from_json(const json& j, nnkit::TrainConfig t) {
  t.epochs = j.value("epochs", t.epochs);
  t.batch_size = j.value("batch_size", t.batch_size);
  if (j.contains("optimizer")) t.optimizer = optimizer_from_json(j.at("optimizer"), t.optimizer);
  return t;
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t PipelineConfig::stage_seed(const std::string& stage) const {
  std::uint64_t h = seed;
  for (unsigned char c : stage) h = splitmix(h ^ c);
  return h;
}

nlohmann::json PipelineConfig::section(const std::string& stage) const {
  const json full = config_to_json(*this);
  auto pick = [&](std::initializer_list<const char*> keys) {
    json out = {{"seed", full.at("seed")}};
    for (const char* k : keys) out[k] = full.at(k);
    return out;
  };
  if (stage == "synth") return pick({"corpus"});
  if (stage == "train-cnn") return pick({"corpus", "classifier"});
  if (stage == "train-wgan") return pick({"corpus", "wgan"});
  if (stage == "augment") return pick({"corpus", "classifier", "wgan", "augment"});
  if (stage == "cluster") return pick({"corpus", "classifier", "wgan", "augment", "cluster"});
  if (stage == "extract")
    return pick({"corpus", "classifier", "wgan", "augment", "cluster", "extract"});
  return full;  // sweep and report read everything
}

PipelineConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("config: expected a JSON object");
  for (const auto& [key, _] : doc.items())
    if (!kSections.count(key)) throw std::invalid_argument("config: unknown section '" + key + "'");
  if (doc.value("format", "sigex-config/1") != "sigex-config/1")
    throw std::invalid_argument("config: unsupported format");

  PipelineConfig c;
  c.source = doc;
  c.seed = doc.value("seed", c.seed);

  auto& corpus = c.corpus;
  corpus.classes = sonogen::desk_classes();
  if (doc.contains("corpus")) {
    const auto& j = doc.at("corpus");
    if (j.contains("classes") && j.at("classes").is_array()) {
      corpus.classes.clear();
      for (const auto& cs : j.at("classes")) corpus.classes.push_back(sonogen::class_spec_from_json(cs));
    } else if (j.contains("classes") && j.at("classes") != "desk") {
      throw std::invalid_argument("config: corpus.classes must be \"desk\" or a list");
    }
    corpus.per_class = j.value("per_class", corpus.per_class);
    corpus.noise_schedule = j.value("noise_schedule", corpus.noise_schedule);
    corpus.interferers = j.value("interferers", corpus.interferers);
    corpus.amplitude_jitter = j.value("amplitude_jitter", corpus.amplitude_jitter);
    corpus.train_fraction = j.value("train_fraction", corpus.train_fraction);
    corpus.synth.noise_scale = j.value("noise_scale", corpus.synth.noise_scale);
    corpus.synth.interference_gain = j.value("interference_gain", corpus.synth.interference_gain);
    auto& g = corpus.geometry;
    g.stft.fft_size = j.value("fft_size", g.stft.fft_size);
    g.stft.hop = j.value("hop", g.stft.hop);
    g.stft.sample_rate = j.value("sample_rate", g.stft.sample_rate);
    g.rows = j.value("rows", g.rows);
    g.cols = j.value("cols", g.cols);
    g.first_bin = j.value("first_bin", g.first_bin);
  }
  corpus.synth.sample_rate = corpus.geometry.stft.sample_rate;

  c.classifier.epochs = 15;
  if (doc.contains("classifier")) c.classifier = train_from_json(doc.at("classifier"), c.classifier);

  if (doc.contains("wgan")) {
    const auto& j = doc.at("wgan");
    auto& w = c.wgan;
    w.epochs = j.value("epochs", w.epochs);
    w.batch_size = j.value("batch_size", w.batch_size);
    w.clip = j.value("clip", w.clip);
    w.critic_steps = j.value("critic_steps", w.critic_steps);
    const auto obj = j.value("objective", std::string("wasserstein"));
    if (obj != "wasserstein" && obj != "bce")
      throw std::invalid_argument("config: wgan.objective must be wasserstein or bce");
    w.objective = obj == "bce" ? wgan::Objective::BinaryCrossEntropy : wgan::Objective::Wasserstein;
    const auto alt = j.value("alternation", std::string("per-batch"));
    if (alt != "per-batch" && alt != "per-epoch")
      throw std::invalid_argument("config: wgan.alternation must be per-batch or per-epoch");
    w.alternation = alt == "per-epoch" ? wgan::Alternation::PerEpoch : wgan::Alternation::PerBatch;
    if (j.contains("critic_optimizer"))
      w.critic_optimizer = optimizer_from_json(j.at("critic_optimizer"), w.critic_optimizer);
    if (j.contains("generator_optimizer"))
      w.generator_optimizer = optimizer_from_json(j.at("generator_optimizer"), w.generator_optimizer);
    c.wgan_classes = j.value("classes", c.wgan_classes);
  }

  if (doc.contains("augment")) {
    const auto& j = doc.at("augment");
    c.augment.synthetic_per_class = j.value("synthetic_per_class", c.augment.synthetic_per_class);
    c.augment.max_fraction = j.value("max_fraction", c.augment.max_fraction);
    if (c.augment.max_fraction < 0.0 || c.augment.max_fraction > 0.5)
      throw std::invalid_argument("config: augment.max_fraction must lie in [0, 0.5]");
  }

  if (doc.contains("cluster")) {
    const auto& j = doc.at("cluster");
    c.cluster.k_min = j.value("k_min", c.cluster.k_min);
    c.cluster.k_max = j.value("k_max", c.cluster.k_max);
    c.cluster.max_iter = j.value("max_iter", c.cluster.max_iter);
    if (j.contains("init"))
      c.cluster.init = clusterer::init_method_from_name(j.at("init").get<std::string>());
    c.cluster.normalize = j.value("normalize", c.cluster.normalize);
  }

  if (doc.contains("extract")) {
    const auto& j = doc.at("extract");
    c.extract.threshold = j.value("threshold", c.extract.threshold);
    if (j.contains("fusion"))
      c.extract.fusion = maskforge::fusion_from_name(j.at("fusion").get<std::string>());
    c.extract.cam.subtract_baseline = j.value("subtract_baseline", c.extract.cam.subtract_baseline);
  }

  c.sweep.autoencoder.freeze_encoder = true;
  if (doc.contains("sweep")) {
    const auto& j = doc.at("sweep");
    c.sweep.thresholds = j.value("thresholds", c.sweep.thresholds);
    c.sweep.reverse = j.value("reverse", c.sweep.reverse);
    c.sweep.ae_centroid = j.value("ae_centroid", c.sweep.ae_centroid);
    c.sweep.panel_images = j.value("panel_images", c.sweep.panel_images);
    if (j.contains("autoencoder")) {
      const auto& a = j.at("autoencoder");
      c.sweep.autoencoder.train = train_from_json(a, c.sweep.autoencoder.train);
      c.sweep.autoencoder.freeze_encoder =
          a.value("freeze_encoder", c.sweep.autoencoder.freeze_encoder);
    }
  }
  c.sweep.autoencoder.normalize_embeddings = c.cluster.normalize;
  return c;
}

nlohmann::json config_to_json(const PipelineConfig& c) {
  json classes = json::array();
  for (const auto& cs : c.corpus.classes) classes.push_back(sonogen::class_spec_to_json(cs));
  const auto& g = c.corpus.geometry;
  return {
      {"format", "sigex-config/1"},
      {"seed", c.seed},
      {"corpus",
       {{"classes", classes},
        {"per_class", c.corpus.per_class},
        {"noise_schedule", c.corpus.noise_schedule},
        {"interferers", c.corpus.interferers},
        {"amplitude_jitter", c.corpus.amplitude_jitter},
        {"train_fraction", c.corpus.train_fraction},
        {"noise_scale", c.corpus.synth.noise_scale},
        {"interference_gain", c.corpus.synth.interference_gain},
        {"fft_size", g.stft.fft_size},
        {"hop", g.stft.hop},
        {"sample_rate", g.stft.sample_rate},
        {"rows", g.rows},
        {"cols", g.cols},
        {"first_bin", g.first_bin}}},
      {"classifier", train_to_json(c.classifier)},
      {"wgan",
       {{"epochs", c.wgan.epochs},
        {"batch_size", c.wgan.batch_size},
        {"clip", c.wgan.clip},
        {"critic_steps", c.wgan.critic_steps},
        {"objective", c.wgan.objective == wgan::Objective::Wasserstein ? "wasserstein" : "bce"},
        {"alternation", c.wgan.alternation == wgan::Alternation::PerBatch ? "per-batch" : "per-epoch"},
        {"critic_optimizer", optimizer_to_json(c.wgan.critic_optimizer)},
        {"generator_optimizer", optimizer_to_json(c.wgan.generator_optimizer)},
        {"classes", c.wgan_classes}}},
      {"augment",
       {{"synthetic_per_class", c.augment.synthetic_per_class},
        {"max_fraction", c.augment.max_fraction}}},
      {"cluster",
       {{"k_min", c.cluster.k_min},
        {"k_max", c.cluster.k_max},
        {"max_iter", c.cluster.max_iter},
        {"init", c.cluster.init == clusterer::InitMethod::FarthestPoint ? "farthest" : "dsquared"},
        {"normalize", c.cluster.normalize}}},
      {"extract",
       {{"threshold", c.extract.threshold},
        {"fusion", maskforge::fusion_name(c.extract.fusion)},
        {"subtract_baseline", c.extract.cam.subtract_baseline}}},
      {"sweep",
       {{"thresholds", c.sweep.thresholds},
        {"reverse", c.sweep.reverse},
        {"ae_centroid", c.sweep.ae_centroid},
        {"panel_images", c.sweep.panel_images},
        {"autoencoder",
         [&] {
           json a = train_to_json(c.sweep.autoencoder.train);
           a["freeze_encoder"] = c.sweep.autoencoder.freeze_encoder;
           return a;
         }()}}}};
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot read " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("config: " + path.string() + ": " + e.what());
  }
  return config_from_json(doc);
}

void apply_overrides(PipelineConfig& cfg, std::optional<std::uint64_t> seed,
                     std::optional<double> threshold) {
  if (seed) cfg.seed = *seed;
  if (threshold) {
    if (*threshold < 0.0 || *threshold > 1.0)
      throw std::invalid_argument("--threshold must lie in [0,1]");
    cfg.extract.threshold = *threshold;
    cfg.sweep.thresholds = {*threshold};
  }
}

}  // namespace sigex::pipecli
