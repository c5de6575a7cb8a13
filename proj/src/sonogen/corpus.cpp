#include "sigex/sonogen/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include "sigex/core/spg_io.hpp"
#include "sigex/sonogen/stft.hpp"

namespace sigex::sonogen {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<const ManifestEntry*> DatasetManifest::select(const std::string& split, int class_id,
                                                          bool include_synthetic) const {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : entries) {
    if (!split.empty() && e.split != split) continue;
    if (class_id >= 0 && e.class_id != class_id) continue;
    if (e.synthetic && !include_synthetic) continue;
    out.push_back(&e);
  }
  return out;
}

std::vector<int> DatasetManifest::class_ids() const {
  std::vector<int> ids;
  for (const auto& c : classes) ids.push_back(c.class_id);
  return ids;
}

const ClassSpec& DatasetManifest::class_spec(int class_id) const {
  for (const auto& c : classes)
    if (c.class_id == class_id) return c;
  throw std::out_of_range("manifest: unknown class id " + std::to_string(class_id));
}

json class_spec_to_json(const ClassSpec& spec) {
  json tracks = json::array();
  for (const auto& t : spec.tracks) {
    json harmonics = json::array();
    for (const auto& h : t.harmonics)
      harmonics.push_back({{"multiple", h.multiple}, {"amplitude", h.amplitude}});
    tracks.push_back({{"base_freq", t.base_freq},
                      {"harmonics", harmonics},
                      {"fm_depth", t.fm_depth},
                      {"fm_rate", t.fm_rate},
                      {"start_time", t.start_time},
                      {"end_time", t.end_time}});
  }
  return {{"class_id", spec.class_id}, {"name", spec.name}, {"tracks", tracks}};
}

ClassSpec class_spec_from_json(const json& j) {
  ClassSpec spec;
  spec.class_id = j.at("class_id").get<int>();
  spec.name = j.value("name", "");
  for (const auto& jt : j.at("tracks")) {
    TonalTrack t;
    t.base_freq = jt.at("base_freq").get<double>();
    t.harmonics.clear();
    for (const auto& jh : jt.at("harmonics"))
      t.harmonics.push_back({jh.at("multiple").get<int>(), jh.at("amplitude").get<double>()});
    t.fm_depth = jt.value("fm_depth", 0.0);
    t.fm_rate = jt.value("fm_rate", 0.0);
    t.start_time = jt.value("start_time", 0.0);
    t.end_time = jt.value("end_time", 1e9);
    spec.tracks.push_back(std::move(t));
  }
  return spec;
}

std::vector<ClassSpec> desk_classes() {
  // Bin width is 4096 / 128 = 32 Hz; every line sits on a bin centre.
  auto bin = [](int b) { return 32.0 * b; };
  std::vector<ClassSpec> classes(4);
  classes[0] = {0, "tanker", {TonalTrack{bin(10), {{1, 0.8}, {2, 0.8}, {3, 0.8}}}}};
  classes[1] = {1, "trawler", {TonalTrack{bin(13), {{1, 0.8}, {2, 0.8}, {3, 0.8}}}}};
  classes[2] = {2, "submarine",
                {TonalTrack{bin(17), {{1, 0.8}, {2, 0.8}}},
                 TonalTrack{bin(50), {{1, 0.8}}, 0.0, 0.0, 0.45, 1e9}}};
  classes[3] = {3, "merchant",
                {TonalTrack{bin(23), {{1, 0.8}, {2, 0.8}}},
                 TonalTrack{bin(58), {{1, 0.8}}, 32.0, 2.0, 0.0, 1e9}}};
  return classes;
}

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 step
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

ClassSpec jitter_spec(const ClassSpec& spec, double jitter, std::mt19937_64& rng) {
  ClassSpec out = spec;
  std::uniform_real_distribution<double> scale(1.0 - jitter, 1.0 + jitter);
  for (auto& t : out.tracks)
    for (auto& h : t.harmonics) h.amplitude = std::clamp(h.amplitude * scale(rng), 0.0, 1.0);
  return out;
}

json geometry_to_json(const ImageGeometry& g, const SynthOptions& s) {
  return {{"fft_size", g.stft.fft_size},
          {"hop", g.stft.hop},
          {"sample_rate", g.stft.sample_rate},
          {"window", g.stft.window == Window::Hann ? "hann" : "rectangular"},
          {"rows", g.rows},
          {"cols", g.cols},
          {"first_bin", g.first_bin},
          {"noise_scale", s.noise_scale},
          {"interference_gain", s.interference_gain}};
}

}  // namespace

DatasetManifest render_corpus(const CorpusConfig& config, const fs::path& out_dir) {
  if (config.classes.size() < 2)
    throw std::invalid_argument("render_corpus: at least two classes required");
  if (config.per_class < 1) throw std::invalid_argument("render_corpus: per_class must be >= 1");
  if (config.noise_schedule.empty())
    throw std::invalid_argument("render_corpus: empty noise schedule");
  {
    std::vector<int> ids;
    for (const auto& c : config.classes) {
      if (c.tracks.empty())
        throw std::invalid_argument("render_corpus: class " + c.name + " has no tracks");
      ids.push_back(c.class_id);
    }
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
      throw std::invalid_argument("render_corpus: duplicate class ids");
  }

  std::error_code ec;
  for (const char* sub : {"spg", "masks", "templates"}) {
    fs::create_directories(out_dir / sub, ec);
    if (ec) throw std::runtime_error("render_corpus: cannot create " + (out_dir / sub).string() +
                                     ": " + ec.message());
  }

  DatasetManifest manifest;
  manifest.geometry = config.geometry;
  manifest.synth = config.synth;
  manifest.synth.sample_rate = config.geometry.stft.sample_rate;
  manifest.classes = config.classes;
  manifest.seed = config.seed;
  manifest.root = out_dir;

  const double duration = config.geometry.duration();
  const int n_train =
      static_cast<int>(std::ceil(config.train_fraction * static_cast<double>(config.per_class)));
  std::uint64_t index = 0;
  for (std::size_t ci = 0; ci < config.classes.size(); ++ci) {
    const auto& spec = config.classes[ci];
    for (int i = 0; i < config.per_class; ++i, ++index) {
      const std::uint64_t seed = mix_seed(config.seed, index);
      std::mt19937_64 rng(seed);
      const ClassSpec sample_spec = jitter_spec(spec, config.amplitude_jitter, rng);

      std::vector<std::size_t> others;
      for (std::size_t k = 0; k < config.classes.size(); ++k)
        if (k != ci) others.push_back(k);
      std::shuffle(others.begin(), others.end(), rng);
      std::vector<ClassSpec> interference;
      for (int k = 0; k < config.interferers && k < static_cast<int>(others.size()); ++k)
        interference.push_back(jitter_spec(config.classes[others[k]], config.amplitude_jitter, rng));

      const double noise = config.noise_schedule[static_cast<std::size_t>(i) %
                                                 config.noise_schedule.size()];
      const TimeSeries x = synth_signal(sample_spec, duration, noise, interference, rng(),
                                        manifest.synth);
      const Spectrogram image = render_image(x, config.geometry);
      const GroundTruthMask mask = ground_truth_mask(sample_spec, config.geometry);

      ManifestEntry e;
      char id[32];
      std::snprintf(id, sizeof id, "c%d_%04d", spec.class_id, i);
      e.id = id;
      e.spectrogram = "spg/" + e.id + ".spg";
      e.mask = "masks/" + e.id + ".spg";
      e.class_id = spec.class_id;
      e.noise_level = noise;
      e.seed = seed;
      e.split = i < n_train ? "train" : "test";
      write_spg(out_dir / e.spectrogram, image.grid);
      write_spg(out_dir / e.mask, mask.grid);
      manifest.entries.push_back(std::move(e));
    }
    write_spg(out_dir / "templates" / ("class_" + std::to_string(spec.class_id) + ".spg"),
              ground_truth_mask(spec, config.geometry).grid);
  }
  save_manifest(manifest, out_dir / "manifest.json");
  return manifest;
}

json manifest_to_json(const DatasetManifest& m) {
  json classes = json::array();
  for (const auto& c : m.classes) classes.push_back(class_spec_to_json(c));
  json entries = json::array();
  for (const auto& e : m.entries) {
    entries.push_back({{"id", e.id},
                       {"spectrogram", e.spectrogram},
                       {"mask", e.mask},
                       {"class_id", e.class_id},
                       {"noise_level", e.noise_level},
                       {"seed", e.seed},
                       {"split", e.split},
                       {"synthetic", e.synthetic}});
  }
  return {{"format", "sigex-manifest/1"},
          {"geometry", geometry_to_json(m.geometry, m.synth)},
          {"seed", m.seed},
          {"classes", classes},
          {"entries", entries}};
}

DatasetManifest manifest_from_json(const json& doc, const fs::path& root) {
  if (doc.value("format", "") != "sigex-manifest/1")
    throw std::runtime_error("manifest: unsupported format");
  DatasetManifest m;
  const auto& g = doc.at("geometry");
  m.geometry.stft.fft_size = g.at("fft_size").get<int>();
  m.geometry.stft.hop = g.at("hop").get<int>();
  m.geometry.stft.sample_rate = g.at("sample_rate").get<int>();
  m.geometry.stft.window = g.value("window", "hann") == "hann" ? Window::Hann : Window::Rectangular;
  m.geometry.rows = g.at("rows").get<int>();
  m.geometry.cols = g.at("cols").get<int>();
  m.geometry.first_bin = g.at("first_bin").get<int>();
  m.synth.sample_rate = m.geometry.stft.sample_rate;
  m.synth.noise_scale = g.value("noise_scale", m.synth.noise_scale);
  m.synth.interference_gain = g.value("interference_gain", m.synth.interference_gain);
  m.seed = doc.value("seed", std::uint64_t{0});
  for (const auto& c : doc.at("classes")) m.classes.push_back(class_spec_from_json(c));
  for (const auto& je : doc.at("entries")) {
    ManifestEntry e;
    e.id = je.at("id").get<std::string>();
    e.spectrogram = je.at("spectrogram").get<std::string>();
    e.mask = je.value("mask", "");
    e.class_id = je.at("class_id").get<int>();
    e.noise_level = je.value("noise_level", 0.0);
    e.seed = je.value("seed", std::uint64_t{0});
    e.split = je.at("split").get<std::string>();
    e.synthetic = je.value("synthetic", false);
    m.entries.push_back(std::move(e));
  }
  m.root = root;
  return m;
}

void save_manifest(const DatasetManifest& manifest, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("manifest: cannot write " + path.string());
  out << manifest_to_json(manifest).dump(2) << '\n';
}

DatasetManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("manifest: cannot open " + path.string());
  return manifest_from_json(json::parse(in), path.parent_path());
}

void validate_manifest(const DatasetManifest& manifest) {
  const int rows = manifest.geometry.rows;
  const int cols = manifest.geometry.cols;
  for (const auto& e : manifest.entries) {
    for (const auto& rel : {e.spectrogram, e.mask}) {
      if (rel.empty()) continue;
      const fs::path p = manifest.root / rel;
      if (!fs::exists(p)) throw std::runtime_error("manifest: missing file " + p.string());
      const Grid g = read_spg(p);
      if (g.rows() != rows || g.cols() != cols)
        throw std::runtime_error("manifest: " + p.string() + " has inconsistent dims");
    }
  }
}

Spectrogram load_spectrogram(const DatasetManifest& manifest, const ManifestEntry& entry) {
  const auto& g = manifest.geometry;
  return {read_spg(manifest.root / entry.spectrogram), g.stft.fft_size, g.stft.hop,
          g.stft.sample_rate, g.first_bin};
}

GroundTruthMask load_mask(const DatasetManifest& manifest, const ManifestEntry& entry) {
  if (entry.mask.empty()) throw std::runtime_error("manifest: entry " + entry.id + " has no mask");
  return {read_spg(manifest.root / entry.mask), entry.class_id};
}

GroundTruthMask class_template(const DatasetManifest& manifest, int class_id) {
  return ground_truth_mask(manifest.class_spec(class_id), manifest.geometry);
}

}  // namespace sigex::sonogen
