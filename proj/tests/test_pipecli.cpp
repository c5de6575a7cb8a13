#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "sigex/core/spg_io.hpp"
#include "sigex/pipecli/config.hpp"
#include "sigex/pipecli/ledger.hpp"
#include "sigex/pipecli/stages.hpp"
#include "sigex/sonogen/stft.hpp"
#include "sigex/sonogen/synth.hpp"

using namespace sigex;
using namespace sigex::pipecli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* kTinyConfig = R"({
  "format": "sigex-config/1",
  "seed": 3,
  "corpus": {"classes": "desk", "per_class": 8},
  "classifier": {"epochs": 2},
  "wgan": {"epochs": 1, "batch_size": 4, "classes": [0]},
  "augment": {"synthetic_per_class": 2},
  "cluster": {"k_min": 1, "k_max": 3},
  "sweep": {"autoencoder": {"epochs": 2, "batch_size": 8}, "panel_images": 2}
})";

fs::path fresh(const std::string& name) {
  const auto p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  return p;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

StageContext tiny_context(const fs::path& dir) {
  StageContext ctx;
  ctx.config = config_from_json(json::parse(kTinyConfig));
  ctx.stage_dir = dir;
  return ctx;
}

}  // namespace

TEST_CASE("config survives a JSON round trip") {
  const auto c = config_from_json(json::parse(kTinyConfig));
  CHECK(c.corpus.per_class == 8);
  CHECK(c.corpus.classes.size() == 4);
  CHECK(c.wgan_classes == std::vector<int>{0});
  const auto j = config_to_json(c);
  CHECK(config_to_json(config_from_json(j)) == j);
}

TEST_CASE("config validation") {
  CHECK_THROWS(config_from_json(json{{"bogus", 1}}));
  CHECK_THROWS(config_from_json(json{{"format", "other/2"}}));
  CHECK_THROWS(config_from_json(json{{"augment", {{"max_fraction", 0.6}}}}));
  CHECK_THROWS(config_from_json(json{{"wgan", {{"objective", "hinge"}}}}));
  CHECK_THROWS(config_from_json(json{{"corpus", {{"classes", "ocean"}}}}));
  CHECK_THROWS(load_config(fs::temp_directory_path() / "sigex_no_such_config.json"));
}

TEST_CASE("command-line overrides") {
  auto c = config_from_json(json::parse(kTinyConfig));
  apply_overrides(c, 99, 0.6);
  CHECK(c.seed == 99);
  CHECK(c.extract.threshold == 0.6);
  CHECK(c.sweep.thresholds == std::vector<double>{0.6});
  CHECK_THROWS(apply_overrides(c, std::nullopt, 1.5));
}

TEST_CASE("stage seeds are stable and distinct") {
  const auto c = config_from_json(json::parse(kTinyConfig));
  std::set<std::uint64_t> seen;
  for (const auto& s : stage_names()) {
    CHECK(c.stage_seed(s) == c.stage_seed(s));
    seen.insert(c.stage_seed(s));
  }
  CHECK(seen.size() == stage_names().size());
}

TEST_CASE("ledger chain, staleness and tampering") {
  const auto dir = fresh("sigex_ledger_test");
  fs::create_directories(dir / "a");
  write_text(dir / "a" / "x.txt", "hello");
  Ledger led(dir);
  led.load();
  CHECK_THROWS_AS(led.require("a", "cfg", "b"), MissingStageError);
  led.append({"a", "a", hash_tree(dir / "a"), "cfg", 1, 0.5, "", ""});
  led.append({"b", "a", hash_tree(dir / "a"), "cfg2", 2, 0.1, "", ""});
  led.save();

  Ledger back(dir);
  back.load();
  REQUIRE(back.entries().size() == 2);
  CHECK(back.entries()[1].prev == back.entries()[0].chain);
  CHECK(back.require("a", "cfg", "b").seed == 1);
  CHECK_THROWS_AS(back.require("a", "other", "b"), StaleArtifactError);
  CHECK(back.verify().empty());

  write_text(dir / "a" / "x.txt", "changed");
  CHECK_THROWS_AS(back.require("a", "cfg", "b"), StaleArtifactError);
  CHECK(back.verify().size() == 2);
  fs::remove_all(dir / "a");
  CHECK_THROWS_AS(back.require("a", "cfg", "b"), MissingStageError);

  // editing a recorded entry breaks the chain
  std::ifstream in(dir / "ledger.json");
  auto doc = json::parse(in);
  in.close();
  doc["entries"][0]["seed"] = 5;
  write_text(dir / "ledger.json", doc.dump());
  Ledger tampered(dir);
  CHECK_THROWS_AS(tampered.load(), StaleArtifactError);
  fs::remove_all(dir);
}

TEST_CASE("hash_tree covers names and bytes") {
  const auto dir = fresh("sigex_hash_tree");
  fs::create_directories(dir / "sub");
  write_text(dir / "sub" / "f", "abc");
  const auto h1 = hash_tree(dir);
  fs::rename(dir / "sub" / "f", dir / "sub" / "g");
  const auto h2 = hash_tree(dir);
  CHECK(h1 != h2);
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  fs::remove_all(dir);
}

TEST_CASE("stages refuse to run without their inputs") {
  const auto dir = fresh("sigex_missing_stage");
  try {
    run_stage("extract", tiny_context(dir));
    FAIL("expected a missing-stage error");
  } catch (const MissingStageError& e) {
    CHECK(std::string(e.what()).find("'synth'") != std::string::npos);
  }
  CHECK_THROWS(run_stage("no-such-stage", tiny_context(dir)));
  fs::remove_all(dir);
}

TEST_CASE("tiny pipeline is reproducible and detects stale inputs") {
  const auto a = fresh("sigex_pipe_a"), b = fresh("sigex_pipe_b");
  const auto ea = run_all(tiny_context(a));
  const auto eb = run_all(tiny_context(b));
  REQUIRE(ea.size() == stage_names().size());
  for (std::size_t i = 0; i < ea.size(); ++i) {
    CHECK(ea[i].stage == stage_names()[i]);
    CHECK(ea[i].hash == eb[i].hash);
    CHECK(ea[i].chain == eb[i].chain);
  }
  CHECK(fs::exists(a / "sweep" / "report.json"));
  CHECK(fs::exists(a / "report" / "report.md"));

  Ledger led(a);
  led.load();
  CHECK(led.verify().empty());

  // a config change upstream of extract makes the recorded cluster stale
  auto changed = tiny_context(a);
  changed.config.cluster.k_max = 2;
  CHECK_THROWS_AS(run_stage("extract", changed), StaleArtifactError);

  // single-image extraction on a clean track of class 1
  const auto& g = changed.config.corpus.geometry;
  const auto spec = changed.config.corpus.classes[1];
  const auto x = sonogen::synth_signal(spec, g.duration(), 0.0, {}, 5, changed.config.corpus.synth);
  const auto img = quantize_f32(sonogen::render_image(x, g).grid);
  const auto path = a / "clean.spg";
  write_spg(path, img);
  auto one = tiny_context(a);
  one.image = path;
  run_stage("extract", one);
  std::ifstream in(a / "extract" / "signatures" / "clean.json");
  const auto meta = json::parse(in);
  CHECK(meta.at("threshold") == 0.75);
  CHECK(meta.contains("predicted_class"));
  CHECK(fs::exists(a / "extract" / "signatures" / "clean_mask.png"));
  const auto sig = read_spg(a / "extract" / "signatures" / "clean.spg");
  CHECK(sig.same_shape(img));
  // the rerun invalidated sweep's view of extract
  CHECK_THROWS_AS(run_stage("report", tiny_context(a)), StaleArtifactError);

  fs::remove_all(a);
  fs::remove_all(b);
}
