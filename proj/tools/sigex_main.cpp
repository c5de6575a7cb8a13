// sigex: staged signature-extraction pipeline.
#include <CLI11.hpp>

#include <iostream>

#include "sigex/pipecli/stages.hpp"

namespace pc = sigex::pipecli;

int main(int argc, char** argv) {
  CLI::App app{"Class-specific tonal signature extraction pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::string stage_dir = "stages";
  std::optional<std::uint64_t> seed;
  std::optional<double> threshold;
  std::string image;
  bool quiet = false;

  auto common = [&](CLI::App* sub, bool with_threshold) {
    sub->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--stage-dir", stage_dir, "Directory for stage artifacts and the ledger");
    sub->add_option("--seed", seed, "Override the config seed");
    if (with_threshold) sub->add_option("--threshold", threshold, "Override the binarization threshold");
    sub->add_flag("-q,--quiet", quiet, "Suppress progress output");
  };

  for (const auto& name : pc::stage_names()) {
    auto* sub = app.add_subcommand(name, "Run the " + name + " stage");
    common(sub, name == "extract" || name == "sweep");
    if (name == "extract")
      sub->add_option("--image", image, "Extract one .spg image instead of the test split")
          ->check(CLI::ExistingFile);
  }
  auto* all = app.add_subcommand("all", "Run every stage in order");
  common(all, true);
  auto* verify = app.add_subcommand("verify", "Re-hash every recorded artifact");
  verify->add_option("--stage-dir", stage_dir, "Directory holding ledger.json");

  CLI11_PARSE(app, argc, argv);

  auto* sub = app.get_subcommands().front();
  const std::string cmd = sub->get_name();
  try {
    if (cmd == "verify") {
      pc::Ledger ledger(stage_dir);
      ledger.load();
      const auto stale = ledger.verify();
      for (const auto& e : ledger.entries()) std::cout << e.stage << "  " << e.hash << '\n';
      for (const auto& s : stale) std::cerr << "stale: " << s << '\n';
      return stale.empty() ? 0 : 4;
    }

    pc::StageContext ctx;
    ctx.config = pc::load_config(config_path);
    pc::apply_overrides(ctx.config, seed, threshold);
    ctx.stage_dir = stage_dir;
    if (!image.empty()) ctx.image = image;
    ctx.log = quiet ? nullptr : &std::cerr;

    const auto entries = cmd == "all" ? pc::run_all(ctx)
                                      : std::vector<pc::LedgerEntry>{pc::run_stage(cmd, ctx)};
    for (const auto& e : entries)
      std::cout << e.stage << "  " << e.hash << "  " << e.wall_time << "s\n";
    return 0;
  } catch (const pc::MissingStageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const pc::StaleArtifactError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << cmd << ": " << e.what() << '\n';
    return 1;
  }
}
