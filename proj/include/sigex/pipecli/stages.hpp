#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sigex/pipecli/config.hpp"
#include "sigex/pipecli/ledger.hpp"

namespace sigex::pipecli {

/// synth, train-cnn, train-wgan, augment, cluster, extract, sweep, report.
const std::vector<std::string>& stage_names();

/// Stages whose artifacts `stage` reads.
const std::vector<std::string>& upstream_of(const std::string& stage);

struct StageContext {
  PipelineConfig config;
  std::filesystem::path stage_dir;
  /// extract only: a single .spg image instead of the test split.
  std::optional<std::filesystem::path> image;
  std::ostream* log = nullptr;
};

/// Runs one stage: checks upstream ledger entries, rebuilds the stage's
/// artifact directory, and appends a ledger entry. Throws MissingStageError
/// or StaleArtifactError for upstream problems.
LedgerEntry run_stage(const std::string& stage, const StageContext& ctx);

/// Every stage in order.
std::vector<LedgerEntry> run_all(const StageContext& ctx);

std::string config_digest(const PipelineConfig& cfg, const std::string& stage);

}  // namespace sigex::pipecli
