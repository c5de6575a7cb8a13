#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace sigex::pipecli {

std::string sha256_hex(const std::string& data);

/// SHA-256 over every regular file below `root` in sorted relative-path
/// order, each contributing its path, size and bytes.
std::string hash_tree(const std::filesystem::path& root);

struct LedgerEntry {
  std::string stage;
  std::string artifact;     // relative to the stage directory
  std::string hash;         // hash_tree of the artifact
  std::string config_hash;  // digest of the config sections the stage read
  std::uint64_t seed = 0;
  double wall_time = 0.0;   // seconds
  std::string prev;         // chain hash of the previous entry
  std::string chain;        // sha256(prev + canonical entry without wall_time)
};

class StaleArtifactError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MissingStageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Append-only record of stage runs, stored as ledger.json in the stage directory.
class Ledger {
 public:
  explicit Ledger(std::filesystem::path stage_dir);

  /// Reads ledger.json if present and checks the hash chain; throws
  /// StaleArtifactError when it has been edited.
  void load();
  void append(LedgerEntry entry);
  void save() const;

  const std::vector<LedgerEntry>& entries() const { return entries_; }
  std::optional<LedgerEntry> latest(const std::string& stage) const;

  /// The latest entry for `stage`, after checking its artifact still hashes
  /// to the recorded value and its config digest equals `config_hash`.
  LedgerEntry require(const std::string& stage, const std::string& config_hash,
                      const std::string& needed_by) const;

  /// Re-hashes every stage's latest artifact; returns stages whose content changed.
  std::vector<std::string> verify() const;

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::vector<LedgerEntry> entries_;
};

nlohmann::json entry_to_json(const LedgerEntry& e);

}  // namespace sigex::pipecli
