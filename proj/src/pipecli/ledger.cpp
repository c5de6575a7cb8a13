#include "sigex/pipecli/ledger.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <iterator>
#include <memory>

namespace sigex::pipecli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1)
      throw std::runtime_error("sha256: init failed");
  }
  void update(const void* data, std::size_t n) {
    if (EVP_DigestUpdate(ctx_.get(), data, n) != 1) throw std::runtime_error("sha256: update failed");
  }
  void update(const std::string& s) { update(s.data(), s.size()); }
  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), md, &len) != 1) throw std::runtime_error("sha256: final failed");
    static const char* digits = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out += digits[md[i] >> 4];
      out += digits[md[i] & 15];
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

// wall_time is informational and stays out of the chain so reruns chain identically.
json canonical(const LedgerEntry& e) {
  return {{"stage", e.stage},   {"artifact", e.artifact}, {"hash", e.hash},
          {"config_hash", e.config_hash}, {"seed", e.seed}, {"prev", e.prev}};
}

std::string chain_hash(const LedgerEntry& e) { return sha256_hex(e.prev + canonical(e).dump()); }

}  // namespace

std::string sha256_hex(const std::string& data) {
  Sha256 h;
  h.update(data);
  return h.hex();
}

std::string hash_tree(const fs::path& root) {
  if (!fs::exists(root)) throw std::runtime_error("hash_tree: missing " + root.string());
  std::vector<fs::path> files;
  if (fs::is_regular_file(root)) {
    files.push_back(root);
  } else {
    for (const auto& e : fs::recursive_directory_iterator(root))
      if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  Sha256 h;
  for (const auto& f : files) {
    const std::string rel = fs::is_regular_file(root) ? f.filename().string()
                                                      : fs::relative(f, root).generic_string();
    std::ifstream in(f, std::ios::binary);
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    h.update(rel);
    h.update("\0", 1);
    h.update(std::to_string(bytes.size()));
    h.update("\0", 1);
    h.update(bytes);
  }
  return h.hex();
}

json entry_to_json(const LedgerEntry& e) {
  json j = canonical(e);
  j["wall_time"] = e.wall_time;
  j["chain"] = e.chain;
  return j;
}

Ledger::Ledger(fs::path stage_dir) : dir_(std::move(stage_dir)) {}

void Ledger::load() {
  entries_.clear();
  const auto path = dir_ / "ledger.json";
  if (!fs::exists(path)) return;
  std::ifstream in(path);
  const auto doc = json::parse(in);
  std::string prev;
  for (const auto& j : doc.at("entries")) {
    LedgerEntry e{j.at("stage").get<std::string>(),
                  j.at("artifact").get<std::string>(),
                  j.at("hash").get<std::string>(),
                  j.at("config_hash").get<std::string>(),
                  j.at("seed").get<std::uint64_t>(),
                  j.at("wall_time").get<double>(),
                  j.at("prev").get<std::string>(),
                  j.at("chain").get<std::string>()};
    if (e.prev != prev || chain_hash(e) != e.chain)
      throw StaleArtifactError("ledger: " + path.string() + " was modified at entry " +
                               std::to_string(entries_.size()) + " (" + e.stage + ")");
    prev = e.chain;
    entries_.push_back(std::move(e));
  }
}

void Ledger::append(LedgerEntry entry) {
  entry.prev = entries_.empty() ? "" : entries_.back().chain;
  entry.chain = chain_hash(entry);
  entries_.push_back(std::move(entry));
}

void Ledger::save() const {
  json arr = json::array();
  for (const auto& e : entries_) arr.push_back(entry_to_json(e));
  fs::create_directories(dir_);
  const auto tmp = dir_ / "ledger.json.tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("ledger: cannot write " + tmp.string());
    out << json{{"format", "sigex-ledger/1"}, {"entries", arr}}.dump(2) << '\n';
  }
  fs::rename(tmp, dir_ / "ledger.json");
}

std::optional<LedgerEntry> Ledger::latest(const std::string& stage) const {
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it)
    if (it->stage == stage) return *it;
  return std::nullopt;
}

LedgerEntry Ledger::require(const std::string& stage, const std::string& config_hash,
                            const std::string& needed_by) const {
  const auto e = latest(stage);
  if (!e)
    throw MissingStageError(needed_by + ": requires stage '" + stage + "', which has not run");
  const auto path = dir_ / e->artifact;
  if (!fs::exists(path))
    throw MissingStageError(needed_by + ": artifact of stage '" + stage + "' is missing (" +
                            path.string() + ")");
  if (hash_tree(path) != e->hash)
    throw StaleArtifactError(needed_by + ": artifact of stage '" + stage +
                             "' changed since it was recorded; rerun '" + stage + "'");
  if (e->config_hash != config_hash)
    throw StaleArtifactError(needed_by + ": stage '" + stage +
                             "' ran with a different config; rerun '" + stage + "'");
  return *e;
}

std::vector<std::string> Ledger::verify() const {
  std::vector<std::string> stale, seen;
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
    if (std::find(seen.begin(), seen.end(), it->stage) != seen.end()) continue;
    seen.push_back(it->stage);
    const auto path = dir_ / it->artifact;
    if (!fs::exists(path) || hash_tree(path) != it->hash) stale.push_back(it->stage);
  }
  return stale;
}

}  // namespace sigex::pipecli
