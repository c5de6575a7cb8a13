#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "sigex/nnkit/optimizer.hpp"
#include "sigex/sonogen/corpus.hpp"

namespace sigex::wgan {

struct Losses {
  double critic = 0.0;     // mean(fake) - mean(real)
  double generator = 0.0;  // -mean(fake)
};

Losses wasserstein_losses(const std::vector<double>& real_scores,
                          const std::vector<double>& fake_scores);

/// Threshold at the midpoint of the two score means; reals above it and
/// fakes below it count as correct.
double accuracy_probe(const std::vector<double>& real_scores,
                      const std::vector<double>& fake_scores);

enum class Objective { Wasserstein, BinaryCrossEntropy };
enum class Alternation { PerBatch, PerEpoch };

struct WganConfig {
  int epochs = 100;
  int batch_size = 20;
  double clip = 0.01;
  int critic_steps = 5;
  Objective objective = Objective::Wasserstein;
  /// PerBatch: critic_steps critic updates then one generator update for
  /// every real batch. PerEpoch: critic_steps whole epochs of critic updates,
  /// then as many epochs of generator updates.
  Alternation alternation = Alternation::PerBatch;
  nnkit::OptimizerConfig critic_optimizer{nnkit::OptimizerKind::RmsProp, 5e-5};
  nnkit::OptimizerConfig generator_optimizer{nnkit::OptimizerKind::RmsProp, 5e-5};
  std::uint64_t seed = 0;
};

struct GanEpoch {
  int epoch = 0;
  double critic_loss = 0.0;
  double generator_loss = 0.0;
  double probe = 0.0;
  /// Largest |critic parameter| seen after any critic step this epoch.
  double max_abs_critic = 0.0;
};

struct GanBundle {
  nnkit::NetworkParams generator;
  nnkit::NetworkParams critic;
  std::vector<GanEpoch> history;
  int class_id = -1;
};

class WganDivergence : public nnkit::DivergenceError {
 public:
  WganDivergence(const std::string& what, int epoch, std::vector<GanEpoch> history)
      : nnkit::DivergenceError(what, epoch), history_(std::move(history)) {}
  const std::vector<GanEpoch>& history() const { return history_; }

 private:
  std::vector<GanEpoch> history_;
};

/// Images as columns in [0,1]. Requires at least batch_size images.
GanBundle train_wgan(const nnkit::Matrix& images, int rows, int cols, const WganConfig& config);

/// Train-split, non-synthetic samples of one class.
GanBundle train_wgan(const sonogen::DatasetManifest& manifest, int class_id,
                     const WganConfig& config);

/// Uniform [-1,1] latent vectors, one per column.
nnkit::Matrix latent_batch(int count, std::uint64_t seed);

std::vector<double> critic_scores(const nnkit::NetworkParams& critic, const nnkit::Matrix& images);

std::vector<Grid> sample_synthetic(const GanBundle& bundle, int count, std::uint64_t seed);

/// Mean probe over the last `n` history entries.
double final_probe(const GanBundle& bundle, int n = 10);

nlohmann::json history_to_json(const std::vector<GanEpoch>& history);

/// Writes generator.nnp, critic.nnp and history.json into `dir`.
void save_bundle(const GanBundle& bundle, const std::filesystem::path& dir);
GanBundle load_bundle(const std::filesystem::path& dir);

}  // namespace sigex::wgan
