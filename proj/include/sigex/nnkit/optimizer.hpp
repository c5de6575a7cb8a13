#pragma once

#include <string>
#include <vector>

#include "sigex/nnkit/network.hpp"

namespace sigex::nnkit {

enum class OptimizerKind { Adam, Sgd, RmsProp };

OptimizerKind optimizer_kind_from_name(const std::string& name);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double rho = 0.9;  // RMSProp decay
};

class Optimizer {
 public:
  Optimizer(OptimizerConfig config, const NetworkParams& params);

  /// Applies one descent step. Frozen layers are left untouched.
  void step(NetworkParams& params, const std::vector<LayerParams>& grads);
  void freeze(std::size_t layer) { frozen_.at(layer) = true; }

 private:
  OptimizerConfig config_;
  std::vector<LayerParams> first_;
  std::vector<LayerParams> second_;
  std::vector<bool> frozen_;
  long steps_ = 0;
};

/// Clamps every weight and bias into [-bound, bound].
void clip_weights(NetworkParams& params, double bound);
double max_abs_parameter(const NetworkParams& params);

}  // namespace sigex::nnkit
