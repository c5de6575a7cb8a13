#include "sigex/nnkit/optimizer.hpp"

#include <cmath>

namespace sigex::nnkit {

OptimizerKind optimizer_kind_from_name(const std::string& name) {
  if (name == "adam") return OptimizerKind::Adam;
  if (name == "sgd") return OptimizerKind::Sgd;
  if (name == "rmsprop") return OptimizerKind::RmsProp;
  throw std::invalid_argument("unknown optimizer: " + name);
}

Optimizer::Optimizer(OptimizerConfig config, const NetworkParams& params)
    : config_(config), frozen_(params.layers.size(), false) {
  for (const auto& l : params.layers) {
    LayerParams z{Matrix::Zero(l.weight.rows(), l.weight.cols()), Vector::Zero(l.bias.size())};
    first_.push_back(z);
    second_.push_back(z);
  }
}

void Optimizer::step(NetworkParams& params, const std::vector<LayerParams>& grads) {
  ++steps_;
  const double lr = config_.learning_rate;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));

  auto update = [&](auto& value, const auto& g, auto& m, auto& v) {
    switch (config_.kind) {
      case OptimizerKind::Sgd:
        value -= lr * g;
        break;
      case OptimizerKind::RmsProp:
        v = config_.rho * v + (1.0 - config_.rho) * g.cwiseProduct(g);
        value.array() -= lr * g.array() / (v.array().sqrt() + config_.epsilon);
        break;
      case OptimizerKind::Adam:
        m = config_.beta1 * m + (1.0 - config_.beta1) * g;
        v = config_.beta2 * v + (1.0 - config_.beta2) * g.cwiseProduct(g);
        value.array() -=
            lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + config_.epsilon);
        break;
    }
  };

  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    if (frozen_[i] || params.layers[i].weight.size() == 0) continue;
    update(params.layers[i].weight, grads[i].weight, first_[i].weight, second_[i].weight);
    update(params.layers[i].bias, grads[i].bias, first_[i].bias, second_[i].bias);
  }
}

void clip_weights(NetworkParams& params, double bound) {
  for (auto& l : params.layers) {
    l.weight = l.weight.cwiseMax(-bound).cwiseMin(bound);
    l.bias = l.bias.cwiseMax(-bound).cwiseMin(bound);
  }
}

double max_abs_parameter(const NetworkParams& params) {
  double m = 0.0;
  for (const auto& l : params.layers) {
    if (l.weight.size()) m = std::max(m, l.weight.cwiseAbs().maxCoeff());
    if (l.bias.size()) m = std::max(m, l.bias.cwiseAbs().maxCoeff());
  }
  return m;
}

}  // namespace sigex::nnkit
