#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "sigex/core/grid.hpp"
#include "sigex/nnkit/spec.hpp"

namespace sigex::nnkit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Conv: weight (out, in*k*k). ConvTranspose: weight (out*k*k, in). Dense: weight (out, in).
struct LayerParams {
  Matrix weight;
  Vector bias;
};

struct NetworkParams {
  NetworkSpec spec;
  std::vector<LayerParams> layers;  // one per spec layer; empty for parameterless layers
  std::uint64_t seed = 0;
  int epochs = 0;
  nlohmann::json extra = nlohmann::json::object();

  /// Uniform fan-in initialization, U(-sqrt(6/fan_in), sqrt(6/fan_in)), zero biases.
  static NetworkParams init(const NetworkSpec& spec, std::uint64_t seed);
  static NetworkParams zeros(const NetworkSpec& spec);

  bool all_finite() const;
  std::size_t parameter_count() const;
  /// Rounds every parameter to float32 so that save/load round trips exactly.
  void snap_to_float();
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, int epoch)
      : std::runtime_error(what), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

/// Batches are (features, batch) with features laid out channel, row, column.
struct Trace {
  std::vector<Matrix> values;  // values[0] = input, values[i + 1] = output of layer i
  const Matrix& output() const { return values.back(); }
};

Trace forward_trace(const NetworkParams& params, const Matrix& batch);
Matrix infer(const NetworkParams& params, const Matrix& batch);

/// Backpropagates dLoss/dOutput through a trace. Returns per-layer parameter
/// gradients; writes dLoss/dInput into `input_grad` when given.
std::vector<LayerParams> backward(const NetworkParams& params, const Trace& trace,
                                  const Matrix& output_grad, Matrix* input_grad = nullptr);

enum class Loss { CrossEntropy, MeanSquared, BinaryCrossEntropy };

/// Mean over the batch of the per-sample loss (cross-entropy summed over
/// classes; the other two averaged over features). Fills dLoss/dOutput.
double loss_and_grad(Loss loss, const Matrix& output, const Matrix& target, Matrix& output_grad);

struct Gradients {
  double loss = 0.0;
  std::vector<LayerParams> layers;
};

/// Exact gradient of the mean loss over a batch. Throws DivergenceError on a
/// non-finite loss.
Gradients grad(const NetworkParams& params, const Matrix& batch, const Matrix& targets, Loss loss);

// Per-image taps.
using ClassScores = std::vector<double>;

struct Embedding {
  std::vector<double> values;
  std::string sample_id;
  int label = -1;
};

struct ActivationStack {
  std::vector<Grid> maps;
  std::string sample_id;
  /// Map pixel p sits at input coordinate offset + scale * p along both axes.
  /// scale 0 means unknown (upsampling then assumes evenly spread pixel centres).
  double scale = 0.0;
  double offset = 0.0;
};

struct ForwardResult {
  ClassScores scores;
  Embedding embedding;
  ActivationStack activations;
};

/// Flattens a single-channel image into a one-column batch.
Matrix image_column(const Grid& image);
Matrix image_batch(const std::vector<const Grid*>& images);
Grid column_image(const Eigen::Ref<const Vector>& column, int rows, int cols);

/// One pass producing class scores, the embedding tap, and the last-conv
/// activations. Throws std::invalid_argument naming the expected dims.
ForwardResult forward(const NetworkParams& params, const Grid& image,
                      const std::string& sample_id = "");

}  // namespace sigex::nnkit
