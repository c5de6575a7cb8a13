#include "sigex/nnkit/network.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace sigex::nnkit {
namespace {

using MapMatrix = Eigen::Map<Matrix>;
using ConstMapMatrix = Eigen::Map<const Matrix>;

struct Geometry {
  int channels, height, width;  // the "big" grid the kernel slides over
  int kernel, stride, pad;
  int out_h, out_w;             // kernel positions
};

// colsT(pos, c*k*k + ki*k + kj) = x[c, pos_h*stride - pad + ki, pos_w*stride - pad + kj]
Matrix im2col(const double* x, const Geometry& g) {
  const int kk = g.kernel * g.kernel;
  Matrix cols = Matrix::Zero(g.out_h * g.out_w, g.channels * kk);
  for (int c = 0; c < g.channels; ++c) {
    const double* plane = x + static_cast<std::ptrdiff_t>(c) * g.height * g.width;
    for (int ki = 0; ki < g.kernel; ++ki) {
      for (int kj = 0; kj < g.kernel; ++kj) {
        double* dst = cols.col(c * kk + ki * g.kernel + kj).data();
        for (int oh = 0; oh < g.out_h; ++oh) {
          const int ih = oh * g.stride - g.pad + ki;
          if (ih < 0 || ih >= g.height) continue;
          for (int ow = 0; ow < g.out_w; ++ow) {
            const int iw = ow * g.stride - g.pad + kj;
            if (iw < 0 || iw >= g.width) continue;
            dst[oh * g.out_w + ow] = plane[ih * g.width + iw];
          }
        }
      }
    }
  }
  return cols;
}

void col2im(const Matrix& cols, const Geometry& g, double* x) {
  const int kk = g.kernel * g.kernel;
  for (int c = 0; c < g.channels; ++c) {
    double* plane = x + static_cast<std::ptrdiff_t>(c) * g.height * g.width;
    for (int ki = 0; ki < g.kernel; ++ki) {
      for (int kj = 0; kj < g.kernel; ++kj) {
        const double* src = cols.col(c * kk + ki * g.kernel + kj).data();
        for (int oh = 0; oh < g.out_h; ++oh) {
          const int ih = oh * g.stride - g.pad + ki;
          if (ih < 0 || ih >= g.height) continue;
          for (int ow = 0; ow < g.out_w; ++ow) {
            const int iw = ow * g.stride - g.pad + kj;
            if (iw < 0 || iw >= g.width) continue;
            plane[ih * g.width + iw] += src[oh * g.out_w + ow];
          }
        }
      }
    }
  }
}

Geometry conv_geometry(const Shape& in, const Shape& out, const LayerDesc& l) {
  return {in.channels, in.height, in.width, l.kernel, 1, l.same_padding ? l.kernel / 2 : 0,
          out.height, out.width};
}

// Transposed conv is the adjoint of a strided conv sliding over the output grid.
Geometry conv_transpose_geometry(const Shape& in, const Shape& out, const LayerDesc& l) {
  return {out.channels, out.height, out.width, l.kernel, l.stride, (l.kernel - l.stride) / 2,
          in.height, in.width};
}

int fan_in(const Shape& in, const LayerDesc& l) {
  switch (l.kind) {
    case LayerKind::Conv: return in.channels * l.kernel * l.kernel;
    case LayerKind::ConvTranspose:
      return std::max(1, in.channels * (l.kernel / l.stride) * (l.kernel / l.stride));
    default: return in.size();
  }
}

LayerParams param_shape(const Shape& in, const Shape& out, const LayerDesc& l) {
  LayerParams p;
  switch (l.kind) {
    case LayerKind::Conv:
      p.weight = Matrix::Zero(l.out_channels, in.channels * l.kernel * l.kernel);
      p.bias = Vector::Zero(l.out_channels);
      break;
    case LayerKind::ConvTranspose:
      p.weight = Matrix::Zero(l.out_channels * l.kernel * l.kernel, in.channels);
      p.bias = Vector::Zero(l.out_channels);
      break;
    case LayerKind::Dense:
      p.weight = Matrix::Zero(out.size(), in.size());
      p.bias = Vector::Zero(out.size());
      break;
    default: break;
  }
  return p;
}

Matrix layer_forward(const LayerDesc& l, const LayerParams& p, const Shape& in, const Shape& out,
                     const Matrix& x) {
  const Eigen::Index batch = x.cols();
  switch (l.kind) {
    case LayerKind::Conv: {
      const Geometry g = conv_geometry(in, out, l);
      Matrix y(out.size(), batch);
      for (Eigen::Index b = 0; b < batch; ++b) {
        const Matrix cols = im2col(x.col(b).data(), g);
        MapMatrix yb(y.col(b).data(), out.height * out.width, out.channels);
        yb.noalias() = cols * p.weight.transpose();
        yb.rowwise() += p.bias.transpose();
      }
      return y;
    }
    case LayerKind::ConvTranspose: {
      const Geometry g = conv_transpose_geometry(in, out, l);
      Matrix y = Matrix::Zero(out.size(), batch);
      for (Eigen::Index b = 0; b < batch; ++b) {
        ConstMapMatrix xb(x.col(b).data(), in.height * in.width, in.channels);
        const Matrix cols = xb * p.weight.transpose();
        col2im(cols, g, y.col(b).data());
        MapMatrix yb(y.col(b).data(), out.height * out.width, out.channels);
        yb.rowwise() += p.bias.transpose();
      }
      return y;
    }
    case LayerKind::MaxPool: {
      Matrix y(out.size(), batch);
      for (Eigen::Index b = 0; b < batch; ++b) {
        const double* src = x.col(b).data();
        double* dst = y.col(b).data();
        for (int c = 0; c < out.channels; ++c)
          for (int oh = 0; oh < out.height; ++oh)
            for (int ow = 0; ow < out.width; ++ow) {
              double best = -std::numeric_limits<double>::infinity();
              for (int i = 0; i < l.pool; ++i)
                for (int j = 0; j < l.pool; ++j)
                  best = std::max(best, src[(c * in.height + oh * l.pool + i) * in.width +
                                            ow * l.pool + j]);
              dst[(c * out.height + oh) * out.width + ow] = best;
            }
      }
      return y;
    }
    case LayerKind::Dense: {
      Matrix y = p.weight * x;
      y.colwise() += p.bias;
      return y;
    }
    case LayerKind::Relu: return x.cwiseMax(0.0);
    case LayerKind::Sigmoid:
      return x.unaryExpr([](double v) {
        return v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
      });
    case LayerKind::Softmax: {
      Matrix y(x.rows(), batch);
      for (Eigen::Index b = 0; b < batch; ++b) {
        const double top = x.col(b).maxCoeff();
        y.col(b) = (x.col(b).array() - top).exp().matrix();
        y.col(b) /= y.col(b).sum();
      }
      return y;
    }
    case LayerKind::Flatten:
    case LayerKind::Reshape:
    case LayerKind::Linear: return x;
  }
  return x;
}

Matrix layer_backward(const LayerDesc& l, const LayerParams& p, const Shape& in, const Shape& out,
                      const Matrix& x, const Matrix& y, const Matrix& dy, LayerParams& dp,
                      bool need_input_grad) {
  const Eigen::Index batch = x.cols();
  switch (l.kind) {
    case LayerKind::Conv: {
      const Geometry g = conv_geometry(in, out, l);
      Matrix dx = Matrix::Zero(in.size(), need_input_grad ? batch : 0);
      for (Eigen::Index b = 0; b < batch; ++b) {
        const Matrix cols = im2col(x.col(b).data(), g);
        ConstMapMatrix dyb(dy.col(b).data(), out.height * out.width, out.channels);
        dp.weight.noalias() += dyb.transpose() * cols;
        dp.bias += dyb.colwise().sum().transpose();
        if (need_input_grad) {
          const Matrix dcols = dyb * p.weight;
          col2im(dcols, g, dx.col(b).data());
        }
      }
      return dx;
    }
    case LayerKind::ConvTranspose: {
      const Geometry g = conv_transpose_geometry(in, out, l);
      Matrix dx(in.size(), need_input_grad ? batch : 0);
      for (Eigen::Index b = 0; b < batch; ++b) {
        const Matrix dcols = im2col(dy.col(b).data(), g);
        ConstMapMatrix xb(x.col(b).data(), in.height * in.width, in.channels);
        dp.weight.noalias() += dcols.transpose() * xb;
        ConstMapMatrix dyb(dy.col(b).data(), out.height * out.width, out.channels);
        dp.bias += dyb.colwise().sum().transpose();
        if (need_input_grad) {
          MapMatrix dxb(dx.col(b).data(), in.height * in.width, in.channels);
          dxb.noalias() = dcols * p.weight;
        }
      }
      return dx;
    }
    case LayerKind::MaxPool: {
      Matrix dx = Matrix::Zero(in.size(), batch);
      for (Eigen::Index b = 0; b < batch; ++b) {
        const double* src = x.col(b).data();
        const double* g = dy.col(b).data();
        double* dst = dx.col(b).data();
        for (int c = 0; c < out.channels; ++c)
          for (int oh = 0; oh < out.height; ++oh)
            for (int ow = 0; ow < out.width; ++ow) {
              int arg = -1;
              double best = -std::numeric_limits<double>::infinity();
              for (int i = 0; i < l.pool; ++i)
                for (int j = 0; j < l.pool; ++j) {
                  const int idx = (c * in.height + oh * l.pool + i) * in.width + ow * l.pool + j;
                  if (src[idx] > best) {
                    best = src[idx];
                    arg = idx;
                  }
                }
              dst[arg] += g[(c * out.height + oh) * out.width + ow];
            }
      }
      return dx;
    }
    case LayerKind::Dense: {
      dp.weight.noalias() += dy * x.transpose();
      dp.bias += dy.rowwise().sum();
      if (!need_input_grad) return Matrix();
      return p.weight.transpose() * dy;
    }
    case LayerKind::Relu:
      return dy.cwiseProduct(y.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; }));
    case LayerKind::Sigmoid:
      return dy.cwiseProduct(y.cwiseProduct((1.0 - y.array()).matrix()));
    case LayerKind::Softmax: {
      Matrix dx(dy.rows(), batch);
      for (Eigen::Index b = 0; b < batch; ++b) {
        const double dot = dy.col(b).dot(y.col(b));
        dx.col(b) = y.col(b).cwiseProduct((dy.col(b).array() - dot).matrix());
      }
      return dx;
    }
    case LayerKind::Flatten:
    case LayerKind::Reshape:
    case LayerKind::Linear: return dy;
  }
  return dy;
}

void check_batch(const NetworkParams& params, const Matrix& batch) {
  if (batch.rows() != params.spec.input.size())
    throw std::invalid_argument("network input: expected " + params.spec.input.str() + " (" +
                                std::to_string(params.spec.input.size()) + " values), got " +
                                std::to_string(batch.rows()));
  if (params.layers.size() != params.spec.layers.size())
    throw std::invalid_argument("network params do not match spec layer count");
}

}  // namespace

NetworkParams NetworkParams::zeros(const NetworkSpec& spec) {
  NetworkParams p;
  p.spec = spec;
  const auto shapes = spec.shapes();
  Shape in = spec.input;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    p.layers.push_back(param_shape(in, shapes[i], spec.layers[i]));
    in = shapes[i];
  }
  return p;
}

NetworkParams NetworkParams::init(const NetworkSpec& spec, std::uint64_t seed) {
  NetworkParams p = zeros(spec);
  p.seed = seed;
  std::mt19937_64 rng(seed);
  const auto shapes = spec.shapes();
  Shape in = spec.input;
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    if (spec.layers[i].has_params()) {
      const double limit = std::sqrt(6.0 / fan_in(in, spec.layers[i]));
      std::uniform_real_distribution<double> dist(-limit, limit);
      auto& w = p.layers[i].weight;
      for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = dist(rng);
    }
    in = shapes[i];
  }
  p.snap_to_float();
  return p;
}

bool NetworkParams::all_finite() const {
  for (const auto& l : layers)
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  return true;
}

std::size_t NetworkParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return n;
}

void NetworkParams::snap_to_float() {
  auto snap = [](double v) { return static_cast<double>(static_cast<float>(v)); };
  for (auto& l : layers) {
    l.weight = l.weight.unaryExpr(snap);
    l.bias = l.bias.unaryExpr(snap);
  }
}

Trace forward_trace(const NetworkParams& params, const Matrix& batch) {
  check_batch(params, batch);
  const auto shapes = params.spec.shapes();
  Trace t;
  t.values.reserve(params.spec.layers.size() + 1);
  t.values.push_back(batch);
  Shape in = params.spec.input;
  for (std::size_t i = 0; i < params.spec.layers.size(); ++i) {
    t.values.push_back(
        layer_forward(params.spec.layers[i], params.layers[i], in, shapes[i], t.values.back()));
    in = shapes[i];
  }
  return t;
}

Matrix infer(const NetworkParams& params, const Matrix& batch) {
  check_batch(params, batch);
  const auto shapes = params.spec.shapes();
  Matrix cur = batch;
  Shape in = params.spec.input;
  for (std::size_t i = 0; i < params.spec.layers.size(); ++i) {
    cur = layer_forward(params.spec.layers[i], params.layers[i], in, shapes[i], cur);
    in = shapes[i];
  }
  return cur;
}

std::vector<LayerParams> backward(const NetworkParams& params, const Trace& trace,
                                  const Matrix& output_grad, Matrix* input_grad) {
  const auto shapes = params.spec.shapes();
  const auto n = params.spec.layers.size();
  std::vector<LayerParams> grads(n);
  for (std::size_t i = 0; i < n; ++i) {
    grads[i].weight = Matrix::Zero(params.layers[i].weight.rows(), params.layers[i].weight.cols());
    grads[i].bias = Vector::Zero(params.layers[i].bias.size());
  }
  // Parameter gradients stop being needed below the first parameterized layer.
  std::size_t first_param = n;
  for (std::size_t i = 0; i < n; ++i)
    if (params.spec.layers[i].has_params()) {
      first_param = i;
      break;
    }
  Matrix g = output_grad;
  for (std::size_t k = n; k-- > 0;) {
    const bool need_input = k > first_param || input_grad != nullptr;
    if (k < first_param && input_grad == nullptr) break;
    const Shape in = k == 0 ? params.spec.input : shapes[k - 1];
    g = layer_backward(params.spec.layers[k], params.layers[k], in, shapes[k], trace.values[k],
                       trace.values[k + 1], g, grads[k], need_input);
  }
  if (input_grad) *input_grad = std::move(g);
  return grads;
}

double loss_and_grad(Loss loss, const Matrix& output, const Matrix& target, Matrix& output_grad) {
  if (output.rows() != target.rows() || output.cols() != target.cols())
    throw std::invalid_argument("loss: output/target shape mismatch");
  const auto batch = static_cast<double>(output.cols());
  if (batch == 0) throw std::invalid_argument("loss: empty batch");
  constexpr double kTiny = 1e-12;
  double total = 0.0;
  output_grad.resize(output.rows(), output.cols());
  switch (loss) {
    case Loss::CrossEntropy:
      for (Eigen::Index i = 0; i < output.size(); ++i) {
        const double p = std::max(output.data()[i], kTiny);
        const double y = target.data()[i];
        total -= y * std::log(p);
        output_grad.data()[i] = -y / p / batch;
      }
      return total / batch;
    case Loss::MeanSquared: {
      const auto features = static_cast<double>(output.rows());
      const Matrix diff = output - target;
      output_grad = 2.0 * diff / (features * batch);
      return diff.squaredNorm() / (features * batch);
    }
    case Loss::BinaryCrossEntropy: {
      const auto features = static_cast<double>(output.rows());
      for (Eigen::Index i = 0; i < output.size(); ++i) {
        const double p = std::clamp(output.data()[i], kTiny, 1.0 - kTiny);
        const double y = target.data()[i];
        total -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
        output_grad.data()[i] = (p - y) / (p * (1.0 - p)) / (features * batch);
      }
      return total / (features * batch);
    }
  }
  return total;
}

Gradients grad(const NetworkParams& params, const Matrix& batch, const Matrix& targets,
               Loss loss) {
  if (batch.cols() == 0) throw std::invalid_argument("grad: empty batch");
  const Trace trace = forward_trace(params, batch);
  Matrix dout;
  Gradients g;
  g.loss = loss_and_grad(loss, trace.output(), targets, dout);
  if (!std::isfinite(g.loss)) throw DivergenceError("grad: non-finite loss", -1);
  g.layers = backward(params, trace, dout);
  return g;
}

Matrix image_column(const Grid& image) {
  Matrix col(static_cast<Eigen::Index>(image.size()), 1);
  std::copy(image.cells().begin(), image.cells().end(), col.data());
  return col;
}

Matrix image_batch(const std::vector<const Grid*>& images) {
  if (images.empty()) return Matrix();
  Matrix batch(static_cast<Eigen::Index>(images.front()->size()),
               static_cast<Eigen::Index>(images.size()));
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (!images[i]->same_shape(*images.front()))
      throw std::invalid_argument("image_batch: images differ in shape");
    std::copy(images[i]->cells().begin(), images[i]->cells().end(),
              batch.col(static_cast<Eigen::Index>(i)).data());
  }
  return batch;
}

Grid column_image(const Eigen::Ref<const Vector>& column, int rows, int cols) {
  if (column.size() != static_cast<Eigen::Index>(rows) * cols)
    throw std::invalid_argument("column_image: size mismatch");
  return Grid(rows, cols, std::vector<double>(column.data(), column.data() + column.size()));
}

ForwardResult forward(const NetworkParams& params, const Grid& image,
                      const std::string& sample_id) {
  const Shape& in = params.spec.input;
  if (in.channels != 1 || image.rows() != in.height || image.cols() != in.width)
    throw std::invalid_argument("forward: expected image " + std::to_string(in.height) + "x" +
                                std::to_string(in.width) + ", got " +
                                std::to_string(image.rows()) + "x" +
                                std::to_string(image.cols()));
  const Trace trace = forward_trace(params, image_column(image));
  ForwardResult r;
  const Matrix& out = trace.output();
  r.scores.assign(out.data(), out.data() + out.size());

  if (const int tap = params.spec.embedding_tap(); tap >= 0) {
    const Matrix& e = trace.values[tap + 1];
    r.embedding.values.assign(e.data(), e.data() + e.size());
  }
  r.embedding.sample_id = sample_id;

  if (const int tap = params.spec.activation_tap(); tap >= 0) {
    const Shape s = params.spec.shapes()[tap];
    const Matrix& a = trace.values[tap + 1];
    const int plane = s.height * s.width;
    for (int c = 0; c < s.channels; ++c)
      r.activations.maps.emplace_back(
          s.height, s.width,
          std::vector<double>(a.data() + c * plane, a.data() + (c + 1) * plane));
  }
  r.activations.sample_id = sample_id;
  if (const int tap = params.spec.activation_tap(); tap >= 0) {
    const auto m = params.spec.pixel_map(tap);
    r.activations.scale = m.scale;
    r.activations.offset = m.offset;
  }
  return r;
}

}  // namespace sigex::nnkit
