#include "aset/agent/qnetwork.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "aset/catalog.hpp"

namespace aset::agent {

namespace {

using Eigen::Index;
using Eigen::Map;
using Eigen::MatrixXd;
using Eigen::VectorXd;

std::size_t ceil_half(std::size_t n) { return (n + 1) / 2; }

// One sample's columns; row r = (ky * k + kx) * channels + c, so both
// sides stay contiguous in c. `in` must have contiguous columns.
void im2col(const Eigen::Ref<const MatrixXd>& in, std::size_t h, std::size_t w, std::size_t k,
            MatrixXd& cols) {
  const Index ch = in.rows();
  const Index pad = static_cast<Index>((k - 1) / 2);
  const Index H = static_cast<Index>(h), W = static_cast<Index>(w), K = static_cast<Index>(k);
  cols.resize(ch * K * K, H * W);
  const double* src = in.data();
  double* dst = cols.data();
  for (Index y = 0; y < H; ++y) {
    for (Index x = 0; x < W; ++x) {
      for (Index ky = 0; ky < K; ++ky) {
        const Index sy = y + ky - pad;
        for (Index kx = 0; kx < K; ++kx, dst += ch) {
          const Index sx = x + kx - pad;
          if (sy < 0 || sy >= H || sx < 0 || sx >= W) {
            std::fill(dst, dst + ch, 0.0);
          } else {
            const double* from = src + (sy * W + sx) * ch;
            std::copy(from, from + ch, dst);
          }
        }
      }
    }
  }
}

// Adjoint of im2col: accumulates into `out` (channels x h*w, contiguous).
void col2im(const MatrixXd& cols, std::size_t h, std::size_t w, std::size_t k,
            Eigen::Ref<MatrixXd> out) {
  const Index ch = out.rows();
  const Index pad = static_cast<Index>((k - 1) / 2);
  const Index H = static_cast<Index>(h), W = static_cast<Index>(w), K = static_cast<Index>(k);
  const double* src = cols.data();
  double* dst = out.data();
  for (Index y = 0; y < H; ++y) {
    for (Index x = 0; x < W; ++x) {
      for (Index ky = 0; ky < K; ++ky) {
        const Index sy = y + ky - pad;
        for (Index kx = 0; kx < K; ++kx, src += ch) {
          const Index sx = x + kx - pad;
          if (sy < 0 || sy >= H || sx < 0 || sx >= W) continue;
          double* to = dst + (sy * W + sx) * ch;
          for (Index c = 0; c < ch; ++c) to[c] += src[c];
        }
      }
    }
  }
}

MatrixXd max_pool(const MatrixXd& in, std::size_t h, std::size_t w, std::size_t batch,
                  std::vector<Index>& argmax) {
  const std::size_t ph = ceil_half(h), pw = ceil_half(w);
  const Index channels = in.rows();
  MatrixXd out(channels, static_cast<Index>(batch * ph * pw));
  argmax.assign(static_cast<std::size_t>(out.size()), 0);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t py = 0; py < ph; ++py) {
      for (std::size_t px = 0; px < pw; ++px) {
        const Index oc = static_cast<Index>((b * ph + py) * pw + px);
        for (Index c = 0; c < channels; ++c) {
          double best = -std::numeric_limits<double>::infinity();
          Index best_col = 0;
          for (std::size_t y = 2 * py; y < std::min(2 * py + 2, h); ++y) {
            for (std::size_t x = 2 * px; x < std::min(2 * px + 2, w); ++x) {
              const Index col = static_cast<Index>((b * h + y) * w + x);
              if (in(c, col) > best) {
                best = in(c, col);
                best_col = col;
              }
            }
          }
          out(c, oc) = best;
          argmax[static_cast<std::size_t>(oc * channels + c)] = best_col;
        }
      }
    }
  }
  return out;
}

}  // namespace

void QNetworkConfig::validate() const {
  std::vector<std::string> errors;
  if (in_channels == 0 || height == 0 || width == 0) errors.push_back("input shape must be nonempty");
  if (conv_channels.empty()) errors.push_back("at least one conv layer is required");
  for (auto c : conv_channels) {
    if (c == 0) errors.push_back("conv channel counts must be positive");
  }
  if (kernel == 0) errors.push_back("kernel must be positive");
  if (hidden == 0) errors.push_back("hidden width must be positive");
  if (actions == 0) errors.push_back("action count must be positive");
  if (!errors.empty()) throw ValidationError(std::move(errors));
}

QNetworkConfig network_config_for(const StateShape& shape, std::size_t actions) {
  QNetworkConfig config;
  config.in_channels = shape.workers;
  config.height = shape.features;
  config.width = shape.slots;
  config.actions = actions;
  return config;
}

nlohmann::json network_config_to_json(const QNetworkConfig& c) {
  return {{"in_channels", c.in_channels}, {"height", c.height},
          {"width", c.width},             {"conv_channels", c.conv_channels},
          {"kernel", c.kernel},           {"hidden", c.hidden},
          {"actions", c.actions},         {"log_input", c.log_input}};
}

QNetworkConfig network_config_from_json(const nlohmann::json& doc) {
  QNetworkConfig c;
  c.in_channels = doc.at("in_channels").get<std::size_t>();
  c.height = doc.at("height").get<std::size_t>();
  c.width = doc.at("width").get<std::size_t>();
  c.conv_channels = doc.at("conv_channels").get<std::vector<std::size_t>>();
  c.kernel = doc.at("kernel").get<std::size_t>();
  c.hidden = doc.at("hidden").get<std::size_t>();
  c.actions = doc.at("actions").get<std::size_t>();
  c.log_input = doc.value("log_input", true);
  c.validate();
  return c;
}

QNetwork::QNetwork(QNetworkConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  Index offset = 0;
  std::size_t channels = config_.in_channels, h = config_.height, w = config_.width;
  const std::size_t kk = config_.kernel * config_.kernel;
  for (std::size_t out : config_.conv_channels) {
    ConvGeometry g{channels, out, h, w, ceil_half(h), ceil_half(w), offset, 0};
    offset += static_cast<Index>(out * channels * kk);
    g.bias_offset = offset;
    offset += static_cast<Index>(out);
    conv_.push_back(g);
    channels = out;
    h = g.pooled_height;
    w = g.pooled_width;
  }
  flat_size_ = channels * h * w;
  fc1_weight_ = offset;
  offset += static_cast<Index>(config_.hidden * flat_size_);
  fc1_bias_ = offset;
  offset += static_cast<Index>(config_.hidden);
  fc2_weight_ = offset;
  offset += static_cast<Index>(config_.actions * config_.hidden);
  fc2_bias_ = offset;
  offset += static_cast<Index>(config_.actions);
  params_ = VectorXd::Zero(offset);

  std::mt19937_64 rng(seed);
  auto fill = [&](Index start, Index count, double bound) {
    std::uniform_real_distribution<double> u(-bound, bound);
    for (Index i = 0; i < count; ++i) params_[start + i] = u(rng);
  };
  for (const auto& g : conv_) {
    fill(g.weight_offset, static_cast<Index>(g.out_channels * g.in_channels * kk),
         std::sqrt(6.0 / static_cast<double>(g.in_channels * kk)));
  }
  fill(fc1_weight_, static_cast<Index>(config_.hidden * flat_size_),
       std::sqrt(6.0 / static_cast<double>(flat_size_)));
  fill(fc2_weight_, static_cast<Index>(config_.actions * config_.hidden),
       1.0 / std::sqrt(static_cast<double>(config_.hidden)));
}

void QNetwork::set_parameters(const VectorXd& params) {
  if (params.size() != params_.size()) throw std::invalid_argument("parameter count mismatch");
  params_ = params;
}

MatrixXd QNetwork::input_matrix(const std::vector<const StateTensor*>& states) const {
  const std::size_t hw = config_.height * config_.width;
  MatrixXd a(static_cast<Index>(config_.in_channels), static_cast<Index>(states.size() * hw));
  for (std::size_t b = 0; b < states.size(); ++b) {
    const auto& s = *states[b];
    if (s.shape().workers != config_.in_channels || s.shape().features != config_.height ||
        s.shape().slots != config_.width) {
      throw std::invalid_argument("state shape does not match the network input");
    }
    const auto& data = s.data();
    for (std::size_t p = 0; p < hw; ++p) {
      for (std::size_t c = 0; c < config_.in_channels; ++c) {
        const double x = data[c * hw + p];
        // Observations are mostly zero; skip log1p for those.
        a(static_cast<Index>(c), static_cast<Index>(b * hw + p)) =
            config_.log_input && x != 0.0 ? std::log1p(std::max(0.0, x)) : x;
      }
    }
  }
  return a;
}

MatrixXd QNetwork::run(const std::vector<const StateTensor*>& states, Cache* cache) const {
  const std::size_t batch = states.size();
  if (batch == 0) throw std::invalid_argument("empty batch");
  const std::size_t k = config_.kernel;
  MatrixXd a = input_matrix(states);
  if (cache) {
    cache->batch = batch;
    cache->inputs.clear();
    cache->pre.clear();
    cache->argmax.clear();
  }
  MatrixXd cols;
  for (const auto& g : conv_) {
    const Index hw = static_cast<Index>(g.height * g.width);
    const Map<const MatrixXd> weight(params_.data() + g.weight_offset,
                                     static_cast<Index>(g.out_channels),
                                     static_cast<Index>(g.in_channels * k * k));
    const Map<const VectorXd> bias(params_.data() + g.bias_offset,
                                   static_cast<Index>(g.out_channels));
    MatrixXd pre(static_cast<Index>(g.out_channels), static_cast<Index>(batch) * hw);
    for (Index b = 0; b < static_cast<Index>(batch); ++b) {
      im2col(a.middleCols(b * hw, hw), g.height, g.width, k, cols);
      pre.middleCols(b * hw, hw).noalias() = weight * cols;
    }
    pre.colwise() += bias;
    std::vector<Index> argmax;
    MatrixXd pooled = max_pool(pre.cwiseMax(0.0), g.height, g.width, batch, argmax);
    if (cache) {
      cache->inputs.push_back(std::move(a));
      cache->pre.push_back(std::move(pre));
      cache->argmax.push_back(std::move(argmax));
    }
    a = std::move(pooled);
  }
  // Flatten channel-major per sample.
  const auto& last = conv_.back();
  const std::size_t pos = last.pooled_height * last.pooled_width;
  MatrixXd flat(static_cast<Index>(flat_size_), static_cast<Index>(batch));
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t c = 0; c < last.out_channels; ++c) {
      for (std::size_t p = 0; p < pos; ++p) {
        flat(static_cast<Index>(c * pos + p), static_cast<Index>(b)) =
            a(static_cast<Index>(c), static_cast<Index>(b * pos + p));
      }
    }
  }
  const Map<const MatrixXd> w1(params_.data() + fc1_weight_, static_cast<Index>(config_.hidden),
                               static_cast<Index>(flat_size_));
  const Map<const VectorXd> b1(params_.data() + fc1_bias_, static_cast<Index>(config_.hidden));
  const Map<const MatrixXd> w2(params_.data() + fc2_weight_, static_cast<Index>(config_.actions),
                               static_cast<Index>(config_.hidden));
  const Map<const VectorXd> b2(params_.data() + fc2_bias_, static_cast<Index>(config_.actions));
  MatrixXd hidden_pre = w1 * flat;
  hidden_pre.colwise() += b1;
  MatrixXd hidden = hidden_pre.cwiseMax(0.0);
  MatrixXd out = w2 * hidden;
  out.colwise() += b2;
  if (cache) {
    cache->flat = std::move(flat);
    cache->hidden_pre = std::move(hidden_pre);
    cache->hidden = std::move(hidden);
  }
  return out;
}

VectorXd QNetwork::forward(const StateTensor& state) const { return run({&state}, nullptr).col(0); }

MatrixXd QNetwork::forward_batch(const std::vector<const StateTensor*>& states) const {
  return run(states, nullptr);
}

MatrixXd QNetwork::forward_batch(const std::vector<const StateTensor*>& states,
                                 Cache& cache) const {
  return run(states, &cache);
}

VectorXd QNetwork::backward(const Cache& cache, const MatrixXd& d_out) const {
  const std::size_t batch = cache.batch;
  if (d_out.rows() != static_cast<Index>(config_.actions) ||
      d_out.cols() != static_cast<Index>(batch)) {
    throw std::invalid_argument("output gradient shape mismatch");
  }
  VectorXd grad = VectorXd::Zero(params_.size());
  const Map<const MatrixXd> w1(params_.data() + fc1_weight_, static_cast<Index>(config_.hidden),
                               static_cast<Index>(flat_size_));
  const Map<const MatrixXd> w2(params_.data() + fc2_weight_, static_cast<Index>(config_.actions),
                               static_cast<Index>(config_.hidden));
  Map<MatrixXd>(grad.data() + fc2_weight_, w2.rows(), w2.cols()) = d_out * cache.hidden.transpose();
  grad.segment(fc2_bias_, w2.rows()) = d_out.rowwise().sum();
  MatrixXd d_hidden = w2.transpose() * d_out;
  d_hidden = d_hidden.cwiseProduct((cache.hidden_pre.array() > 0.0).cast<double>().matrix());
  Map<MatrixXd>(grad.data() + fc1_weight_, w1.rows(), w1.cols()) = d_hidden * cache.flat.transpose();
  grad.segment(fc1_bias_, w1.rows()) = d_hidden.rowwise().sum();
  const MatrixXd d_flat = w1.transpose() * d_hidden;

  const auto& last = conv_.back();
  const std::size_t pos = last.pooled_height * last.pooled_width;
  MatrixXd d_pooled(static_cast<Index>(last.out_channels), static_cast<Index>(batch * pos));
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t c = 0; c < last.out_channels; ++c) {
      for (std::size_t p = 0; p < pos; ++p) {
        d_pooled(static_cast<Index>(c), static_cast<Index>(b * pos + p)) =
            d_flat(static_cast<Index>(c * pos + p), static_cast<Index>(b));
      }
    }
  }

  const std::size_t k = config_.kernel;
  for (std::size_t l = conv_.size(); l-- > 0;) {
    const auto& g = conv_[l];
    const auto& pre = cache.pre[l];
    const auto& argmax = cache.argmax[l];
    MatrixXd d_pre = MatrixXd::Zero(pre.rows(), pre.cols());
    const Index channels = d_pooled.rows();
    for (Index oc = 0; oc < d_pooled.cols(); ++oc) {
      for (Index c = 0; c < channels; ++c) {
        const Index col = argmax[static_cast<std::size_t>(oc * channels + c)];
        if (pre(c, col) > 0.0) d_pre(c, col) += d_pooled(c, oc);
      }
    }
    const auto& input = cache.inputs[l];
    const Index hw = static_cast<Index>(g.height * g.width);
    const Map<const MatrixXd> weight(params_.data() + g.weight_offset,
                                     static_cast<Index>(g.out_channels),
                                     static_cast<Index>(g.in_channels * k * k));
    Map<MatrixXd> grad_weight(grad.data() + g.weight_offset, weight.rows(), weight.cols());
    grad.segment(g.bias_offset, static_cast<Index>(g.out_channels)) = d_pre.rowwise().sum();
    MatrixXd d_input;
    if (l > 0) d_input = MatrixXd::Zero(input.rows(), input.cols());
    MatrixXd cols;
    for (Index b = 0; b < static_cast<Index>(batch); ++b) {
      im2col(input.middleCols(b * hw, hw), g.height, g.width, k, cols);
      const auto d_block = d_pre.middleCols(b * hw, hw);
      grad_weight.noalias() += d_block * cols.transpose();
      if (l > 0) {
        const MatrixXd d_cols = weight.transpose() * d_block;
        col2im(d_cols, g.height, g.width, k, d_input.middleCols(b * hw, hw));
      }
    }
    if (l == 0) break;
    d_pooled = std::move(d_input);
  }
  return grad;
}

}  // namespace aset::agent
