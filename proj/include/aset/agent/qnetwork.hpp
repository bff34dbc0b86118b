#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "aset/agent/state.hpp"

namespace aset::agent {

/// Convolutional Q-network. Input channels are worker rows; each channel is
/// a (feature x time) plane. Every conv layer uses a square kernel with
/// "same" padding, then ReLU and a 2x2 max-pool (ceil mode). Two affine
/// layers map the flattened maps to one value per action.
struct QNetworkConfig {
  std::size_t in_channels = 1;
  std::size_t height = 1;  // features
  std::size_t width = 1;   // time slots
  std::vector<std::size_t> conv_channels{8, 16, 32};
  std::size_t kernel = 4;
  std::size_t hidden = 256;
  std::size_t actions = 7;
  bool log_input = true;  // feed log1p(x) instead of raw counts

  void validate() const;
  friend bool operator==(const QNetworkConfig&, const QNetworkConfig&) = default;
};

QNetworkConfig network_config_for(const StateShape& shape, std::size_t actions = 7);
nlohmann::json network_config_to_json(const QNetworkConfig& config);
QNetworkConfig network_config_from_json(const nlohmann::json& doc);

class QNetwork {
 public:
  /// Activations kept by forward_batch for the backward pass.
  struct Cache {
    std::size_t batch = 0;
    std::vector<Eigen::MatrixXd> inputs;       // input of each conv layer
    std::vector<Eigen::MatrixXd> pre;          // conv pre-activations
    std::vector<std::vector<Eigen::Index>> argmax;  // pool winners
    Eigen::MatrixXd flat;
    Eigen::MatrixXd hidden_pre;
    Eigen::MatrixXd hidden;
  };

  QNetwork(QNetworkConfig config, std::uint64_t seed);

  const QNetworkConfig& config() const { return config_; }
  std::size_t parameter_count() const { return static_cast<std::size_t>(params_.size()); }
  const Eigen::VectorXd& parameters() const { return params_; }
  void set_parameters(const Eigen::VectorXd& params);

  Eigen::VectorXd forward(const StateTensor& state) const;
  /// One column of action values per state.
  Eigen::MatrixXd forward_batch(const std::vector<const StateTensor*>& states) const;
  Eigen::MatrixXd forward_batch(const std::vector<const StateTensor*>& states, Cache& cache) const;
  /// Gradient of sum(d_out .* output) with respect to the flat parameters.
  Eigen::VectorXd backward(const Cache& cache, const Eigen::MatrixXd& d_out) const;

 private:
  struct ConvGeometry {
    std::size_t in_channels, out_channels, height, width, pooled_height, pooled_width;
    Eigen::Index weight_offset, bias_offset;
  };

  Eigen::MatrixXd input_matrix(const std::vector<const StateTensor*>& states) const;
  Eigen::MatrixXd run(const std::vector<const StateTensor*>& states, Cache* cache) const;

  QNetworkConfig config_;
  std::vector<ConvGeometry> conv_;
  std::size_t flat_size_ = 0;
  Eigen::Index fc1_weight_ = 0, fc1_bias_ = 0, fc2_weight_ = 0, fc2_bias_ = 0;
  Eigen::VectorXd params_;
};

}  // namespace aset::agent
