#pragma once

#include <cstdint>

#include <Eigen/Dense>
#include <json.hpp>

namespace aset::agent {

struct AdamParams {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias-corrected first and second moments.
class Adam {
 public:
  Adam(std::size_t dimension, AdamParams params = {});

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& gradient);

  const AdamParams& params() const { return params_; }
  void set_learning_rate(double rate) { params_.learning_rate = rate; }
  std::int64_t steps() const { return steps_; }

  nlohmann::json to_json() const;
  void restore(const nlohmann::json& doc);

 private:
  AdamParams params_;
  Eigen::VectorXd first_;
  Eigen::VectorXd second_;
  std::int64_t steps_ = 0;
};

}  // namespace aset::agent
