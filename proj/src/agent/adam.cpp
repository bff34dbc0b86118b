#include "aset/agent/adam.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace aset::agent {

Adam::Adam(std::size_t dimension, AdamParams params)
    : params_(params),
      first_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dimension))),
      second_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dimension))) {}

void Adam::step(Eigen::VectorXd& params, const Eigen::VectorXd& gradient) {
  if (params.size() != first_.size() || gradient.size() != first_.size()) {
    throw std::invalid_argument("Adam moment dimension does not match the parameters");
  }
  ++steps_;
  first_ = params_.beta1 * first_ + (1.0 - params_.beta1) * gradient;
  second_ = params_.beta2 * second_ + (1.0 - params_.beta2) * gradient.cwiseAbs2();
  const double c1 = 1.0 - std::pow(params_.beta1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(params_.beta2, static_cast<double>(steps_));
  params.array() -= params_.learning_rate * (first_.array() / c1) /
                    ((second_.array() / c2).sqrt() + params_.epsilon);
}

nlohmann::json Adam::to_json() const {
  return {{"learning_rate", params_.learning_rate},
          {"beta1", params_.beta1},
          {"beta2", params_.beta2},
          {"epsilon", params_.epsilon},
          {"steps", steps_},
          {"first", std::vector<double>(first_.data(), first_.data() + first_.size())},
          {"second", std::vector<double>(second_.data(), second_.data() + second_.size())}};
}

void Adam::restore(const nlohmann::json& doc) {
  const auto first = doc.at("first").get<std::vector<double>>();
  const auto second = doc.at("second").get<std::vector<double>>();
  if (first.size() != static_cast<std::size_t>(first_.size()) || second.size() != first.size()) {
    throw std::invalid_argument("Adam state dimension mismatch");
  }
  params_.learning_rate = doc.at("learning_rate").get<double>();
  params_.beta1 = doc.at("beta1").get<double>();
  params_.beta2 = doc.at("beta2").get<double>();
  params_.epsilon = doc.at("epsilon").get<double>();
  steps_ = doc.at("steps").get<std::int64_t>();
  first_ = Eigen::Map<const Eigen::VectorXd>(first.data(), static_cast<Eigen::Index>(first.size()));
  second_ = Eigen::Map<const Eigen::VectorXd>(second.data(), static_cast<Eigen::Index>(second.size()));
}

}  // namespace aset::agent
