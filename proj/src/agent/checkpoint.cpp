#include "aset/agent/checkpoint.hpp"

#include <fstream>
#include <vector>

namespace aset::agent {

Checkpoint make_checkpoint(const Trainer& trainer, const FeaturePartition& partition,
                           const StateShape& shape, const nlohmann::json& environment) {
  Checkpoint c;
  c.partition = partition;
  c.shape = shape;
  c.network = trainer.network().config();
  c.parameters = trainer.network().parameters();
  c.hyperparams = trainer.hyperparams();
  c.episodes_done = trainer.episodes_done();
  c.optimizer = trainer.optimizer().to_json();
  c.rng_state = trainer.rng_state();
  c.environment = environment;
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  nlohmann::json doc;
  doc["format"] = "aset-qnetwork";
  doc["version"] = kCheckpointVersion;
  doc["partition"] = partition_to_json(c.partition);
  doc["state_shape"] = {c.shape.features, c.shape.workers, c.shape.slots};
  doc["network"] = network_config_to_json(c.network);
  doc["parameters"] =
      std::vector<double>(c.parameters.data(), c.parameters.data() + c.parameters.size());
  doc["hyperparams"] = hyperparams_to_json(c.hyperparams);
  doc["episodes_done"] = c.episodes_done;
  doc["optimizer"] = c.optimizer;
  doc["rng_state"] = c.rng_state;
  doc["environment"] = c.environment;

  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw CheckpointError("cannot write checkpoint " + tmp.string());
    // Round-trip precision for doubles.
    out << doc.dump();
    if (!out) throw CheckpointError("failed writing checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  Checkpoint c;
  try {
    const auto doc = nlohmann::json::parse(in);
    if (doc.at("format").get<std::string>() != "aset-qnetwork") {
      throw CheckpointError("not a Q-network checkpoint: " + path.string());
    }
    if (doc.at("version").get<int>() != kCheckpointVersion) {
      throw CheckpointError("unsupported checkpoint version in " + path.string());
    }
    c.partition = partition_from_json(doc.at("partition"));
    const auto shape = doc.at("state_shape").get<std::vector<std::size_t>>();
    if (shape.size() != 3) throw CheckpointError("state shape must have three dimensions");
    c.shape = {shape[0], shape[1], shape[2]};
    c.network = network_config_from_json(doc.at("network"));
    const auto params = doc.at("parameters").get<std::vector<double>>();
    c.parameters = Eigen::Map<const Eigen::VectorXd>(params.data(),
                                                     static_cast<Eigen::Index>(params.size()));
    c.hyperparams = hyperparams_from_json(doc.at("hyperparams"));
    c.episodes_done = doc.at("episodes_done").get<std::size_t>();
    c.optimizer = doc.value("optimizer", nlohmann::json());
    c.rng_state = doc.value("rng_state", std::string());
    c.environment = doc.value("environment", nlohmann::json());
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError("corrupt checkpoint " + path.string() + ": " + e.what());
  }
  if (c.shape.features != c.partition.feature_count() || c.network.height != c.shape.features ||
      c.network.in_channels != c.shape.workers || c.network.width != c.shape.slots) {
    throw CheckpointError("checkpoint shape does not match its partition or network");
  }
  // Constructing the network validates the parameter count.
  try {
    network_from_checkpoint(c);
  } catch (const std::exception& e) {
    throw CheckpointError("checkpoint parameters inconsistent: " + std::string(e.what()));
  }
  return c;
}

QNetwork network_from_checkpoint(const Checkpoint& c) {
  QNetwork net(c.network, 0);
  net.set_parameters(c.parameters);
  return net;
}

Trainer trainer_from_checkpoint(const Checkpoint& c, Hyperparams hp) {
  QNetwork net = network_from_checkpoint(c);
  Adam adam(net.parameter_count(), AdamParams{hp.learning_rate});
  if (!c.optimizer.is_null()) adam.restore(c.optimizer);
  return Trainer(std::move(hp), std::move(net), std::move(adam), c.episodes_done, c.rng_state);
}

}  // namespace aset::agent
