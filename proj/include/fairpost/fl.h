#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fairpost/record.h"
#include "json.hpp"

namespace fairpost {

// Fully connected network: input -> hidden (ReLU) ... -> `classes` logits.
// Binary tasks use two logits with a softmax.
struct ModelSpec {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden = {64, 32};
  std::size_t classes = 2;

  std::size_t ParameterCount() const;
  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

// Parameters are laid out layer by layer: weights (row-major, out x in)
// followed by biases.
struct FlModel {
  ModelSpec spec;
  std::vector<double> params;

  // Glorot-uniform weights, zero biases.
  static FlModel Initialize(const ModelSpec& spec, std::uint64_t seed);
};

enum class Optimizer { kSgd, kAdam };

struct FlConfig {
  int rounds = 20;
  int local_epochs = 1;
  // Mini-batch size is ceil(batch_fraction * |shard|) unless batch_size > 0.
  double batch_fraction = 1.0;
  std::size_t batch_size = 0;
  double learning_rate = 0.001;
  Optimizer optimizer = Optimizer::kAdam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-7;
  std::uint64_t seed = 0;
  // 0 means every client participates in every round.
  std::size_t participating_clients = 0;
  bool parallel_clients = false;

  // Throws InvalidConfig.
  void Validate() const;
};

// Mean softmax cross-entropy over `batch`; fills `gradient` (resized to the
// parameter count) when non-null.
double LossAndGradient(const FlModel& model, std::span<const Record> batch,
                       std::vector<double>* gradient);

double MeanLoss(const FlModel& model, std::span<const Record> records);

struct LocalResult {
  FlModel model;
  double last_epoch_loss = 0.0;  // mean mini-batch loss over the final epoch
};

// E epochs of mini-batch training on one shard. Shuffling is drawn from the
// (seed, round, client) training stream.
LocalResult LocalTrain(const FlModel& model, std::span<const Record> shard, const FlConfig& config,
                       std::uint64_t round, std::size_t client);

// Coordinate-wise sum_c weights[c] * models[c].params, accumulated in client
// index order.
FlModel Aggregate(std::span<const FlModel> models, std::span<const double> weights);

struct RoundTrace {
  int round = 0;
  std::vector<double> client_loss;  // NaN for clients that sat the round out
  double validation_loss = 0.0;
  double validation_accuracy = 0.0;
};

struct FedAvgResult {
  FlModel model;  // model of the round with the lowest validation loss
  int best_round = 0;
  std::vector<RoundTrace> trace;
};

// Runs config.rounds rounds of local training and weighted averaging with
// weights proportional to the training shard sizes. With an empty
// validation set the last round is returned.
FedAvgResult FedAvg(std::span<const std::vector<Record>> shards, std::span<const Record> validation,
                    const ModelSpec& spec, const FlConfig& config);

// Logits for one feature vector.
std::vector<double> Logits(const FlModel& model, std::span<const double> features);

// Arg-max class per record, ties broken toward the smallest index.
std::vector<int> Predict(const FlModel& model, std::span<const Record> records);

nlohmann::json ToJson(const FlModel& model);
FlModel FlModelFromJson(const nlohmann::json& doc);

}  // namespace fairpost
