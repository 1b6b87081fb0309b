#include "fairpost/fl.h"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <string>

#include "fairpost/error.h"
#include "fairpost/rng.h"

namespace fairpost {
namespace {

struct LayerView {
  std::size_t in;
  std::size_t out;
  std::size_t weight_offset;
  std::size_t bias_offset;
};

std::vector<LayerView> Layers(const ModelSpec& spec) {
  std::vector<LayerView> layers;
  std::size_t offset = 0;
  std::size_t in = spec.input_dim;
  auto add = [&](std::size_t out) {
    layers.push_back({in, out, offset, offset + in * out});
    offset += in * out + out;
    in = out;
  };
  for (std::size_t h : spec.hidden) add(h);
  add(spec.classes);
  return layers;
}

void CheckInput(const FlModel& model, std::span<const double> features) {
  if (features.size() != model.spec.input_dim) {
    Fail(Errc::kDimensionMismatch, "record has " + std::to_string(features.size()) +
                                       " features, model expects " +
                                       std::to_string(model.spec.input_dim));
  }
}

// Forward pass keeping every layer's activations (post-ReLU for hidden
// layers, raw logits for the last).
void Forward(const FlModel& model, const std::vector<LayerView>& layers,
             std::span<const double> x, std::vector<std::vector<double>>& act) {
  act.resize(layers.size() + 1);
  act[0].assign(x.begin(), x.end());
  const double* p = model.params.data();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const LayerView& L = layers[l];
    std::vector<double>& out = act[l + 1];
    out.assign(L.out, 0.0);
    const std::vector<double>& in = act[l];
    for (std::size_t o = 0; o < L.out; ++o) {
      const double* w = p + L.weight_offset + o * L.in;
      double s = p[L.bias_offset + o];
      for (std::size_t i = 0; i < L.in; ++i) s += w[i] * in[i];
      out[o] = (l + 1 < layers.size()) ? std::max(s, 0.0) : s;
    }
  }
}

// Softmax probabilities in place; returns log-sum-exp.
double Softmax(std::vector<double>& logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double& v : logits) {
    v = std::exp(v - top);
    sum += v;
  }
  for (double& v : logits) v /= sum;
  return top + std::log(sum);
}

void CheckLabel(const FlModel& model, const Record& r) {
  if (r.label < 0 || static_cast<std::size_t>(r.label) >= model.spec.classes) {
    Fail(Errc::kInvalidArgument, "label " + std::to_string(r.label) + " outside model classes");
  }
}

}  // namespace

std::size_t ModelSpec::ParameterCount() const {
  std::size_t count = 0;
  std::size_t in = input_dim;
  for (std::size_t h : hidden) {
    count += in * h + h;
    in = h;
  }
  return count + in * classes + classes;
}

FlModel FlModel::Initialize(const ModelSpec& spec, std::uint64_t seed) {
  if (spec.input_dim == 0 || spec.classes < 2) {
    Fail(Errc::kInvalidConfig, "model needs inputs and at least two classes");
  }
  FlModel model{spec, std::vector<double>(spec.ParameterCount(), 0.0)};
  SequentialRng rng(seed, DeriveStream(0, "init"));
  for (const LayerView& L : Layers(spec)) {
    const double limit = std::sqrt(6.0 / static_cast<double>(L.in + L.out));
    for (std::size_t i = 0; i < L.in * L.out; ++i) {
      model.params[L.weight_offset + i] = rng.NextUniform(-limit, limit);
    }
  }
  return model;
}

void FlConfig::Validate() const {
  if (rounds < 1) Fail(Errc::kInvalidConfig, "rounds must be >= 1");
  if (local_epochs < 1) Fail(Errc::kInvalidConfig, "local_epochs must be >= 1");
  if (!(batch_fraction > 0.0 && batch_fraction <= 1.0)) {
    Fail(Errc::kInvalidConfig, "batch_fraction must be in (0, 1]");
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    Fail(Errc::kInvalidConfig, "learning_rate must be positive");
  }
  if (optimizer == Optimizer::kAdam &&
      !(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0 &&
        adam_epsilon > 0.0)) {
    Fail(Errc::kInvalidConfig, "invalid Adam hyperparameters");
  }
}

double LossAndGradient(const FlModel& model, std::span<const Record> batch,
                       std::vector<double>* gradient) {
  if (model.params.size() != model.spec.ParameterCount()) {
    Fail(Errc::kArchitectureMismatch, "parameter count does not match architecture");
  }
  const auto layers = Layers(model.spec);
  if (gradient) gradient->assign(model.params.size(), 0.0);
  if (batch.empty()) return 0.0;
  std::vector<std::vector<double>> act;
  std::vector<double> delta, prev;
  double loss = 0.0;
  const double* p = model.params.data();
  for (const Record& r : batch) {
    CheckInput(model, r.features);
    CheckLabel(model, r);
    Forward(model, layers, r.features, act);
    std::vector<double>& probs = act.back();
    const double label_logit = probs[static_cast<std::size_t>(r.label)];
    loss += Softmax(probs) - label_logit;
    if (!gradient) continue;
    delta = probs;
    delta[static_cast<std::size_t>(r.label)] -= 1.0;
    double* g = gradient->data();
    for (std::size_t l = layers.size(); l-- > 0;) {
      const LayerView& L = layers[l];
      const std::vector<double>& in = act[l];
      for (std::size_t o = 0; o < L.out; ++o) {
        const double d = delta[o];
        if (d == 0.0) continue;
        double* gw = g + L.weight_offset + o * L.in;
        for (std::size_t i = 0; i < L.in; ++i) gw[i] += d * in[i];
        g[L.bias_offset + o] += d;
      }
      if (l == 0) break;
      prev.assign(L.in, 0.0);
      for (std::size_t o = 0; o < L.out; ++o) {
        const double d = delta[o];
        if (d == 0.0) continue;
        const double* w = p + L.weight_offset + o * L.in;
        for (std::size_t i = 0; i < L.in; ++i) prev[i] += w[i] * d;
      }
      // ReLU derivative from the stored post-activation.
      for (std::size_t i = 0; i < L.in; ++i)
        if (in[i] <= 0.0) prev[i] = 0.0;
      delta.swap(prev);
    }
  }
  const double n = static_cast<double>(batch.size());
  if (gradient)
    for (double& v : *gradient) v /= n;
  return loss / n;
}

double MeanLoss(const FlModel& model, std::span<const Record> records) {
  return LossAndGradient(model, records, nullptr);
}

LocalResult LocalTrain(const FlModel& model, std::span<const Record> shard, const FlConfig& config,
                       std::uint64_t round, std::size_t client) {
  config.Validate();
  if (shard.empty()) Fail(Errc::kEmptyShard, "client " + std::to_string(client) + " has no data");
  const std::size_t n = shard.size();
  std::size_t batch = config.batch_size > 0
                          ? config.batch_size
                          : static_cast<std::size_t>(std::ceil(config.batch_fraction * static_cast<double>(n)));
  batch = std::clamp<std::size_t>(batch, 1, n);

  const std::uint64_t stream =
      DeriveStream(DeriveStream(DeriveStream(0, "training"), round), static_cast<std::uint64_t>(client));
  SequentialRng rng(config.seed, stream);

  LocalResult result{model, 0.0};
  std::vector<double>& theta = result.model.params;
  std::vector<double> m, v;
  if (config.optimizer == Optimizer::kAdam) {
    m.assign(theta.size(), 0.0);
    v.assign(theta.size(), 0.0);
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::vector<Record> batch_records;
  std::vector<double> grad;
  std::uint64_t step = 0;
  for (int epoch = 0; epoch < config.local_epochs; ++epoch) {
    rng.Shuffle(order);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t end = std::min(n, start + batch);
      batch_records.clear();
      for (std::size_t i = start; i < end; ++i) batch_records.push_back(shard[order[i]]);
      epoch_loss += LossAndGradient(result.model, batch_records, &grad);
      ++batches;
      ++step;
      if (config.optimizer == Optimizer::kSgd) {
        for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= config.learning_rate * grad[i];
      } else {
        const double b1 = config.adam_beta1, b2 = config.adam_beta2;
        const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
        for (std::size_t i = 0; i < theta.size(); ++i) {
          m[i] = b1 * m[i] + (1.0 - b1) * grad[i];
          v[i] = b2 * v[i] + (1.0 - b2) * grad[i] * grad[i];
          theta[i] -= config.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + config.adam_epsilon);
        }
      }
    }
    result.last_epoch_loss = epoch_loss / static_cast<double>(batches);
  }
  return result;
}

FlModel Aggregate(std::span<const FlModel> models, std::span<const double> weights) {
  if (models.empty()) Fail(Errc::kInvalidArgument, "nothing to aggregate");
  if (models.size() != weights.size()) Fail(Errc::kLengthMismatch, "one weight per model required");
  FlModel out{models[0].spec, std::vector<double>(models[0].params.size(), 0.0)};
  for (std::size_t c = 0; c < models.size(); ++c) {
    if (!(models[c].spec == out.spec) || models[c].params.size() != out.params.size()) {
      Fail(Errc::kArchitectureMismatch, "client " + std::to_string(c) + " has a different architecture");
    }
    const double w = weights[c];
    for (std::size_t i = 0; i < out.params.size(); ++i) out.params[i] += w * models[c].params[i];
  }
  return out;
}

FedAvgResult FedAvg(std::span<const std::vector<Record>> shards, std::span<const Record> validation,
                    const ModelSpec& spec, const FlConfig& config) {
  config.Validate();
  const std::size_t k = shards.size();
  if (k == 0) Fail(Errc::kEmptyDataset, "no clients");
  for (std::size_t c = 0; c < k; ++c) {
    if (shards[c].empty()) Fail(Errc::kEmptyShard, "client " + std::to_string(c) + " has no data");
  }
  const std::size_t participants =
      config.participating_clients == 0 ? k : std::min(config.participating_clients, k);

  FedAvgResult result;
  FlModel global = FlModel::Initialize(spec, config.seed);
  double best_loss = std::numeric_limits<double>::infinity();
  SequentialRng selection(config.seed, DeriveStream(0, "participation"));
  for (int round = 1; round <= config.rounds; ++round) {
    std::vector<std::size_t> chosen(k);
    for (std::size_t c = 0; c < k; ++c) chosen[c] = c;
    if (participants < k) {
      selection.Shuffle(chosen);
      chosen.resize(participants);
      std::sort(chosen.begin(), chosen.end());
    }
    std::vector<LocalResult> local(chosen.size());
    const auto train = [&](std::size_t slot) {
      return LocalTrain(global, shards[chosen[slot]], config, static_cast<std::uint64_t>(round), chosen[slot]);
    };
    if (config.parallel_clients && chosen.size() > 1) {
      std::vector<std::future<LocalResult>> jobs;
      for (std::size_t s = 0; s < chosen.size(); ++s) jobs.push_back(std::async(std::launch::async, train, s));
      for (std::size_t s = 0; s < chosen.size(); ++s) local[s] = jobs[s].get();
    } else {
      for (std::size_t s = 0; s < chosen.size(); ++s) local[s] = train(s);
    }

    std::size_t chosen_total = 0;
    for (std::size_t c : chosen) chosen_total += shards[c].size();
    std::vector<FlModel> models;
    std::vector<double> weights;
    RoundTrace trace;
    trace.round = round;
    trace.client_loss.assign(k, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t s = 0; s < chosen.size(); ++s) {
      models.push_back(std::move(local[s].model));
      weights.push_back(static_cast<double>(shards[chosen[s]].size()) / static_cast<double>(chosen_total));
      trace.client_loss[chosen[s]] = local[s].last_epoch_loss;
    }
    global = Aggregate(models, weights);

    if (!validation.empty()) {
      trace.validation_loss = MeanLoss(global, validation);
      const auto pred = Predict(global, validation);
      std::size_t correct = 0;
      for (std::size_t i = 0; i < validation.size(); ++i) correct += pred[i] == validation[i].label;
      trace.validation_accuracy = static_cast<double>(correct) / static_cast<double>(validation.size());
    }
    result.trace.push_back(trace);
    if (validation.empty() || trace.validation_loss < best_loss) {
      best_loss = trace.validation_loss;
      result.model = global;
      result.best_round = round;
    }
  }
  return result;
}

std::vector<double> Logits(const FlModel& model, std::span<const double> features) {
  CheckInput(model, features);
  std::vector<std::vector<double>> act;
  Forward(model, Layers(model.spec), features, act);
  return act.back();
}

std::vector<int> Predict(const FlModel& model, std::span<const Record> records) {
  const auto layers = Layers(model.spec);
  std::vector<std::vector<double>> act;
  std::vector<int> out(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CheckInput(model, records[i].features);
    Forward(model, layers, records[i].features, act);
    const auto& logits = act.back();
    out[i] = static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
  }
  return out;
}

nlohmann::json ToJson(const FlModel& model) {
  return {{"input_dim", model.spec.input_dim},
          {"hidden", model.spec.hidden},
          {"classes", model.spec.classes},
          {"params", model.params}};
}

FlModel FlModelFromJson(const nlohmann::json& doc) {
  try {
    FlModel model;
    model.spec.input_dim = doc.at("input_dim").get<std::size_t>();
    model.spec.hidden = doc.at("hidden").get<std::vector<std::size_t>>();
    model.spec.classes = doc.at("classes").get<std::size_t>();
    model.params = doc.at("params").get<std::vector<double>>();
    if (model.params.size() != model.spec.ParameterCount()) {
      Fail(Errc::kArchitectureMismatch, "stored parameters do not match architecture");
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    Fail(Errc::kSchemaViolation, std::string("model: ") + e.what());
  }
}

}  // namespace fairpost
