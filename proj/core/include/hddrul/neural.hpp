#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "hddrul/error.hpp"
#include "hddrul/forest.hpp"
#include "hddrul/preprocess.hpp"

namespace hddrul {

// Gate blocks are stacked in the order input, forget, candidate, output.
enum class Gate : int { input = 0, forget = 1, candidate = 2, output = 3 };

struct LstmCellParams {
  Eigen::MatrixXd input_weights;   // 4H x F
  Eigen::MatrixXd hidden_weights;  // 4H x H
  Eigen::VectorXd bias;            // 4H

  static LstmCellParams zeros(std::size_t features, std::size_t hidden);
  std::size_t hidden_size() const { return static_cast<std::size_t>(hidden_weights.cols()); }
  std::size_t input_size() const { return static_cast<std::size_t>(input_weights.cols()); }

  bool operator==(const LstmCellParams& other) const;
};

// Everything backprop needs from one step.
struct CellCache {
  Eigen::VectorXd x, h_prev, c_prev;
  Eigen::VectorXd input, forget, candidate, output;
  Eigen::VectorXd c, tanh_c;
};

struct CellStep {
  Eigen::VectorXd h;
  Eigen::VectorXd c;
  CellCache cache;
};

// i, f, o = sigmoid(.), g = tanh(.), c = f*c_prev + i*g, h = o*tanh(c).
// Throws NumericError on non-finite inputs.
CellStep lstm_cell_forward(const LstmCellParams& params, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& h_prev, const Eigen::VectorXd& c_prev);

// Runs the cell over the rows of `window` (timesteps x features) from a
// zero state and returns the final hidden state.
Eigen::VectorXd lstm_forward(const LstmCellParams& params, const RowMatrix& window);

enum class Architecture { vanilla, bidirectional };

std::string_view architecture_name(Architecture arch);
// "lstm" / "bilstm"; throws ConfigError otherwise.
Architecture parse_architecture(std::string_view name);

struct DenseParams {
  Eigen::VectorXd weights;
  double bias = 0.0;

  bool operator==(const DenseParams& other) const;
};

// The trainable tensors. Also used to hold gradients and Adam moments.
struct Parameters {
  LstmCellParams forward;
  std::optional<LstmCellParams> backward;
  DenseParams dense;

  Parameters zeros_like() const;
  bool operator==(const Parameters&) const = default;
};

struct ParamView {
  std::string name;
  std::span<double> values;
};

// Flat views of every tensor in a fixed order: forward.*, backward.*,
// dense.weights, dense.bias.
std::vector<ParamView> parameter_views(Parameters& params);

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  Architecture architecture = Architecture::bidirectional;
  std::size_t hidden_size = 32;
  std::size_t epochs = 50;
  std::size_t batch_size = 64;
  AdamConfig adam;
  // Global-norm gradient clip; <= 0 disables.
  double clip_norm = 5.0;
  std::uint64_t seed = 0;
};

struct BiLstmModel {
  Architecture architecture = Architecture::bidirectional;
  std::size_t features = 0;
  std::size_t timesteps = 0;
  // SMART attribute ids of the input columns, when known.
  std::vector<int> attributes;
  Parameters params;
  TrainConfig config;
  // Clamp predictions into [0, clip_max] when set.
  std::optional<double> clip_predictions;

  bool operator==(const BiLstmModel& other) const;
};

// All-zero model of the given shape.
BiLstmModel make_model(Architecture architecture, std::size_t features, std::size_t timesteps,
                       std::size_t hidden);

// Glorot-uniform weights, zero biases except forget gate = 1.
void initialize(BiLstmModel& model, std::uint64_t seed);

// Linear dense head over the final forward state (vanilla) or the
// concatenation of the forward state and the state of a second LSTM run
// over the time-reversed window. Throws ConfigError on shape mismatch.
double bilstm_forward(const BiLstmModel& model, const RowMatrix& window);

// Batched prediction for every sample of a dataset.
std::vector<double> predict(const BiLstmModel& model, const WindowedDataset& data);

double mse_loss(std::span<const double> predictions, std::span<const double> targets);

struct Gradients {
  double loss = 0.0;
  Parameters grads;
};

// Exact gradient of the batch-mean squared error with respect to every
// parameter, through the unrolled sequence and both directions. Throws
// NumericError naming the tensor when a gradient is non-finite.
Gradients backward(const BiLstmModel& model, const WindowedDataset& data,
                   std::span<const std::size_t> batch);
Gradients backward(const BiLstmModel& model, std::span<const RowMatrix> windows,
                   std::span<const double> targets);

// Scales all gradients so their global L2 norm is at most max_norm.
// Returns the norm before clipping.
double clip_global_norm(Parameters& grads, double max_norm);

struct AdamState {
  Parameters m;
  Parameters v;
  std::size_t t = 0;
  AdamConfig config;

  static AdamState for_params(const Parameters& params, const AdamConfig& config);
};

void adam_step(AdamState& state, Parameters& params, const Parameters& grads);

struct TrainTrace {
  std::vector<double> epoch_loss;
  std::vector<double> epoch_seconds;
  // FNV-1a of the saved model text.
  std::string snapshot_id;
};

class DivergenceError : public NumericError {
 public:
  DivergenceError(const std::string& what, TrainTrace trace)
      : NumericError(what), trace_(std::move(trace)) {}
  const TrainTrace& trace() const { return trace_; }

 private:
  TrainTrace trace_;
};

struct TrainResult {
  BiLstmModel model;
  TrainTrace trace;
};

// Seeded initialization (derive_seed(seed, "init")), per-epoch shuffle from
// derive_seed(seed, "shuffle/epoch-<k>"), Adam on mini-batches. Throws
// DivergenceError carrying the trace so far when the loss turns non-finite.
TrainResult train(const TrainConfig& config, const WindowedDataset& data);

void save_model(std::ostream& out, const BiLstmModel& model);
// Throws DataError on malformed input.
BiLstmModel load_model(std::istream& in);
std::string model_snapshot_id(const BiLstmModel& model);

// epoch,mean_loss. Wall-clock is left out so reruns produce identical files.
void write_trace_csv(std::ostream& out, const TrainTrace& trace);

}  // namespace hddrul
