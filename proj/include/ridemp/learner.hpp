#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ridemp/kv_document.hpp"

namespace ridemp {

using Matrix = Eigen::MatrixXd;  // rows are samples
using Vector = Eigen::VectorXd;

enum class Activation { kRelu, kTanh };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct MlpOptions {
  std::vector<int> hidden{64, 128};
  Activation activation = Activation::kRelu;
  double learning_rate = 1e-3;
  int batch_size = 32;
  int epochs = 60;
  double l1 = 0.0;  // penalty on weights (not biases)
  std::uint64_t seed = 0;
};

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
};

// Base interface for multi-output regressors used by the proxy and the
// forecaster. Models standardize their own inputs.
class RegressionModel {
 public:
  virtual ~RegressionModel() = default;
  virtual std::string kind() const = 0;
  virtual std::vector<EpochLog> fit(const Matrix& x, const Matrix& y) = 0;
  virtual Matrix predict(const Matrix& x) const = 0;
  virtual bool trained() const = 0;
  virtual int input_dim() const = 0;
  virtual int output_dim() const = 0;
  virtual void save(KvDocument& doc, const std::string& prefix) const = 0;

  Vector predict_one(const Vector& x) const;
};

// Fully connected network, two or more hidden layers, linear output, squared
// error loss with optional L1, trained with Adam on shuffled minibatches.
class Mlp final : public RegressionModel {
 public:
  Mlp() = default;
  Mlp(int inputs, int outputs, MlpOptions options);

  std::string kind() const override { return "mlp"; }
  std::vector<EpochLog> fit(const Matrix& x, const Matrix& y) override;
  Matrix predict(const Matrix& x) const override;
  bool trained() const override { return trained_; }
  int input_dim() const override { return inputs_; }
  int output_dim() const override { return outputs_; }
  void save(KvDocument& doc, const std::string& prefix) const override;
  static std::unique_ptr<Mlp> load(const KvDocument& doc, const std::string& prefix);

  const MlpOptions& options() const { return options_; }

 private:
  Matrix forward(const Matrix& x, std::vector<Matrix>* activations) const;

  int inputs_ = 0;
  int outputs_ = 0;
  MlpOptions options_;
  std::vector<Matrix> weights_;  // layer l: (fan_in x fan_out)
  std::vector<Vector> biases_;
  Vector in_mean_, in_scale_, out_mean_, out_scale_;
  bool trained_ = false;
};

struct ForestOptions {
  int trees = 40;
  int max_depth = 10;
  int min_leaf = 4;
  double feature_fraction = 0.4;
  std::uint64_t seed = 0;
};

// Random forest of multi-output regression trees (variance reduction summed
// over outputs, bootstrap resampling).
class RandomForest final : public RegressionModel {
 public:
  RandomForest() = default;
  explicit RandomForest(ForestOptions options) : options_(options) {}

  std::string kind() const override { return "forest"; }
  std::vector<EpochLog> fit(const Matrix& x, const Matrix& y) override;
  Matrix predict(const Matrix& x) const override;
  bool trained() const override { return !trees_.empty(); }
  int input_dim() const override { return inputs_; }
  int output_dim() const override { return outputs_; }
  void save(KvDocument& doc, const std::string& prefix) const override;
  static std::unique_ptr<RandomForest> load(const KvDocument& doc, const std::string& prefix);

 private:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int leaf = -1;  // index into leaf_values
  };
  struct Tree {
    std::vector<Node> nodes;
    std::vector<double> leaf_values;  // leaves x outputs
  };

  int grow(Tree& tree, const Matrix& x, const Matrix& y, std::vector<int>& rows, int depth, std::uint64_t& state);

  ForestOptions options_;
  int inputs_ = 0;
  int outputs_ = 0;
  std::vector<Tree> trees_;
};

// Predicts a fixed row, e.g. the majority class or all zeros.
class ConstantModel final : public RegressionModel {
 public:
  ConstantModel() = default;
  ConstantModel(int inputs, Vector value) : inputs_(inputs), value_(std::move(value)) {}

  std::string kind() const override { return "constant"; }
  std::vector<EpochLog> fit(const Matrix& x, const Matrix& y) override;
  Matrix predict(const Matrix& x) const override;
  bool trained() const override { return value_.size() > 0; }
  int input_dim() const override { return inputs_; }
  int output_dim() const override { return static_cast<int>(value_.size()); }
  void save(KvDocument& doc, const std::string& prefix) const override;
  static std::unique_ptr<ConstantModel> load(const KvDocument& doc, const std::string& prefix);

 private:
  int inputs_ = 0;
  Vector value_;
};

std::unique_ptr<RegressionModel> load_model(const KvDocument& doc, const std::string& prefix);

double mean_squared_error(const Matrix& predicted, const Matrix& actual);

}  // namespace ridemp
