#include "ridemp/learner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ridemp/rng.hpp"

namespace ridemp {
namespace {

constexpr int kModelSchemaVersion = 1;

void put_matrix(KvDocument& doc, const std::string& key, const Matrix& m) {
  doc.set(key + ".shape", std::vector<int>{static_cast<int>(m.rows()), static_cast<int>(m.cols())});
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
  doc.set(key, flat);
}

Matrix get_matrix(const KvDocument& doc, const std::string& key) {
  const auto shape = doc.get_ints(key + ".shape");
  if (shape.size() != 2) throw FormatError(key + ": bad shape header");
  const auto flat = doc.get_doubles(key);
  if (flat.size() != static_cast<std::size_t>(shape[0]) * shape[1]) throw FormatError(key + ": size mismatch");
  Matrix m(shape[0], shape[1]);
  std::size_t k = 0;
  for (int r = 0; r < shape[0]; ++r)
    for (int c = 0; c < shape[1]; ++c) m(r, c) = flat[k++];
  return m;
}

void put_vector(KvDocument& doc, const std::string& key, const Vector& v) {
  doc.set(key, std::vector<double>(v.data(), v.data() + v.size()));
}

Vector get_vector(const KvDocument& doc, const std::string& key) {
  const auto flat = doc.get_doubles(key);
  return Eigen::Map<const Vector>(flat.data(), static_cast<Eigen::Index>(flat.size()));
}

void check_version(const KvDocument& doc, const std::string& prefix) {
  if (doc.get_int(prefix + ".schema_version") != kModelSchemaVersion) {
    throw FormatError(prefix + ": unsupported model schema_version");
  }
}

void column_stats(const Matrix& m, Vector& mean, Vector& scale) {
  mean = m.colwise().mean().transpose();
  scale.resize(m.cols());
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const double var = (m.col(c).array() - mean(c)).square().mean();
    scale(c) = var > 1e-12 ? std::sqrt(var) : 1.0;
  }
}

}  // namespace

std::string to_string(Activation a) { return a == Activation::kRelu ? "relu" : "tanh"; }

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::kRelu;
  if (s == "tanh") return Activation::kTanh;
  throw FormatError("unknown activation '" + s + "'");
}

Vector RegressionModel::predict_one(const Vector& x) const {
  Matrix row = x.transpose();
  return predict(row).row(0).transpose();
}

double mean_squared_error(const Matrix& predicted, const Matrix& actual) {
  if (predicted.rows() != actual.rows() || predicted.cols() != actual.cols() || actual.size() == 0) {
    throw std::invalid_argument("mean_squared_error: shape mismatch");
  }
  return (predicted - actual).array().square().mean();
}

// ---------------------------------------------------------------- Mlp

Mlp::Mlp(int inputs, int outputs, MlpOptions options)
    : inputs_(inputs), outputs_(outputs), options_(std::move(options)) {
  if (inputs < 1 || outputs < 1) throw std::invalid_argument("Mlp: dimensions must be positive");
  if (options_.hidden.empty()) throw std::invalid_argument("Mlp: need at least one hidden layer");
  Rng rng(options_.seed);
  Rng init = rng.substream("init");
  int fan_in = inputs;
  std::vector<int> sizes = options_.hidden;
  sizes.push_back(outputs);
  for (int fan_out : sizes) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    Matrix w(fan_in, fan_out);
    for (int r = 0; r < fan_in; ++r)
      for (int c = 0; c < fan_out; ++c) w(r, c) = init.uniform(-limit, limit);
    weights_.push_back(std::move(w));
    biases_.push_back(Vector::Zero(fan_out));
    fan_in = fan_out;
  }
  in_mean_ = Vector::Zero(inputs);
  in_scale_ = Vector::Ones(inputs);
  out_mean_ = Vector::Zero(outputs);
  out_scale_ = Vector::Ones(outputs);
}

Matrix Mlp::forward(const Matrix& x, std::vector<Matrix>* activations) const {
  Matrix h = x;
  if (activations) activations->push_back(h);
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Matrix z = h * weights_[l];
    z.rowwise() += biases_[l].transpose();
    if (l + 1 < weights_.size()) {
      if (options_.activation == Activation::kRelu)
        z = z.cwiseMax(0.0);
      else
        z = z.array().tanh().matrix();
    }
    h = std::move(z);
    if (activations) activations->push_back(h);
  }
  return h;
}

std::vector<EpochLog> Mlp::fit(const Matrix& x, const Matrix& y) {
  if (x.cols() != inputs_ || y.cols() != outputs_ || x.rows() != y.rows() || x.rows() == 0) {
    throw std::invalid_argument("Mlp::fit: shape mismatch");
  }
  column_stats(x, in_mean_, in_scale_);
  column_stats(y, out_mean_, out_scale_);
  const Matrix xs = (x.rowwise() - in_mean_.transpose()).array().rowwise() / in_scale_.transpose().array();
  const Matrix ys = (y.rowwise() - out_mean_.transpose()).array().rowwise() / out_scale_.transpose().array();

  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::vector<Matrix> mw, vw;
  std::vector<Vector> mb, vb;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    mw.push_back(Matrix::Zero(weights_[l].rows(), weights_[l].cols()));
    vw.push_back(mw.back());
    mb.push_back(Vector::Zero(biases_[l].size()));
    vb.push_back(mb.back());
  }

  Rng shuffle = Rng(options_.seed).substream("shuffle");
  std::vector<int> order(static_cast<std::size_t>(x.rows()));
  std::iota(order.begin(), order.end(), 0);
  std::vector<EpochLog> log;
  long step = 0;
  const int batch = std::max(1, options_.batch_size);
  for (int epoch = 0; epoch < options_.epochs; ++epoch) {
    for (std::size_t k = order.size(); k > 1; --k) {
      std::swap(order[k - 1], order[static_cast<std::size_t>(shuffle.uniform_int(0, static_cast<std::int64_t>(k) - 1))]);
    }
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const auto n = static_cast<Eigen::Index>(std::min<std::size_t>(batch, order.size() - start));
      Matrix xb(n, inputs_), yb(n, outputs_);
      for (Eigen::Index r = 0; r < n; ++r) {
        xb.row(r) = xs.row(order[start + r]);
        yb.row(r) = ys.row(order[start + r]);
      }
      std::vector<Matrix> acts;
      const Matrix out = forward(xb, &acts);
      Matrix grad = 2.0 * (out - yb) / static_cast<double>(n * outputs_);
      epoch_loss += (out - yb).array().square().sum();
      ++step;
      for (int l = static_cast<int>(weights_.size()) - 1; l >= 0; --l) {
        Matrix gw = acts[l].transpose() * grad;
        if (options_.l1 > 0) gw += options_.l1 * weights_[l].array().sign().matrix();
        const Vector gb = grad.colwise().sum().transpose();
        if (l > 0) {
          grad = grad * weights_[l].transpose();
          const Matrix& a = acts[l];
          if (options_.activation == Activation::kRelu)
            grad = grad.array() * (a.array() > 0.0).cast<double>();
          else
            grad = grad.array() * (1.0 - a.array().square());
        }
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
        mw[l] = beta1 * mw[l] + (1 - beta1) * gw;
        vw[l] = beta2 * vw[l] + (1 - beta2) * gw.cwiseProduct(gw);
        weights_[l].array() -= options_.learning_rate * (mw[l].array() / c1) / ((vw[l].array() / c2).sqrt() + eps);
        mb[l] = beta1 * mb[l] + (1 - beta1) * gb;
        vb[l] = beta2 * vb[l] + (1 - beta2) * gb.cwiseProduct(gb);
        biases_[l].array() -= options_.learning_rate * (mb[l].array() / c1) / ((vb[l].array() / c2).sqrt() + eps);
      }
    }
    log.push_back({epoch, epoch_loss / static_cast<double>(x.rows() * outputs_)});
  }
  trained_ = true;
  return log;
}

Matrix Mlp::predict(const Matrix& x) const {
  if (!trained_) throw std::logic_error("Mlp::predict: model is not trained");
  if (x.cols() != inputs_) throw std::invalid_argument("Mlp::predict: input width mismatch");
  const Matrix xs = (x.rowwise() - in_mean_.transpose()).array().rowwise() / in_scale_.transpose().array();
  Matrix out = forward(xs, nullptr);
  out = out.array().rowwise() * out_scale_.transpose().array();
  out.rowwise() += out_mean_.transpose();
  return out;
}

void Mlp::save(KvDocument& doc, const std::string& prefix) const {
  doc.set(prefix + ".schema_version", kModelSchemaVersion);
  doc.set(prefix + ".kind", kind());
  doc.set(prefix + ".inputs", inputs_);
  doc.set(prefix + ".outputs", outputs_);
  doc.set(prefix + ".hidden", options_.hidden);
  doc.set(prefix + ".activation", to_string(options_.activation));
  doc.set(prefix + ".learning_rate", options_.learning_rate);
  doc.set(prefix + ".batch_size", options_.batch_size);
  doc.set(prefix + ".epochs", options_.epochs);
  doc.set(prefix + ".l1", options_.l1);
  doc.set(prefix + ".seed", options_.seed);
  doc.set(prefix + ".trained", trained_ ? 1 : 0);
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    put_matrix(doc, prefix + ".layer" + std::to_string(l) + ".weight", weights_[l]);
    put_vector(doc, prefix + ".layer" + std::to_string(l) + ".bias", biases_[l]);
  }
  put_vector(doc, prefix + ".in_mean", in_mean_);
  put_vector(doc, prefix + ".in_scale", in_scale_);
  put_vector(doc, prefix + ".out_mean", out_mean_);
  put_vector(doc, prefix + ".out_scale", out_scale_);
}

std::unique_ptr<Mlp> Mlp::load(const KvDocument& doc, const std::string& prefix) {
  check_version(doc, prefix);
  MlpOptions opt;
  opt.hidden = doc.get_ints(prefix + ".hidden");
  opt.activation = activation_from_string(doc.get_string(prefix + ".activation"));
  opt.learning_rate = doc.get_double(prefix + ".learning_rate");
  opt.batch_size = static_cast<int>(doc.get_int(prefix + ".batch_size"));
  opt.epochs = static_cast<int>(doc.get_int(prefix + ".epochs"));
  opt.l1 = doc.get_double(prefix + ".l1");
  opt.seed = doc.get_uint(prefix + ".seed");
  auto m = std::make_unique<Mlp>(static_cast<int>(doc.get_int(prefix + ".inputs")),
                                 static_cast<int>(doc.get_int(prefix + ".outputs")), opt);
  for (std::size_t l = 0; l < m->weights_.size(); ++l) {
    Matrix w = get_matrix(doc, prefix + ".layer" + std::to_string(l) + ".weight");
    Vector b = get_vector(doc, prefix + ".layer" + std::to_string(l) + ".bias");
    if (w.rows() != m->weights_[l].rows() || w.cols() != m->weights_[l].cols() || b.size() != m->biases_[l].size()) {
      throw FormatError(prefix + ": layer " + std::to_string(l) + " shape mismatch");
    }
    m->weights_[l] = std::move(w);
    m->biases_[l] = std::move(b);
  }
  m->in_mean_ = get_vector(doc, prefix + ".in_mean");
  m->in_scale_ = get_vector(doc, prefix + ".in_scale");
  m->out_mean_ = get_vector(doc, prefix + ".out_mean");
  m->out_scale_ = get_vector(doc, prefix + ".out_scale");
  m->trained_ = doc.get_int(prefix + ".trained") != 0;
  return m;
}

// ---------------------------------------------------------------- RandomForest

namespace {

std::uint64_t next_state(std::uint64_t& state) {
  state = splitmix64(state);
  return state;
}

}  // namespace

int RandomForest::grow(Tree& tree, const Matrix& x, const Matrix& y, std::vector<int>& rows, int depth,
                       std::uint64_t& state) {
  const int node_index = static_cast<int>(tree.nodes.size());
  tree.nodes.push_back({});
  const auto n = static_cast<int>(rows.size());

  auto make_leaf = [&] {
    Node& node = tree.nodes[node_index];
    node.leaf = static_cast<int>(tree.leaf_values.size() / outputs_);
    for (int o = 0; o < outputs_; ++o) {
      double s = 0.0;
      for (int r : rows) s += y(r, o);
      tree.leaf_values.push_back(n > 0 ? s / n : 0.0);
    }
    return node_index;
  };
  if (depth >= options_.max_depth || n < 2 * options_.min_leaf) return make_leaf();

  const int candidates = std::max(1, static_cast<int>(std::round(options_.feature_fraction * inputs_)));
  std::vector<int> features(inputs_);
  std::iota(features.begin(), features.end(), 0);
  for (int k = 0; k < candidates; ++k) {
    const int pick = k + static_cast<int>(next_state(state) % static_cast<std::uint64_t>(inputs_ - k));
    std::swap(features[k], features[pick]);
  }

  Vector total = Vector::Zero(outputs_);
  for (int r : rows) total += y.row(r).transpose();
  double best_gain = 1e-12;
  int best_feature = -1;
  double best_threshold = 0.0;
  std::vector<int> sorted = rows;
  for (int k = 0; k < candidates; ++k) {
    const int f = features[k];
    std::sort(sorted.begin(), sorted.end(), [&](int a, int b) { return x(a, f) < x(b, f); });
    Vector left = Vector::Zero(outputs_);
    // Maximizing sum_left^2/n_l + sum_right^2/n_r is equivalent to minimizing SSE.
    for (int split = 1; split < n; ++split) {
      left += y.row(sorted[split - 1]).transpose();
      if (split < options_.min_leaf || n - split < options_.min_leaf) continue;
      const double lo = x(sorted[split - 1], f), hi = x(sorted[split], f);
      if (hi <= lo) continue;
      const Vector right = total - left;
      const double gain = left.squaredNorm() / split + right.squaredNorm() / (n - split) - total.squaredNorm() / n;
      if (gain > best_gain) {
        best_gain = gain;
        best_feature = f;
        best_threshold = 0.5 * (lo + hi);
      }
    }
  }
  if (best_feature < 0) return make_leaf();

  std::vector<int> left_rows, right_rows;
  for (int r : rows) (x(r, best_feature) <= best_threshold ? left_rows : right_rows).push_back(r);
  rows.clear();
  rows.shrink_to_fit();
  const int l = grow(tree, x, y, left_rows, depth + 1, state);
  const int r = grow(tree, x, y, right_rows, depth + 1, state);
  Node& node = tree.nodes[node_index];
  node.feature = best_feature;
  node.threshold = best_threshold;
  node.left = l;
  node.right = r;
  return node_index;
}

std::vector<EpochLog> RandomForest::fit(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows() || x.rows() == 0) throw std::invalid_argument("RandomForest::fit: shape mismatch");
  inputs_ = static_cast<int>(x.cols());
  outputs_ = static_cast<int>(y.cols());
  trees_.clear();
  std::uint64_t state = splitmix64(options_.seed ^ 0x5eedf0e5ULL);
  const auto n = static_cast<std::uint64_t>(x.rows());
  for (int t = 0; t < options_.trees; ++t) {
    std::vector<int> rows(n);
    for (auto& r : rows) r = static_cast<int>(next_state(state) % n);
    Tree tree;
    grow(tree, x, y, rows, 0, state);
    trees_.push_back(std::move(tree));
  }
  const Matrix pred = predict(x);
  return {{0, mean_squared_error(pred, y)}};
}

Matrix RandomForest::predict(const Matrix& x) const {
  if (trees_.empty()) throw std::logic_error("RandomForest::predict: model is not trained");
  if (x.cols() != inputs_) throw std::invalid_argument("RandomForest::predict: input width mismatch");
  Matrix out = Matrix::Zero(x.rows(), outputs_);
  for (const auto& tree : trees_) {
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      int node = 0;
      while (tree.nodes[node].feature >= 0) {
        const auto& nd = tree.nodes[node];
        node = x(r, nd.feature) <= nd.threshold ? nd.left : nd.right;
      }
      const auto leaf = static_cast<std::size_t>(tree.nodes[node].leaf) * outputs_;
      for (int o = 0; o < outputs_; ++o) out(r, o) += tree.leaf_values[leaf + o];
    }
  }
  return out / static_cast<double>(trees_.size());
}

void RandomForest::save(KvDocument& doc, const std::string& prefix) const {
  doc.set(prefix + ".schema_version", kModelSchemaVersion);
  doc.set(prefix + ".kind", kind());
  doc.set(prefix + ".inputs", inputs_);
  doc.set(prefix + ".outputs", outputs_);
  doc.set(prefix + ".trees", static_cast<int>(trees_.size()));
  for (std::size_t t = 0; t < trees_.size(); ++t) {
    const auto key = prefix + ".tree" + std::to_string(t);
    std::vector<int> feature, left, right, leaf;
    std::vector<double> threshold;
    for (const auto& nd : trees_[t].nodes) {
      feature.push_back(nd.feature);
      left.push_back(nd.left);
      right.push_back(nd.right);
      leaf.push_back(nd.leaf);
      threshold.push_back(nd.threshold);
    }
    doc.set(key + ".feature", feature);
    doc.set(key + ".threshold", threshold);
    doc.set(key + ".left", left);
    doc.set(key + ".right", right);
    doc.set(key + ".leaf", leaf);
    doc.set(key + ".values", trees_[t].leaf_values);
  }
}

std::unique_ptr<RandomForest> RandomForest::load(const KvDocument& doc, const std::string& prefix) {
  check_version(doc, prefix);
  auto f = std::make_unique<RandomForest>();
  f->inputs_ = static_cast<int>(doc.get_int(prefix + ".inputs"));
  f->outputs_ = static_cast<int>(doc.get_int(prefix + ".outputs"));
  const auto count = doc.get_int(prefix + ".trees");
  for (std::int64_t t = 0; t < count; ++t) {
    const auto key = prefix + ".tree" + std::to_string(t);
    const auto feature = doc.get_ints(key + ".feature");
    const auto threshold = doc.get_doubles(key + ".threshold");
    const auto left = doc.get_ints(key + ".left");
    const auto right = doc.get_ints(key + ".right");
    const auto leaf = doc.get_ints(key + ".leaf");
    Tree tree;
    for (std::size_t k = 0; k < feature.size(); ++k) tree.nodes.push_back({feature[k], threshold[k], left[k], right[k], leaf[k]});
    tree.leaf_values = doc.get_doubles(key + ".values");
    f->trees_.push_back(std::move(tree));
  }
  return f;
}

// ---------------------------------------------------------------- ConstantModel

std::vector<EpochLog> ConstantModel::fit(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows() || x.rows() == 0) throw std::invalid_argument("ConstantModel::fit: shape mismatch");
  inputs_ = static_cast<int>(x.cols());
  value_ = y.colwise().mean().transpose();
  return {};
}

Matrix ConstantModel::predict(const Matrix& x) const {
  if (!trained()) throw std::logic_error("ConstantModel::predict: model is not trained");
  return value_.transpose().replicate(x.rows(), 1);
}

void ConstantModel::save(KvDocument& doc, const std::string& prefix) const {
  doc.set(prefix + ".schema_version", kModelSchemaVersion);
  doc.set(prefix + ".kind", kind());
  doc.set(prefix + ".inputs", inputs_);
  put_vector(doc, prefix + ".value", value_);
}

std::unique_ptr<ConstantModel> ConstantModel::load(const KvDocument& doc, const std::string& prefix) {
  check_version(doc, prefix);
  return std::make_unique<ConstantModel>(static_cast<int>(doc.get_int(prefix + ".inputs")),
                                         get_vector(doc, prefix + ".value"));
}

std::unique_ptr<RegressionModel> load_model(const KvDocument& doc, const std::string& prefix) {
  const auto& kind = doc.get_string(prefix + ".kind");
  if (kind == "mlp") return Mlp::load(doc, prefix);
  if (kind == "forest") return RandomForest::load(doc, prefix);
  if (kind == "constant") return ConstantModel::load(doc, prefix);
  throw FormatError(prefix + ": unknown model kind '" + kind + "'");
}

}  // namespace ridemp
