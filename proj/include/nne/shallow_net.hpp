#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "nne/core_types.hpp"
#include "nne/rng.hpp"

namespace nne::net {

enum class Activation { relu, sigmoid };
/// point: mu only. diag: mu plus per-coordinate log-variance. full: mu plus Cholesky factor of V.
enum class Head { point, diag, full };
enum class LossKind { c1, c2_diag, c2_full };

std::string activation_name(Activation a);
Activation parse_activation(const std::string& s);
std::string head_name(Head h);
Head parse_head(const std::string& s);
std::string loss_name(LossKind l);
LossKind parse_loss(const std::string& s);
Head head_for(LossKind l);

/// Raw log-variance outputs are clamped to this range before exponentiation.
inline constexpr double kLogVarianceClamp = 10.0;
/// Input SDs are floored here so constant moments pass through as zeros.
inline constexpr double kSdFloor = 1e-12;

struct NetConfig {
  std::size_t input_dim = 0;
  std::size_t hidden_units = 32;
  Activation activation = Activation::relu;
  Head head = Head::diag;
  std::size_t output_dim = 1;

  /// p, 2p or p + p(p+1)/2.
  std::size_t raw_output_dim() const;
};

struct TrainSpec {
  LossKind loss = LossKind::c2_diag;
  std::size_t max_epochs = 500;
  double learning_rate = 1e-3;
  std::size_t batch_size = 128;
  std::size_t patience = 25;
  double validation_fraction = 0.10;
};

struct TrainingMeta {
  double train_loss = 0.0;
  double validation_loss = 0.0;
  std::size_t epochs = 0;
  std::size_t best_epoch = 0;
  std::string seed;  ///< path string of the training stream
};

struct TrainedNet {
  NetConfig config;
  Eigen::MatrixXd w1;  ///< hidden x input
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;  ///< raw output x hidden
  Eigen::VectorXd b2;
  Eigen::VectorXd input_mean;
  Eigen::VectorXd input_sd;
  TrainingMeta meta;

  /// Zero weights, identity standardization.
  static TrainedNet zeros(const NetConfig& config);
};

struct Prediction {
  Eigen::VectorXd mu;
  /// Empty for the point head.
  Eigen::MatrixXd cov;

  Eigen::VectorXd sd() const;
};

/// Family of conditional densities q(theta | raw net output). The trainer
/// minimizes mean loss(); the negative log density is (loss + p log 2 pi) / 2.
class DensityFamily {
 public:
  virtual ~DensityFamily() = default;
  virtual Head head() const = 0;
  virtual std::size_t raw_width(std::size_t p) const = 0;

  /// Loss of one example; adds d loss / d raw into `grad` when non-null.
  virtual double loss(const Eigen::Ref<const Eigen::VectorXd>& raw,
                      const Eigen::Ref<const Eigen::VectorXd>& theta,
                      Eigen::Ref<Eigen::VectorXd> grad, bool want_grad) const = 0;

  virtual Prediction decode(const Eigen::Ref<const Eigen::VectorXd>& raw, std::size_t p) const = 0;

  double negative_log_density(const Eigen::Ref<const Eigen::VectorXd>& raw,
                              const Eigen::Ref<const Eigen::VectorXd>& theta) const;
};

/// Normal family. identity: V = I (loss C1). diag: V = diag(exp s). full: V = T T',
/// T lower triangular with diagonal exp(d), d clamped to half the log-variance range.
class NormalFamily final : public DensityFamily {
 public:
  explicit NormalFamily(Head head) : head_(head) {}
  Head head() const override { return head_; }
  std::size_t raw_width(std::size_t p) const override;
  double loss(const Eigen::Ref<const Eigen::VectorXd>& raw,
              const Eigen::Ref<const Eigen::VectorXd>& theta, Eigen::Ref<Eigen::VectorXd> grad,
              bool want_grad) const override;
  Prediction decode(const Eigen::Ref<const Eigen::VectorXd>& raw, std::size_t p) const override;

 private:
  Head head_;
};

/// Raw (pre-head) outputs for a batch of standardized inputs, one column per example.
Eigen::MatrixXd raw_outputs(const TrainedNet& net, const Eigen::MatrixXd& standardized);
Eigen::VectorXd standardize(const TrainedNet& net, const Eigen::VectorXd& m);

/// Throws DomainError when m has the wrong length.
Prediction forward(const TrainedNet& net, const MomentVector& m);
Prediction forward(const TrainedNet& net, const Eigen::VectorXd& m);

/// Mean squared error summed over coordinates.
double loss_c1(const TrainedNet& net, std::span<const TrainExample> examples);
/// Mean of log|V| + r' V^-1 r, V from the net's head (identity for the point head).
double loss_c2(const TrainedNet& net, std::span<const TrainExample> examples);
/// Mean negative log normal density under the net's head.
double loss_c3(const TrainedNet& net, std::span<const TrainExample> examples);

struct Gradient {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;
  Eigen::VectorXd b2;
};

/// Mean family loss over the columns of (inputs, thetas); inputs are standardized already.
double batch_loss(const TrainedNet& net, const DensityFamily& family, const Eigen::MatrixXd& inputs,
                  const Eigen::MatrixXd& thetas, Gradient* grad);

/// Fits weights by mini-batch Adam on the first (1 - validation_fraction) of the
/// examples and keeps the weights with the lowest validation loss. Throws
/// TrainingError on a NaN loss and ConfigError on an inconsistent setup.
TrainedNet train(std::span<const TrainExample> examples, const NetConfig& config,
                 const TrainSpec& spec, const RngStream& rng);

/// Trains one net per candidate width on the same split; smallest validation
/// loss wins, the earliest candidate on ties.
std::size_t select_hidden_nodes(std::span<const TrainExample> examples,
                                const std::vector<std::size_t>& candidates,
                                const NetConfig& config, const TrainSpec& spec,
                                const RngStream& rng);

/// Text format, one keyword per line, floats written as hex so reloading is exact.
void save_net(const TrainedNet& net, std::ostream& out);
TrainedNet load_net(std::istream& in);
void save_net(const TrainedNet& net, const std::string& path);
TrainedNet load_net(const std::string& path);

}  // namespace nne::net
