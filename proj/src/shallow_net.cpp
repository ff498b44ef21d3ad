#include "nne/shallow_net.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nne/errors.hpp"
#include "nne/parallel.hpp"

namespace nne::net {

std::string activation_name(Activation a) { return a == Activation::relu ? "relu" : "sigmoid"; }

Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "sigmoid") return Activation::sigmoid;
  throw ConfigError("unknown activation '" + s + "'");
}

std::string head_name(Head h) {
  switch (h) {
    case Head::point: return "point";
    case Head::diag: return "diag";
    case Head::full: return "full";
  }
  return "unknown";
}

Head parse_head(const std::string& s) {
  if (s == "point") return Head::point;
  if (s == "diag") return Head::diag;
  if (s == "full") return Head::full;
  throw ConfigError("unknown output head '" + s + "'");
}

std::string loss_name(LossKind l) {
  switch (l) {
    case LossKind::c1: return "c1";
    case LossKind::c2_diag: return "c2_diag";
    case LossKind::c2_full: return "c2_full";
  }
  return "unknown";
}

LossKind parse_loss(const std::string& s) {
  if (s == "c1") return LossKind::c1;
  if (s == "c2_diag" || s == "c2") return LossKind::c2_diag;
  if (s == "c2_full") return LossKind::c2_full;
  throw ConfigError("unknown loss '" + s + "'");
}

Head head_for(LossKind l) {
  switch (l) {
    case LossKind::c1: return Head::point;
    case LossKind::c2_diag: return Head::diag;
    case LossKind::c2_full: return Head::full;
  }
  return Head::point;
}

namespace {

std::size_t raw_width_for(Head head, std::size_t p) {
  switch (head) {
    case Head::point: return p;
    case Head::diag: return 2 * p;
    case Head::full: return p + p * (p + 1) / 2;
  }
  return p;
}

constexpr double kLogSdClamp = kLogVarianceClamp / 2.0;

}  // namespace

std::size_t NetConfig::raw_output_dim() const { return raw_width_for(head, output_dim); }

TrainedNet TrainedNet::zeros(const NetConfig& config) {
  TrainedNet net;
  net.config = config;
  net.w1 = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(config.hidden_units),
                                 static_cast<Eigen::Index>(config.input_dim));
  net.b1 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(config.hidden_units));
  net.w2 = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(config.raw_output_dim()),
                                 static_cast<Eigen::Index>(config.hidden_units));
  net.b2 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(config.raw_output_dim()));
  net.input_mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(config.input_dim));
  net.input_sd = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(config.input_dim));
  return net;
}

Eigen::VectorXd Prediction::sd() const {
  if (cov.size() == 0) return Eigen::VectorXd();
  return cov.diagonal().array().sqrt();
}

// -- density family -------------------------------------------------------------

double DensityFamily::negative_log_density(const Eigen::Ref<const Eigen::VectorXd>& raw,
                                           const Eigen::Ref<const Eigen::VectorXd>& theta) const {
  Eigen::VectorXd unused(0);
  const double c = loss(raw, theta, unused, false);
  return 0.5 * (c + static_cast<double>(theta.size()) * std::log(2.0 * std::numbers::pi));
}

std::size_t NormalFamily::raw_width(std::size_t p) const { return raw_width_for(head_, p); }

double NormalFamily::loss(const Eigen::Ref<const Eigen::VectorXd>& raw,
                          const Eigen::Ref<const Eigen::VectorXd>& theta,
                          Eigen::Ref<Eigen::VectorXd> grad, bool want_grad) const {
  const Eigen::Index p = theta.size();
  const Eigen::VectorXd r = theta - raw.head(p);
  switch (head_) {
    case Head::point: {
      if (want_grad) grad.head(p) += -2.0 * r;
      return r.squaredNorm();
    }
    case Head::diag: {
      double total = 0.0;
      for (Eigen::Index k = 0; k < p; ++k) {
        const double s_raw = raw(p + k);
        const double s = std::clamp(s_raw, -kLogVarianceClamp, kLogVarianceClamp);
        const double prec = std::exp(-s);
        total += s + r(k) * r(k) * prec;
        if (want_grad) {
          grad(k) += -2.0 * r(k) * prec;
          if (s_raw > -kLogVarianceClamp && s_raw < kLogVarianceClamp)
            grad(p + k) += 1.0 - r(k) * r(k) * prec;
        }
      }
      return total;
    }
    case Head::full: {
      Eigen::MatrixXd t = Eigen::MatrixXd::Zero(p, p);
      Eigen::VectorXd d(p);
      Eigen::Index pos = p;
      for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j < i; ++j) t(i, j) = raw(pos++);
        d(i) = std::clamp(raw(pos), -kLogSdClamp, kLogSdClamp);
        t(i, i) = std::exp(d(i));
        ++pos;
      }
      const auto lower = t.triangularView<Eigen::Lower>();
      const Eigen::VectorXd w = lower.solve(r);
      const double total = 2.0 * d.sum() + w.squaredNorm();
      if (want_grad) {
        const Eigen::VectorXd a = t.transpose().triangularView<Eigen::Upper>().solve(w);
        grad.head(p) += -2.0 * a;
        pos = p;
        for (Eigen::Index i = 0; i < p; ++i) {
          for (Eigen::Index j = 0; j < i; ++j) grad(pos++) += -2.0 * a(i) * w(j);
          const double d_raw = raw(pos);
          if (d_raw > -kLogSdClamp && d_raw < kLogSdClamp) grad(pos) += 2.0 - 2.0 * a(i) * w(i) * t(i, i);
          ++pos;
        }
      }
      return total;
    }
  }
  return 0.0;
}

Prediction NormalFamily::decode(const Eigen::Ref<const Eigen::VectorXd>& raw, std::size_t p_) const {
  const auto p = static_cast<Eigen::Index>(p_);
  Prediction pred;
  pred.mu = raw.head(p);
  switch (head_) {
    case Head::point:
      break;
    case Head::diag: {
      pred.cov = Eigen::MatrixXd::Zero(p, p);
      for (Eigen::Index k = 0; k < p; ++k)
        pred.cov(k, k) = std::exp(std::clamp(raw(p + k), -kLogVarianceClamp, kLogVarianceClamp));
      break;
    }
    case Head::full: {
      Eigen::MatrixXd t = Eigen::MatrixXd::Zero(p, p);
      Eigen::Index pos = p;
      for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = 0; j < i; ++j) t(i, j) = raw(pos++);
        t(i, i) = std::exp(std::clamp(raw(pos++), -kLogSdClamp, kLogSdClamp));
      }
      pred.cov = t * t.transpose();
      break;
    }
  }
  return pred;
}

// -- forward pass -------------------------------------------------------------------

namespace {

void activate(Activation a, Eigen::MatrixXd& z) {
  if (a == Activation::relu)
    z = z.cwiseMax(0.0);
  else
    z = (1.0 + (-z.array()).exp()).inverse().matrix();
}

void check_shapes(const TrainedNet& net) {
  const auto& c = net.config;
  const auto d = static_cast<Eigen::Index>(c.input_dim), h = static_cast<Eigen::Index>(c.hidden_units),
             o = static_cast<Eigen::Index>(c.raw_output_dim());
  if (net.w1.rows() != h || net.w1.cols() != d || net.b1.size() != h || net.w2.rows() != o ||
      net.w2.cols() != h || net.b2.size() != o || net.input_mean.size() != d || net.input_sd.size() != d)
    throw DomainError("net weights do not match its configuration");
}

Eigen::MatrixXd input_matrix(const TrainedNet& net, std::span<const TrainExample> examples) {
  const auto d = static_cast<Eigen::Index>(net.config.input_dim);
  Eigen::MatrixXd x(d, static_cast<Eigen::Index>(examples.size()));
  for (std::size_t l = 0; l < examples.size(); ++l) {
    const auto& m = examples[l].moments.values;
    if (m.size() != d) throw DomainError("moment vector length does not match the net input");
    x.col(static_cast<Eigen::Index>(l)) = (m - net.input_mean).cwiseQuotient(net.input_sd);
  }
  return x;
}

Eigen::MatrixXd theta_matrix(std::span<const TrainExample> examples, std::size_t p) {
  Eigen::MatrixXd t(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(examples.size()));
  for (std::size_t l = 0; l < examples.size(); ++l) {
    if (examples[l].theta.size() != p) throw DomainError("theta length does not match the net output");
    t.col(static_cast<Eigen::Index>(l)) = examples[l].theta.values;
  }
  return t;
}

}  // namespace

Eigen::MatrixXd raw_outputs(const TrainedNet& net, const Eigen::MatrixXd& standardized) {
  Eigen::MatrixXd hidden = (net.w1 * standardized).colwise() + net.b1;
  activate(net.config.activation, hidden);
  return (net.w2 * hidden).colwise() + net.b2;
}

Eigen::VectorXd standardize(const TrainedNet& net, const Eigen::VectorXd& m) {
  return (m - net.input_mean).cwiseQuotient(net.input_sd);
}

Prediction forward(const TrainedNet& net, const Eigen::VectorXd& m) {
  check_shapes(net);
  if (m.size() != static_cast<Eigen::Index>(net.config.input_dim))
    throw DomainError("moment vector has length " + std::to_string(m.size()) + ", net expects " +
                      std::to_string(net.config.input_dim));
  const Eigen::MatrixXd raw = raw_outputs(net, standardize(net, m));
  return NormalFamily(net.config.head).decode(raw.col(0), net.config.output_dim);
}

Prediction forward(const TrainedNet& net, const MomentVector& m) { return forward(net, m.values); }

double batch_loss(const TrainedNet& net, const DensityFamily& family, const Eigen::MatrixXd& inputs,
                  const Eigen::MatrixXd& thetas, Gradient* grad) {
  const Eigen::Index b = inputs.cols();
  if (b == 0) throw DomainError("loss needs at least one example");
  Eigen::MatrixXd hidden = (net.w1 * inputs).colwise() + net.b1;
  activate(net.config.activation, hidden);
  const Eigen::MatrixXd raw = (net.w2 * hidden).colwise() + net.b2;

  const bool want = grad != nullptr;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(raw.rows(), want ? b : 0);
  Eigen::VectorXd unused(0);
  double total = 0.0;
  for (Eigen::Index l = 0; l < b; ++l) {
    if (want) {
      total += family.loss(raw.col(l), thetas.col(l), g.col(l), true);
    } else {
      total += family.loss(raw.col(l), thetas.col(l), unused, false);
    }
  }
  const double inv_b = 1.0 / static_cast<double>(b);
  if (want) {
    g *= inv_b;
    grad->w2.noalias() = g * hidden.transpose();
    grad->b2 = g.rowwise().sum();
    Eigen::MatrixXd dh = net.w2.transpose() * g;
    if (net.config.activation == Activation::relu)
      dh = dh.cwiseProduct((hidden.array() > 0.0).cast<double>().matrix());
    else
      dh = dh.cwiseProduct((hidden.array() * (1.0 - hidden.array())).matrix());
    grad->w1.noalias() = dh * inputs.transpose();
    grad->b1 = dh.rowwise().sum();
  }
  return total * inv_b;
}

double loss_c1(const TrainedNet& net, std::span<const TrainExample> examples) {
  check_shapes(net);
  const Eigen::MatrixXd raw = raw_outputs(net, input_matrix(net, examples));
  const Eigen::MatrixXd theta = theta_matrix(examples, net.config.output_dim);
  const auto p = static_cast<Eigen::Index>(net.config.output_dim);
  return (raw.topRows(p) - theta).squaredNorm() / static_cast<double>(examples.size());
}

double loss_c2(const TrainedNet& net, std::span<const TrainExample> examples) {
  check_shapes(net);
  if (examples.empty()) throw DomainError("loss needs at least one example");
  return batch_loss(net, NormalFamily(net.config.head), input_matrix(net, examples),
                    theta_matrix(examples, net.config.output_dim), nullptr);
}

double loss_c3(const TrainedNet& net, std::span<const TrainExample> examples) {
  const double p = static_cast<double>(net.config.output_dim);
  return 0.5 * (loss_c2(net, examples) + p * std::log(2.0 * std::numbers::pi));
}

// -- training -------------------------------------------------------------------------

namespace {

struct AdamBlock {
  Eigen::ArrayXXd m, v;
  void init(Eigen::Index rows, Eigen::Index cols) {
    m = Eigen::ArrayXXd::Zero(rows, cols);
    v = Eigen::ArrayXXd::Zero(rows, cols);
  }
  template <class Param, class Grad>
  void step(Param& w, const Grad& g, double lr, double c1, double c2) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    m = b1 * m + (1.0 - b1) * g.array();
    v = b2 * v + (1.0 - b2) * g.array().square();
    w.array() -= lr * (m / c1) / ((v / c2).sqrt() + eps);
  }
};

}  // namespace

TrainedNet train(std::span<const TrainExample> examples, const NetConfig& config,
                 const TrainSpec& spec, const RngStream& rng) {
  if (examples.size() < 2) throw ConfigError("training needs at least two examples");
  if (!(spec.validation_fraction > 0.0 && spec.validation_fraction < 1.0))
    throw ConfigError("validation fraction must lie in (0, 1)");
  if (config.hidden_units < 1) throw ConfigError("hidden_units must be at least 1");
  if (spec.batch_size < 1 || spec.max_epochs < 1 || !(spec.learning_rate > 0.0))
    throw ConfigError("batch size, epoch budget and learning rate must be positive");

  NetConfig cfg = config;
  if (cfg.input_dim == 0) cfg.input_dim = examples[0].moments.size();
  if (cfg.output_dim == 0) cfg.output_dim = examples[0].theta.size();
  if (cfg.head != head_for(spec.loss))
    throw ConfigError("loss " + loss_name(spec.loss) + " needs the " + head_name(head_for(spec.loss)) +
                      " head, configured head is " + head_name(cfg.head));

  const std::size_t total = examples.size();
  const auto n_val = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(spec.validation_fraction * static_cast<double>(total))));
  if (n_val >= total) throw ConfigError("validation split leaves no training examples");
  const std::size_t n_train = total - n_val;

  const auto d = static_cast<Eigen::Index>(cfg.input_dim);
  const auto p = static_cast<Eigen::Index>(cfg.output_dim);
  const auto h = static_cast<Eigen::Index>(cfg.hidden_units);

  TrainedNet net = TrainedNet::zeros(cfg);
  net.meta.seed = rng.path_string();

  // Standardization and output offsets come from the training part only.
  Eigen::MatrixXd raw_x(d, static_cast<Eigen::Index>(total));
  for (std::size_t l = 0; l < total; ++l) {
    if (examples[l].moments.values.size() != d)
      throw ConfigError("example " + std::to_string(l) + " has " +
                        std::to_string(examples[l].moments.size()) + " moments, expected " +
                        std::to_string(cfg.input_dim));
    raw_x.col(static_cast<Eigen::Index>(l)) = examples[l].moments.values;
  }
  const Eigen::MatrixXd thetas = theta_matrix(examples, cfg.output_dim);
  const auto ntr = static_cast<Eigen::Index>(n_train);
  net.input_mean = raw_x.leftCols(ntr).rowwise().mean();
  net.input_sd = ((raw_x.leftCols(ntr).colwise() - net.input_mean).array().square().rowwise().mean())
                     .sqrt()
                     .max(kSdFloor)
                     .matrix();
  const Eigen::MatrixXd x = (raw_x.colwise() - net.input_mean).array().colwise() / net.input_sd.array();
  const Eigen::MatrixXd x_train = x.leftCols(ntr), x_val = x.rightCols(static_cast<Eigen::Index>(n_val));
  const Eigen::MatrixXd t_train = thetas.leftCols(ntr), t_val = thetas.rightCols(static_cast<Eigen::Index>(n_val));

  RngStream r = rng;
  const double s1 = 1.0 / std::sqrt(static_cast<double>(d)), s2 = 1.0 / std::sqrt(static_cast<double>(h));
  for (Eigen::Index i = 0; i < h; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) net.w1(i, j) = r.uniform(-s1, s1);
    net.b1(i) = r.uniform(-s1, s1);
  }
  for (Eigen::Index i = 0; i < net.w2.rows(); ++i)
    for (Eigen::Index j = 0; j < h; ++j) net.w2(i, j) = r.uniform(-s2, s2);

  const Eigen::VectorXd t_mean = t_train.rowwise().mean();
  const Eigen::VectorXd t_var =
      (t_train.colwise() - t_mean).array().square().rowwise().mean().max(1e-12).matrix();
  net.b2.head(p) = t_mean;
  if (cfg.head == Head::diag) {
    for (Eigen::Index k = 0; k < p; ++k)
      net.b2(p + k) = std::clamp(std::log(t_var(k)), -kLogVarianceClamp, kLogVarianceClamp);
  } else if (cfg.head == Head::full) {
    Eigen::Index pos = p;
    for (Eigen::Index i = 0; i < p; ++i) {
      pos += i;
      net.b2(pos++) = std::clamp(0.5 * std::log(t_var(i)), -kLogSdClamp, kLogSdClamp);
    }
  }

  const NormalFamily family(cfg.head);
  AdamBlock aw1, ab1, aw2, ab2;
  aw1.init(h, d);
  ab1.init(h, 1);
  aw2.init(net.w2.rows(), h);
  ab2.init(net.b2.size(), 1);

  TrainedNet best = net;
  double best_val = batch_loss(net, family, x_val, t_val, nullptr);
  if (!std::isfinite(best_val)) throw TrainingError("initial validation loss is not finite");
  std::size_t best_epoch = 0;

  std::vector<Eigen::Index> order(n_train);
  for (std::size_t k = 0; k < n_train; ++k) order[k] = static_cast<Eigen::Index>(k);
  const std::size_t batch = std::min(spec.batch_size, n_train);
  Eigen::MatrixXd xb(d, static_cast<Eigen::Index>(batch)), tb(p, static_cast<Eigen::Index>(batch));
  Gradient g;
  std::size_t step = 0, epoch = 0;
  for (epoch = 1; epoch <= spec.max_epochs; ++epoch) {
    for (std::size_t k = n_train; k > 1; --k) std::swap(order[k - 1], order[r.below(k)]);
    for (std::size_t start = 0; start < n_train; start += batch) {
      const std::size_t len = std::min(batch, n_train - start);
      xb.resize(d, static_cast<Eigen::Index>(len));
      tb.resize(p, static_cast<Eigen::Index>(len));
      for (std::size_t q = 0; q < len; ++q) {
        xb.col(static_cast<Eigen::Index>(q)) = x_train.col(order[start + q]);
        tb.col(static_cast<Eigen::Index>(q)) = t_train.col(order[start + q]);
      }
      const double loss = batch_loss(net, family, xb, tb, &g);
      if (!std::isfinite(loss))
        throw TrainingError("training loss is not finite at epoch " + std::to_string(epoch) +
                            ", batch starting at example " + std::to_string(start));
      ++step;
      const double c1 = 1.0 - std::pow(0.9, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(0.999, static_cast<double>(step));
      aw1.step(net.w1, g.w1, spec.learning_rate, c1, c2);
      ab1.step(net.b1, g.b1, spec.learning_rate, c1, c2);
      aw2.step(net.w2, g.w2, spec.learning_rate, c1, c2);
      ab2.step(net.b2, g.b2, spec.learning_rate, c1, c2);
    }
    const double val = batch_loss(net, family, x_val, t_val, nullptr);
    if (!std::isfinite(val))
      throw TrainingError("validation loss is not finite at epoch " + std::to_string(epoch));
    if (val < best_val) {
      best_val = val;
      best_epoch = epoch;
      best.w1 = net.w1;
      best.b1 = net.b1;
      best.w2 = net.w2;
      best.b2 = net.b2;
    } else if (epoch - best_epoch >= spec.patience) {
      break;
    }
  }

  best.meta.epochs = std::min(epoch, spec.max_epochs);
  best.meta.best_epoch = best_epoch;
  best.meta.validation_loss = best_val;
  best.meta.train_loss = batch_loss(best, family, x_train, t_train, nullptr);
  return best;
}

std::size_t select_hidden_nodes(std::span<const TrainExample> examples,
                                const std::vector<std::size_t>& candidates, const NetConfig& config,
                                const TrainSpec& spec, const RngStream& rng) {
  if (candidates.empty()) throw ConfigError("hidden-node selection needs candidates");
  if (candidates.size() == 1) return candidates.front();
  std::vector<double> losses(candidates.size());
  parallel_for(candidates.size(), [&](std::size_t k) {
    NetConfig c = config;
    c.hidden_units = candidates[k];
    losses[k] = train(examples, c, spec, rng).meta.validation_loss;
  });
  std::size_t best = 0;
  for (std::size_t k = 1; k < candidates.size(); ++k)
    if (losses[k] < losses[best]) best = k;
  return candidates[best];
}

}  // namespace nne::net
