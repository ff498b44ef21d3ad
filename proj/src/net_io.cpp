#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "nne/errors.hpp"
#include "nne/shallow_net.hpp"

namespace nne::net {

// Layout, one record per line:
//   nne-net 1
//   input_dim D / hidden_units H / activation relu|sigmoid / head point|diag|full / output_dim p
//   input_mean, input_sd, b1, b2: "name count v1 v2 ..."
//   w1, w2: "name rows cols" then row-major values
//   meta train_loss validation_loss epochs best_epoch seed
// Every double is written with %a.

namespace {

std::string hex(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

void write_vector(std::ostream& out, const char* name, const Eigen::VectorXd& v) {
  out << name << ' ' << v.size();
  for (Eigen::Index k = 0; k < v.size(); ++k) out << ' ' << hex(v(k));
  out << '\n';
}

void write_matrix(std::ostream& out, const char* name, const Eigen::MatrixXd& m) {
  out << name << ' ' << m.rows() << ' ' << m.cols();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << ' ' << hex(m(i, j));
  out << '\n';
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::istringstream record(const std::string& keyword) {
    std::string line;
    if (!std::getline(in_, line)) throw ParseError(line_ + 1, "expected '" + keyword + "', got end of file");
    ++line_;
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key != keyword) throw ParseError(line_, "expected '" + keyword + "', got '" + key + "'");
    return ss;
  }

  double number(std::istringstream& ss) {
    std::string tok;
    if (!(ss >> tok)) throw ParseError(line_, "missing value");
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') throw ParseError(line_, "bad number '" + tok + "'");
    return v;
  }

  std::size_t count(std::istringstream& ss) {
    long long v = -1;
    if (!(ss >> v) || v < 0) throw ParseError(line_, "bad count");
    return static_cast<std::size_t>(v);
  }

  std::string word(std::istringstream& ss) {
    std::string w;
    if (!(ss >> w)) throw ParseError(line_, "missing value");
    return w;
  }

  Eigen::VectorXd vector(const std::string& keyword, std::size_t expected) {
    auto ss = record(keyword);
    const std::size_t n = count(ss);
    if (n != expected) throw ParseError(line_, keyword + " has " + std::to_string(n) + " entries, expected " + std::to_string(expected));
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = number(ss);
    return v;
  }

  Eigen::MatrixXd matrix(const std::string& keyword, std::size_t rows, std::size_t cols) {
    auto ss = record(keyword);
    const std::size_t r = count(ss), c = count(ss);
    if (r != rows || c != cols) throw ParseError(line_, keyword + " has the wrong shape");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = number(ss);
    return m;
  }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

}  // namespace

void save_net(const TrainedNet& net, std::ostream& out) {
  const auto& c = net.config;
  out << "nne-net 1\n";
  out << "input_dim " << c.input_dim << '\n';
  out << "hidden_units " << c.hidden_units << '\n';
  out << "activation " << activation_name(c.activation) << '\n';
  out << "head " << head_name(c.head) << '\n';
  out << "output_dim " << c.output_dim << '\n';
  write_vector(out, "input_mean", net.input_mean);
  write_vector(out, "input_sd", net.input_sd);
  write_matrix(out, "w1", net.w1);
  write_vector(out, "b1", net.b1);
  write_matrix(out, "w2", net.w2);
  write_vector(out, "b2", net.b2);
  out << "meta " << hex(net.meta.train_loss) << ' ' << hex(net.meta.validation_loss) << ' '
      << net.meta.epochs << ' ' << net.meta.best_epoch << ' '
      << (net.meta.seed.empty() ? "-" : net.meta.seed) << '\n';
}

TrainedNet load_net(std::istream& in) {
  Reader rd(in);
  {
    auto ss = rd.record("nne-net");
    if (rd.word(ss) != "1") throw ParseError(1, "unsupported net format version");
  }
  NetConfig c;
  { auto ss = rd.record("input_dim"); c.input_dim = rd.count(ss); }
  { auto ss = rd.record("hidden_units"); c.hidden_units = rd.count(ss); }
  { auto ss = rd.record("activation"); c.activation = parse_activation(rd.word(ss)); }
  { auto ss = rd.record("head"); c.head = parse_head(rd.word(ss)); }
  { auto ss = rd.record("output_dim"); c.output_dim = rd.count(ss); }
  TrainedNet net;
  net.config = c;
  net.input_mean = rd.vector("input_mean", c.input_dim);
  net.input_sd = rd.vector("input_sd", c.input_dim);
  net.w1 = rd.matrix("w1", c.hidden_units, c.input_dim);
  net.b1 = rd.vector("b1", c.hidden_units);
  net.w2 = rd.matrix("w2", c.raw_output_dim(), c.hidden_units);
  net.b2 = rd.vector("b2", c.raw_output_dim());
  auto ss = rd.record("meta");
  net.meta.train_loss = rd.number(ss);
  net.meta.validation_loss = rd.number(ss);
  net.meta.epochs = rd.count(ss);
  net.meta.best_epoch = rd.count(ss);
  net.meta.seed = rd.word(ss);
  if (net.meta.seed == "-") net.meta.seed.clear();
  return net;
}

void save_net(const TrainedNet& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write net file '" + path + "'");
  save_net(net, out);
  if (!out) throw ConfigError("failed writing net file '" + path + "'");
}

TrainedNet load_net(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open net file '" + path + "'");
  return load_net(in);
}

}  // namespace nne::net
