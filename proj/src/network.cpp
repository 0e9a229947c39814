#include "fpf/network.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "fpf/errors.hpp"

namespace fpf {

namespace {

enum class Act { SquaredLeaky, Leaky, Identity };

Act activation_at(int l, int layer_count) {
  if (l == 0) return Act::SquaredLeaky;
  if (l == layer_count - 1) return Act::Identity;
  return Act::Leaky;
}

// Kink convention: z <= 0 takes the leak branch.
double act(Act a, double z, double alpha) {
  switch (a) {
    case Act::SquaredLeaky: {
      const double u = z > 0 ? z : alpha * z;
      return u * u;
    }
    case Act::Leaky:
      return z > 0 ? z : alpha * z;
    case Act::Identity:
      return z;
  }
  return z;
}

double act_d(Act a, double z, double alpha) {
  switch (a) {
    case Act::SquaredLeaky:
      return z > 0 ? 2.0 * z : 2.0 * alpha * alpha * z;
    case Act::Leaky:
      return z > 0 ? 1.0 : alpha;
    case Act::Identity:
      return 1.0;
  }
  return 1.0;
}

double act_dd(Act a, double z, double alpha) {
  switch (a) {
    case Act::SquaredLeaky:
      return z > 0 ? 2.0 : 2.0 * alpha * alpha;
    case Act::Leaky:
    case Act::Identity:
      return 0.0;
  }
  return 0.0;
}

Eigen::VectorXd apply(Act a, const Eigen::VectorXd& z, double alpha,
                      double (*fn)(Act, double, double)) {
  Eigen::VectorXd out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) out[i] = fn(a, z[i], alpha);
  return out;
}

struct ForwardPass {
  std::vector<Eigen::VectorXd> h;  // h[0..L], h[0] = 0
  std::vector<Eigen::VectorXd> z;  // z[0..L-1]
};

ForwardPass run_forward(const NetworkParams& p, const Eigen::VectorXd& x,
                        bool check_finite) {
  const int L = p.layer_count();
  ForwardPass fp;
  fp.h.resize(L + 1);
  fp.z.resize(L);
  fp.h[0] = Eigen::VectorXd::Zero(p.W[0].cols());
  for (int l = 0; l < L; ++l) {
    if (l == 0) {
      fp.z[0] = p.A[0] * x + p.b[0];  // W[0] = 0
    } else {
      fp.z[l] = p.W[l] * fp.h[l] + p.A[l] * x + p.b[l];
    }
    if (check_finite && !fp.z[l].allFinite()) {
      throw numeric_error("network: non-finite preactivation at layer " +
                          std::to_string(l));
    }
    fp.h[l + 1] = apply(activation_at(l, L), fp.z[l], p.alpha, act);
  }
  return fp;
}

struct BackwardPass {
  std::vector<Eigen::VectorXd> delta;  // delta[l] = dF/dz_l
  Eigen::VectorXd input_grad;          // grad_x f
};

BackwardPass run_backward(const NetworkParams& p, const Eigen::VectorXd& x,
                          const ForwardPass& fp) {
  (void)x;
  const int L = p.layer_count();
  BackwardPass bp;
  bp.delta.resize(L);
  Eigen::VectorXd g = Eigen::VectorXd::Ones(1);  // dF/dh_L
  bp.input_grad = Eigen::VectorXd::Zero(p.input_dim);
  for (int l = L - 1; l >= 0; --l) {
    const Act a = activation_at(l, L);
    Eigen::VectorXd sd = apply(a, fp.z[l], p.alpha, act_d);
    bp.delta[l] = sd.cwiseProduct(g);
    bp.input_grad.noalias() += p.A[l].transpose() * bp.delta[l];
    if (l > 0) g.noalias() = p.W[l].transpose() * bp.delta[l];
  }
  return bp;
}

void check_congruent(const NetworkParams& p, const Eigen::MatrixXd& batch,
                     const Eigen::VectorXd& h_values) {
  if (batch.cols() != p.input_dim) {
    throw std::invalid_argument("loss_and_grad: batch dimension mismatch");
  }
  if (h_values.size() != batch.rows()) {
    throw std::invalid_argument("loss_and_grad: h_values not aligned with batch");
  }
  if (batch.rows() < 1) {
    throw std::invalid_argument("loss_and_grad: empty batch");
  }
}

// Accumulates the loss and both gradient terms for one particle.
void accumulate_particle(const NetworkParams& p, const Eigen::VectorXd& x,
                         double h_centered, ParamGrad& quad_grad,
                         ParamGrad& lin_grad, double& quad_loss,
                         double& lin_loss) {
  const int L = p.layer_count();
  const ForwardPass fp = run_forward(p, x, /*check_finite=*/true);
  const BackwardPass bp = run_backward(p, x, fp);
  const double f = fp.h[L][0];
  const Eigen::VectorXd& v = bp.input_grad;  // seed for the tangent pass

  quad_loss += 0.5 * v.squaredNorm();
  lin_loss += -f * h_centered;

  // Forward tangent along direction v (the input-gradient direction).
  std::vector<Eigen::VectorXd> zdot(L), hdot(L + 1);
  hdot[0] = Eigen::VectorXd::Zero(p.W[0].cols());
  for (int l = 0; l < L; ++l) {
    if (l == 0) {
      zdot[0] = p.A[0] * v;
    } else {
      zdot[l] = p.W[l] * hdot[l] + p.A[l] * v;
    }
    const Act a = activation_at(l, L);
    const Eigen::VectorXd sd = apply(a, fp.z[l], p.alpha, act_d);
    hdot[l + 1] = sd.cwiseProduct(zdot[l]);
  }

  // Reverse pass through the (primal, tangent) pair for s = hdot[L][0],
  // which equals |grad_x f|^2; its parameter gradient (with v held fixed)
  // is the gradient of 1/2 |grad_x f|^2.
  Eigen::VectorXd pbar = Eigen::VectorXd::Zero(1);  // ds/dh_l
  Eigen::VectorXd qbar = Eigen::VectorXd::Ones(1);  // ds/dhdot_l
  for (int l = L - 1; l >= 0; --l) {
    const Act a = activation_at(l, L);
    Eigen::VectorXd sd = apply(a, fp.z[l], p.alpha, act_d);
    Eigen::VectorXd sdd = apply(a, fp.z[l], p.alpha, act_dd);
    const Eigen::VectorXd al =
        sd.cwiseProduct(pbar) + sdd.cwiseProduct(zdot[l]).cwiseProduct(qbar);
    const Eigen::VectorXd cl = sd.cwiseProduct(qbar);  // == bp.delta[l]

    if (l > 0) {
      quad_grad.W[l].noalias() += al * fp.h[l].transpose();
      quad_grad.W[l].noalias() += cl * hdot[l].transpose();
      lin_grad.W[l].noalias() += (-h_centered) * (bp.delta[l] * fp.h[l].transpose());
    }
    quad_grad.A[l].noalias() += al * x.transpose();
    quad_grad.A[l].noalias() += cl * v.transpose();
    quad_grad.b[l] += al;
    lin_grad.A[l].noalias() += (-h_centered) * (bp.delta[l] * x.transpose());
    lin_grad.b[l] += (-h_centered) * bp.delta[l];

    if (l > 0) {
      pbar.noalias() = p.W[l].transpose() * al;
      qbar.noalias() = p.W[l].transpose() * cl;
    }
  }
}

}  // namespace

std::vector<int> NetworkParams::widths() const {
  std::vector<int> w;
  w.reserve(W.size() + 1);
  w.push_back(static_cast<int>(W[0].cols()));
  for (const auto& m : W) w.push_back(static_cast<int>(m.rows()));
  return w;
}

std::int64_t NetworkParams::parameter_count() const {
  std::int64_t n = 0;
  for (std::size_t l = 0; l < W.size(); ++l) {
    if (l > 0) n += W[l].size();
    n += A[l].size() + b[l].size();
  }
  return n;
}

bool NetworkParams::all_finite() const {
  for (std::size_t l = 0; l < W.size(); ++l) {
    if (!W[l].allFinite() || !A[l].allFinite() || !b[l].allFinite()) return false;
  }
  return true;
}

std::int64_t parameter_count(const NetworkArch& arch) {
  const int L = arch.layers;
  std::int64_t n = 0;
  auto width = [&](int l) { return l == 0 ? arch.dim : (l == L ? 1 : arch.width); };
  for (int l = 0; l < L; ++l) {
    if (l > 0) n += std::int64_t{width(l + 1)} * width(l);
    n += std::int64_t{width(l + 1)} * arch.dim + width(l + 1);
  }
  return n;
}

NetworkParams init_params(const NetworkArch& arch, std::uint64_t seed) {
  if (arch.layers < 2) throw config_error("init_params: layers must be >= 2");
  if (arch.width < 1) throw config_error("init_params: width must be >= 1");
  if (arch.dim < 1) throw config_error("init_params: dim must be >= 1");
  if (!(arch.alpha > 0.0 && arch.alpha < 1.0)) {
    throw config_error("init_params: alpha must be in (0, 1)");
  }

  const int L = arch.layers;
  auto width = [&](int l) { return l == 0 ? arch.dim : (l == L ? 1 : arch.width); };

  NetworkParams p;
  p.input_dim = arch.dim;
  p.alpha = arch.alpha;
  p.W.resize(L);
  p.A.resize(L);
  p.b.resize(L);

  std::mt19937_64 rng(derive_seed(seed, 0x6e65));
  auto fill_uniform = [&](Eigen::MatrixXd& m, int fan_in, int fan_out) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = u(rng);
    }
  };

  for (int l = 0; l < L; ++l) {
    const int rows = width(l + 1);
    p.W[l].setZero(rows, width(l));
    if (l > 0) fill_uniform(p.W[l], width(l), rows);
    p.A[l].resize(rows, arch.dim);
    fill_uniform(p.A[l], arch.dim, rows);
    p.b[l].setZero(rows);
  }
  return p;
}

double forward(const NetworkParams& p, const Eigen::VectorXd& x) {
  if (x.size() != p.input_dim) {
    throw std::invalid_argument("forward: input dimension mismatch");
  }
  return run_forward(p, x, false).h[p.layer_count()][0];
}

Eigen::VectorXd gain(const NetworkParams& p, const Eigen::VectorXd& x) {
  if (x.size() != p.input_dim) {
    throw std::invalid_argument("gain: input dimension mismatch");
  }
  const ForwardPass fp = run_forward(p, x, false);
  return run_backward(p, x, fp).input_grad;
}

GainEvaluation evaluate_with_gradient(const NetworkParams& p,
                                      const Eigen::VectorXd& x) {
  if (x.size() != p.input_dim) {
    throw std::invalid_argument("evaluate_with_gradient: input dimension mismatch");
  }
  const ForwardPass fp = run_forward(p, x, false);
  GainEvaluation ev;
  ev.value = fp.h[p.layer_count()][0];
  ev.gradient = run_backward(p, x, fp).input_grad;
  return ev;
}

ParamGrad ParamGrad::zeros_like(const NetworkParams& p) {
  ParamGrad g;
  g.W.reserve(p.W.size());
  g.A.reserve(p.A.size());
  g.b.reserve(p.b.size());
  for (std::size_t l = 0; l < p.W.size(); ++l) {
    g.W.push_back(Eigen::MatrixXd::Zero(p.W[l].rows(), p.W[l].cols()));
    g.A.push_back(Eigen::MatrixXd::Zero(p.A[l].rows(), p.A[l].cols()));
    g.b.push_back(Eigen::VectorXd::Zero(p.b[l].size()));
  }
  return g;
}

void ParamGrad::set_zero() {
  for (auto& m : W) m.setZero();
  for (auto& m : A) m.setZero();
  for (auto& v : b) v.setZero();
}

void ParamGrad::add(const ParamGrad& other) {
  for (std::size_t l = 0; l < W.size(); ++l) {
    W[l] += other.W[l];
    A[l] += other.A[l];
    b[l] += other.b[l];
  }
}

void ParamGrad::scale(double s) {
  for (auto& m : W) m *= s;
  for (auto& m : A) m *= s;
  for (auto& v : b) v *= s;
}

bool ParamGrad::all_finite() const {
  for (const auto& m : W) {
    if (!m.allFinite()) return false;
  }
  for (const auto& m : A) {
    if (!m.allFinite()) return false;
  }
  for (const auto& v : b) {
    if (!v.allFinite()) return false;
  }
  return true;
}

double ParamGrad::squared_norm() const {
  double s = 0.0;
  for (const auto& m : W) s += m.squaredNorm();
  for (const auto& m : A) s += m.squaredNorm();
  for (const auto& v : b) s += v.squaredNorm();
  return s;
}

LossGradParts loss_and_grad_parts(const NetworkParams& p,
                                  const Eigen::MatrixXd& batch,
                                  const Eigen::VectorXd& h_values, double h_hat) {
  check_congruent(p, batch, h_values);
  LossGradParts parts;
  parts.quadratic_grad = ParamGrad::zeros_like(p);
  parts.linear_grad = ParamGrad::zeros_like(p);
  const Eigen::Index M = batch.rows();
  for (Eigen::Index i = 0; i < M; ++i) {
    accumulate_particle(p, batch.row(i).transpose(), h_values[i] - h_hat,
                        parts.quadratic_grad, parts.linear_grad,
                        parts.quadratic_loss, parts.linear_loss);
  }
  const double inv = 1.0 / static_cast<double>(M);
  parts.quadratic_loss *= inv;
  parts.linear_loss *= inv;
  parts.quadratic_grad.scale(inv);
  parts.linear_grad.scale(inv);
  return parts;
}

LossGrad loss_and_grad_serial(const NetworkParams& p, const Eigen::MatrixXd& batch,
                              const Eigen::VectorXd& h_values, double h_hat) {
  check_congruent(p, batch, h_values);
  LossGrad out;
  out.grad = ParamGrad::zeros_like(p);
  ParamGrad lin = ParamGrad::zeros_like(p);
  double quad_loss = 0.0, lin_loss = 0.0;
  const Eigen::Index M = batch.rows();
  for (Eigen::Index i = 0; i < M; ++i) {
    accumulate_particle(p, batch.row(i).transpose(), h_values[i] - h_hat,
                        out.grad, lin, quad_loss, lin_loss);
  }
  out.grad.add(lin);
  out.grad.scale(1.0 / static_cast<double>(M));
  out.loss = (quad_loss + lin_loss) / static_cast<double>(M);
  if (!out.grad.all_finite() || !std::isfinite(out.loss)) {
    throw numeric_error("loss_and_grad: non-finite loss or gradient");
  }
  return out;
}

LossGrad loss_and_grad(const NetworkParams& p, const Eigen::MatrixXd& batch,
                       const Eigen::VectorXd& h_values, double h_hat,
                       const Exec& exec) {
  if (exec.serial()) return loss_and_grad_serial(p, batch, h_values, h_hat);
  check_congruent(p, batch, h_values);

  const auto blocks = index_blocks(batch.rows(), exec.resolved());
  const int nb = static_cast<int>(blocks.size());
  std::vector<ParamGrad> partial_grad(nb);
  std::vector<double> partial_loss(nb, 0.0);
  std::exception_ptr error;

#pragma omp parallel for schedule(static, 1) num_threads(exec.resolved())
  for (int k = 0; k < nb; ++k) {
    try {
      ParamGrad quad = ParamGrad::zeros_like(p);
      ParamGrad lin = ParamGrad::zeros_like(p);
      double quad_loss = 0.0, lin_loss = 0.0;
      for (Eigen::Index i = blocks[k].first; i < blocks[k].second; ++i) {
        accumulate_particle(p, batch.row(i).transpose(), h_values[i] - h_hat,
                            quad, lin, quad_loss, lin_loss);
      }
      quad.add(lin);
      partial_grad[k] = std::move(quad);
      partial_loss[k] = quad_loss + lin_loss;
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);

  // block-ordered combine keeps results reproducible per worker count
  LossGrad out;
  out.grad = std::move(partial_grad[0]);
  out.loss = partial_loss[0];
  for (int k = 1; k < nb; ++k) {
    out.grad.add(partial_grad[k]);
    out.loss += partial_loss[k];
  }
  const double inv = 1.0 / static_cast<double>(batch.rows());
  out.grad.scale(inv);
  out.loss *= inv;
  if (!out.grad.all_finite() || !std::isfinite(out.loss)) {
    throw numeric_error("loss_and_grad: non-finite loss or gradient");
  }
  return out;
}

// --------------------------------------------------------------------------
// Serialization
// --------------------------------------------------------------------------

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(i, c));
  }
  j["data"] = data;
  return j;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
  const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw config_error("network json: data length does not match shape");
  }
  Eigen::MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = data[k++];
  }
  return m;
}

}  // namespace

std::string params_to_json(const NetworkParams& p) {
  nlohmann::json j;
  j["format"] = "gain-network-v1";
  j["input_dim"] = p.input_dim;
  j["alpha"] = p.alpha;
  j["widths"] = p.widths();
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < p.W.size(); ++l) {
    nlohmann::json layer;
    layer["W"] = matrix_to_json(p.W[l]);
    layer["A"] = matrix_to_json(p.A[l]);
    layer["b"] = std::vector<double>(p.b[l].data(), p.b[l].data() + p.b[l].size());
    layers.push_back(std::move(layer));
  }
  j["layers"] = std::move(layers);
  return j.dump(2);
}

NetworkParams params_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("network json: parse failure: ") + e.what());
  }
  if (j.value("format", "") != "gain-network-v1") {
    throw config_error("network json: unknown format tag");
  }
  NetworkParams p;
  p.input_dim = j.at("input_dim").get<int>();
  p.alpha = j.at("alpha").get<double>();
  for (const auto& layer : j.at("layers")) {
    p.W.push_back(matrix_from_json(layer.at("W")));
    p.A.push_back(matrix_from_json(layer.at("A")));
    const auto bv = layer.at("b").get<std::vector<double>>();
    p.b.push_back(Eigen::Map<const Eigen::VectorXd>(bv.data(),
                                                    static_cast<Eigen::Index>(bv.size())));
  }
  if (p.W.empty()) throw config_error("network json: no layers");
  return p;
}

void save_params(const std::filesystem::path& path, const NetworkParams& p) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_params: cannot open " + path.string());
  out << params_to_json(p) << "\n";
}

NetworkParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_params: cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return params_from_json(buf.str());
}

}  // namespace fpf
