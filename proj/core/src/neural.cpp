#include "rltest/neural.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "rltest/errors.hpp"

namespace rltest {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::softmax: return "softmax";
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
  }
  return "identity";
}

Activation activation_from_string(const std::string& s) {
  if (s == "identity") return Activation::identity;
  if (s == "softmax") return Activation::softmax;
  if (s == "sigmoid") return Activation::sigmoid;
  if (s == "tanh") return Activation::tanh;
  throw std::invalid_argument("unknown activation: " + s);
}

Mlp::Mlp(std::vector<int> layer_sizes, Activation output_activation)
    : sizes_(std::move(layer_sizes)), out_act_(output_activation) {
  if (sizes_.size() < 2)
    throw std::invalid_argument("network needs at least input and output sizes");
  for (int s : sizes_)
    if (s <= 0) throw std::invalid_argument("layer sizes must be positive");
  build_offsets();
}

void Mlp::build_offsets() {
  w_off_.clear();
  b_off_.clear();
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const std::size_t in = static_cast<std::size_t>(sizes_[l]);
    const std::size_t out = static_cast<std::size_t>(sizes_[l + 1]);
    w_off_.push_back(off);
    off += in * out;
    b_off_.push_back(off);
    off += out;
  }
  params_.assign(off, 0.0);
}

void Mlp::init_glorot(Rng& rng) {
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    const double limit = std::sqrt(6.0 / (in + out));
    double* w = params_.data() + w_off_[l];
    for (int i = 0; i < in * out; ++i) w[i] = rng.uniform(-limit, limit);
    double* b = params_.data() + b_off_[l];
    for (int i = 0; i < out; ++i) b[i] = 0.0;
  }
}

double& Mlp::weight(int layer, int row, int col) {
  return params_[w_off_[layer] + static_cast<std::size_t>(row) * sizes_[layer] + col];
}

double& Mlp::bias(int layer, int row) { return params_[b_off_[layer] + row]; }

namespace {

void apply_output_activation(Activation act, Vec& z) {
  switch (act) {
    case Activation::identity:
      return;
    case Activation::softmax: {
      const double mx = *std::max_element(z.begin(), z.end());
      double sum = 0.0;
      for (double& v : z) {
        v = std::exp(v - mx);
        sum += v;
      }
      for (double& v : z) v /= sum;
      return;
    }
    case Activation::sigmoid:
      for (double& v : z) v = 1.0 / (1.0 + std::exp(-v));
      return;
    case Activation::tanh:
      for (double& v : z) v = std::tanh(v);
      return;
  }
}

// dL/dz at the output layer from dL/dy, using only post-activation values y.
Vec output_delta(Activation act, const Vec& y, const Vec& upstream) {
  Vec delta(y.size());
  switch (act) {
    case Activation::identity:
      delta = upstream;
      break;
    case Activation::softmax: {
      double dot = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) dot += upstream[i] * y[i];
      for (std::size_t i = 0; i < y.size(); ++i) delta[i] = y[i] * (upstream[i] - dot);
      break;
    }
    case Activation::sigmoid:
      for (std::size_t i = 0; i < y.size(); ++i) delta[i] = upstream[i] * y[i] * (1.0 - y[i]);
      break;
    case Activation::tanh:
      for (std::size_t i = 0; i < y.size(); ++i) delta[i] = upstream[i] * (1.0 - y[i] * y[i]);
      break;
  }
  return delta;
}

}  // namespace

Vec Mlp::forward(const Vec& x, MlpWorkspace& ws) const {
  if (static_cast<int>(x.size()) != input_size())
    throw std::invalid_argument("input size mismatch");
  ws.acts.assign(sizes_.size(), {});
  ws.acts[0] = x;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    const Vec& a = ws.acts[l];
    Vec z(out);
    const double* w = params_.data() + w_off_[l];
    const double* b = params_.data() + b_off_[l];
    for (int r = 0; r < out; ++r) {
      const double* wr = w + static_cast<std::size_t>(r) * in;
      double s = b[r];
      for (int c = 0; c < in; ++c) s += wr[c] * a[c];
      z[r] = s;
    }
    const bool last = (l + 2 == sizes_.size());
    if (last) {
      apply_output_activation(out_act_, z);
    } else {
      for (double& v : z) v = v > 0.0 ? v : 0.0;  // ReLU
    }
    ws.acts[l + 1] = std::move(z);
  }
  return ws.acts.back();
}

Vec Mlp::forward(const Vec& x) const {
  MlpWorkspace ws;
  return forward(x, ws);
}

Vec Mlp::backward(const MlpWorkspace& ws, const Vec& upstream, Vec& grad) const {
  if (ws.acts.size() != sizes_.size())
    throw std::invalid_argument("workspace does not match this network");
  if (upstream.size() != static_cast<std::size_t>(output_size()))
    throw std::invalid_argument("upstream gradient size mismatch");
  if (grad.size() != params_.size())
    throw std::invalid_argument("gradient buffer size mismatch");

  Vec delta = output_delta(out_act_, ws.acts.back(), upstream);
  for (int l = static_cast<int>(sizes_.size()) - 2; l >= 0; --l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    const Vec& a = ws.acts[l];
    double* gw = grad.data() + w_off_[l];
    double* gb = grad.data() + b_off_[l];
    for (int r = 0; r < out; ++r) {
      const double d = delta[r];
      gb[r] += d;
      double* gwr = gw + static_cast<std::size_t>(r) * in;
      for (int c = 0; c < in; ++c) gwr[c] += d * a[c];
    }
    Vec prev(in, 0.0);
    const double* w = params_.data() + w_off_[l];
    for (int r = 0; r < out; ++r) {
      const double d = delta[r];
      const double* wr = w + static_cast<std::size_t>(r) * in;
      for (int c = 0; c < in; ++c) prev[c] += wr[c] * d;
    }
    if (l > 0) {
      // ReLU derivative from the post-activation value: positive iff active.
      for (int c = 0; c < in; ++c)
        if (a[c] <= 0.0) prev[c] = 0.0;
    }
    delta = std::move(prev);
  }
  return delta;  // gradient with respect to the input
}

namespace {

void write_double(std::ostream& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, res.ptr - buf);
}

}  // namespace

void Mlp::save(std::ostream& out) const {
  out << "rltest-mlp 1\n";
  out << "layers";
  for (int s : sizes_) out << ' ' << s;
  out << '\n';
  out << "activation " << to_string(out_act_) << '\n';
  out << "params " << params_.size() << '\n';
  for (double v : params_) {
    write_double(out, v);
    out.put('\n');
  }
}

Mlp Mlp::load(std::istream& in) {
  std::string line;
  const auto next_line = [&]() -> const std::string& {
    if (!std::getline(in, line)) throw DataError("network snapshot: truncated");
    return line;
  };
  {
    std::istringstream ss(next_line());
    std::string magic;
    int version = 0;
    ss >> magic >> version;
    if (magic != "rltest-mlp" || version != 1)
      throw DataError("unrecognized network snapshot header");
  }
  std::vector<int> sizes;
  {
    std::istringstream ss(next_line());
    std::string tag;
    ss >> tag;
    if (tag != "layers") throw DataError("network snapshot: missing layer sizes");
    int s = 0;
    while (ss >> s) sizes.push_back(s);
  }
  std::string act_name;
  {
    std::istringstream ss(next_line());
    std::string tag;
    ss >> tag >> act_name;
    if (tag != "activation") throw DataError("network snapshot: missing activation");
    if (act_name != "identity" && act_name != "softmax" && act_name != "sigmoid" &&
        act_name != "tanh")
      throw DataError("network snapshot: unknown activation '" + act_name + "'");
  }
  std::size_t count = 0;
  {
    std::istringstream ss(next_line());
    std::string tag;
    ss >> tag >> count;
    if (tag != "params") throw DataError("network snapshot: missing parameter count");
  }
  Mlp net(sizes, activation_from_string(act_name));
  if (net.param_count() != count)
    throw DataError("network snapshot: parameter count mismatch");
  for (std::size_t i = 0; i < count; ++i) {
    std::istringstream ss(next_line());
    double v = 0.0;
    if (!(ss >> v)) throw DataError("network snapshot: truncated parameters");
    net.params_[i] = v;
  }
  return net;
}

AdamState::AdamState(std::size_t n, AdamConfig config)
    : cfg(config), m(n, 0.0), v(n, 0.0) {}

void adam_step(Vec& params, const Vec& grad, AdamState& state) {
  if (params.size() != grad.size() || params.size() != state.m.size())
    throw std::invalid_argument("adam: size mismatch");
  for (double g : grad)
    if (!std::isfinite(g)) throw DataError("divergence: non-finite gradient");
  state.step += 1;
  const double b1 = state.cfg.beta1, b2 = state.cfg.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = b1 * state.m[i] + (1.0 - b1) * grad[i];
    state.v[i] = b2 * state.v[i] + (1.0 - b2) * grad[i] * grad[i];
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    params[i] -= state.cfg.lr * mhat / (std::sqrt(vhat) + state.cfg.eps);
  }
}

Mlp apply_param_noise(const Mlp& net, const GaussianParamNoise& noise, Rng& rng) {
  Mlp copy = net;
  if (noise.sigma != 0.0) {
    for (double& p : copy.params()) p += noise.sigma * rng.normal();
  }
  return copy;
}

double mse_loss(const Vec& y, const Vec& target, Vec& dl_dy) {
  if (y.size() != target.size()) throw std::invalid_argument("mse: size mismatch");
  dl_dy.assign(y.size(), 0.0);
  double loss = 0.0;
  const double n = static_cast<double>(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - target[i];
    loss += d * d / n;
    dl_dy[i] = 2.0 * d / n;
  }
  return loss;
}

Vec log_softmax(const Vec& logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double v : logits) sum += std::exp(v - mx);
  const double lse = mx + std::log(sum);
  Vec out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
  return out;
}

Vec softmax(const Vec& logits) {
  Vec out = log_softmax(logits);
  for (double& v : out) v = std::exp(v);
  return out;
}

double entropy_from_logits(const Vec& logits) {
  const Vec lp = log_softmax(logits);
  double h = 0.0;
  for (double v : lp) h -= std::exp(v) * v;
  return h;
}

}  // namespace rltest
