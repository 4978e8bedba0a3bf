#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "rltest/cycle.hpp"  // for Vec
#include "rltest/rng.hpp"

namespace rltest {

enum class Activation { identity, softmax, sigmoid, tanh };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

// Per-layer post-activation values recorded during a forward pass;
// acts[0] is the input, acts[i] the output of layer i.
struct MlpWorkspace {
  std::vector<Vec> acts;
};

// Fully connected network with ReLU hidden layers and a configurable output
// activation. Parameters are 64-bit floats held in one flat vector
// (per layer: weight matrix in row-major order, then biases), which keeps
// the optimizer, parameter noise, serialization and finite-difference
// checks uniform.
class Mlp {
 public:
  Mlp() = default;
  // layer_sizes = {input, hidden..., output}; at least {input, output}.
  // Parameters start at zero; call init_glorot for random initialization.
  Mlp(std::vector<int> layer_sizes, Activation output_activation);

  // Glorot (uniform) initialization: weights ~ U(+-sqrt(6/(fan_in+fan_out))),
  // biases zero.
  void init_glorot(Rng& rng);

  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  const std::vector<int>& layer_sizes() const { return sizes_; }
  Activation output_activation() const { return out_act_; }

  std::size_t param_count() const { return params_.size(); }
  Vec& params() { return params_; }
  const Vec& params() const { return params_; }

  // Weight (row, col) and bias views for one layer (0-based), used by tests.
  double& weight(int layer, int row, int col);
  double& bias(int layer, int row);

  Vec forward(const Vec& x) const;
  Vec forward(const Vec& x, MlpWorkspace& ws) const;

  // Exact gradient of dot(output, upstream) with respect to every parameter,
  // accumulated into grad (size param_count()); returns the gradient with
  // respect to the input. `ws` must come from a forward pass on this network.
  Vec backward(const MlpWorkspace& ws, const Vec& upstream, Vec& grad) const;

  // Versioned text snapshot (header, layer sizes, activation, row-major
  // parameters with round-trip precision).
  void save(std::ostream& out) const;
  static Mlp load(std::istream& in);

 private:
  std::vector<int> sizes_;
  Activation out_act_ = Activation::identity;
  Vec params_;
  std::vector<std::size_t> w_off_, b_off_;

  void build_offsets();
};

struct AdamConfig {
  double lr = 2.5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First/second moment state for Adam over a flat parameter vector.
struct AdamState {
  AdamConfig cfg;
  long step = 0;
  Vec m, v;

  explicit AdamState(std::size_t n, AdamConfig cfg = {});
};

// One Adam update of params from grad. Throws DataError("divergence") when
// the gradient is not finite.
void adam_step(Vec& params, const Vec& grad, AdamState& state);

struct GaussianParamNoise {
  double sigma = 0.5;
};

// Copy of the network with independent N(0, sigma^2) noise added to every
// parameter. sigma = 0 returns an exact copy.
Mlp apply_param_noise(const Mlp& net, const GaussianParamNoise& noise, Rng& rng);

// Mean squared error over one output vector; writes dL/dy into dl_dy.
double mse_loss(const Vec& y, const Vec& target, Vec& dl_dy);

// Numerically stable log-softmax of a logit vector.
Vec log_softmax(const Vec& logits);

// Softmax probabilities of a logit vector.
Vec softmax(const Vec& logits);

// Entropy of the categorical distribution defined by logits.
double entropy_from_logits(const Vec& logits);

}  // namespace rltest
