#pragma once

#include <span>
#include <vector>

#include "bba/models/arch.hpp"
#include "bba/nd/mat.hpp"
#include "bba/nd/rng.hpp"

namespace bba::models {

using nd::Mat;
using nd::Vec;

/// Layered differentiable network: Dense / ReLU / Sigmoid / ConvMax /
/// Softmax stages over f64, with reverse-mode input gradients and
/// per-output-class Jacobians.
class Network {
 public:
  Network() = default;
  explicit Network(ArchitectureSpec arch);

  const ArchitectureSpec& arch() const { return arch_; }
  int in_dim() const { return arch_.in_dim; }
  int out_dim() const { return arch_.out_dim; }

  /// Glorot-uniform weights (r = sqrt(6/(fan_in+fan_out))), zero biases.
  void init_params(nd::SeededRng rng);

  /// Softmax temperature used by the final stage (training-time knob for
  /// distillation; deployed models run at 1).
  double temperature() const { return temperature_; }
  void set_temperature(double t) { temperature_ = t; }

  Vec forward(std::span<const double> x) const;
  /// Cross-entropy -log F_y(x), probability floored at 1e-12 before log.
  double cost(std::span<const double> x, int y) const;
  /// d cost / d x via one reverse pass.
  Vec input_cost_gradient(std::span<const double> x, int y) const;
  /// N x M matrix, row j = d F_j / d x (N reverse passes over one forward).
  Mat jacobian(std::span<const double> x) const;

  // ---- training-facing surface (used by SgdTrainer and the defenses) ----

  struct Grads {
    std::vector<Mat> w;
    std::vector<Vec> b;
  };
  Grads zero_grads() const;

  struct Trace {
    Vec x;
    std::vector<Vec> out;                  // per-stage outputs
    std::vector<Vec> conv;                 // ConvMax pre-pool buffers
    std::vector<std::vector<int>> pool_ix; // ConvMax argmax routing
  };
  void forward_trace(std::span<const double> x, Trace& t) const;

  /// Reverse pass seeded at the softmax *input* with dz (for cross-entropy
  /// this is (p - target) / temperature). Accumulates parameter gradients
  /// into g when non-null; returns d/dx when want_dx.
  Vec backward_from_softmax_input(const Trace& t, Vec dz, Grads* g, bool want_dx) const;
  /// Reverse pass seeded at the probability output with dp.
  Vec backward_from_output(const Trace& t, std::span<const double> dp, Grads* g,
                           bool want_dx) const;

  /// Parameter tensors in layer order (exposed for the optimizer and
  /// serialization; shapes must be preserved).
  std::vector<Mat>& weights() { return w_; }
  std::vector<Vec>& biases() { return b_; }
  const std::vector<Mat>& weights() const { return w_; }
  const std::vector<Vec>& biases() const { return b_; }

 private:
  struct Stage {
    LayerKind kind;
    int param = -1;  // index into w_/b_ for Dense/ConvMax
    int in_n = 0, out_n = 0;
    // ConvMax geometry
    int in_c = 0, in_h = 0, in_w = 0;
    int filters = 0, conv_h = 0, conv_w = 0, pool_h = 0, pool_w = 0;
  };

  void compile();

  ArchitectureSpec arch_;
  std::vector<Stage> stages_;
  std::vector<Mat> w_;
  std::vector<Vec> b_;
  double temperature_ = 1.0;
};

}  // namespace bba::models
