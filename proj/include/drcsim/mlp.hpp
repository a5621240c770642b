#pragma once

#include <cstddef>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

namespace drcsim {

// Fully connected network with rectified-linear hidden layers and a linear
// output layer. All parameters live in one flat buffer: for each layer, the
// weight matrix (row-major, [out][in]) followed by the bias vector.
class Mlp {
 public:
  explicit Mlp(std::vector<int> sizes);  // zero-initialized

  // Uniform in +/- sqrt(6 / (fan_in + fan_out)) per layer.
  static Mlp glorot_init(std::vector<int> sizes, std::mt19937_64& rng);

  const std::vector<int>& sizes() const { return sizes_; }
  int layer_count() const { return static_cast<int>(sizes_.size()) - 1; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }
  std::size_t parameter_count() const { return params_.size(); }

  std::size_t weight_offset(int layer) const { return w_off_[layer]; }
  std::size_t bias_offset(int layer) const { return b_off_[layer]; }

  std::vector<double> forward(std::span<const double> x) const;

  // Flat numeric text format: a header with the layer sizes, then every
  // parameter in buffer order at full precision.
  void save(std::ostream& out) const;
  static Mlp load(std::istream& in);

  bool operator==(const Mlp&) const = default;

 private:
  std::vector<int> sizes_;
  std::vector<std::size_t> w_off_, b_off_;
  std::vector<double> params_;
};

// Reusable scratch for forward/backward passes.
struct MlpWorkspace {
  std::vector<std::vector<double>> act;    // act[0] = input, act[L] = output
  std::vector<std::vector<double>> delta;  // per-layer error terms
};

// Forward pass that keeps activations in `ws` for a later backward pass.
// Returns a view of the output layer, valid until the workspace is reused.
std::span<const double> forward_into(const Mlp& net, std::span<const double> x,
                                     MlpWorkspace& ws);

// Gradient of 0.5 * (y - Q(x, a))^2 with respect to every parameter, with the
// error propagated only through output unit `a`. Adds into `grad_out` when
// `accumulate` is set, otherwise overwrites it. Returns the sample loss.
double gradient(const Mlp& net, std::span<const double> x, int a, double y,
                MlpWorkspace& ws, std::span<double> grad_out, bool accumulate = false);

// theta <- theta - alpha * grad
void sgd_step(Mlp& net, std::span<const double> grad, double alpha);

}  // namespace drcsim
