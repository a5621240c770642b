#include "drcsim/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "drcsim/rng.hpp"

namespace drcsim {

Mlp::Mlp(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw std::invalid_argument("mlp needs at least two layer sizes");
  for (int s : sizes_) {
    if (s <= 0) throw std::invalid_argument("mlp layer sizes must be positive");
  }
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const auto in = static_cast<std::size_t>(sizes_[l]);
    const auto out = static_cast<std::size_t>(sizes_[l + 1]);
    w_off_.push_back(total);
    total += in * out;
    b_off_.push_back(total);
    total += out;
  }
  params_.assign(total, 0.0);
}

Mlp Mlp::glorot_init(std::vector<int> sizes, std::mt19937_64& rng) {
  Mlp net(std::move(sizes));
  for (int l = 0; l < net.layer_count(); ++l) {
    const int fan_in = net.sizes_[l];
    const int fan_out = net.sizes_[l + 1];
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    double* w = net.params_.data() + net.w_off_[l];
    const std::size_t n = static_cast<std::size_t>(fan_in) * fan_out;
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = limit * (2.0 * uniform01(rng) - 1.0);
    }
    // Biases stay zero.
  }
  return net;
}

std::vector<double> Mlp::forward(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != input_size()) {
    throw std::invalid_argument("mlp forward: input size mismatch");
  }
  std::vector<double> cur(x.begin(), x.end());
  std::vector<double> next;
  for (int l = 0; l < layer_count(); ++l) {
    const int in = sizes_[l];
    const int out = sizes_[l + 1];
    next.assign(static_cast<std::size_t>(out), 0.0);
    const double* w = params_.data() + w_off_[l];
    const double* b = params_.data() + b_off_[l];
    for (int o = 0; o < out; ++o) {
      double z = b[o];
      const double* row = w + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) z += row[i] * cur[static_cast<std::size_t>(i)];
      if (l + 1 < layer_count()) z = std::max(0.0, z);  // ReLU on hidden layers
      next[static_cast<std::size_t>(o)] = z;
    }
    cur.swap(next);
  }
  return cur;
}

void Mlp::save(std::ostream& out) const {
  out << "mlp v1 " << sizes_.size();
  for (int s : sizes_) out << ' ' << s;
  out << '\n';
  char buf[64];
  for (double p : params_) {
    std::snprintf(buf, sizeof buf, "%.17g", p);
    out << buf << '\n';
  }
}

Mlp Mlp::load(std::istream& in) {
  std::string tag, version;
  std::size_t n_sizes = 0;
  if (!(in >> tag >> version >> n_sizes) || tag != "mlp" || version != "v1") {
    throw std::runtime_error("mlp load: bad header");
  }
  if (n_sizes < 2 || n_sizes > 64) throw std::runtime_error("mlp load: bad layer count");
  std::vector<int> sizes(n_sizes);
  for (auto& s : sizes) {
    if (!(in >> s) || s <= 0) throw std::runtime_error("mlp load: bad layer size");
  }
  Mlp net(std::move(sizes));
  for (auto& p : net.params_) {
    if (!(in >> p)) throw std::runtime_error("mlp load: truncated parameters");
  }
  return net;
}

std::span<const double> forward_into(const Mlp& net, std::span<const double> x,
                                     MlpWorkspace& ws) {
  if (static_cast<int>(x.size()) != net.input_size()) {
    throw std::invalid_argument("mlp forward: input size mismatch");
  }
  const auto& sizes = net.sizes();
  const int layers = net.layer_count();
  ws.act.resize(static_cast<std::size_t>(layers) + 1);
  ws.delta.resize(static_cast<std::size_t>(layers));
  ws.act[0].assign(x.begin(), x.end());
  const auto params = net.parameters();
  for (int l = 0; l < layers; ++l) {
    const int in = sizes[l];
    const int out = sizes[l + 1];
    auto& dst = ws.act[static_cast<std::size_t>(l) + 1];
    dst.assign(static_cast<std::size_t>(out), 0.0);
    const double* w = params.data() + net.weight_offset(l);
    const double* b = params.data() + net.bias_offset(l);
    const auto& src = ws.act[static_cast<std::size_t>(l)];
    for (int o = 0; o < out; ++o) {
      double z = b[o];
      const double* row = w + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) z += row[i] * src[static_cast<std::size_t>(i)];
      if (l + 1 < layers) z = std::max(0.0, z);
      dst[static_cast<std::size_t>(o)] = z;
    }
  }
  return ws.act.back();
}

double gradient(const Mlp& net, std::span<const double> x, int a, double y,
                MlpWorkspace& ws, std::span<double> grad_out, bool accumulate) {
  if (a < 0 || a >= net.output_size()) {
    throw std::invalid_argument("mlp gradient: action index out of range");
  }
  if (grad_out.size() != net.parameter_count()) {
    throw std::invalid_argument("mlp gradient: gradient buffer size mismatch");
  }
  const auto q = forward_into(net, x, ws);
  const double residual = q[static_cast<std::size_t>(a)] - y;

  if (!accumulate) std::fill(grad_out.begin(), grad_out.end(), 0.0);

  const auto& sizes = net.sizes();
  const int layers = net.layer_count();
  // Output-layer error: residual on the chosen unit, zero elsewhere.
  auto& dout = ws.delta[static_cast<std::size_t>(layers) - 1];
  dout.assign(static_cast<std::size_t>(sizes.back()), 0.0);
  dout[static_cast<std::size_t>(a)] = residual;

  const auto params = net.parameters();
  for (int l = layers - 1; l >= 0; --l) {
    const int in = sizes[l];
    const int out = sizes[l + 1];
    const auto& d = ws.delta[static_cast<std::size_t>(l)];
    const auto& act_in = ws.act[static_cast<std::size_t>(l)];
    double* gw = grad_out.data() + net.weight_offset(l);
    double* gb = grad_out.data() + net.bias_offset(l);
    for (int o = 0; o < out; ++o) {
      const double dv = d[static_cast<std::size_t>(o)];
      if (dv == 0.0) continue;
      double* grow = gw + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) grow[i] += dv * act_in[static_cast<std::size_t>(i)];
      gb[o] += dv;
    }
    if (l == 0) break;
    // Propagate through the weights, then through the previous ReLU.
    auto& dprev = ws.delta[static_cast<std::size_t>(l) - 1];
    dprev.assign(static_cast<std::size_t>(in), 0.0);
    const double* w = params.data() + net.weight_offset(l);
    for (int o = 0; o < out; ++o) {
      const double dv = d[static_cast<std::size_t>(o)];
      if (dv == 0.0) continue;
      const double* row = w + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) dprev[static_cast<std::size_t>(i)] += dv * row[i];
    }
    for (int i = 0; i < in; ++i) {
      if (act_in[static_cast<std::size_t>(i)] <= 0.0) dprev[static_cast<std::size_t>(i)] = 0.0;
    }
  }
  return 0.5 * residual * residual;
}

void sgd_step(Mlp& net, std::span<const double> grad, double alpha) {
  if (grad.size() != net.parameter_count()) {
    throw std::invalid_argument("sgd_step: gradient buffer size mismatch");
  }
  auto params = net.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) params[i] -= alpha * grad[i];
}

}  // namespace drcsim
