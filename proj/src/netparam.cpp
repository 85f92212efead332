#include "ngalerkin/netparam.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "ngalerkin/rng.hpp"

namespace ngalerkin {

void validate(const NetworkSpec& spec) {
  if (spec.input_dim == 0) throw std::invalid_argument("network input_dim must be positive");
  for (std::size_t w : spec.hidden_widths) {
    if (w == 0) throw std::invalid_argument("hidden layer widths must be positive");
  }
}

std::size_t param_count(const NetworkSpec& spec) {
  validate(spec);
  std::size_t n = 0;
  std::size_t fan_in = spec.input_dim;
  for (std::size_t w : spec.hidden_widths) {
    n += fan_in * w + w;
    fan_in = w;
  }
  return n + fan_in + (spec.output_bias ? 1 : 0);
}

double boundary_product(std::span<const double> x) {
  double p = 1.0;
  for (double xi : x) p *= std::tanh(0.5 * xi) * std::tanh(0.5 * (7.0 - xi));
  return p;
}

// ---------------------------------------------------------------------------
// Parametrization

void Parametrization::check_dims(std::span<const double> theta, std::span<const double> x) const {
  if (theta.size() != param_count()) {
    throw DimensionError("parameter vector has length " + std::to_string(theta.size()) +
                         ", expected " + std::to_string(param_count()));
  }
  if (x.size() != input_dim()) {
    throw DimensionError("spatial point has dimension " + std::to_string(x.size()) +
                         ", expected " + std::to_string(input_dim()));
  }
}

void Parametrization::check_orders(std::span<const DerivOrder> orders) const {
  for (const DerivOrder& o : orders) {
    if (o.axis >= input_dim()) throw DimensionError("derivative axis out of range");
    if (o.order < 1 || o.order > 3) {
      throw UnsupportedOrder("spatial derivative order " + std::to_string(o.order) +
                             " unsupported (1..3)");
    }
  }
}

EvalResult Parametrization::evaluate(std::span<const double> theta, std::span<const double> x,
                                     const EvalRequest& request) const {
  EvalResult r;
  if (request.grad_theta) r.grad_theta.assign(param_count(), 0.0);
  r.spatial_derivs.assign(request.orders.size(), 0.0);
  r.value = eval_into(theta, x, request.orders, r.grad_theta, r.spatial_derivs);
  if (request.grad_theta_of_spatial) {
    for (const DerivOrder& o : request.orders) {
      std::vector<double> g(param_count());
      grad_theta_of_spatial(theta, x, o, g);
      r.grad_theta_of_spatial.push_back(std::move(g));
    }
  }
  return r;
}

std::vector<double> Parametrization::grad_theta(std::span<const double> theta,
                                                std::span<const double> x) const {
  std::vector<double> g(param_count());
  eval_into(theta, x, {}, g, {});
  return g;
}

std::vector<double> Parametrization::spatial_derivs(std::span<const double> theta,
                                                    std::span<const double> x,
                                                    std::span<const DerivOrder> orders) const {
  std::vector<double> d(orders.size());
  eval_into(theta, x, orders, {}, d);
  return d;
}

// ---------------------------------------------------------------------------
// Mlp

template <class T>
struct Mlp::Tape {
  std::vector<std::vector<T>> a;  // a[0] is the input, a[l + 1] the output of hidden layer l
};

Mlp::Mlp(NetworkSpec spec) : spec_(std::move(spec)) {
  validate(spec_);
  std::size_t offset = 0;
  std::size_t fan_in = spec_.input_dim;
  for (std::size_t w : spec_.hidden_widths) {
    hidden_.push_back(Layer{fan_in, w, offset, offset + fan_in * w});
    offset += fan_in * w + w;
    fan_in = w;
  }
  out_weight_offset_ = offset;
  n_params_ = offset + fan_in + (spec_.output_bias ? 1 : 0);
}

template <class T>
T Mlp::activate(const T& z) const {
  switch (spec_.activation) {
    case Activation::sigmoid:
      return sigmoid(z);
    case Activation::tanh:
      return tanh(z);
  }
  return z;
}

template <class T>
T Mlp::forward(std::span<const double> theta, std::span<const T> x, Tape<T>& tape) const {
  tape.a.resize(hidden_.size() + 1);
  tape.a[0].assign(x.begin(), x.end());
  for (std::size_t l = 0; l < hidden_.size(); ++l) {
    const Layer& layer = hidden_[l];
    const std::vector<T>& in = tape.a[l];
    std::vector<T>& out = tape.a[l + 1];
    out.resize(layer.fan_out);
    for (std::size_t o = 0; o < layer.fan_out; ++o) {
      T z(theta[layer.bias_offset + o]);
      const double* w = theta.data() + layer.weight_offset + o * layer.fan_in;
      for (std::size_t i = 0; i < layer.fan_in; ++i) z += w[i] * in[i];
      out[o] = activate(z);
    }
  }
  const std::vector<T>& last = tape.a.back();
  T y(spec_.output_bias ? theta[out_weight_offset_ + last.size()] : 0.0);
  for (std::size_t i = 0; i < last.size(); ++i) y += theta[out_weight_offset_ + i] * last[i];
  return y;
}

template <class T>
void Mlp::backward(std::span<const double> theta, const Tape<T>& tape, const T& seed,
                   std::span<T> grad) const {
  const std::vector<T>& last = tape.a.back();
  std::vector<T> delta(last.size());
  for (std::size_t i = 0; i < last.size(); ++i) {
    grad[out_weight_offset_ + i] = seed * last[i];
    delta[i] = seed * theta[out_weight_offset_ + i];
  }
  if (spec_.output_bias) grad[out_weight_offset_ + last.size()] = seed;

  std::vector<T> prev;
  for (std::size_t l = hidden_.size(); l-- > 0;) {
    const Layer& layer = hidden_[l];
    const std::vector<T>& out = tape.a[l + 1];
    const std::vector<T>& in = tape.a[l];
    // delta becomes dL/dz using the activation derivative in terms of its value.
    for (std::size_t o = 0; o < layer.fan_out; ++o) {
      const T& s = out[o];
      if (spec_.activation == Activation::sigmoid) {
        delta[o] = delta[o] * (s * (1.0 - s));
      } else {
        delta[o] = delta[o] * (1.0 - s * s);
      }
    }
    for (std::size_t o = 0; o < layer.fan_out; ++o) {
      grad[layer.bias_offset + o] = delta[o];
      T* gw = grad.data() + layer.weight_offset + o * layer.fan_in;
      for (std::size_t i = 0; i < layer.fan_in; ++i) gw[i] = delta[o] * in[i];
    }
    if (l == 0) break;
    prev.assign(layer.fan_in, T(0.0));
    for (std::size_t o = 0; o < layer.fan_out; ++o) {
      const double* w = theta.data() + layer.weight_offset + o * layer.fan_in;
      for (std::size_t i = 0; i < layer.fan_in; ++i) prev[i] += w[i] * delta[o];
    }
    delta.swap(prev);
  }
}

template <class T>
T Mlp::raw(std::span<const double> theta, std::span<const T> x) const {
  Tape<T> tape;
  return forward(theta, x, tape);
}

template <class T>
T Mlp::value(std::span<const double> theta, std::span<const T> x, std::span<T> grad) const {
  Tape<T> tape;
  const T net = forward(theta, x, tape);
  if (spec_.wrapper == Wrapper::none) {
    if (!grad.empty()) backward(theta, tape, T(1.0), grad);
    return net;
  }
  T bc(1.0);
  for (const T& xi : x) bc = bc * (tanh(0.5 * xi) * tanh(0.5 * (7.0 - xi)));
  const T u = bc * exp(net);
  if (!grad.empty()) backward(theta, tape, u, grad);
  return u;
}

namespace {

template <class T>
std::vector<T> seed_axis(std::span<const double> x, std::size_t axis) {
  std::vector<T> xs(x.begin(), x.end());
  xs[axis] = T::variable(x[axis]);
  return xs;
}

int max_order_for_axis(std::span<const DerivOrder> orders, std::size_t axis) {
  int k = 0;
  for (const DerivOrder& o : orders) {
    if (o.axis == axis) k = std::max(k, o.order);
  }
  return k;
}

}  // namespace

double Mlp::eval(std::span<const double> theta, std::span<const double> x) const {
  check_dims(theta, x);
  return value<double>(theta, x, {});
}

double Mlp::eval_into(std::span<const double> theta, std::span<const double> x,
                      std::span<const DerivOrder> orders, std::span<double> grad,
                      std::span<double> derivs) const {
  check_dims(theta, x);
  check_orders(orders);
  if (!grad.empty() && grad.size() != n_params_) throw DimensionError("gradient buffer size");
  const double u = value<double>(theta, x, grad);

  std::vector<bool> done(input_dim(), false);
  for (const DerivOrder& req : orders) {
    if (done[req.axis]) continue;
    done[req.axis] = true;
    const int k = max_order_for_axis(orders, req.axis);
    auto fill = [&](const auto& jet) {
      for (std::size_t r = 0; r < orders.size(); ++r) {
        if (orders[r].axis == req.axis) derivs[r] = jet.derivative(orders[r].order);
      }
    };
    if (k == 1) {
      auto xs = seed_axis<Taylor<double, 1>>(x, req.axis);
      fill(value<Taylor<double, 1>>(theta, std::span<const Taylor<double, 1>>(xs), {}));
    } else if (k == 2) {
      auto xs = seed_axis<Taylor<double, 2>>(x, req.axis);
      fill(value<Taylor<double, 2>>(theta, std::span<const Taylor<double, 2>>(xs), {}));
    } else {
      auto xs = seed_axis<Taylor<double, 3>>(x, req.axis);
      fill(value<Taylor<double, 3>>(theta, std::span<const Taylor<double, 3>>(xs), {}));
    }
  }
  return u;
}

void Mlp::grad_theta_of_spatial(std::span<const double> theta, std::span<const double> x,
                                DerivOrder order, std::span<double> out) const {
  check_dims(theta, x);
  check_orders(std::span<const DerivOrder>(&order, 1));
  using J = Taylor<double, 3>;
  auto xs = seed_axis<J>(x, order.axis);
  std::vector<J> g(n_params_);
  value<J>(theta, std::span<const J>(xs), std::span<J>(g));
  for (std::size_t i = 0; i < n_params_; ++i) out[i] = g[i].derivative(order.order);
}

AxisJet Mlp::axis_jet(std::span<const double> theta, std::span<const double> dtheta,
                      std::span<const double> x, std::size_t axis,
                      std::span<const DerivOrder> orders) const {
  check_dims(theta, x);
  check_orders(orders);
  if (axis >= input_dim()) throw DimensionError("axis out of range");
  if (dtheta.size() != n_params_) throw DimensionError("dtheta length");

  AxisJet jet;
  {
    auto xs = seed_axis<Dual>(x, axis);
    std::vector<Dual> g(n_params_);
    jet.value = value<Dual>(theta, std::span<const Dual>(xs), std::span<Dual>(g));
    Dual dir(0.0);
    for (std::size_t i = 0; i < n_params_; ++i) dir += dtheta[i] * g[i];
    jet.theta_dir = dir;
  }

  jet.spatial_derivs.assign(orders.size(), Dual(0.0));
  std::vector<bool> done(input_dim(), false);
  for (const DerivOrder& req : orders) {
    if (done[req.axis]) continue;
    done[req.axis] = true;
    // Outer Taylor along the requested axis, inner dual along `axis`.
    using J = Taylor<Dual, 3>;
    std::vector<J> xs(x.size());
    for (std::size_t c = 0; c < x.size(); ++c) {
      xs[c].c[0] = c == axis ? Dual::variable(x[c]) : Dual(x[c]);
      if (c == req.axis) xs[c].c[1] = Dual(1.0);
    }
    const J u = value<J>(theta, std::span<const J>(xs), {});
    for (std::size_t r = 0; r < orders.size(); ++r) {
      if (orders[r].axis == req.axis) jet.spatial_derivs[r] = u.derivative(orders[r].order);
    }
  }
  return jet;
}

template double Mlp::raw<double>(std::span<const double>, std::span<const double>) const;
template Dual Mlp::raw<Dual>(std::span<const double>, std::span<const Dual>) const;
template double Mlp::value<double>(std::span<const double>, std::span<const double>,
                                   std::span<double>) const;
template Dual Mlp::value<Dual>(std::span<const double>, std::span<const Dual>,
                               std::span<Dual>) const;
template Taylor<double, 3> Mlp::value<Taylor<double, 3>>(std::span<const double>,
                                                         std::span<const Taylor<double, 3>>,
                                                         std::span<Taylor<double, 3>>) const;

// ---------------------------------------------------------------------------
// FourierBasis

FourierBasis::FourierBasis(std::size_t n_wavenumbers, double lower, double upper)
    : n_wavenumbers_(n_wavenumbers), lower_(lower), omega_(2.0 * std::numbers::pi / (upper - lower)) {
  if (!(upper > lower)) throw std::invalid_argument("FourierBasis needs lower < upper");
}

std::array<double, 5> FourierBasis::basis5(std::size_t j, double x) const {
  if (j == 0) return {1.0, 0.0, 0.0, 0.0, 0.0};
  const std::size_t k = (j + 1) / 2;
  const double w = static_cast<double>(k) * omega_;
  const double arg = w * (x - lower_);
  const double c = std::cos(arg);
  const double s = std::sin(arg);
  if (j % 2 == 1) return {c, -w * s, -w * w * c, w * w * w * s, w * w * w * w * c};
  return {s, w * c, -w * w * s, -w * w * w * c, w * w * w * w * s};
}

std::array<double, 4> FourierBasis::basis(std::size_t j, double x) const {
  const auto b = basis5(j, x);
  return {b[0], b[1], b[2], b[3]};
}

double FourierBasis::eval(std::span<const double> theta, std::span<const double> x) const {
  check_dims(theta, x);
  double u = 0.0;
  for (std::size_t j = 0; j < theta.size(); ++j) u += theta[j] * basis5(j, x[0])[0];
  return u;
}

double FourierBasis::eval_into(std::span<const double> theta, std::span<const double> x,
                               std::span<const DerivOrder> orders, std::span<double> grad,
                               std::span<double> derivs) const {
  check_dims(theta, x);
  check_orders(orders);
  double u = 0.0;
  std::fill(derivs.begin(), derivs.end(), 0.0);
  for (std::size_t j = 0; j < theta.size(); ++j) {
    const auto b = basis5(j, x[0]);
    u += theta[j] * b[0];
    if (!grad.empty()) grad[j] = b[0];
    for (std::size_t r = 0; r < orders.size(); ++r) derivs[r] += theta[j] * b[orders[r].order];
  }
  return u;
}

void FourierBasis::grad_theta_of_spatial(std::span<const double> theta, std::span<const double> x,
                                         DerivOrder order, std::span<double> out) const {
  check_dims(theta, x);
  check_orders(std::span<const DerivOrder>(&order, 1));
  for (std::size_t j = 0; j < theta.size(); ++j) out[j] = basis5(j, x[0])[order.order];
}

AxisJet FourierBasis::axis_jet(std::span<const double> theta, std::span<const double> dtheta,
                               std::span<const double> x, std::size_t axis,
                               std::span<const DerivOrder> orders) const {
  check_dims(theta, x);
  check_orders(orders);
  if (axis != 0) throw DimensionError("axis out of range");
  AxisJet jet;
  jet.spatial_derivs.assign(orders.size(), Dual(0.0));
  for (std::size_t j = 0; j < theta.size(); ++j) {
    const auto b = basis5(j, x[0]);
    jet.value.c[0] += theta[j] * b[0];
    jet.value.c[1] += theta[j] * b[1];
    jet.theta_dir.c[0] += dtheta[j] * b[0];
    jet.theta_dir.c[1] += dtheta[j] * b[1];
    for (std::size_t r = 0; r < orders.size(); ++r) {
      jet.spatial_derivs[r].c[0] += theta[j] * b[orders[r].order];
      jet.spatial_derivs[r].c[1] += theta[j] * b[orders[r].order + 1];
    }
  }
  return jet;
}

// ---------------------------------------------------------------------------

std::vector<double> init_parameters(const NetworkSpec& spec, std::uint64_t seed) {
  const std::size_t n = param_count(spec);
  std::vector<double> theta(n);
  Stream rng(seed);
  std::size_t offset = 0;
  std::size_t fan_in = spec.input_dim;
  auto fill = [&](std::size_t count, std::size_t fan) {
    const double r = 1.0 / std::sqrt(static_cast<double>(fan));
    std::uniform_real_distribution<double> dist(-r, r);
    for (std::size_t i = 0; i < count; ++i) theta[offset++] = dist(rng);
  };
  for (std::size_t w : spec.hidden_widths) {
    fill(fan_in * w + w, fan_in);
    fan_in = w;
  }
  fill(n - offset, fan_in);
  return theta;
}

}  // namespace ngalerkin
