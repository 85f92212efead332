#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ngalerkin/taylor.hpp"

namespace ngalerkin {

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class UnsupportedOrder : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Activation { sigmoid, tanh };

enum class Wrapper {
  none,
  /// u = u_bc(x) * exp(net(x)), u_bc = prod_i tanh(x_i / 2) tanh((7 - x_i) / 2).
  exp_potential_with_boundary_product,
};

struct NetworkSpec {
  std::size_t input_dim = 1;
  std::vector<std::size_t> hidden_widths;
  Activation activation = Activation::sigmoid;
  bool output_bias = false;
  Wrapper wrapper = Wrapper::none;
};

void validate(const NetworkSpec& spec);

std::size_t param_count(const NetworkSpec& spec);

/// A spatial derivative request: d^order / dx_axis^order, order in 1..3.
struct DerivOrder {
  std::size_t axis = 0;
  int order = 1;

  friend bool operator==(const DerivOrder&, const DerivOrder&) = default;
};

struct EvalRequest {
  std::span<const DerivOrder> orders{};
  bool grad_theta = false;
  bool grad_theta_of_spatial = false;
};

struct EvalResult {
  double value = 0.0;
  std::vector<double> grad_theta;
  /// Aligned with EvalRequest::orders.
  std::vector<double> spatial_derivs;
  /// Aligned with EvalRequest::orders when requested.
  std::vector<std::vector<double>> grad_theta_of_spatial;
};

/// Derivatives along one spatial axis x_j of every quantity that enters a
/// residual evaluation. Each Dual holds (value, d/dx_j value).
struct AxisJet {
  Dual value;
  Dual theta_dir;  // grad_theta u . dtheta
  std::vector<Dual> spatial_derivs;
};

/// A parametrization u(x; theta) together with the exact derivatives the
/// Galerkin assembly and the particle potentials consume.
class Parametrization {
 public:
  virtual ~Parametrization() = default;

  virtual std::size_t input_dim() const = 0;
  virtual std::size_t param_count() const = 0;

  virtual double eval(std::span<const double> theta, std::span<const double> x) const = 0;

  /// Hot path. Writes grad_theta u into `grad` unless it is empty and the
  /// requested spatial derivatives into `derivs`; returns u.
  virtual double eval_into(std::span<const double> theta, std::span<const double> x,
                           std::span<const DerivOrder> orders, std::span<double> grad,
                           std::span<double> derivs) const = 0;

  virtual void grad_theta_of_spatial(std::span<const double> theta, std::span<const double> x,
                                     DerivOrder order, std::span<double> out) const = 0;

  virtual AxisJet axis_jet(std::span<const double> theta, std::span<const double> dtheta,
                           std::span<const double> x, std::size_t axis,
                           std::span<const DerivOrder> orders) const = 0;

  EvalResult evaluate(std::span<const double> theta, std::span<const double> x,
                      const EvalRequest& request) const;

  std::vector<double> grad_theta(std::span<const double> theta, std::span<const double> x) const;
  std::vector<double> spatial_derivs(std::span<const double> theta, std::span<const double> x,
                                     std::span<const DerivOrder> orders) const;

 protected:
  void check_dims(std::span<const double> theta, std::span<const double> x) const;
  void check_orders(std::span<const DerivOrder> orders) const;
};

/// Fully connected network with the given activation, optionally wrapped.
///
/// Parameter layout per hidden layer: weights (width x fan_in, row-major)
/// then biases; the output layer has fan_in weights followed by an optional
/// bias. With no hidden layers the net is the affine map w.x (+ b).
class Mlp final : public Parametrization {
 public:
  explicit Mlp(NetworkSpec spec);

  const NetworkSpec& spec() const { return spec_; }
  std::size_t input_dim() const override { return spec_.input_dim; }
  std::size_t param_count() const override { return n_params_; }

  double eval(std::span<const double> theta, std::span<const double> x) const override;
  double eval_into(std::span<const double> theta, std::span<const double> x,
                   std::span<const DerivOrder> orders, std::span<double> grad,
                   std::span<double> derivs) const override;
  void grad_theta_of_spatial(std::span<const double> theta, std::span<const double> x,
                             DerivOrder order, std::span<double> out) const override;
  AxisJet axis_jet(std::span<const double> theta, std::span<const double> dtheta,
                   std::span<const double> x, std::size_t axis,
                   std::span<const DerivOrder> orders) const override;

  /// Network output before the wrapper (the potential for the FP wrapper).
  template <class T>
  T raw(std::span<const double> theta, std::span<const T> x) const;

  /// Full parametrization value in scalar type T; grad (if non-empty) receives
  /// grad_theta u in the same scalar type.
  template <class T>
  T value(std::span<const double> theta, std::span<const T> x, std::span<T> grad) const;

 private:
  struct Layer {
    std::size_t fan_in;
    std::size_t fan_out;
    std::size_t weight_offset;
    std::size_t bias_offset;
  };

  template <class T>
  struct Tape;

  template <class T>
  T forward(std::span<const double> theta, std::span<const T> x, Tape<T>& tape) const;
  template <class T>
  void backward(std::span<const double> theta, const Tape<T>& tape, const T& seed,
                std::span<T> grad) const;
  template <class T>
  T activate(const T& z) const;
  template <class T>
  T activate_prime(const T& z) const;

  NetworkSpec spec_;
  std::vector<Layer> hidden_;
  std::size_t out_weight_offset_ = 0;
  std::size_t n_params_ = 0;
};

/// Linear 1-D Fourier basis on a periodic interval [lower, upper):
/// u = theta_0 + sum_k theta_{2k-1} cos(k w (x - lower)) + theta_{2k} sin(k w (x - lower)).
class FourierBasis final : public Parametrization {
 public:
  FourierBasis(std::size_t n_wavenumbers, double lower, double upper);

  std::size_t input_dim() const override { return 1; }
  std::size_t param_count() const override { return 2 * n_wavenumbers_ + 1; }

  /// Value and derivatives of basis function j at x: out[k] = d^k phi_j.
  std::array<double, 4> basis(std::size_t j, double x) const;

  double eval(std::span<const double> theta, std::span<const double> x) const override;
  double eval_into(std::span<const double> theta, std::span<const double> x,
                   std::span<const DerivOrder> orders, std::span<double> grad,
                   std::span<double> derivs) const override;
  void grad_theta_of_spatial(std::span<const double> theta, std::span<const double> x,
                             DerivOrder order, std::span<double> out) const override;
  AxisJet axis_jet(std::span<const double> theta, std::span<const double> dtheta,
                   std::span<const double> x, std::size_t axis,
                   std::span<const DerivOrder> orders) const override;

 private:
  std::array<double, 5> basis5(std::size_t j, double x) const;

  std::size_t n_wavenumbers_;
  double lower_;
  double omega_;
};

double boundary_product(std::span<const double> x);

/// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] per layer, fixed seed.
std::vector<double> init_parameters(const NetworkSpec& spec, std::uint64_t seed);

}  // namespace ngalerkin
