#pragma once

#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>

#include "walshgraph/common.hpp"

namespace walshgraph {

// =============================================================================
// Piecewise-linear coefficient tables
// =============================================================================

/// Continuous piecewise-linear function on [x.front(), x.back()], held
/// constant at the terminal values outside that range. Edge coefficients are
/// extended past the segment length by the terminal constant, so evaluation
/// never goes out of domain.
class PiecewiseLinear {
 public:
  PiecewiseLinear() = default;
  PiecewiseLinear(std::vector<Real> x, std::vector<Real> y) : x_(std::move(x)), y_(std::move(y)) {
    if (x_.empty() || x_.size() != y_.size())
      throw ValidationError("table-shape", "coefficient table", "breakpoint/value count mismatch or empty");
    for (std::size_t i = 1; i < x_.size(); ++i)
      if (!(x_[i] > x_[i - 1]))
        throw ValidationError("table-breakpoints", "coefficient table",
                              "breakpoints must be strictly increasing");
  }

  Real operator()(Real x) const {
    if (x <= x_.front()) return y_.front();
    if (x >= x_.back()) return y_.back();
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - x_.begin());
    const Real t = (x - x_[i - 1]) / (x_[i] - x_[i - 1]);
    return y_[i - 1] + t * (y_[i] - y_[i - 1]);
  }

  const std::vector<Real>& breakpoints() const { return x_; }
  const std::vector<Real>& values() const { return y_; }

  Real min_value() const { return *std::min_element(y_.begin(), y_.end()); }
  Real max_value() const { return *std::max_element(y_.begin(), y_.end()); }

 private:
  std::vector<Real> x_;
  std::vector<Real> y_;
};

/// Drift or diffusion profile on one edge: a constant or a table.
class Coefficient {
 public:
  Coefficient() : constant_(0.0), is_constant_(true) {}
  explicit Coefficient(Real c) : constant_(c), is_constant_(true) {}
  explicit Coefficient(PiecewiseLinear table) : table_(std::move(table)), is_constant_(false) {}

  Real operator()(Real x) const { return is_constant_ ? constant_ : table_(x); }

  bool is_constant() const { return is_constant_; }
  Real constant_value() const { return constant_; }
  const PiecewiseLinear& table() const { return table_; }

  Real min_value() const { return is_constant_ ? constant_ : table_.min_value(); }
  Real max_value() const { return is_constant_ ? constant_ : table_.max_value(); }

  bool is_constant_equal(Real v) const { return is_constant_ && constant_ == v; }

 private:
  PiecewiseLinear table_;
  Real constant_ = 0.0;
  bool is_constant_ = true;
};

/// Drift/diffusion pair for one edge in its own coordinate.
struct CoefficientSpec {
  Coefficient drift;              // a(x)
  Coefficient diffusion{1.0};     // sigma(x), must stay positive

  bool is_driftless_unit() const {
    return drift.is_constant_equal(0.0) && diffusion.is_constant_equal(1.0);
  }
};

// =============================================================================
// Polynomials and piecewise polynomials (test functions)
// =============================================================================

/// Dense polynomial c0 + c1 x + c2 x^2 + ...
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<Real> coeffs) : c_(std::move(coeffs)) {
    if (c_.empty()) c_.push_back(0.0);
  }
  static Polynomial constant(Real c) { return Polynomial({c}); }

  Real operator()(Real x) const {
    Real v = 0.0;
    for (std::size_t i = c_.size(); i-- > 0;) v = v * x + c_[i];
    return v;
  }

  Polynomial derivative() const {
    if (c_.size() <= 1) return Polynomial({0.0});
    std::vector<Real> d(c_.size() - 1);
    for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = c_[i] * static_cast<Real>(i);
    return Polynomial(std::move(d));
  }

  const std::vector<Real>& coefficients() const { return c_; }
  std::size_t degree() const { return c_.size() - 1; }

 private:
  std::vector<Real> c_{0.0};
};

/// Piecewise polynomial on [0, inf): pieces on [x_k, x_{k+1}), the last piece
/// extending to infinity. Each piece is written in the local variable
/// (x - x_k).
class PiecewisePolynomial {
 public:
  PiecewisePolynomial() : starts_{0.0}, pieces_{Polynomial::constant(0.0)} {}
  PiecewisePolynomial(std::vector<Real> starts, std::vector<Polynomial> pieces)
      : starts_(std::move(starts)), pieces_(std::move(pieces)) {
    if (starts_.empty() || starts_.size() != pieces_.size() || starts_.front() != 0.0)
      throw ValidationError("piecewise-poly", "test function", "pieces must start at 0");
    for (std::size_t i = 1; i < starts_.size(); ++i)
      if (!(starts_[i] > starts_[i - 1]))
        throw ValidationError("piecewise-poly", "test function",
                              "piece boundaries must be strictly increasing");
  }
  static PiecewisePolynomial single(Polynomial p) { return PiecewisePolynomial({0.0}, {std::move(p)}); }
  static PiecewisePolynomial constant(Real c) { return single(Polynomial::constant(c)); }

  Real operator()(Real x) const {
    const std::size_t i = piece_index(x);
    return pieces_[i](x - starts_[i]);
  }

  Real derivative_at(Real x) const {
    const std::size_t i = piece_index(x);
    return pieces_[i].derivative()(x - starts_[i]);
  }

  Real second_derivative_at(Real x) const {
    const std::size_t i = piece_index(x);
    return pieces_[i].derivative().derivative()(x - starts_[i]);
  }

  const std::vector<Real>& piece_starts() const { return starts_; }
  const std::vector<Polynomial>& pieces() const { return pieces_; }

 private:
  std::size_t piece_index(Real x) const {
    const auto it = std::upper_bound(starts_.begin(), starts_.end(), x);
    return it == starts_.begin() ? 0 : static_cast<std::size_t>(it - starts_.begin()) - 1;
  }

  std::vector<Real> starts_;
  std::vector<Polynomial> pieces_;
};

}  // namespace walshgraph
