#pragma once

#include <functional>
#include <limits>
#include <string>
#include <variant>
#include <vector>

namespace rsjd {

/// Shape of a deterministic time function. Constant is reported for a
/// piecewise-constant function with a single piece.
enum class DescriptorKind { Constant, PiecewiseConstant, PowerLaw };

std::string to_string(DescriptorKind kind);

/// Working grid used when an algebraic combination of descriptors has no
/// closed form and must be tabulated.
struct Tabulation {
  double horizon = 10.0;
  double step = 10.0 / 4096.0;
};

/// Deterministic function of elapsed holding time t >= 0. Used for hazard
/// rates, drifts, jump sizes and diffusion coefficients.
///
/// Piecewise-constant functions are right-continuous: piece k covers
/// [breakpoints[k], breakpoints[k+1]) and the last piece extends to infinity.
/// A power law is scale * t^exponent.
class Descriptor {
 public:
  Descriptor();  // constant zero

  static Descriptor constant(double value);
  /// Throws std::invalid_argument unless breakpoints start at 0, are
  /// strictly increasing and match values in length.
  static Descriptor piecewise(std::vector<double> breakpoints,
                              std::vector<double> values);
  static Descriptor power_law(double scale, double exponent);

  DescriptorKind kind() const noexcept;
  bool is_piecewise() const noexcept;  // Constant or PiecewiseConstant

  double operator()(double t) const;
  /// Integral over [0, t]; +inf for a power law with exponent <= -1.
  double integral(double t) const;
  double integral(double a, double b) const;
  /// Integral of the square over [a, b].
  double square_integral(double a, double b) const;
  /// Smallest t with integral(t) >= y for a nonnegative function; +inf when
  /// the integral never reaches y.
  double inverse_integral(double y) const;
  /// True when the integral over [0, inf) is +inf.
  bool integral_diverges() const;
  bool finite_at_zero() const;

  /// Breakpoints strictly greater than zero (empty for a power law).
  std::vector<double> interior_breakpoints() const;
  /// Minimum and maximum over [0, horizon]. For a power law the extremes
  /// at t = 0 may be 0 or +inf.
  double min_on(double horizon) const;
  double max_on(double horizon) const;

  // Piecewise accessors (valid only when is_piecewise()).
  const std::vector<double>& breakpoints() const;
  const std::vector<double>& values() const;
  // Power-law accessors.
  double scale() const;
  double exponent() const;

  bool operator==(const Descriptor& other) const;

 private:
  struct Piecewise {
    std::vector<double> breaks;
    std::vector<double> vals;
    std::vector<double> cum;     // integral up to breaks[k]
    std::vector<double> cum_sq;  // integral of square up to breaks[k]
  };
  struct Power {
    double scale;
    double exponent;
  };

  explicit Descriptor(Piecewise p);
  explicit Descriptor(Power p);
  std::size_t piece_index(double t) const;

  std::variant<Piecewise, Power> rep_;
};

/// Pointwise binary combination. Closed on piecewise-constant operands
/// (merged breakpoint set); anything involving a power law is tabulated as
/// piecewise constant on the working grid, sampled at cell midpoints.
Descriptor combine(const Descriptor& a, const Descriptor& b,
                   const std::function<double(double, double)>& op,
                   const Tabulation& tab);
Descriptor transform(const Descriptor& a, const std::function<double(double)>& op,
                     const Tabulation& tab);

// Arithmetic with the closed forms that exist for power laws
// (common exponent for sums, any exponents for products and quotients).
Descriptor add(const Descriptor& a, const Descriptor& b, const Tabulation& tab);
Descriptor subtract(const Descriptor& a, const Descriptor& b, const Tabulation& tab);
Descriptor multiply(const Descriptor& a, const Descriptor& b, const Tabulation& tab);
Descriptor scale(const Descriptor& a, double factor);

/// Integral of f over [a, b], splitting at the given breakpoints and using
/// 8-point Gauss-Legendre on every sub-interval.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const std::vector<double>& breaks = {});

}  // namespace rsjd
