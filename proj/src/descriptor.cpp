#include "rsjd/descriptor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace rsjd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 8-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 8> kGlNodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
    -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
    0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGlWeights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
    0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
    0.2223810344533745, 0.1012285362903763};

double gauss_legendre(const std::function<double(double)>& f, double a, double b) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t k = 0; k < kGlNodes.size(); ++k) {
    sum += kGlWeights[k] * f(mid + half * kGlNodes[k]);
  }
  return sum * half;
}

std::vector<double> merged_breaks(const std::vector<double>& a,
                                  const std::vector<double>& b) {
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Evaluation point representative of the piece starting at breaks[k].
double piece_probe(const std::vector<double>& breaks, std::size_t k) {
  if (k + 1 < breaks.size()) return 0.5 * (breaks[k] + breaks[k + 1]);
  return breaks[k] + 1.0;
}

}  // namespace

std::string to_string(DescriptorKind kind) {
  switch (kind) {
    case DescriptorKind::Constant: return "constant";
    case DescriptorKind::PiecewiseConstant: return "piecewise";
    case DescriptorKind::PowerLaw: return "power_law";
  }
  return "unknown";
}

Descriptor::Descriptor() : Descriptor(Piecewise{{0.0}, {0.0}, {0.0}, {0.0}}) {}

Descriptor::Descriptor(Piecewise p) : rep_(std::move(p)) {
  auto& pw = std::get<Piecewise>(rep_);
  // Drop pieces that repeat the previous value.
  std::vector<double> breaks{pw.breaks.front()};
  std::vector<double> vals{pw.vals.front()};
  for (std::size_t k = 1; k < pw.breaks.size(); ++k) {
    if (pw.vals[k] != vals.back()) {
      breaks.push_back(pw.breaks[k]);
      vals.push_back(pw.vals[k]);
    }
  }
  pw.breaks = std::move(breaks);
  pw.vals = std::move(vals);
  pw.cum.assign(pw.breaks.size(), 0.0);
  pw.cum_sq.assign(pw.breaks.size(), 0.0);
  for (std::size_t k = 1; k < pw.breaks.size(); ++k) {
    const double w = pw.breaks[k] - pw.breaks[k - 1];
    pw.cum[k] = pw.cum[k - 1] + pw.vals[k - 1] * w;
    pw.cum_sq[k] = pw.cum_sq[k - 1] + pw.vals[k - 1] * pw.vals[k - 1] * w;
  }
}

Descriptor::Descriptor(Power p) : rep_(p) {}

Descriptor Descriptor::constant(double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("constant descriptor must be finite");
  return Descriptor(Piecewise{{0.0}, {value}, {}, {}});
}

Descriptor Descriptor::piecewise(std::vector<double> breakpoints, std::vector<double> values) {
  if (breakpoints.empty() || breakpoints.size() != values.size()) {
    throw std::invalid_argument("piecewise descriptor needs equal, non-empty breakpoint and value lists");
  }
  if (breakpoints.front() != 0.0) {
    throw std::invalid_argument("piecewise descriptor breakpoints must start at 0");
  }
  for (std::size_t k = 1; k < breakpoints.size(); ++k) {
    if (!(breakpoints[k] > breakpoints[k - 1]) || !std::isfinite(breakpoints[k])) {
      throw std::invalid_argument("piecewise descriptor breakpoints must be strictly increasing");
    }
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("piecewise descriptor values must be finite");
  }
  return Descriptor(Piecewise{std::move(breakpoints), std::move(values), {}, {}});
}

Descriptor Descriptor::power_law(double scale, double exponent) {
  if (!std::isfinite(scale) || !std::isfinite(exponent)) {
    throw std::invalid_argument("power-law descriptor parameters must be finite");
  }
  if (scale == 0.0 || exponent == 0.0) return constant(scale);
  return Descriptor(Power{scale, exponent});
}

DescriptorKind Descriptor::kind() const noexcept {
  if (const auto* pw = std::get_if<Piecewise>(&rep_)) {
    return pw->breaks.size() == 1 ? DescriptorKind::Constant : DescriptorKind::PiecewiseConstant;
  }
  return DescriptorKind::PowerLaw;
}

bool Descriptor::is_piecewise() const noexcept { return std::holds_alternative<Piecewise>(rep_); }

std::size_t Descriptor::piece_index(double t) const {
  const auto& b = std::get<Piecewise>(rep_).breaks;
  const auto it = std::upper_bound(b.begin(), b.end(), t);
  return it == b.begin() ? 0 : static_cast<std::size_t>(it - b.begin()) - 1;
}

double Descriptor::operator()(double t) const {
  if (const auto* pw = std::get_if<Piecewise>(&rep_)) return pw->vals[piece_index(t)];
  const auto& p = std::get<Power>(rep_);
  if (t <= 0.0) return p.exponent > 0.0 ? 0.0 : (p.scale > 0 ? kInf : -kInf);
  return p.scale * std::pow(t, p.exponent);
}

double Descriptor::integral(double t) const {
  if (t <= 0.0) return 0.0;
  if (const auto* pw = std::get_if<Piecewise>(&rep_)) {
    const std::size_t k = piece_index(t);
    return pw->cum[k] + pw->vals[k] * (t - pw->breaks[k]);
  }
  const auto& p = std::get<Power>(rep_);
  if (p.exponent <= -1.0) return p.scale > 0 ? kInf : -kInf;
  return p.scale * std::pow(t, p.exponent + 1.0) / (p.exponent + 1.0);
}

double Descriptor::integral(double a, double b) const {
  if (const auto* p = std::get_if<Power>(&rep_); p && a > 0.0 && p->exponent <= -1.0) {
    // Integrable away from the origin even when not at it.
    if (p->exponent == -1.0) return p->scale * std::log(b / a);
    const double e1 = p->exponent + 1.0;
    return p->scale * (std::pow(b, e1) - std::pow(a, e1)) / e1;
  }
  return integral(b) - integral(a);
}

double Descriptor::square_integral(double a, double b) const {
  if (b <= a) return 0.0;
  if (const auto* pw = std::get_if<Piecewise>(&rep_)) {
    auto cumulative = [&](double t) {
      if (t <= 0.0) return 0.0;
      const std::size_t k = piece_index(t);
      return pw->cum_sq[k] + pw->vals[k] * pw->vals[k] * (t - pw->breaks[k]);
    };
    return cumulative(b) - cumulative(a);
  }
  const auto& p = std::get<Power>(rep_);
  const double e = 2.0 * p.exponent + 1.0;
  const double s2 = p.scale * p.scale;
  if (e == 0.0) return a > 0.0 ? s2 * std::log(b / a) : kInf;
  if (e < 0.0 && a <= 0.0) return kInf;
  return s2 * (std::pow(b, e) - (a > 0.0 ? std::pow(a, e) : 0.0)) / e;
}

double Descriptor::inverse_integral(double y) const {
  if (y <= 0.0) return 0.0;
  if (const auto* pw = std::get_if<Piecewise>(&rep_)) {
    const auto& c = pw->cum;
    const auto it = std::upper_bound(c.begin(), c.end(), y);
    const std::size_t k = static_cast<std::size_t>(it - c.begin()) - 1;
    if (k + 1 == c.size() && pw->vals[k] <= 0.0) return kInf;
    return pw->breaks[k] + (y - c[k]) / pw->vals[k];
  }
  const auto& p = std::get<Power>(rep_);
  if (p.scale <= 0.0) return kInf;
  if (p.exponent <= -1.0) return 0.0;
  const double e1 = p.exponent + 1.0;
  return std::pow(e1 * y / p.scale, 1.0 / e1);
}

bool Descriptor::integral_diverges() const {
  if (const auto* pw = std::get_if<Piecewise>(&rep_)) return pw->vals.back() > 0.0;
  const auto& p = std::get<Power>(rep_);
  return p.scale > 0.0;
}

bool Descriptor::finite_at_zero() const {
  if (const auto* p = std::get_if<Power>(&rep_)) return p->exponent > 0.0;
  return true;
}

std::vector<double> Descriptor::interior_breakpoints() const {
  if (const auto* pw = std::get_if<Piecewise>(&rep_)) {
    return {pw->breaks.begin() + 1, pw->breaks.end()};
  }
  return {};
}

double Descriptor::min_on(double horizon) const {
  if (const auto* pw = std::get_if<Piecewise>(&rep_)) {
    double m = pw->vals.front();
    for (std::size_t k = 0; k < pw->breaks.size() && pw->breaks[k] <= horizon; ++k) {
      m = std::min(m, pw->vals[k]);
    }
    return m;
  }
  return std::min((*this)(0.0), (*this)(horizon));
}

double Descriptor::max_on(double horizon) const {
  if (const auto* pw = std::get_if<Piecewise>(&rep_)) {
    double m = pw->vals.front();
    for (std::size_t k = 0; k < pw->breaks.size() && pw->breaks[k] <= horizon; ++k) {
      m = std::max(m, pw->vals[k]);
    }
    return m;
  }
  return std::max((*this)(0.0), (*this)(horizon));
}

const std::vector<double>& Descriptor::breakpoints() const {
  const auto* pw = std::get_if<Piecewise>(&rep_);
  if (!pw) throw std::logic_error("breakpoints() on a power-law descriptor");
  return pw->breaks;
}

const std::vector<double>& Descriptor::values() const {
  const auto* pw = std::get_if<Piecewise>(&rep_);
  if (!pw) throw std::logic_error("values() on a power-law descriptor");
  return pw->vals;
}

double Descriptor::scale() const {
  const auto* p = std::get_if<Power>(&rep_);
  if (!p) throw std::logic_error("scale() on a piecewise descriptor");
  return p->scale;
}

double Descriptor::exponent() const {
  const auto* p = std::get_if<Power>(&rep_);
  if (!p) throw std::logic_error("exponent() on a piecewise descriptor");
  return p->exponent;
}

bool Descriptor::operator==(const Descriptor& other) const {
  if (is_piecewise() != other.is_piecewise()) return false;
  if (is_piecewise()) return breakpoints() == other.breakpoints() && values() == other.values();
  return scale() == other.scale() && exponent() == other.exponent();
}

Descriptor combine(const Descriptor& a, const Descriptor& b,
                   const std::function<double(double, double)>& op,
                   const Tabulation& tab) {
  std::vector<double> breaks;
  if (a.is_piecewise() && b.is_piecewise()) {
    breaks = merged_breaks(a.breakpoints(), b.breakpoints());
  } else {
    if (!(tab.step > 0.0) || !(tab.horizon > 0.0)) {
      throw std::invalid_argument("tabulation grid needs positive horizon and step");
    }
    const auto n = static_cast<std::size_t>(std::ceil(tab.horizon / tab.step - 1e-9));
    std::vector<double> grid(n);
    for (std::size_t k = 0; k < n; ++k) grid[k] = static_cast<double>(k) * tab.horizon / static_cast<double>(n);
    std::vector<double> extra;
    for (const auto* d : {&a, &b}) {
      for (double x : d->interior_breakpoints()) {
        if (x < tab.horizon) extra.push_back(x);
      }
    }
    std::sort(extra.begin(), extra.end());
    breaks = merged_breaks(grid, extra);
  }
  std::vector<double> vals(breaks.size());
  for (std::size_t k = 0; k < breaks.size(); ++k) {
    double probe = piece_probe(breaks, k);
    if (!a.is_piecewise() || !b.is_piecewise()) {
      if (k + 1 == breaks.size()) probe = 0.5 * (breaks[k] + std::max(tab.horizon, breaks[k]));
      if (probe == breaks[k]) probe = breaks[k] + 0.5 * tab.step;
    }
    vals[k] = op(a(probe), b(probe));
  }
  return Descriptor::piecewise(std::move(breaks), std::move(vals));
}

Descriptor transform(const Descriptor& a, const std::function<double(double)>& op,
                     const Tabulation& tab) {
  return combine(a, Descriptor::constant(0.0), [&](double x, double) { return op(x); }, tab);
}

Descriptor add(const Descriptor& a, const Descriptor& b, const Tabulation& tab) {
  if (!a.is_piecewise() && b.kind() == DescriptorKind::Constant && b(0.0) == 0.0) return a;
  if (!b.is_piecewise() && a.kind() == DescriptorKind::Constant && a(0.0) == 0.0) return b;
  if (!a.is_piecewise() && !b.is_piecewise() && a.exponent() == b.exponent()) {
    return Descriptor::power_law(a.scale() + b.scale(), a.exponent());
  }
  return combine(a, b, std::plus<>{}, tab);
}

Descriptor subtract(const Descriptor& a, const Descriptor& b, const Tabulation& tab) {
  return add(a, scale(b, -1.0), tab);
}

Descriptor multiply(const Descriptor& a, const Descriptor& b, const Tabulation& tab) {
  if (a.kind() == DescriptorKind::Constant) return scale(b, a(0.0));
  if (b.kind() == DescriptorKind::Constant) return scale(a, b(0.0));
  if (!a.is_piecewise() && !b.is_piecewise()) {
    return Descriptor::power_law(a.scale() * b.scale(), a.exponent() + b.exponent());
  }
  return combine(a, b, std::multiplies<>{}, tab);
}

Descriptor scale(const Descriptor& a, double factor) {
  if (!a.is_piecewise()) return Descriptor::power_law(factor * a.scale(), a.exponent());
  std::vector<double> vals = a.values();
  for (double& v : vals) v *= factor;
  return Descriptor::piecewise(a.breakpoints(), std::move(vals));
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 const std::vector<double>& breaks) {
  if (!(b > a)) return 0.0;
  std::vector<double> cuts = breaks;
  std::sort(cuts.begin(), cuts.end());
  double sum = 0.0;
  double left = a;
  for (double x : cuts) {
    if (x > left && x < b) {
      sum += gauss_legendre(f, left, x);
      left = x;
    }
  }
  return sum + gauss_legendre(f, left, b);
}

}  // namespace rsjd
