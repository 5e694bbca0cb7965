#pragma once

// Piecewise odd nonlinearities f, their exact primitives F and the
// Pohozaev integrand Q(s) = 2N F(s) - (N-2) s f(s).

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "radshoot/error.hpp"

namespace radshoot {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Form;
using FormPtr = std::shared_ptr<const Form>;

/// s^p on s >= 0.
struct Power {
  double p = 1.0;
};

/// s^p - s on s >= 0.
struct PowerMinusLinear {
  double p = 2.0;
};

/// c2 * inner(s). `c2` plays the role of the amplitude factor A^2.
struct Scaled {
  double c2 = 1.0;
  FormPtr inner;
};

/// Straight line through (lo, f_lo) and (hi, f_hi) of the owning piece.
struct LinearBridge {
  double f_lo = 0.0;
  double f_hi = 0.0;
};

/// sum_i coeffs[i] * s^i.
struct Polynomial {
  std::vector<double> coeffs;
};

struct Form {
  std::variant<Power, PowerMinusLinear, Scaled, LinearBridge, Polynomial> v;
};

inline FormPtr make_form(Power p) { return std::make_shared<const Form>(Form{p}); }
inline FormPtr make_form(PowerMinusLinear p) { return std::make_shared<const Form>(Form{p}); }
inline FormPtr make_form(Scaled p) { return std::make_shared<const Form>(Form{std::move(p)}); }
inline FormPtr make_form(LinearBridge p) { return std::make_shared<const Form>(Form{p}); }
inline FormPtr make_form(Polynomial p) { return std::make_shared<const Form>(Form{std::move(p)}); }

namespace detail {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Derivative order 0..2 of the form at s >= 0; lo/hi are the owning piece.
inline double form_derivative(const Form& form, double s, double lo, double hi, int order) {
  return std::visit(
      overloaded{
          [&](const Power& f) {
            if (order == 0) return std::pow(s, f.p);
            if (order == 1) return f.p == 1.0 ? 1.0 : f.p * std::pow(s, f.p - 1.0);
            if (f.p == 1.0) return 0.0;
            return f.p == 2.0 ? 2.0 : f.p * (f.p - 1.0) * std::pow(s, f.p - 2.0);
          },
          [&](const PowerMinusLinear& f) {
            if (order == 0) return std::pow(s, f.p) - s;
            if (order == 1) return f.p * std::pow(s, f.p - 1.0) - 1.0;
            return f.p == 2.0 ? 2.0 : f.p * (f.p - 1.0) * std::pow(s, f.p - 2.0);
          },
          [&](const Scaled& f) { return f.c2 * form_derivative(*f.inner, s, lo, hi, order); },
          [&](const LinearBridge& f) {
            const double slope = (f.f_hi - f.f_lo) / (hi - lo);
            if (order == 0) return f.f_lo + slope * (s - lo);
            return order == 1 ? slope : 0.0;
          },
          [&](const Polynomial& f) {
            double acc = 0.0;
            for (std::size_t i = f.coeffs.size(); i-- > static_cast<std::size_t>(order);) {
              double c = f.coeffs[i];
              for (int d = 0; d < order; ++d) c *= static_cast<double>(i - static_cast<std::size_t>(d));
              acc = acc * s + c;
            }
            return acc;
          },
      },
      form.v);
}

// Some antiderivative of the form on its piece; only differences are used.
inline double form_antiderivative(const Form& form, double s, double lo, double hi) {
  return std::visit(
      overloaded{
          [&](const Power& f) { return std::pow(s, f.p + 1.0) / (f.p + 1.0); },
          [&](const PowerMinusLinear& f) { return std::pow(s, f.p + 1.0) / (f.p + 1.0) - 0.5 * s * s; },
          [&](const Scaled& f) { return f.c2 * form_antiderivative(*f.inner, s, lo, hi); },
          [&](const LinearBridge& f) {
            const double slope = (f.f_hi - f.f_lo) / (hi - lo);
            const double t = s - lo;
            return f.f_lo * t + 0.5 * slope * t * t;
          },
          [&](const Polynomial& f) {
            double acc = 0.0;
            for (std::size_t i = f.coeffs.size(); i-- > 0;) acc = acc * s + f.coeffs[i] / static_cast<double>(i + 1);
            return acc * s;
          },
      },
      form.v);
}

inline bool form_equal(const Form& a, const Form& b) {
  if (a.v.index() != b.v.index()) return false;
  return std::visit(
      overloaded{
          [&](const Power& x) { return x.p == std::get<Power>(b.v).p; },
          [&](const PowerMinusLinear& x) { return x.p == std::get<PowerMinusLinear>(b.v).p; },
          [&](const Scaled& x) {
            const auto& y = std::get<Scaled>(b.v);
            return x.c2 == y.c2 && form_equal(*x.inner, *y.inner);
          },
          [&](const LinearBridge& x) {
            const auto& y = std::get<LinearBridge>(b.v);
            return x.f_lo == y.f_lo && x.f_hi == y.f_hi;
          },
          [&](const Polynomial& x) { return x.coeffs == std::get<Polynomial>(b.v).coeffs; },
      },
      a.v);
}

inline void validate_form(const Form& form, double lo, double hi) {
  std::visit(overloaded{
                 [](const Power& f) {
                   if (!(f.p > 0.0)) throw Error(ErrorCode::InvalidSpec, "power exponent must be positive");
                 },
                 [](const PowerMinusLinear& f) {
                   if (!(f.p > 0.0)) throw Error(ErrorCode::InvalidSpec, "power exponent must be positive");
                 },
                 [&](const Scaled& f) {
                   if (!f.inner) throw Error(ErrorCode::InvalidSpec, "scaled form without inner form");
                   if (!std::isfinite(f.c2)) throw Error(ErrorCode::InvalidSpec, "non-finite scale");
                   validate_form(*f.inner, lo, hi);
                 },
                 [&](const LinearBridge&) {
                   if (!std::isfinite(hi)) throw Error(ErrorCode::InvalidSpec, "linear bridge needs a finite interval");
                 },
                 [](const Polynomial& f) {
                   if (f.coeffs.empty()) throw Error(ErrorCode::InvalidSpec, "empty polynomial");
                 },
             },
             form.v);
}

}  // namespace detail

struct Piece {
  double lo = 0.0;
  double hi = kInf;
  FormPtr form;
};

/// An odd nonlinearity given on [0, domain_top) by consecutive pieces.
///
/// Values at negative arguments come from f(-s) = -f(s) and F(-s) = F(s),
/// applied to |s| so that the symmetry is exact in floating point. The
/// primitive is accumulated piece by piece in closed form.
class NonlinearitySpec {
 public:
  /// Relative tolerance used when checking continuity at breakpoints.
  static constexpr double kContinuityTol = 1e-9;

  NonlinearitySpec() : NonlinearitySpec({Piece{0.0, kInf, make_form(PowerMinusLinear{2.0})}}, kInf) {}

  NonlinearitySpec(std::vector<Piece> pieces, double domain_top)
      : pieces_(std::move(pieces)), domain_top_(domain_top) {
    validate();
    F_at_lo_.resize(pieces_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      F_at_lo_[i] = acc;
      const auto& p = pieces_[i];
      if (std::isfinite(p.hi)) {
        acc += detail::form_antiderivative(*p.form, p.hi, p.lo, p.hi) -
               detail::form_antiderivative(*p.form, p.lo, p.lo, p.hi);
      }
    }
  }

  static NonlinearitySpec single(FormPtr form, double domain_top = kInf) {
    return NonlinearitySpec({Piece{0.0, domain_top, std::move(form)}}, domain_top);
  }
  static NonlinearitySpec power(double p) { return single(make_form(Power{p})); }
  static NonlinearitySpec power_minus_linear(double p) { return single(make_form(PowerMinusLinear{p})); }
  static NonlinearitySpec polynomial(std::vector<double> coeffs, double domain_top = kInf) {
    return single(make_form(Polynomial{std::move(coeffs)}), domain_top);
  }

  /// c2 f, piece by piece.
  static NonlinearitySpec scaled(const NonlinearitySpec& spec, double c2) {
    std::vector<Piece> pieces;
    for (const auto& p : spec.pieces()) pieces.push_back(Piece{p.lo, p.hi, make_form(Scaled{c2, p.form})});
    return NonlinearitySpec(std::move(pieces), spec.domain_top());
  }

  /// Linear interpolation through (s_i, f_i); the first knot must be (0, 0).
  static NonlinearitySpec piecewise_linear(const std::vector<std::pair<double, double>>& knots) {
    if (knots.size() < 2) throw Error(ErrorCode::InvalidSpec, "need at least two knots");
    std::vector<Piece> pieces;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
      pieces.push_back(Piece{knots[i].first, knots[i + 1].first,
                             make_form(LinearBridge{knots[i].second, knots[i + 1].second})});
    }
    return NonlinearitySpec(std::move(pieces), knots.back().first);
  }

  const std::vector<Piece>& pieces() const noexcept { return pieces_; }
  double domain_top() const noexcept { return domain_top_; }
  bool bounded() const noexcept { return std::isfinite(domain_top_); }

  /// Interior breakpoints, ascending (excludes 0 and domain_top).
  std::vector<double> breakpoints() const {
    std::vector<double> out;
    for (std::size_t i = 1; i < pieces_.size(); ++i) out.push_back(pieces_[i].lo);
    return out;
  }

  bool contains(double s) const noexcept { return std::abs(s) <= domain_top_; }

  double f(double s) const {
    const double a = std::abs(s);
    const double v = derivative_abs(a, 0);
    return s < 0.0 ? -v : v;
  }

  /// f'(s); even in s.
  double df(double s) const { return derivative_abs(std::abs(s), 1); }

  /// f''(s); odd in s.
  double d2f(double s) const {
    const double v = derivative_abs(std::abs(s), 2);
    return s < 0.0 ? -v : v;
  }

  double F(double s) const {
    const double a = std::abs(s);
    check_domain(a);
    const std::size_t i = piece_index(a);
    const auto& p = pieces_[i];
    return F_at_lo_[i] + detail::form_antiderivative(*p.form, a, p.lo, p.hi) -
           detail::form_antiderivative(*p.form, p.lo, p.lo, p.hi);
  }

  double Q(int N, double s) const {
    return 2.0 * N * F(s) - static_cast<double>(N - 2) * s * f(s);
  }

  std::size_t piece_index(double a) const {
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), a,
                               [](double x, const Piece& p) { return x < p.lo; });
    return it == pieces_.begin() ? 0 : static_cast<std::size_t>(it - pieces_.begin() - 1);
  }

  friend bool operator==(const NonlinearitySpec& a, const NonlinearitySpec& b) {
    if (a.domain_top_ != b.domain_top_ || a.pieces_.size() != b.pieces_.size()) return false;
    for (std::size_t i = 0; i < a.pieces_.size(); ++i) {
      const auto& x = a.pieces_[i];
      const auto& y = b.pieces_[i];
      if (x.lo != y.lo || x.hi != y.hi || !detail::form_equal(*x.form, *y.form)) return false;
    }
    return true;
  }

 private:
  void check_domain(double a) const {
    if (a > domain_top_ || std::isnan(a)) {
      throw Error(ErrorCode::DomainExceeded,
                  "|s| = " + std::to_string(a) + " beyond domain top " + std::to_string(domain_top_));
    }
  }

  double derivative_abs(double a, int order) const {
    check_domain(a);
    const auto& p = pieces_[piece_index(a)];
    return detail::form_derivative(*p.form, a, p.lo, p.hi, order);
  }

  void validate() const {
    if (pieces_.empty()) throw Error(ErrorCode::InvalidSpec, "no pieces");
    if (!(domain_top_ > 0.0)) throw Error(ErrorCode::InvalidSpec, "domain top must be positive");
    if (pieces_.front().lo != 0.0) throw Error(ErrorCode::InvalidSpec, "first piece must start at 0");
    if (pieces_.back().hi != domain_top_) throw Error(ErrorCode::InvalidSpec, "last piece must end at domain top");
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      const auto& p = pieces_[i];
      if (!p.form) throw Error(ErrorCode::InvalidSpec, "piece without form");
      if (!(p.hi > p.lo)) throw Error(ErrorCode::InvalidSpec, "empty or reversed piece");
      if (i > 0 && p.lo != pieces_[i - 1].hi) throw Error(ErrorCode::InvalidSpec, "pieces leave a gap or overlap");
      detail::validate_form(*p.form, p.lo, p.hi);
    }
    const double f0 = detail::form_derivative(*pieces_.front().form, 0.0, pieces_.front().lo, pieces_.front().hi, 0);
    if (f0 != 0.0) throw Error(ErrorCode::InvalidSpec, "f(0) must vanish");
    for (std::size_t i = 1; i < pieces_.size(); ++i) {
      const auto& l = pieces_[i - 1];
      const auto& r = pieces_[i];
      const double fl = detail::form_derivative(*l.form, l.hi, l.lo, l.hi, 0);
      const double fr = detail::form_derivative(*r.form, r.lo, r.lo, r.hi, 0);
      if (std::abs(fl - fr) > kContinuityTol * std::max({1.0, std::abs(fl), std::abs(fr)})) {
        throw Error(ErrorCode::ContinuityGap, "f jumps at s = " + std::to_string(r.lo) + " (" +
                                                  std::to_string(fl) + " vs " + std::to_string(fr) + ")");
      }
    }
  }

  std::vector<Piece> pieces_;
  double domain_top_ = kInf;
  std::vector<double> F_at_lo_;
};

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline nlohmann::json form_to_json(const Form& form) {
  using nlohmann::json;
  return std::visit(detail::overloaded{
                        [](const Power& f) { return json{{"kind", "power"}, {"p", f.p}}; },
                        [](const PowerMinusLinear& f) { return json{{"kind", "power_minus_linear"}, {"p", f.p}}; },
                        [](const Scaled& f) {
                          return json{{"kind", "scaled"}, {"c2", f.c2}, {"inner", form_to_json(*f.inner)}};
                        },
                        [](const LinearBridge& f) {
                          return json{{"kind", "linear_bridge"}, {"f_lo", f.f_lo}, {"f_hi", f.f_hi}};
                        },
                        [](const Polynomial& f) { return json{{"kind", "polynomial"}, {"coeffs", f.coeffs}}; },
                    },
                    form.v);
}

inline FormPtr form_from_json(const nlohmann::json& j) {
  try {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "power") return make_form(Power{j.at("p").get<double>()});
    if (kind == "power_minus_linear") return make_form(PowerMinusLinear{j.at("p").get<double>()});
    if (kind == "scaled") return make_form(Scaled{j.at("c2").get<double>(), form_from_json(j.at("inner"))});
    if (kind == "linear_bridge") return make_form(LinearBridge{j.at("f_lo").get<double>(), j.at("f_hi").get<double>()});
    if (kind == "polynomial") return make_form(Polynomial{j.at("coeffs").get<std::vector<double>>()});
    throw Error(ErrorCode::InvalidSpec, "unknown form kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidSpec, std::string("malformed form: ") + e.what());
  }
}

namespace detail {
inline nlohmann::json bound_to_json(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }
inline double bound_from_json(const nlohmann::json& j) { return j.is_null() ? kInf : j.get<double>(); }
}  // namespace detail

inline nlohmann::json to_json(const NonlinearitySpec& spec) {
  nlohmann::json pieces = nlohmann::json::array();
  for (const auto& p : spec.pieces()) {
    pieces.push_back({{"lo", p.lo}, {"hi", detail::bound_to_json(p.hi)}, {"form", form_to_json(*p.form)}});
  }
  return {{"pieces", pieces}, {"domain_top", detail::bound_to_json(spec.domain_top())}};
}

inline NonlinearitySpec spec_from_json(const nlohmann::json& j) {
  try {
    if (j.contains("knots")) {
      return NonlinearitySpec::piecewise_linear(j.at("knots").get<std::vector<std::pair<double, double>>>());
    }
    std::vector<Piece> pieces;
    for (const auto& p : j.at("pieces")) {
      pieces.push_back(Piece{p.at("lo").get<double>(), detail::bound_from_json(p.at("hi")), form_from_json(p.at("form"))});
    }
    const double top = j.contains("domain_top") ? detail::bound_from_json(j.at("domain_top")) : kInf;
    return NonlinearitySpec(std::move(pieces), top);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidSpec, std::string("malformed nonlinearity: ") + e.what());
  }
}

}  // namespace radshoot
