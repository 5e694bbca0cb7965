#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "radshoot/error.hpp"
#include "radshoot/nonlinearity.hpp"

namespace radshoot {

struct LandscapeOptions {
  /// Grid density for sign-change bracketing of f.
  double points_per_unit = 1e4;
  /// Upper bound on grid size; the spacing grows when the span is large.
  std::size_t max_points = 1'000'000;
  /// Working cap for unbounded domains, as a multiple of max(beta, b, 1, last breakpoint).
  double domain_cap_factor = 1e3;
  /// Relative bisection tolerance for all roots.
  double root_tol = 1e-12;
};

/// Bisection on the predicate g > 0; g(lo) > 0 and g(hi) > 0 must disagree.
inline double bisect_root(const std::function<double(double)>& g, double lo, double hi, double rel_tol) {
  const bool pos_lo = g(lo) > 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= rel_tol * std::max(1.0, std::abs(mid)) || mid == lo || mid == hi) break;
    if ((g(mid) > 0.0) == pos_lo) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct CriticalPoint {
  double s = 0.0;
  bool is_max = false;  ///< F has a local maximum here (f changes from + to -).
};

/// Derived constants of F = int_0^s f.
///
/// `b` is the first zero where f turns positive, `delta` the first zero of F,
/// `beta` the last zero of F beyond which F stays positive. `gamma_seq` holds
/// the increasing local maxima of F (first with F > 0, then each first one
/// exceeding the previous), and `beta_star` the largest point above the last
/// of them where F returns to F(gamma_M). NaN marks an undefined constant.
struct Landscape {
  NonlinearitySpec spec;
  double b = 0.0;
  double beta = 0.0;
  double delta = 0.0;
  std::vector<double> zeros_of_f;  ///< sign changes of f in (delta, gamma_star)
  std::vector<CriticalPoint> critical_points;  ///< all sign changes of f in (0, gamma_star)
  std::vector<double> gamma_seq;
  double beta_star = std::numeric_limits<double>::quiet_NaN();
  double gamma_star = kInf;  ///< domain top, or the working cap when unbounded
  bool cap_touched = false;  ///< gamma_star is the working cap, not a true domain end
  double max_abs_f = 0.0;    ///< max |f| on the scan grid

  bool has_gammas() const noexcept { return !gamma_seq.empty(); }

  /// min F over [a, b] (0 <= a <= b <= gamma_star) from endpoints and critical points.
  double F_min_on(double a, double b_) const { return extremum_on(a, b_, true); }
  double F_max_on(double a, double b_) const { return extremum_on(a, b_, false); }

 private:
  double extremum_on(double a, double b_, bool want_min) const {
    if (a > b_) std::swap(a, b_);
    double best = spec.F(a);
    auto take = [&](double v) { best = want_min ? std::min(best, v) : std::max(best, v); };
    take(spec.F(b_));
    for (const auto& c : critical_points) {
      if (c.s > a && c.s < b_ && c.is_max != want_min) take(spec.F(c.s));
    }
    return best;
  }
};

inline Landscape analyze_landscape(const NonlinearitySpec& spec, const LandscapeOptions& opt = {}) {
  Landscape L;
  L.spec = spec;

  double base = 1.0;
  for (double bp : spec.breakpoints()) base = std::max(base, bp);

  auto f = [&](double s) { return spec.f(s); };
  auto F = [&](double s) { return spec.F(s); };

  // Sign changes of f on a grid over (0, top], bisected.
  auto scan = [&](double top) {
    std::vector<double> nodes;
    const double span = top;
    const double h = std::max(1.0 / opt.points_per_unit, span / static_cast<double>(opt.max_points));
    const auto n = static_cast<std::size_t>(std::ceil(span / h));
    nodes.reserve(n + spec.pieces().size() + 1);
    for (std::size_t i = 1; i <= n; ++i) nodes.push_back(std::min(top, static_cast<double>(i) * h));
    for (double bp : spec.breakpoints()) {
      if (bp < top) nodes.push_back(bp);
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

    std::vector<CriticalPoint> crit;
    double max_abs = 0.0;
    double prev_s = 0.0;
    double prev_v = 0.0;  // last nonzero value
    bool prev_zero = false;
    for (double s : nodes) {
      const double v = f(s);
      max_abs = std::max(max_abs, std::abs(v));
      if (v == 0.0) {
        if (prev_zero && s < top) {
          throw Error(ErrorCode::AmbiguousZero, "f vanishes on an interval near s = " + std::to_string(s));
        }
        prev_zero = true;
        continue;
      }
      if (prev_v != 0.0 && (v > 0.0) != (prev_v > 0.0)) {
        const double z = prev_zero ? 0.5 * (prev_s + s) : bisect_root(f, prev_s, s, opt.root_tol);
        crit.push_back(CriticalPoint{z, prev_v > 0.0});
      }
      prev_zero = false;
      prev_v = v;
      prev_s = s;
    }
    L.max_abs_f = max_abs;
    return crit;
  };

  double top = spec.bounded() ? spec.domain_top() : opt.domain_cap_factor * base;
  L.cap_touched = !spec.bounded();
  L.critical_points = scan(top);

  // Zeros of F between consecutive critical points (F is monotone there).
  // F(0) = 0 and F moves away from 0 on the first interval, so it is skipped.
  auto F_zeros = [&](double upper) {
    std::vector<std::pair<double, bool>> zs;  // (zero, F rising through it)
    std::vector<double> knots;
    for (const auto& c : L.critical_points) knots.push_back(c.s);
    knots.push_back(upper);
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
      const double a = knots[i];
      const double c = knots[i + 1];
      const bool pa = F(a) > 0.0;
      const bool pc = F(c) > 0.0;
      if (pa != pc) zs.emplace_back(bisect_root(F, a, c, opt.root_tol), pc);
    }
    return zs;
  };

  // b: first zero of f where it turns positive.
  const double s_small = 1e-9 * std::min(1.0, top);
  const bool positive_near_zero = f(s_small) > 0.0;
  L.b = 0.0;
  if (!positive_near_zero) {
    for (const auto& c : L.critical_points) {
      if (!c.is_max) {
        L.b = c.s;
        break;
      }
    }
  }

  auto zs = F_zeros(top);
  L.delta = 0.0;
  if (!positive_near_zero) {
    L.delta = zs.empty() ? top : zs.front().first;
  }

  // beta: last rising zero of F with F > 0 on (beta, top].
  if (positive_near_zero && zs.empty()) {
    L.beta = 0.0;
  } else {
    if (zs.empty() || !zs.back().second) {
      throw Error(ErrorCode::NoBeta, "F never becomes positive on the scanned range");
    }
    L.beta = zs.back().first;
  }

  // With an unbounded domain, tie the cap to beta as well.
  if (!spec.bounded()) {
    const double new_top = opt.domain_cap_factor * std::max(base, L.beta);
    if (new_top > top * (1.0 + 1e-12)) {
      top = new_top;
      L.critical_points = scan(top);
    }
  }
  L.gamma_star = top;

  for (const auto& c : L.critical_points) {
    if (c.s > L.delta) L.zeros_of_f.push_back(c.s);
  }

  for (const auto& c : L.critical_points) {
    if (!c.is_max) continue;
    const double Fc = F(c.s);
    if (L.gamma_seq.empty() ? Fc > 0.0 : Fc > F(L.gamma_seq.back())) L.gamma_seq.push_back(c.s);
  }

  if (!L.gamma_seq.empty()) {
    const double gM = L.gamma_seq.back();
    const double level = F(gM);
    std::vector<double> knots{gM};
    for (const auto& c : L.critical_points) {
      if (c.s > gM) knots.push_back(c.s);
    }
    knots.push_back(top);
    auto g = [&](double s) { return F(s) - level; };
    for (std::size_t i = knots.size() - 1; i-- > 0;) {
      const double a = knots[i];
      const double c = knots[i + 1];
      if ((g(a) > 0.0) != (g(c) > 0.0)) {
        L.beta_star = bisect_root(g, a, c, opt.root_tol);
        break;
      }
    }
  }
  return L;
}

}  // namespace radshoot
