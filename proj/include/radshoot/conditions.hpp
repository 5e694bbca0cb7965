#pragma once

// Sampled checks of the shape hypotheses on f. A pass means "no counterexample
// on the grid", nothing more; limits at infinity are only ever sampled.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "radshoot/landscape.hpp"
#include "radshoot/nonlinearity.hpp"

namespace radshoot {

enum class Verdict { Pass, Fail, Indeterminate, SampledOnly };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Indeterminate: return "indeterminate";
    case Verdict::SampledOnly: return "sampled only, not a proof";
  }
  return "?";
}

struct ConditionResult {
  std::string name;
  Verdict verdict = Verdict::Indeterminate;
  std::string detail;
};

struct ConditionOptions {
  std::size_t samples = 4000;
  /// Nonzero seeds jitter the grid points.
  std::uint64_t seed = 0;
  /// Finite-difference step, relative to s.
  double fd_relative = 1e-5;
};

struct ShapeReport {
  int N = 0;
  std::vector<ConditionResult> conditions;
  double q_min = 0.0;  ///< extremes of Q over the sample grid
  double q_max = 0.0;

  const ConditionResult* find(std::string_view name) const {
    for (const auto& c : conditions) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }
  Verdict verdict(std::string_view name) const {
    const auto* c = find(name);
    return c ? c->verdict : Verdict::Indeterminate;
  }
};

namespace detail {

inline std::vector<double> sample_grid(double top, const ConditionOptions& opt) {
  std::vector<double> s;
  const std::size_t M = std::max<std::size_t>(opt.samples, 16);
  // Half the points geometric toward 0, half uniform.
  const double lo = top * 1e-8;
  for (std::size_t i = 0; i < M / 2; ++i) s.push_back(lo * std::pow(top / lo, static_cast<double>(i) / (M / 2)));
  for (std::size_t i = 1; i < M - M / 2; ++i) s.push_back(top * static_cast<double>(i) / (M - M / 2));
  if (opt.seed != 0) {
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> u(-0.25, 0.25);
    for (std::size_t i = 1; i + 1 < s.size(); ++i) s[i] += u(rng) * std::min(s[i] - s[i - 1], s[i + 1] - s[i]);
  }
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  s.erase(std::remove_if(s.begin(), s.end(), [&](double x) { return !(x > 0.0 && x < top); }), s.end());
  return s;
}

inline std::string at(double s) { return " at s = " + std::to_string(s); }

}  // namespace detail

inline ShapeReport check_shape_conditions(const NonlinearitySpec& spec, int N, const ConditionOptions& opt = {}) {
  ShapeReport rep;
  rep.N = N;
  auto add = [&](std::string name, Verdict v, std::string detail = {}) {
    rep.conditions.push_back(ConditionResult{std::move(name), v, std::move(detail)});
  };

  Landscape L;
  bool have_landscape = true;
  std::string landscape_error;
  try {
    L = analyze_landscape(spec);
  } catch (const Error& e) {
    have_landscape = false;
    landscape_error = e.what();
  }
  const double top = spec.bounded() ? spec.domain_top() : (have_landscape ? L.gamma_star : 1e3);
  const auto s = detail::sample_grid(top, opt);

  rep.q_min = kInf;
  rep.q_max = -kInf;
  for (double x : s) {
    const double q = spec.Q(N, x);
    rep.q_min = std::min(rep.q_min, q);
    rep.q_max = std::max(rep.q_max, q);
  }

  // (C_1)
  {
    std::string why;
    if (spec.f(0.0) != 0.0) why = "f(0) != 0";
    if (why.empty() && !(spec.f(s.front()) < 0.0)) why = "f is not negative near 0" + detail::at(s.front());
    double b = 0.0;
    if (why.empty()) {
      // b: last sample with f <= 0 must precede every sample with f > 0.
      bool turned = false;
      for (double x : s) {
        const double v = spec.f(x);
        if (v > 0.0) {
          if (!turned) b = x;
          turned = true;
        } else if (turned) {
          why = "f returns to non-positive values" + detail::at(x);
          break;
        }
      }
      if (why.empty() && !turned) why = "f never becomes positive";
    }
    if (why.empty()) {
      bool turned = false;
      for (double x : s) {
        const double v = spec.F(x);
        if (v > 0.0) {
          turned = true;
        } else if (turned) {
          why = "F returns to non-positive values" + detail::at(x);
          break;
        }
      }
      if (why.empty() && !turned) why = "F never becomes positive";
    }
    add("C1", why.empty() ? Verdict::Pass : Verdict::Fail,
        why.empty() ? "b ~ " + std::to_string(b) : why);
  }

  // (A_1): continuity and oddness hold by construction; Lipschitz away from 0 is sampled.
  {
    double worst = 0.0;
    for (std::size_t i = 1; i < s.size(); ++i) {
      if (s[i - 1] < 1e-6 * top) continue;
      worst = std::max(worst, std::abs(spec.f(s[i]) - spec.f(s[i - 1])) / (s[i] - s[i - 1]));
    }
    add("A1", std::isfinite(worst) ? Verdict::Pass : Verdict::Fail, "max difference quotient " + std::to_string(worst));
  }

  // (A_2)
  {
    std::string why;
    if (!(spec.F(s.front()) < 0.0)) why = "F is not negative near 0";
    if (why.empty() && spec.bounded()) {
      const double Ftop = spec.F(spec.domain_top());
      for (double x : s) {
        if (!(spec.F(x) < Ftop)) {
          why = "F reaches F(gamma*)" + detail::at(x);
          break;
        }
      }
    }
    if (!why.empty()) {
      add("A2", Verdict::Fail, why);
    } else {
      add("A2", spec.bounded() ? Verdict::Pass : Verdict::SampledOnly,
          spec.bounded() ? "" : "gamma* is infinite; F < sup F only sampled");
    }
  }

  // (A_3), (A_4)
  if (!have_landscape) {
    add("A3", Verdict::Indeterminate, landscape_error);
    add("A4", Verdict::Indeterminate, landscape_error);
  } else {
    if (L.gamma_seq.empty()) {
      add("A3", Verdict::Fail, "F has no local maximum with F > 0");
    } else {
      add("A3", Verdict::Pass, "gamma_1 = " + std::to_string(L.gamma_seq.front()));
    }
    std::string why;
    for (double z : L.zeros_of_f) {
      const double h = 1e-6 * std::max(1.0, z);
      if (!(spec.f(z - h) * spec.f(std::min(z + h, top)) < 0.0)) {
        why = "f does not change sign" + detail::at(z);
        break;
      }
    }
    add("A4", why.empty() ? Verdict::Pass : Verdict::Fail,
        why.empty() ? std::to_string(L.zeros_of_f.size()) + " zeros" : why);
  }

  // (A_5) and (GST): exact when gamma* is finite, sampled otherwise.
  {
    if (spec.bounded()) {
      const double ft = spec.f(spec.domain_top());
      const bool ok = std::abs(ft) <= 1e-12 * std::max(1.0, have_landscape ? L.max_abs_f : 1.0);
      add("A5", ok ? Verdict::Pass : Verdict::Fail, "f(gamma*) = " + std::to_string(ft));
      add("GST", ok ? Verdict::Pass : Verdict::Fail, "f(gamma*) = " + std::to_string(ft));
    } else {
      const double theta = 0.5;
      double prev = -kInf;
      bool growing = true;
      std::string trail;
      for (double x = top / 64.0; x <= top; x *= 2.0) {
        double inf_val = kInf;
        for (int i = 0; i <= 16; ++i) {
          const double s2 = theta * x + (1.0 - theta) * x * i / 16.0;
          for (int j = 0; j <= 16; ++j) {
            const double s1 = theta * x + (1.0 - theta) * x * j / 16.0;
            const double f1 = spec.f(s1);
            const double v = f1 > 0.0 ? spec.Q(N, s2) * std::pow(x / f1, 0.5 * N) : -kInf;
            inf_val = std::min(inf_val, v);
          }
        }
        if (!(inf_val > prev)) growing = false;
        prev = inf_val;
        trail += (trail.empty() ? "" : ", ") + std::to_string(inf_val);
      }
      add("A5", growing && prev > 0.0 ? Verdict::SampledOnly : Verdict::Fail, "inf over [s/2, s]: " + trail);
      add("GST", rep.q_max > 0.0 && growing ? Verdict::SampledOnly : Verdict::Fail, "same samples as A5");
    }
  }

  // (H_1)-(H_3)
  if (!have_landscape) {
    add("H1", Verdict::Indeterminate, landscape_error);
    add("H2", Verdict::Indeterminate, landscape_error);
    add("H3", Verdict::Indeterminate, landscape_error);
  } else {
    // Unique beta: F has a single zero in (0, top).
    int F_sign_changes = 0;
    for (std::size_t i = 1; i < s.size(); ++i) {
      if ((spec.F(s[i - 1]) > 0.0) != (spec.F(s[i]) > 0.0)) ++F_sign_changes;
    }
    const bool c1 = rep.verdict("C1") == Verdict::Pass;
    add("H1", c1 && F_sign_changes == 1 ? Verdict::Pass : Verdict::Fail,
        std::to_string(F_sign_changes) + " sign changes of F");

    const double bound = (N - 2.0) / (2.0 * N);
    std::string why2;
    std::string why3;
    double prev_ratio = -kInf;
    for (double x : s) {
      const double h = opt.fd_relative * x;
      if (why2.empty() && h > 0.0 && x > L.beta && x - h > L.beta) {
        auto g = [&](double y) { return spec.F(y) / spec.f(y); };
        const double d = (g(x + h) - g(x - h)) / (2.0 * h);
        if (!(d > bound)) why2 = "(F/f)' = " + std::to_string(d) + detail::at(x);
      }
      if (why3.empty() && x > L.b) {
        const double ratio = spec.f(x) / (x - L.b);
        if (!(ratio >= prev_ratio)) why3 = "f/(s-b) decreases" + detail::at(x);
        prev_ratio = ratio;
      }
    }
    add("H2", why2.empty() ? Verdict::Pass : Verdict::Fail, why2);
    add("H3", why3.empty() ? Verdict::Pass : Verdict::Fail, why3);
  }

  add("Q", rep.q_max < 0.0 ? Verdict::Pass : (rep.q_min > 0.0 ? Verdict::Pass : Verdict::Indeterminate),
      "Q ranges over [" + std::to_string(rep.q_min) + ", " + std::to_string(rep.q_max) + "]");
  return rep;
}

inline nlohmann::json to_json(const ShapeReport& rep) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& c : rep.conditions) {
    out.push_back({{"condition", c.name}, {"verdict", std::string(to_string(c.verdict))}, {"detail", c.detail}});
  }
  return {{"N", rep.N}, {"conditions", out}, {"q_min", rep.q_min}, {"q_max", rep.q_max}};
}

}  // namespace radshoot
