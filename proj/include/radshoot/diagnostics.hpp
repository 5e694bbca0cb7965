#pragma once

// Functionals along trajectories: energy, Pohozaev identity, the
// Gazzola-Serrin-Tang radius, the Erbe-Tang functional and the
// nonexistence bound for small node counts.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "radshoot/error.hpp"
#include "radshoot/integrator.hpp"
#include "radshoot/landscape.hpp"
#include "radshoot/nonlinearity.hpp"

namespace radshoot {

struct EnergyPoint {
  double r = 0.0;
  double I = 0.0;
};

inline double energy(const NonlinearitySpec& spec, const State& s) { return 0.5 * s.du * s.du + spec.F(s.u); }

/// I = u'^2/2 + F(u) at every stored sample.
inline std::vector<EnergyPoint> energy_series(const Trajectory& tr, const NonlinearitySpec& spec) {
  std::vector<EnergyPoint> out;
  out.reserve(tr.samples.size());
  for (const auto& s : tr.samples) out.push_back(EnergyPoint{s.r, energy(spec, s)});
  return out;
}

/// Energy error one accepted step may introduce under the solver's error norm:
/// |dI| <= |u'| du' + |f| du with du <= abs + rel |u| and du' <= abs + rel |u'|.
inline double energy_step_tolerance(const Trajectory& tr, const NonlinearitySpec& spec, const State& a,
                                    const State& b) {
  const double v = std::max(std::abs(a.du), std::abs(b.du));
  const double u = std::max(std::abs(a.u), std::abs(b.u));
  const double f = std::max(std::abs(spec.f(a.u)), std::abs(spec.f(b.u)));
  return tr.options.abs_tol * (v + f) + tr.options.rel_tol * (v * v + u * f);
}

struct EnergyCheck {
  double max_increase = 0.0;  ///< largest I(r_{i+1}) - I(r_i), clipped at 0
  double max_ratio = 0.0;     ///< largest increase in units of the per-step tolerance
  std::size_t worst_index = 0;
};

inline EnergyCheck energy_check(const Trajectory& tr, const NonlinearitySpec& spec) {
  EnergyCheck ec;
  for (std::size_t i = 0; i + 1 < tr.samples.size(); ++i) {
    const auto& a = tr.samples[i];
    const auto& b = tr.samples[i + 1];
    const double inc = energy(spec, b) - energy(spec, a);
    if (inc <= 0.0) continue;
    const double tol = energy_step_tolerance(tr, spec, a, b);
    const double ratio = tol > 0.0 ? inc / tol : kInf;
    ec.max_increase = std::max(ec.max_increase, inc);
    if (ratio > ec.max_ratio) {
      ec.max_ratio = ratio;
      ec.worst_index = i;
    }
  }
  return ec;
}

/// r^N u'^2 + (N-2) r^(N-1) u' u + 2 r^N F(u).
inline double pohozaev_boundary(const NonlinearitySpec& spec, int N, const State& s) {
  const double rN1 = std::pow(s.r, N - 1);
  return rN1 * (s.r * s.du * s.du + (N - 2) * s.du * s.u + 2.0 * s.r * spec.F(s.u));
}

/// int_0^{r_end} t^(N-1) Q(u(t)) dt: series on [0, h0], composite Simpson on every step.
inline double pohozaev_integral(const Trajectory& tr, const NonlinearitySpec& spec, int N) {
  if (tr.samples.empty()) return 0.0;
  const double n = static_cast<double>(N);
  const double a = tr.alpha;
  const double h0 = tr.samples.front().r;

  const double fa = spec.f(a);
  const double a2 = -fa / (2.0 * n);
  const double dQ = (n + 2.0) * fa - (n - 2.0) * a * spec.df(a);
  double J = spec.Q(N, a) * std::pow(h0, n) / n + dQ * a2 * std::pow(h0, n + 2.0) / (n + 2.0);

  auto g = [&](double t, double u) { return std::pow(t, n - 1.0) * spec.Q(N, u); };
  constexpr int m = 4;
  for (std::size_t i = 0; i + 1 < tr.samples.size() && i < tr.segments.size(); ++i) {
    const double t0 = tr.samples[i].r;
    const double t1 = tr.samples[i + 1].r;
    const double dt = (t1 - t0) / m;
    if (!(dt > 0.0)) continue;
    double acc = g(t0, tr.samples[i].u) + g(t1, tr.samples[i + 1].u);
    for (int j = 1; j < m; ++j) {
      const double t = t0 + j * dt;
      acc += (j % 2 ? 4.0 : 2.0) * g(t, tr.segments[i](t)[0]);
    }
    J += acc * dt / 3.0;
  }
  return J;
}

/// |L(r_end) - J(r_end)| / (1 + |L(r_end)|).
inline double pohozaev_residual(const Trajectory& tr, const NonlinearitySpec& spec, int N) {
  if (tr.identically_zero() || tr.samples.empty()) return 0.0;
  const double L = pohozaev_boundary(spec, N, tr.samples.back());
  const double J = pohozaev_integral(tr, spec, N);
  return std::abs(L - J) / (1.0 + std::abs(L));
}

/// C(s0) = sqrt(2) (N-1) s0 / F(s0) * (F(s0) - min_{(0,beta)} F)^(1/2).
inline double gst_radius(const NonlinearitySpec& spec, const Landscape& L, int N, double s0) {
  if (!(s0 > L.beta)) {
    throw Error(ErrorCode::InvalidHeight, "height " + std::to_string(s0) + " is not above beta = " + std::to_string(L.beta));
  }
  const double Fs = spec.F(s0);
  if (!(Fs > 0.0)) return kInf;
  const double Fmin = std::min(0.0, L.F_min_on(0.0, L.beta));
  return std::sqrt(2.0) * (N - 1) * s0 / Fs * std::sqrt(Fs - Fmin);
}

enum class GstVerdict { NotApplicable, Confirmed, Violated, Undetermined };

inline std::string_view to_string(GstVerdict v) {
  switch (v) {
    case GstVerdict::NotApplicable: return "not_applicable";
    case GstVerdict::Confirmed: return "confirmed";
    case GstVerdict::Violated: return "violated";
    case GstVerdict::Undetermined: return "undetermined";
  }
  return "?";
}

struct GstEntry {
  double s0 = 0.0;
  double r0 = 0.0;
  double C = 0.0;
  GstVerdict verdict = GstVerdict::NotApplicable;
};

/// First radius where |u| descends through s0 before any zero crossing, or a negative value.
inline double first_descent(const Trajectory& tr, double s0) {
  const double sgn = tr.alpha >= 0.0 ? 1.0 : -1.0;
  for (std::size_t i = 0; i + 1 < tr.samples.size() && i < tr.segments.size(); ++i) {
    const double u0 = sgn * tr.samples[i].u;
    const double u1 = sgn * tr.samples[i + 1].u;
    if (u0 <= 0.0) break;
    if (u0 > s0 && u1 <= s0) {
      double a = tr.samples[i].r;
      double b = tr.samples[i + 1].r;
      for (int it = 0; it < 200 && b - a > 1e-14 * std::max(1.0, b); ++it) {
        const double m = 0.5 * (a + b);
        if (sgn * tr.segments[i](m)[0] > s0) a = m; else b = m;
      }
      return 0.5 * (a + b);
    }
  }
  return -1.0;
}

/// Checks the sign-change lemma at the first descent through each height s0 > beta.
/// Heights above the first maximum of F are reported as not applicable.
/// With no heights given, 16 heights evenly spaced in (beta, |alpha|) are used.
inline std::vector<GstEntry> gst_sign_change_check(const Trajectory& tr, const NonlinearitySpec& spec,
                                                   const Landscape& L, int N, std::vector<double> heights = {}) {
  std::vector<GstEntry> out;
  const double a = std::abs(tr.alpha);
  if (!(a > L.beta)) return out;
  if (heights.empty()) {
    for (int i = 1; i <= 16; ++i) heights.push_back(L.beta + (a - L.beta) * i / 17.0);
  }

  double first_zero = kInf;
  bool trapped = false;
  for (const auto& e : tr.events) {
    if (e.kind == EventKind::ZeroCrossing && first_zero == kInf) first_zero = e.state.r;
    if (e.kind == EventKind::Trap && first_zero == kInf) trapped = true;
  }
  if (tr.reason == TerminalReason::ConvergedToEquilibrium && first_zero == kInf) trapped = true;

  for (double s0 : heights) {
    if (!(s0 > L.beta) || !(s0 < a)) continue;
    const double r0 = first_descent(tr, s0);
    if (r0 < 0.0) continue;
    GstEntry e;
    e.s0 = s0;
    e.r0 = r0;
    e.C = gst_radius(spec, L, N, s0);
    const bool shape_ok = L.gamma_seq.empty() || s0 <= L.gamma_seq.front();
    if (shape_ok && r0 >= e.C) {
      if (first_zero < kInf) {
        e.verdict = GstVerdict::Confirmed;
      } else if (trapped) {
        e.verdict = GstVerdict::Violated;
      } else {
        e.verdict = GstVerdict::Undetermined;
      }
    }
    out.push_back(e);
  }
  return out;
}

struct ErbeTangPoint {
  double s = 0.0;
  double r = 0.0;
  double P = 0.0;
  double dP = 0.0;  ///< closed form (N - 2 - 2N (F/f)'(s)) r^(N-1) / r'(s)
};

/// (F/f)'(s) = 1 - F f' / f^2.
inline double F_over_f_derivative(const NonlinearitySpec& spec, double s) {
  const double f = spec.f(s);
  return 1.0 - spec.F(s) * spec.df(s) / (f * f);
}

/// P(s) = -2N (F/f) r^(N-1)/r' - r^N/r'^2 - 2 r^N F, with r' = 1/u', on [r_lo, r_hi].
inline std::vector<ErbeTangPoint> erbe_tang_P(const Trajectory& tr, const NonlinearitySpec& spec, int N,
                                              double r_lo, double r_hi, int points = 200) {
  if (!(r_hi > r_lo)) throw Error(ErrorCode::PreconditionFailed, "empty segment");
  for (const auto& e : tr.events) {
    if (e.kind == EventKind::Extremum && e.state.r > r_lo && e.state.r < r_hi) {
      throw Error(ErrorCode::NotMonotone, "u has an extremum at r = " + std::to_string(e.state.r));
    }
  }
  std::vector<State> st;
  st.reserve(static_cast<std::size_t>(points) + 1);
  for (int i = 0; i <= points; ++i) st.push_back(sample_at(tr, r_lo + (r_hi - r_lo) * i / points));

  const int dir = st.front().du > 0.0 ? 1 : -1;
  for (const auto& s : st) {
    if (s.du == 0.0 || (s.du > 0.0 ? 1 : -1) != dir) {
      throw Error(ErrorCode::NotMonotone, "u' vanishes or changes sign at r = " + std::to_string(s.r));
    }
  }
  // f must keep one sign over the u-range covered.
  const double u_lo = std::min(st.front().u, st.back().u);
  const double u_hi = std::max(st.front().u, st.back().u);
  const int fsign = spec.f(u_lo) > 0.0 ? 1 : -1;
  for (int i = 0; i <= 1000; ++i) {
    const double fv = spec.f(u_lo + (u_hi - u_lo) * i / 1000.0);
    if (fv == 0.0 || (fv > 0.0 ? 1 : -1) != fsign) {
      throw Error(ErrorCode::FVanishes, "f vanishes inside the segment near u = " +
                                            std::to_string(u_lo + (u_hi - u_lo) * i / 1000.0));
    }
  }

  std::vector<ErbeTangPoint> out;
  out.reserve(st.size());
  for (const auto& s : st) {
    const double f = spec.f(s.u);
    const double F = spec.F(s.u);
    const double rN1 = std::pow(s.r, N - 1);
    const double rN = rN1 * s.r;
    ErbeTangPoint p;
    p.s = s.u;
    p.r = s.r;
    p.P = -2.0 * N * (F / f) * rN1 * s.du - rN * s.du * s.du - 2.0 * rN * F;
    p.dP = (N - 2 - 2.0 * N * F_over_f_derivative(spec, s.u)) * rN1 * s.du;
    out.push_back(p);
  }
  return out;
}

/// True when the landscape certifies no bound states with at most k nodes and
/// initial value in (beta*, gamma*). `F_gamma_star` is F(gamma*) for a bounded
/// domain, or sup F over [0, alpha_k] otherwise.
inline bool nonexistence_bound(const NonlinearitySpec& spec, const Landscape& L, int N, int k, double F_gamma_star) {
  if (L.gamma_seq.empty() || !std::isfinite(L.beta_star)) {
    throw Error(ErrorCode::LandscapeIncomplete, "nonexistence bound needs gamma_1 and beta*");
  }
  const double g1 = L.gamma_seq.front();
  const double lhs = -L.F_min_on(0.0, L.beta_star);
  const double rhs = (L.beta_star - g1) / (2.0 * (N - 1) * (k + 1)) * spec.F(g1) / (2.0 * g1) - F_gamma_star;
  return lhs < rhs;
}

struct DiagnosticsReport {
  std::vector<EnergyPoint> energy_series;
  double max_energy_increase = 0.0;
  double energy_increase_ratio = 0.0;
  double pohozaev_residual = 0.0;
  std::map<double, double> gst_radius_at;
  std::vector<GstEntry> gst_checks;
  std::vector<std::string> notes;
};

inline DiagnosticsReport diagnose(const Trajectory& tr, const NonlinearitySpec& spec, const Landscape* L = nullptr) {
  DiagnosticsReport rep;
  rep.energy_series = energy_series(tr, spec);
  const auto ec = energy_check(tr, spec);
  rep.max_energy_increase = ec.max_increase;
  rep.energy_increase_ratio = ec.max_ratio;
  rep.pohozaev_residual = pohozaev_residual(tr, spec, tr.N);
  if (L) {
    rep.gst_checks = gst_sign_change_check(tr, spec, *L, tr.N);
    for (const auto& e : rep.gst_checks) {
      rep.gst_radius_at[e.s0] = e.C;
      if (e.verdict == GstVerdict::Violated) {
        rep.notes.push_back("sign-change lemma violated at s0 = " + std::to_string(e.s0));
      }
    }
  }
  if (ec.max_ratio > 10.0) rep.notes.push_back("energy increase above 10x step tolerance at r = " +
                                               std::to_string(tr.samples[ec.worst_index].r));
  return rep;
}

inline nlohmann::json to_json(const DiagnosticsReport& rep, bool with_series = false) {
  nlohmann::json j;
  j["max_energy_increase"] = rep.max_energy_increase;
  j["energy_increase_ratio"] = rep.energy_increase_ratio;
  j["pohozaev_residual"] = rep.pohozaev_residual;
  auto& g = j["gst"] = nlohmann::json::array();
  for (const auto& e : rep.gst_checks) {
    g.push_back({{"s0", e.s0}, {"r0", e.r0}, {"C", std::isfinite(e.C) ? nlohmann::json(e.C) : nlohmann::json(nullptr)},
                 {"verdict", to_string(e.verdict)}});
  }
  j["notes"] = rep.notes;
  if (with_series) {
    auto& s = j["energy_series"] = nlohmann::json::array();
    for (const auto& p : rep.energy_series) s.push_back({p.r, p.I});
  }
  return j;
}

}  // namespace radshoot
