#pragma once

// Radial shooting: u'' + (N-1)/r u' + f(u) = 0, u(0) = alpha, u'(0) = 0.
//
// Dormand-Prince 5(4) with Hairer's continuous extension. The singular point
// r = 0 is skipped with a Taylor start; steps never straddle a breakpoint of
// the nonlinearity (in u); zeros, extrema and monitored heights are located
// on the dense output.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "radshoot/error.hpp"
#include "radshoot/nonlinearity.hpp"

namespace radshoot {

struct SolverOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double r_max = 200.0;
  /// Taylor start radius; 0 selects the largest radius <= 1e-3 whose series
  /// truncation error is below abs_tol.
  double h0 = 0.0;
  double event_tol = 1e-12;
  /// Stop at this many zero crossings (0: unlimited).
  int max_crossings = 0;
  /// Stop at the first trap certificate; otherwise record it and keep going.
  bool stop_on_trap = true;
  /// Heights s whose crossings u = s are logged.
  std::vector<double> monitor_heights;
  std::size_t max_steps = 5'000'000;
};

struct IVProblem {
  int N = 3;
  double alpha = 0.0;
  NonlinearitySpec spec;
  SolverOptions options;
};

struct State {
  double r = 0.0;
  double u = 0.0;
  double du = 0.0;
};

enum class EventKind { ZeroCrossing, Extremum, HeightCrossing, Trap, NearDoubleZero };
enum class ExtremumKind { Min, Max };

/// How a trap was certified.
///  - LocalExtremum: |u| has a local minimum m with max_{[0,m]} F - F(m) above margin.
///  - Energy: I = u'^2/2 + F(u) < 0 while u != 0, so u = 0 is unreachable.
///  - Pohozaev: f > 0 and Q <= 0 below |u|, |u| decreasing, and the Pohozaev
///    boundary term is negative, which rules out a later zero.
enum class Certificate { None, LocalExtremum, Energy, Pohozaev };

enum class TerminalReason {
  ReachedRmax,
  Trapped,
  DoubleZeroDetected,
  ConvergedToEquilibrium,
  Blowup,
  CrossingLimit,
};

inline std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::ZeroCrossing: return "ZeroCrossing";
    case EventKind::Extremum: return "Extremum";
    case EventKind::HeightCrossing: return "HeightCrossing";
    case EventKind::Trap: return "Trap";
    case EventKind::NearDoubleZero: return "NearDoubleZero";
  }
  return "?";
}

inline std::string_view to_string(Certificate c) {
  switch (c) {
    case Certificate::None: return "None";
    case Certificate::LocalExtremum: return "LocalExtremum";
    case Certificate::Energy: return "Energy";
    case Certificate::Pohozaev: return "Pohozaev";
  }
  return "?";
}

inline std::string_view to_string(TerminalReason r) {
  switch (r) {
    case TerminalReason::ReachedRmax: return "ReachedRmax";
    case TerminalReason::Trapped: return "Trapped";
    case TerminalReason::DoubleZeroDetected: return "DoubleZeroDetected";
    case TerminalReason::ConvergedToEquilibrium: return "ConvergedToEquilibrium";
    case TerminalReason::Blowup: return "Blowup";
    case TerminalReason::CrossingLimit: return "CrossingLimit";
  }
  return "?";
}

struct Event {
  EventKind kind = EventKind::ZeroCrossing;
  State state;
  int direction = 0;  ///< sign of u' at a crossing
  ExtremumKind extremum = ExtremumKind::Max;
  double height = 0.0;  ///< monitored height, or extremum height
  Certificate certificate = Certificate::None;
  double margin = 0.0;  ///< certificate slack (barrier gap, -I, or -L)
};

/// One accepted step with its continuous extension for both components.
struct DenseSegment {
  double r0 = 0.0;
  double h = 0.0;
  std::array<std::array<double, 5>, 2> c{};

  std::array<double, 2> operator()(double r) const {
    const double t = (r - r0) / h;
    const double t1 = 1.0 - t;
    std::array<double, 2> y{};
    for (int i = 0; i < 2; ++i) {
      const auto& k = c[static_cast<std::size_t>(i)];
      y[static_cast<std::size_t>(i)] = k[0] + t * (k[1] + t1 * (k[2] + t * (k[3] + t1 * k[4])));
    }
    return y;
  }
};

struct IntegratorStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evals = 0;
};

struct Trajectory {
  int N = 3;
  double alpha = 0.0;
  double h0 = 0.0;
  SolverOptions options;
  std::vector<State> samples;
  std::vector<DenseSegment> segments;  ///< segments[i] spans samples[i] .. samples[i+1]
  std::vector<Event> events;
  TerminalReason reason = TerminalReason::ReachedRmax;
  double r_end = 0.0;
  IntegratorStats stats;
  /// Target of an equilibrium convergence (signed), when reason says so.
  double equilibrium = 0.0;
  /// Largest |f| over [0, |alpha|]; scales the certificate margins.
  double f_scale = 0.0;

  bool identically_zero() const noexcept { return alpha == 0.0; }

  std::size_t crossing_count() const {
    return static_cast<std::size_t>(std::count_if(events.begin(), events.end(),
                                                  [](const Event& e) { return e.kind == EventKind::ZeroCrossing; }));
  }

  const Event* find_event(EventKind kind) const {
    for (const auto& e : events) {
      if (e.kind == kind) return &e;
    }
    return nullptr;
  }
};

/// Interpolated state at radius r.
inline State sample_at(const Trajectory& tr, double r) {
  if (tr.samples.empty()) throw Error(ErrorCode::OutOfRange, "empty trajectory");
  const double lo = tr.samples.front().r;
  const double slack = 1e-12 * std::max(1.0, tr.r_end);
  if (r < lo - slack || r > tr.r_end + slack) {
    throw Error(ErrorCode::OutOfRange, "r = " + std::to_string(r) + " outside [" + std::to_string(lo) + ", " +
                                           std::to_string(tr.r_end) + "]");
  }
  auto it = std::lower_bound(tr.samples.begin(), tr.samples.end(), r,
                             [](const State& s, double x) { return s.r < x; });
  if (it != tr.samples.end() && it->r == r) return *it;
  if (it == tr.samples.begin()) return tr.samples.front();
  const auto seg = static_cast<std::size_t>(it - tr.samples.begin() - 1);
  if (seg >= tr.segments.size()) return tr.samples.back();
  const auto y = tr.segments[seg](r);
  return State{r, y[0], y[1]};
}

/// Taylor data at the origin: u = alpha + a2 r^2 + a4 r^4 (+ a6 r^6 as error estimate).
struct TaylorStart {
  State state;
  double a2 = 0.0;
  double a4 = 0.0;
  double a6 = 0.0;
  double error_estimate = 0.0;
};

namespace detail {

// One-sided derivatives: a solution leaving alpha moves downward when f(alpha) > 0.
inline std::array<double, 3> f_jet_at_start(const NonlinearitySpec& spec, double alpha) {
  const double fa = spec.f(alpha);
  double probe = alpha;
  if (fa != 0.0) {
    probe = std::nextafter(alpha, fa > 0.0 ? -kInf : kInf);
    if (!spec.contains(probe)) probe = alpha;
  }
  return {fa, spec.df(probe), spec.d2f(probe)};
}

inline TaylorStart taylor_series(const NonlinearitySpec& spec, int N, double alpha, double h) {
  const auto jet = f_jet_at_start(spec, alpha);
  const double n = static_cast<double>(N);
  TaylorStart t;
  t.a2 = -jet[0] / (2.0 * n);
  t.a4 = -jet[1] * t.a2 / (4.0 * (n + 2.0));
  t.a6 = -(jet[1] * t.a4 + 0.5 * jet[2] * t.a2 * t.a2) / (6.0 * (n + 4.0));
  const double h2 = h * h;
  t.state = State{h, alpha + t.a2 * h2 + t.a4 * h2 * h2, 2.0 * t.a2 * h + 4.0 * t.a4 * h2 * h};
  const double e_u = std::abs(t.a6) * h2 * h2 * h2;
  const double e_v = 6.0 * std::abs(t.a6) * h2 * h2 * h;
  t.error_estimate = std::isfinite(e_u + e_v) ? std::max(e_u, e_v) : kInf;
  return t;
}

}  // namespace detail

/// Series start at h0 = problem.options.h0 (or the automatic radius).
inline TaylorStart taylor_start(const IVProblem& pb) {
  const auto& o = pb.options;
  if (pb.N < 2) throw Error(ErrorCode::PreconditionFailed, "N must be >= 2");
  if (!pb.spec.contains(pb.alpha)) throw Error(ErrorCode::DomainExceeded, "alpha outside the domain");
  const double tol = o.abs_tol;
  if (o.h0 > 0.0) {
    auto t = detail::taylor_series(pb.spec, pb.N, pb.alpha, o.h0);
    if (t.error_estimate > tol) {
      throw Error(ErrorCode::StartRadiusTooLarge,
                  "series error " + std::to_string(t.error_estimate) + " exceeds abs_tol at h0 = " + std::to_string(o.h0));
    }
    return t;
  }
  double h = 1e-3;
  for (int i = 0; i < 60; ++i) {
    auto t = detail::taylor_series(pb.spec, pb.N, pb.alpha, h);
    if (t.error_estimate <= 0.1 * tol) return t;
    h *= 0.5;
  }
  throw Error(ErrorCode::StartRadiusTooLarge, "no admissible start radius");
}

namespace detail {

// Dormand-Prince 5(4) tableau.
struct DP {
  static constexpr double c2 = 0.2, c3 = 0.3, c4 = 0.8, c5 = 8.0 / 9.0;
  static constexpr double a21 = 0.2, a31 = 3.0 / 40.0, a32 = 9.0 / 40.0, a41 = 44.0 / 45.0, a42 = -56.0 / 15.0,
                          a43 = 32.0 / 9.0, a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                          a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0, a61 = 9017.0 / 3168.0,
                          a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                          a65 = -5103.0 / 18656.0, a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0,
                          a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
  static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                          e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
  static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
};

using Vec2 = std::array<double, 2>;

class RadialStepper {
 public:
  RadialStepper(const NonlinearitySpec& spec, int N, IntegratorStats& stats)
      : spec_(spec), nm1_(static_cast<double>(N - 1)), stats_(stats) {}

  Vec2 rhs(double r, const Vec2& y) const {
    ++stats_.rhs_evals;
    return {y[1], -nm1_ / r * y[1] - spec_.f(y[0])};
  }

  struct Trial {
    Vec2 y1{};
    Vec2 k7{};
    double err = 0.0;
    DenseSegment dense;
  };

  // Throws Error(DomainExceeded) when a stage leaves the domain.
  Trial step(double r, const Vec2& y, const Vec2& k1, double h, double rtol, double atol) const {
    Vec2 k2, k3, k4, k5, k6, yt;
    for (int i = 0; i < 2; ++i) yt[i] = y[i] + h * DP::a21 * k1[i];
    k2 = rhs(r + DP::c2 * h, yt);
    for (int i = 0; i < 2; ++i) yt[i] = y[i] + h * (DP::a31 * k1[i] + DP::a32 * k2[i]);
    k3 = rhs(r + DP::c3 * h, yt);
    for (int i = 0; i < 2; ++i) yt[i] = y[i] + h * (DP::a41 * k1[i] + DP::a42 * k2[i] + DP::a43 * k3[i]);
    k4 = rhs(r + DP::c4 * h, yt);
    for (int i = 0; i < 2; ++i)
      yt[i] = y[i] + h * (DP::a51 * k1[i] + DP::a52 * k2[i] + DP::a53 * k3[i] + DP::a54 * k4[i]);
    k5 = rhs(r + DP::c5 * h, yt);
    for (int i = 0; i < 2; ++i)
      yt[i] = y[i] + h * (DP::a61 * k1[i] + DP::a62 * k2[i] + DP::a63 * k3[i] + DP::a64 * k4[i] + DP::a65 * k5[i]);
    k6 = rhs(r + h, yt);
    Trial t;
    for (int i = 0; i < 2; ++i)
      t.y1[i] = y[i] + h * (DP::a71 * k1[i] + DP::a73 * k3[i] + DP::a74 * k4[i] + DP::a75 * k5[i] + DP::a76 * k6[i]);
    t.k7 = rhs(r + h, t.y1);
    double acc = 0.0;
    for (int i = 0; i < 2; ++i) {
      const double e = h * (DP::e1 * k1[i] + DP::e3 * k3[i] + DP::e4 * k4[i] + DP::e5 * k5[i] + DP::e6 * k6[i] +
                            DP::e7 * t.k7[i]);
      const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(t.y1[i]));
      acc += (e / sc) * (e / sc);
    }
    t.err = std::sqrt(acc / 2.0);
    t.dense.r0 = r;
    t.dense.h = h;
    for (std::size_t i = 0; i < 2; ++i) {
      const double ydiff = t.y1[i] - y[i];
      const double bspl = h * k1[i] - ydiff;
      t.dense.c[i] = {y[i], ydiff, bspl, ydiff - h * t.k7[i] - bspl,
                      h * (DP::d1 * k1[i] + DP::d3 * k3[i] + DP::d4 * k4[i] + DP::d5 * k5[i] + DP::d6 * k6[i] +
                           DP::d7 * t.k7[i])};
    }
    return t;
  }

 private:
  const NonlinearitySpec& spec_;
  double nm1_;
  IntegratorStats& stats_;
};

// Root of component `comp` (minus `level`) of the dense output on [a, b].
inline double refine_root(const DenseSegment& seg, std::size_t comp, double level, double a, double b, double tol) {
  auto g = [&](double r) { return seg(r)[comp] - level; };
  const bool pos_a = g(a) > 0.0;
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    if (m == a || m == b) break;
    const double gm = g(m);
    if (std::abs(gm) <= tol && (b - a) <= 1e-13 * std::max(1.0, std::abs(m))) return m;
    if ((gm > 0.0) == pos_a) {
      a = m;
    } else {
      b = m;
    }
  }
  const double ga = std::abs(g(a));
  const double gb = std::abs(g(b));
  return ga <= gb ? a : b;
}

}  // namespace detail

/// Integrates the radial initial-value problem until a terminal condition.
inline Trajectory integrate(const IVProblem& pb) {
  using detail::Vec2;
  const auto& o = pb.options;
  if (!(o.rel_tol > 0.0) || !(o.abs_tol > 0.0) || !(o.event_tol > 0.0)) {
    throw Error(ErrorCode::PreconditionFailed, "tolerances must be positive");
  }
  const auto start = taylor_start(pb);
  if (!(o.r_max > start.state.r)) throw Error(ErrorCode::PreconditionFailed, "r_max must exceed the start radius");

  const auto& spec = pb.spec;
  const int N = pb.N;
  const double alpha = pb.alpha;
  const double a_abs = std::abs(alpha);

  Trajectory tr;
  tr.N = N;
  tr.alpha = alpha;
  tr.h0 = start.state.r;
  tr.options = o;

  for (int i = 1; i <= 1000; ++i) tr.f_scale = std::max(tr.f_scale, std::abs(spec.f(a_abs * i / 1000.0)));

  // Equilibria (including alpha = 0) are constant solutions.
  if (spec.f(alpha) == 0.0) {
    tr.samples = {State{tr.h0, alpha, 0.0}, State{o.r_max, alpha, 0.0}};
    DenseSegment seg;
    seg.r0 = tr.h0;
    seg.h = o.r_max - tr.h0;
    seg.c[0] = {alpha, 0.0, 0.0, 0.0, 0.0};
    tr.segments = {seg};
    tr.reason = TerminalReason::ConvergedToEquilibrium;
    tr.equilibrium = alpha;
    tr.r_end = o.r_max;
    return tr;
  }

  const double F_alpha = spec.F(alpha);
  const double cert_margin = 10.0 * o.event_tol * tr.f_scale +
                             1e2 * (o.abs_tol + o.rel_tol * (std::abs(F_alpha) + a_abs * tr.f_scale));

  // Largest height below which f > 0 and Q <= 0 (sampled); enables the Pohozaev certificate.
  double pohozaev_height = 0.0;
  {
    const int M = 2000;
    for (int i = 1; i <= M; ++i) {
      const double s = a_abs * i / M;
      if (!(spec.f(s) > 0.0) || spec.Q(N, s) > 0.0) break;
      pohozaev_height = s;
    }
  }

  // max F on [0, m] by sampling (a lower bound, so the certificate is conservative).
  auto barrier_gap = [&](double m) {
    double best = 0.0;
    const int M = 400;
    for (int i = 1; i < M; ++i) best = std::max(best, spec.F(m * i / M));
    return best - spec.F(m);
  };

  std::vector<double> boundaries = spec.breakpoints();
  std::vector<double> heights = o.monitor_heights;

  detail::RadialStepper stepper(spec, N, tr.stats);
  double r = start.state.r;
  Vec2 y{start.state.u, start.state.du};
  Vec2 k1 = stepper.rhs(r, y);
  tr.samples.push_back(start.state);

  double h = std::min(0.1 * std::max(r, 1e-2), 0.5 * (o.r_max - r));
  int crossings = 0;
  bool done = false;
  std::optional<double> energy_cert_r;
  int du_sign_at_cert = 0;

  auto finish = [&](TerminalReason why, double r_end) {
    tr.reason = why;
    tr.r_end = r_end;
    done = true;
  };

  auto push_event = [&](Event e) { tr.events.push_back(e); };

  while (!done) {
    if (tr.stats.accepted + tr.stats.rejected >= o.max_steps) {
      throw Error(ErrorCode::StepSizeUnderflow, "step budget exhausted at r = " + std::to_string(r));
    }
    if (h < 1e-14 * std::max(1.0, r)) {
      if (!std::isfinite(y[0]) || (spec.bounded() && std::abs(y[0]) >= spec.domain_top() * (1 - 1e-9))) {
        finish(TerminalReason::Blowup, r);
        break;
      }
      throw Error(ErrorCode::StepSizeUnderflow, "step size underflow at r = " + std::to_string(r));
    }
    h = std::min(h, o.r_max - r);

    detail::RadialStepper::Trial trial;
    try {
      trial = stepper.step(r, y, k1, h, o.rel_tol, o.abs_tol);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DomainExceeded) throw;
      ++tr.stats.rejected;
      h *= 0.25;
      continue;
    }
    if (!std::isfinite(trial.err) || !std::isfinite(trial.y1[0]) || !std::isfinite(trial.y1[1])) {
      ++tr.stats.rejected;
      h *= 0.25;
      continue;
    }
    if (trial.err > 1.0) {
      ++tr.stats.rejected;
      h *= std::max(0.2, 0.9 * std::pow(trial.err, -0.2));
      continue;
    }

    // Keep breakpoints of f at step ends: truncate to the first crossing of |u| = B.
    {
      const double u0 = std::abs(y[0]);
      double r_cut = kInf;
      for (double B : boundaries) {
        if (std::abs(u0 - B) <= 1e-9 * std::max(1.0, B)) continue;
        const bool s0 = u0 > B;
        const double um = std::abs(trial.dense(r + 0.5 * h)[0]);
        const double u1 = std::abs(trial.y1[0]);
        double a = r;
        double b = -1.0;
        if ((um > B) != s0) {
          b = r + 0.5 * h;
        } else if ((u1 > B) != s0) {
          a = r + 0.5 * h;
          b = r + h;
        }
        if (b < 0.0) continue;
        auto g = [&](double x) { return std::abs(trial.dense(x)[0]) - B; };
        for (int it = 0; it < 100 && (b - a) > 1e-14 * std::max(1.0, b); ++it) {
          const double m = 0.5 * (a + b);
          if ((g(m) > 0.0) == s0) a = m; else b = m;
        }
        r_cut = std::min(r_cut, b);
      }
      if (r_cut < r + h && r_cut - r > 1e-12 * std::max(1.0, r)) {
        h = r_cut - r;
        continue;  // retake the shortened step
      }
    }

    ++tr.stats.accepted;
    const double r1 = r + h;
    const Vec2 y0 = y;
    tr.segments.push_back(trial.dense);
    const auto& seg = tr.segments.back();

    // Events inside (r, r1], in order. Split at an extremum of u if present.
    std::vector<double> cuts{r};
    if ((y0[1] > 0.0) != (trial.y1[1] > 0.0) && y0[1] != 0.0) {
      cuts.push_back(detail::refine_root(seg, 1, 0.0, r, r1, o.event_tol));
    }
    cuts.push_back(r1);

    double r_stop = r1;
    for (std::size_t c = 0; c + 1 < cuts.size() && !done; ++c) {
      const double a = cuts[c];
      const double b = cuts[c + 1];
      const auto ya = seg(a);
      const auto yb = (b == r1) ? trial.y1 : seg(b);
      std::vector<Event> local;

      // Zero crossing.
      if (ya[0] != 0.0 && (ya[0] > 0.0) != (yb[0] > 0.0)) {
        const double rz = detail::refine_root(seg, 0, 0.0, a, b, o.event_tol);
        const auto yz = seg(rz);
        Event e;
        e.kind = EventKind::ZeroCrossing;
        e.state = State{rz, yz[0], yz[1]};
        e.direction = yz[1] > 0.0 ? 1 : -1;
        local.push_back(e);
      }
      for (double s : heights) {
        if (ya[0] != s && (ya[0] > s) != (yb[0] > s)) {
          const double rs = detail::refine_root(seg, 0, s, a, b, o.event_tol);
          const auto ys = seg(rs);
          Event e;
          e.kind = EventKind::HeightCrossing;
          e.state = State{rs, ys[0], ys[1]};
          e.direction = ys[1] > 0.0 ? 1 : -1;
          e.height = s;
          local.push_back(e);
        }
      }
      std::sort(local.begin(), local.end(), [](const Event& x, const Event& y) { return x.state.r < y.state.r; });

      for (const auto& e : local) {
        push_event(e);
        if (e.kind != EventKind::ZeroCrossing) continue;
        ++crossings;
        if (std::abs(e.state.du) <= o.event_tol) {
          Event nz = e;
          nz.kind = EventKind::NearDoubleZero;
          push_event(nz);
          r_stop = e.state.r;
          finish(TerminalReason::DoubleZeroDetected, r_stop);
          break;
        }
        if (o.max_crossings > 0 && crossings >= o.max_crossings) {
          r_stop = e.state.r;
          finish(TerminalReason::CrossingLimit, r_stop);
          break;
        }
      }
      if (done) break;

      // Extremum at the cut point b (when b is the interior split).
      if (c + 1 < cuts.size() - 1) {
        const auto ye = seg(b);
        Event e;
        e.kind = EventKind::Extremum;
        e.state = State{b, ye[0], ye[1]};
        const double fu = spec.f(ye[0]);
        e.extremum = fu > 0.0 ? ExtremumKind::Max : ExtremumKind::Min;
        e.height = ye[0];
        push_event(e);
        if (std::abs(ye[0]) <= o.event_tol) {
          Event nz = e;
          nz.kind = EventKind::NearDoubleZero;
          push_event(nz);
          r_stop = b;
          finish(TerminalReason::DoubleZeroDetected, r_stop);
          break;
        }
        // |u| has a local minimum away from zero: candidate trap.
        const bool turning_away = (ye[0] > 0.0 && e.extremum == ExtremumKind::Min) ||
                                  (ye[0] < 0.0 && e.extremum == ExtremumKind::Max);
        if (turning_away) {
          const double gap = barrier_gap(std::abs(ye[0]));
          if (gap > cert_margin) {
            Event t = e;
            t.kind = EventKind::Trap;
            t.certificate = Certificate::LocalExtremum;
            t.margin = gap;
            const bool first_trap = tr.find_event(EventKind::Trap) == nullptr;
            if (first_trap || o.stop_on_trap) push_event(t);
            if (o.stop_on_trap) {
              r_stop = b;
              finish(TerminalReason::Trapped, r_stop);
              break;
            }
          }
        }
      }
    }

    const State end_state = [&] {
      if (r_stop == r1) return State{r1, trial.y1[0], trial.y1[1]};
      const auto ys = seg(r_stop);
      return State{r_stop, ys[0], ys[1]};
    }();
    tr.samples.push_back(end_state);
    if (done) break;

    r = r1;
    y = trial.y1;
    k1 = trial.k7;

    const double u = y[0];
    const double du = y[1];
    if (std::abs(u) <= o.event_tol && std::abs(du) <= o.event_tol) {
      Event nz;
      nz.kind = EventKind::NearDoubleZero;
      nz.state = end_state;
      push_event(nz);
      finish(TerminalReason::DoubleZeroDetected, r);
      break;
    }

    // Energy certificate: I < 0 keeps u away from 0 forever.
    const double I = 0.5 * du * du + spec.F(u);
    if (!energy_cert_r && u != 0.0 && I < -cert_margin) {
      energy_cert_r = r;
      du_sign_at_cert = du > 0.0 ? 1 : (du < 0.0 ? -1 : 0);
      if (tr.find_event(EventKind::Trap) == nullptr) {
        Event t;
        t.kind = EventKind::Trap;
        t.state = end_state;
        t.height = u;
        t.certificate = Certificate::Energy;
        t.margin = -I;
        push_event(t);
      }
    }

    // Pohozaev certificate (f > 0 and Q <= 0 below |u|, |u| decreasing).
    if (pohozaev_height > 0.0 && std::abs(u) <= pohozaev_height && u * du < 0.0) {
      const double rN1 = std::pow(r, N - 1);
      const double rN = rN1 * r;
      const double Lterm = rN * du * du + (N - 2) * rN1 * du * u + 2.0 * rN * spec.F(u);
      const double scale = rN * du * du + (N - 2) * rN1 * std::abs(du * u) + 2.0 * rN * std::abs(spec.F(u));
      if (Lterm < -1e-6 * scale) {
        if (tr.find_event(EventKind::Trap) == nullptr) {
          Event t;
          t.kind = EventKind::Trap;
          t.state = end_state;
          t.height = u;
          t.certificate = Certificate::Pohozaev;
          t.margin = -Lterm;
          push_event(t);
        }
        if (o.stop_on_trap) {
          finish(TerminalReason::Trapped, r);
          break;
        }
      }
    }

    // After an energy certificate, wait a while for the local-extremum trap;
    // a monotone tail means convergence to the equilibrium +-b.
    if (energy_cert_r && o.stop_on_trap) {
      const double wait = 10.0 + 0.25 * *energy_cert_r;
      if (r >= *energy_cert_r + wait || r >= o.r_max) {
        const int sgn_now = du > 0.0 ? 1 : (du < 0.0 ? -1 : 0);
        bool monotone = sgn_now == du_sign_at_cert;
        for (auto it = tr.events.rbegin(); it != tr.events.rend() && monotone; ++it) {
          if (it->state.r < *energy_cert_r) break;
          if (it->kind == EventKind::Extremum) monotone = false;
        }
        if (monotone) {
          tr.equilibrium = u;
          finish(TerminalReason::ConvergedToEquilibrium, r);
        } else {
          finish(TerminalReason::Trapped, r);
        }
        break;
      }
    }

    if (r >= o.r_max) {
      finish(TerminalReason::ReachedRmax, r);
      break;
    }
    if (!std::isfinite(u) || std::abs(u) > 1e150) {
      finish(TerminalReason::Blowup, r);
      break;
    }

    const double fac = trial.err > 0.0 ? 0.9 * std::pow(trial.err, -0.2) : 5.0;
    h *= std::clamp(fac, 0.2, 5.0);
  }

  if (tr.samples.size() >= 2 && tr.segments.size() + 1 > tr.samples.size()) tr.segments.resize(tr.samples.size() - 1);
  return tr;
}

}  // namespace radshoot
