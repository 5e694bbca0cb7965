#pragma once

// Bound states as brackets: sweeps over initial heights, bisection between
// trapped and crossing shots, multiplicity scans over (beta*, gamma*) and the
// magnitude-jump constructions that manufacture extra ground states.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "radshoot/classifier.hpp"
#include "radshoot/diagnostics.hpp"
#include "radshoot/error.hpp"
#include "radshoot/integrator.hpp"
#include "radshoot/jump.hpp"
#include "radshoot/landscape.hpp"
#include "radshoot/nonlinearity.hpp"

namespace radshoot {

struct FinderOptions {
  SolverOptions solver;
  /// Bracket width target, relative to max(1, |alpha|).
  double alpha_tol = 1e-10;
  int refine_rounds = 3;
  int refine_factor = 10;
  /// r_max doublings tried on an inconclusive shot.
  int rmax_retries = 3;
  unsigned workers = 1;
};

/// A shot classified at crossing level k: integration stops at crossing k+1.
struct Shot {
  double alpha = 0.0;
  std::optional<ShotClass> cls;
  std::string error;  ///< set when inconclusive

  bool definite() const noexcept { return cls.has_value(); }
  /// Trapped with exactly k crossings.
  bool is_P(int k) const noexcept { return cls && cls->positive_side() && cls->k == k; }
  bool is_N(int k) const noexcept { return cls && cls->kind == ShotKind::N && cls->k == k + 1; }
};

struct Bracket {
  double lo = 0.0;
  double hi = 0.0;
  ShotClass c_lo;
  ShotClass c_hi;
};

struct SweepMap {
  int level = 0;
  std::vector<Shot> grid;
  std::vector<Bracket> transitions;
};

struct BoundState {
  double lo = 0.0;
  double hi = 0.0;
  int k = 0;
  ShotClass c_lo;
  ShotClass c_hi;
  Trajectory witness;
  int bisection_steps = 0;

  double alpha() const noexcept { return 0.5 * (lo + hi); }
  double width() const noexcept { return hi - lo; }
};

namespace detail {

inline Trajectory shoot_level(const NonlinearitySpec& spec, int N, double alpha, const SolverOptions& base, int k) {
  IVProblem pb{N, alpha, spec, base};
  pb.options.max_crossings = k + 1;
  pb.options.stop_on_trap = true;
  return integrate(pb);
}

}  // namespace detail

/// Classifies one shot at crossing level k, doubling r_max on inconclusive runs.
inline Shot classify_shot(const NonlinearitySpec& spec, int N, double alpha, int k, const FinderOptions& opt,
                          const Landscape* L = nullptr) {
  Shot s;
  s.alpha = alpha;
  SolverOptions so = opt.solver;
  for (int attempt = 0; attempt <= opt.rmax_retries; ++attempt) {
    try {
      const auto tr = detail::shoot_level(spec, N, alpha, so, k);
      s.cls = L ? classify(tr, *L) : classify(tr);
      s.error.clear();
      return s;
    } catch (const Error& e) {
      s.error = e.what();
      if (e.code() != ErrorCode::Inconclusive) return s;
    }
    so.r_max *= 2.0;
  }
  return s;
}

namespace detail {

template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn fn) {
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const unsigned w = std::min<unsigned>(workers, static_cast<unsigned>(n));
  for (unsigned t = 0; t < w; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < n; i += w) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

inline bool same_class(const Shot& a, const Shot& b) {
  if (!a.definite() || !b.definite()) return a.definite() == b.definite();
  return a.cls->kind == b.cls->kind && a.cls->k == b.cls->k;
}

inline std::vector<Shot> classify_all(const NonlinearitySpec& spec, int N, const std::vector<double>& alphas, int k,
                                      const FinderOptions& opt, const Landscape* L) {
  std::vector<Shot> out(alphas.size());
  parallel_for(alphas.size(), opt.workers, [&](std::size_t i) { out[i] = classify_shot(spec, N, alphas[i], k, opt, L); });
  return out;
}

inline std::vector<Bracket> adjacent_transitions(const std::vector<Shot>& grid, int k) {
  std::vector<Bracket> out;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const auto& a = grid[i];
    const auto& b = grid[i + 1];
    if ((a.is_P(k) && b.is_N(k)) || (a.is_N(k) && b.is_P(k))) out.push_back(Bracket{a.alpha, b.alpha, *a.cls, *b.cls});
  }
  return out;
}

}  // namespace detail

/// Classifies a uniform grid on [lo, hi] at crossing level k, refines every
/// interval whose end classes differ, and lists the adjacent P(k)/N(k+1) pairs.
inline SweepMap sweep(const NonlinearitySpec& spec, int N, double lo, double hi, std::size_t grid_size,
                      const FinderOptions& opt = {}, int k = 0, const Landscape* L = nullptr) {
  if (!(hi > lo) || grid_size < 2) throw Error(ErrorCode::PreconditionFailed, "sweep needs lo < hi and >= 2 points");
  if (!spec.contains(lo) || !spec.contains(hi)) throw Error(ErrorCode::DomainExceeded, "sweep range outside the domain");

  SweepMap map;
  map.level = k;
  std::vector<double> alphas;
  for (std::size_t i = 0; i < grid_size; ++i) {
    alphas.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid_size - 1));
  }
  map.grid = detail::classify_all(spec, N, alphas, k, opt, L);

  for (int round = 0; round < opt.refine_rounds; ++round) {
    std::vector<double> extra;
    for (std::size_t i = 0; i + 1 < map.grid.size(); ++i) {
      if (detail::same_class(map.grid[i], map.grid[i + 1])) continue;
      const double a = map.grid[i].alpha;
      const double b = map.grid[i + 1].alpha;
      for (int j = 1; j < opt.refine_factor; ++j) extra.push_back(a + (b - a) * j / opt.refine_factor);
    }
    if (extra.empty()) break;
    auto shots = detail::classify_all(spec, N, extra, k, opt, L);
    map.grid.insert(map.grid.end(), shots.begin(), shots.end());
    std::sort(map.grid.begin(), map.grid.end(), [](const Shot& x, const Shot& y) { return x.alpha < y.alpha; });
  }

  map.transitions = detail::adjacent_transitions(map.grid, k);
  return map;
}

/// Bisects a P(k)/N(k+1) bracket (endpoints in either order) down to alpha_tol.
inline BoundState bisect_bound_state(const NonlinearitySpec& spec, int N, double a, double b, int k,
                                     const FinderOptions& opt = {}, const Landscape* L = nullptr) {
  Shot sa = classify_shot(spec, N, a, k, opt, L);
  Shot sb = classify_shot(spec, N, b, k, opt, L);
  if (!(sa.is_P(k) && sb.is_N(k)) && !(sa.is_N(k) && sb.is_P(k))) {
    auto label = [](const Shot& s) { return s.cls ? s.cls->label() : "inconclusive (" + s.error + ")"; };
    throw Error(ErrorCode::BracketBroken, "endpoints " + label(sa) + " at " + std::to_string(a) + " and " + label(sb) +
                                              " at " + std::to_string(b) + " do not bracket a " + std::to_string(k) +
                                              "-node bound state");
  }
  BoundState bs;
  bs.k = k;
  for (;;) {
    const double mid = 0.5 * (sa.alpha + sb.alpha);
    if (std::abs(sb.alpha - sa.alpha) <= opt.alpha_tol * std::max(1.0, std::abs(mid)) || mid == sa.alpha ||
        mid == sb.alpha) {
      break;
    }
    Shot sm = classify_shot(spec, N, mid, k, opt, L);
    ++bs.bisection_steps;
    if (!sm.is_P(k) && !sm.is_N(k)) {
      throw Error(ErrorCode::BracketBroken, "midpoint " + std::to_string(mid) + " classified " +
                                                (sm.cls ? sm.cls->label() : "inconclusive (" + sm.error + ")"));
    }
    if (sm.is_P(k) == sa.is_P(k)) {
      sa = sm;
    } else {
      sb = sm;
    }
  }
  const Shot& lo = sa.alpha < sb.alpha ? sa : sb;
  const Shot& hi = sa.alpha < sb.alpha ? sb : sa;
  bs.lo = lo.alpha;
  bs.hi = hi.alpha;
  bs.c_lo = *lo.cls;
  bs.c_hi = *hi.cls;
  IVProblem pb{N, bs.alpha(), spec, opt.solver};
  pb.options.max_crossings = k + 2;
  try {
    bs.witness = integrate(pb);
  } catch (const Error&) {
    pb.options.max_crossings = k + 1;
    bs.witness = integrate(pb);
  }
  return bs;
}

/// Ground state (no nodes) inside [a, b].
inline BoundState find_ground_state(const NonlinearitySpec& spec, int N, double a, double b,
                                    const FinderOptions& opt = {}) {
  return bisect_bound_state(spec, N, a, b, 0, opt);
}

/// Bound state with k nodes at the last P(k)/N(k+1) transition of a sweep over [lo, hi].
inline BoundState find_kth_bound_state(const NonlinearitySpec& spec, int N, int k, double lo, double hi,
                                       std::size_t grid_size = 100, const FinderOptions& opt = {}) {
  if (k < 0) throw Error(ErrorCode::PreconditionFailed, "k must be >= 0");
  const auto map = sweep(spec, N, lo, hi, grid_size, opt, k);
  if (map.transitions.empty()) {
    throw Error(ErrorCode::NotFound, "no P(" + std::to_string(k) + ")/N(" + std::to_string(k + 1) +
                                         ") transition in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  const auto& t = map.transitions.back();
  return k == 0 ? find_ground_state(spec, N, t.lo, t.hi, opt) : bisect_bound_state(spec, N, t.lo, t.hi, k, opt);
}

/// Bound states for k = 0..k_max; each alpha_k must lie above alpha_{k-1}.
inline std::vector<BoundState> find_bound_state_sequence(const NonlinearitySpec& spec, int N, int k_max, double lo,
                                                         double hi, std::size_t grid_size = 100,
                                                         const FinderOptions& opt = {}) {
  std::vector<BoundState> out;
  for (int k = 0; k <= k_max; ++k) {
    out.push_back(find_kth_bound_state(spec, N, k, lo, hi, grid_size, opt));
    if (k > 0 && !(out[k - 1].hi < out[k].lo)) {
      throw Error(ErrorCode::OrderingViolated, "alpha_" + std::to_string(k) + " does not lie above alpha_" +
                                                   std::to_string(k - 1));
    }
  }
  return out;
}

struct MultiplicityResult {
  int k = 0;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<BoundState> states;
  /// P(k)/N(k+1) pairs whose trapped side was not below gamma_1 (limits of band crossings).
  int discarded = 0;
};

/// k-node bound states with initial value in (beta*, gamma*): P(k)/N(k+1)
/// transitions whose trapped side oscillates below gamma_1.
namespace detail {

// Trapped outside the central well.
inline bool outside_well(const Shot& s) {
  return s.cls && s.cls->positive_side() && s.cls->refinement != Refinement::Q;
}

// Node counts blow up logarithmically at the edges of the region whose shots
// fall into the central well, so uniform grids miss the extreme bound states.
// Each edge is located by bisection and then sampled geometrically.
inline void refine_well_edges(const NonlinearitySpec& spec, int N, int k, const FinderOptions& opt,
                              const Landscape& L, std::vector<Shot>& grid) {
  std::vector<std::pair<Shot, Shot>> edges;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const auto& a = grid[i];
    const auto& b = grid[i + 1];
    if (!a.definite() || !b.definite() || outside_well(a) == outside_well(b)) continue;
    edges.emplace_back(a, b);
  }
  std::vector<Shot> extra;
  for (auto [out, in] : edges) {
    if (!outside_well(out)) std::swap(out, in);
    const double w = std::abs(in.alpha - out.alpha);
    const double tol = opt.alpha_tol * std::max(1.0, std::abs(in.alpha));
    while (std::abs(in.alpha - out.alpha) > tol) {
      const double mid = 0.5 * (in.alpha + out.alpha);
      if (mid == in.alpha || mid == out.alpha) break;
      Shot m = classify_shot(spec, N, mid, k, opt, &L);
      if (!m.definite()) break;
      extra.push_back(m);
      (outside_well(m) ? out : in) = m;
    }
    const double dir = in.alpha > out.alpha ? 1.0 : -1.0;
    std::vector<double> alphas;
    for (double d = 0.5 * w; d > tol; d *= 0.5) alphas.push_back(out.alpha + dir * d);
    auto shots = classify_all(spec, N, alphas, k, opt, &L);
    extra.insert(extra.end(), shots.begin(), shots.end());
  }
  grid.insert(grid.end(), extra.begin(), extra.end());
  std::sort(grid.begin(), grid.end(), [](const Shot& x, const Shot& y) { return x.alpha < y.alpha; });
}

}  // namespace detail

inline MultiplicityResult multiplicity_scan(const NonlinearitySpec& spec, const Landscape& L, int N, int k,
                                            std::size_t grid_size = 200, const FinderOptions& opt = {}) {
  if (L.gamma_seq.empty() || !std::isfinite(L.beta_star)) {
    throw Error(ErrorCode::PreconditionFailed, "multiplicity scan needs a landscape with gamma_1 and beta*");
  }
  MultiplicityResult res;
  res.k = k;
  const double span = L.gamma_star - L.beta_star;
  res.lo = L.beta_star + 1e-9 * span;
  res.hi = L.gamma_star - 1e-9 * span;
  auto map = sweep(spec, N, res.lo, res.hi, grid_size, opt, k, &L);
  detail::refine_well_edges(spec, N, k, opt, L, map.grid);
  for (const auto& t : detail::adjacent_transitions(map.grid, k)) {
    const ShotClass& p = t.c_lo.positive_side() ? t.c_lo : t.c_hi;
    if (p.refinement != Refinement::Q) {
      ++res.discarded;
      continue;
    }
    try {
      auto bs = bisect_bound_state(spec, N, t.lo, t.hi, k, opt, &L);
      const ShotClass& pe = bs.c_lo.positive_side() ? bs.c_lo : bs.c_hi;
      if (pe.refinement != Refinement::Q) {
        ++res.discarded;
        continue;
      }
      res.states.push_back(std::move(bs));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::BracketBroken) throw;
      ++res.discarded;
    }
  }
  return res;
}

struct K0Discovery {
  int k0 = -1;  ///< first k with two bound states, -1 if none up to k_max
  std::vector<MultiplicityResult> scans;  ///< k = 0 .. k0 (or k_max)
};

/// Runs multiplicity_scan for k = 0, 1, ... until two bound states appear.
inline K0Discovery discover_k0(const NonlinearitySpec& spec, const Landscape& L, int N, int k_max,
                               std::size_t grid_size = 200, const FinderOptions& opt = {}) {
  K0Discovery d;
  for (int k = 0; k <= k_max; ++k) {
    d.scans.push_back(multiplicity_scan(spec, L, N, k, grid_size, opt));
    if (d.scans.back().states.size() >= 2) {
      d.k0 = k;
      break;
    }
  }
  return d;
}

struct SlopeWindow {
  double a_bar = 0.0;
  double b_bar = 0.0;
};

struct JumpTuning {
  double eps = 0.0;
  double amp2 = 0.0;
  double alpha2 = 0.0;
  double r_star = 0.0;      ///< where the alpha2 shot crosses alpha*
  double slope = 0.0;       ///< r_star |u'(r_star)|
  NonlinearitySpec spec;    ///< f1 / bridge / amp2 f2 with the bridge starting at alpha* + eps
  ShotClass cls;
  int tried = 0;
};

/// Searches eps (decreasing) and A^2 (increasing) for a shot alpha2 > alpha* + 2 eps
/// under the one-jump nonlinearity that crosses alpha* with slope product in the
/// window and stays positive.
inline JumpTuning tune_jump(const NonlinearitySpec& f1, double alpha_star, const NonlinearitySpec& f2, int N,
                            SlopeWindow window, const FinderOptions& opt = {},
                            std::vector<double> eps_schedule = {1e-1, 1e-2, 1e-3, 1e-4},
                            std::vector<double> amp2_schedule = {1.0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6}) {
  const auto L1 = analyze_landscape(f1);
  const double limit = (alpha_star - L1.b) * (N - 2);
  if (!(window.a_bar > 0.0) || !(window.b_bar >= window.a_bar) || !(window.b_bar < limit)) {
    throw Error(ErrorCode::PreconditionFailed, "slope window must satisfy 0 < a_bar <= b_bar < (alpha* - b)(N - 2) = " +
                                                   std::to_string(limit));
  }
  JumpTuning best;
  double best_gap = kInf;
  for (double eps : eps_schedule) {
    for (double amp2 : amp2_schedule) {
      const auto spec = build_jump_family({f1, f2}, {alpha_star + eps}, {eps}, {amp2});
      for (double off : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
        const double a2 = alpha_star + 2.0 * eps + off * eps;
        IVProblem pb{N, a2, spec, opt.solver};
        pb.options.max_crossings = 1;
        pb.options.monitor_heights = {alpha_star};
        Trajectory tr;
        ShotClass cls;
        try {
          tr = integrate(pb);
          cls = classify(tr);
        } catch (const Error& e) {
          if (e.code() == ErrorCode::Inconclusive || e.code() == ErrorCode::StepSizeUnderflow) continue;
          throw;
        }
        ++best.tried;
        const Event* hc = tr.find_event(EventKind::HeightCrossing);
        if (!hc) continue;
        const double slope = hc->state.r * std::abs(hc->state.du);
        const bool in_window = slope >= window.a_bar && slope <= window.b_bar;
        const bool ok = in_window && cls.kind == ShotKind::P && cls.k == 0;
        const double gap = ok ? 0.0 : (cls.kind == ShotKind::P ? 1.0 : 2.0) + std::abs(slope - window.b_bar);
        if (ok || gap < best_gap) {
          const int tried = best.tried;
          best = JumpTuning{eps, amp2, a2, hc->state.r, slope, spec, cls, tried};
          best_gap = gap;
        }
        if (ok) return best;
      }
    }
  }
  throw Error(ErrorCode::SearchExhausted,
              "no (eps, A^2, alpha2) found; best candidate eps = " + std::to_string(best.eps) + ", A^2 = " +
                  std::to_string(best.amp2) + ", alpha2 = " + std::to_string(best.alpha2) + ", slope product = " +
                  std::to_string(best.slope) + ", class " + best.cls.label());
}

struct ExampleConfig {
  int N = 4;
  double eps = 0.1;
  std::vector<double> amp2{10.0, 0.1, 10.0, 0.1};
  /// Bracket for the ground state of u^2 - u.
  double ground_lo = 1.5;
  double ground_hi = 12.0;
  /// alpha_i is searched in (alpha_{i-1} + eps, alpha_{i-1} + eps + search_span).
  double search_span = 2.0;
  FinderOptions finder;
};

struct ExampleReport {
  double alpha_star = 0.0;
  std::vector<double> alphas;        ///< alpha_0 .. alpha_K
  std::vector<ShotClass> classes;    ///< classes of the alpha_i shots under the final nonlinearity
  std::vector<BoundState> brackets;  ///< ground states between consecutive alpha_i
  std::vector<GstEntry> gst;         ///< sign-change lemma checks on the alpha_i shots
  NonlinearitySpec spec;
  bool ok = false;
  std::string failure;
};

/// The u^2 - u example with jumps of u^2 alternating between large and small
/// amplitude. alpha_1 = alpha* + eps starts the first bridge; each later
/// alpha_i is the first shot above alpha_{i-1} + eps in the expected class
/// (trapped for even i, crossing for odd i) and starts the next bridge.
inline ExampleReport run_example(const ExampleConfig& cfg = {}) {
  ExampleReport rep;
  const auto f1 = NonlinearitySpec::power_minus_linear(2.0);
  const auto f2 = NonlinearitySpec::power(2.0);
  const int N = cfg.N;
  const double eps = cfg.eps;
  const std::size_t jumps = cfg.amp2.size();

  try {
    rep.alpha_star = find_ground_state(f1, N, cfg.ground_lo, cfg.ground_hi, cfg.finder).alpha();
  } catch (const Error& e) {
    rep.failure = std::string("ground state of f1: ") + e.what();
    return rep;
  }
  rep.alphas = {rep.alpha_star - eps, rep.alpha_star + eps};

  std::vector<double> starts{rep.alphas[1]};
  auto build = [&](std::size_t n) {
    std::vector<NonlinearitySpec> fl{f1};
    for (std::size_t i = 0; i < n; ++i) fl.push_back(f2);
    return build_jump_family(fl, std::vector<double>(starts.begin(), starts.begin() + static_cast<long>(n)),
                             std::vector<double>(n, eps),
                             std::vector<double>(cfg.amp2.begin(), cfg.amp2.begin() + static_cast<long>(n)));
  };

  for (std::size_t stage = 1; stage <= jumps; ++stage) {
    const auto spec = build(stage);
    const bool want_P = stage % 2 == 1;
    const double base = starts.back() + eps;
    std::optional<double> found;
    for (double off = 0.02; off < cfg.search_span && !found; off += 0.25 * off + 0.02) {
      const Shot s = classify_shot(spec, N, base + off, 0, cfg.finder);
      if (s.definite() && (want_P ? s.is_P(0) : s.is_N(0))) found = base + off;
    }
    if (!found) {
      rep.failure = "alpha_" + std::to_string(stage + 1) + ": no " + (want_P ? "trapped" : "crossing") +
                    " shot above " + std::to_string(base);
      rep.spec = spec;
      break;
    }
    rep.alphas.push_back(*found);
    if (stage < jumps) starts.push_back(*found);
  }

  rep.spec = rep.failure.empty() ? build(jumps) : build(starts.size());
  const auto L = analyze_landscape(rep.spec);
  for (std::size_t i = 0; i < rep.alphas.size(); ++i) {
    const Shot s = classify_shot(rep.spec, N, rep.alphas[i], 0, cfg.finder);
    if (!s.definite()) {
      if (rep.failure.empty()) rep.failure = "alpha_" + std::to_string(i) + " inconclusive: " + s.error;
      break;
    }
    rep.classes.push_back(*s.cls);
    const bool want_P = i % 2 == 0;
    if (rep.failure.empty() && (want_P ? !s.is_P(0) : !s.is_N(0))) {
      rep.failure = "alpha_" + std::to_string(i) + " classified " + s.cls->label();
    }
    IVProblem pb{N, rep.alphas[i], rep.spec, cfg.finder.solver};
    pb.options.max_crossings = 1;
    const auto tr = integrate(pb);
    const auto g = gst_sign_change_check(tr, rep.spec, L, N, {rep.alpha_star});
    rep.gst.insert(rep.gst.end(), g.begin(), g.end());
  }

  for (std::size_t i = 0; i + 1 < rep.classes.size(); ++i) {
    try {
      rep.brackets.push_back(find_ground_state(rep.spec, N, rep.alphas[i], rep.alphas[i + 1], cfg.finder));
    } catch (const Error& e) {
      if (rep.failure.empty()) rep.failure = "bracket " + std::to_string(i + 1) + ": " + e.what();
      break;
    }
  }
  if (rep.failure.empty() && rep.brackets.size() < jumps + 1) rep.failure = "fewer brackets than expected";
  rep.ok = rep.failure.empty();
  return rep;
}

/// As run_example, but throws ReproductionFailed at the first divergence.
inline ExampleReport reproduce_example(const ExampleConfig& cfg = {}) {
  auto rep = run_example(cfg);
  if (!rep.ok) throw Error(ErrorCode::ReproductionFailed, rep.failure);
  return rep;
}

}  // namespace radshoot
