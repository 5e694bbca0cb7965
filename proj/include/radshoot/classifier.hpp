#pragma once

// Shooting-set membership of a single trajectory.
//
// Node convention: k is always the number of certified transversal zero
// crossings. A P(k) shot crossed k times and was then trapped, an N(k) shot
// was seen crossing k times with more possibly to come. In the one-based
// numbering of the classical shooting sets this is P(k) <-> P_{k+1},
// N(k) <-> N_k, and a bound state with k nodes is the k-th boundary.

#include <algorithm>
#include <cmath>
#include <iterator>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "radshoot/error.hpp"
#include "radshoot/integrator.hpp"
#include "radshoot/landscape.hpp"

namespace radshoot {

enum class ShotKind { P, N, G, TrappedMonotone, Trivial };
enum class Refinement { None, Q, S, Upsilon, Unresolved };

inline std::string_view to_string(ShotKind k) {
  switch (k) {
    case ShotKind::P: return "P";
    case ShotKind::N: return "N";
    case ShotKind::G: return "G";
    case ShotKind::TrappedMonotone: return "TrappedMonotone";
    case ShotKind::Trivial: return "Trivial";
  }
  return "?";
}

inline std::string_view to_string(Refinement r) {
  switch (r) {
    case Refinement::None: return "None";
    case Refinement::Q: return "Q";
    case Refinement::S: return "S";
    case Refinement::Upsilon: return "Upsilon";
    case Refinement::Unresolved: return "Unresolved";
  }
  return "?";
}

struct ShotClass {
  ShotKind kind = ShotKind::Trivial;
  int k = 0;
  Refinement refinement = Refinement::None;
  /// 1-based index i of gamma_i for S (band (gamma_i, gamma_{i+1})) and Upsilon.
  int band = 0;
  /// Indices into Trajectory::events justifying the verdict.
  std::vector<std::size_t> evidence;

  /// Trapped after exactly k crossings (P or monotone convergence).
  bool positive_side() const noexcept { return kind == ShotKind::P || kind == ShotKind::TrappedMonotone; }

  friend bool operator==(const ShotClass& a, const ShotClass& b) {
    return a.kind == b.kind && a.k == b.k && a.refinement == b.refinement && a.band == b.band;
  }

  std::string label() const {
    std::string s = std::string(to_string(kind)) + "(" + std::to_string(k) + ")";
    if (refinement != Refinement::None) s += "/" + std::string(to_string(refinement));
    return s;
  }
};

/// Transversality threshold for a counted crossing, in units of event_tol.
inline constexpr double kTransversalFactor = 1e3;
/// Relative band half-width for assigning Upsilon.
inline constexpr double kUpsilonBandTol = 1e-6;

/// Crossing radii Z_1 < Z_2 < ... and the extremum radii T_i between them.
struct ZSequence {
  std::vector<double> z;
  std::vector<double> t;

  /// Z_1 < T_1 < Z_2 < T_2 < ... with exactly one T between consecutive Z.
  bool interleaved() const {
    if (z.empty()) return t.empty() || t.size() <= 1;
    for (std::size_t i = 0; i + 1 < z.size(); ++i) {
      if (i >= t.size() || !(z[i] < t[i] && t[i] < z[i + 1])) return false;
    }
    return t.size() <= z.size() && (t.size() < z.size() || t.back() > z.back());
  }
};

inline ZSequence z_sequence(const Trajectory& tr) {
  ZSequence zs;
  for (const auto& e : tr.events) {
    if (e.kind == EventKind::ZeroCrossing) {
      zs.z.push_back(e.state.r);
    } else if (e.kind == EventKind::Extremum && !zs.z.empty()) {
      zs.t.push_back(e.state.r);
    }
  }
  // Keep only the first extremum after the last crossing.
  if (!zs.z.empty()) {
    const double last = zs.z.back();
    auto it = std::find_if(zs.t.begin(), zs.t.end(), [&](double r) { return r > last; });
    if (it != zs.t.end()) zs.t.erase(std::next(it), zs.t.end());
  }
  return zs;
}

/// Certified transversal zero crossings.
inline int node_count(const Trajectory& tr) {
  const double thr = kTransversalFactor * tr.options.event_tol;
  int k = 0;
  for (const auto& e : tr.events) {
    if (e.kind == EventKind::ZeroCrossing && std::abs(e.state.du) > thr) ++k;
  }
  return k;
}

namespace detail {

inline void refine_band(ShotClass& sc, const Landscape& L, double m) {
  if (L.gamma_seq.empty()) return;
  const auto& g = L.gamma_seq;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (std::abs(m - g[i]) <= kUpsilonBandTol * g[i]) {
      sc.refinement = Refinement::Upsilon;
      sc.band = static_cast<int>(i + 1);
      return;
    }
  }
  if (m < g.front()) {
    sc.refinement = Refinement::Q;
    return;
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double upper = (i + 1 < g.size()) ? g[i + 1] : L.gamma_star;
    if (m > g[i] && m < upper) {
      sc.refinement = Refinement::S;
      sc.band = static_cast<int>(i + 1);
      return;
    }
  }
  sc.refinement = Refinement::Unresolved;
}

inline ShotClass classify_impl(const Trajectory& tr, const Landscape* L) {
  ShotClass sc;
  if (tr.identically_zero()) return sc;

  const double thr = kTransversalFactor * tr.options.event_tol;
  const Event* trap = nullptr;
  std::size_t trap_index = 0;
  int k = 0;
  for (std::size_t i = 0; i < tr.events.size(); ++i) {
    const auto& e = tr.events[i];
    if (e.kind == EventKind::ZeroCrossing) {
      if (trap) {
        throw Error(ErrorCode::Inconclusive, "zero crossing after a trap certificate at r = " + std::to_string(e.state.r));
      }
      if (std::abs(e.state.du) <= thr) {
        throw Error(ErrorCode::Inconclusive, "non-transversal crossing at r = " + std::to_string(e.state.r));
      }
      ++k;
      sc.evidence.push_back(i);
    } else if (e.kind == EventKind::Trap) {
      // Prefer the extremum certificate (it carries the trapping height).
      if (!trap || (trap->certificate != Certificate::LocalExtremum && e.certificate == Certificate::LocalExtremum)) {
        trap = &e;
        trap_index = i;
      }
    } else if (e.kind == EventKind::NearDoubleZero) {
      throw Error(ErrorCode::Inconclusive, "near double zero at r = " + std::to_string(e.state.r));
    }
  }
  sc.k = k;

  if (trap) {
    sc.kind = ShotKind::P;
    sc.evidence.push_back(trap_index);
    if (L) refine_band(sc, *L, std::abs(trap->state.u));
    return sc;
  }

  switch (tr.reason) {
    case TerminalReason::ConvergedToEquilibrium:
      sc.kind = ShotKind::TrappedMonotone;
      if (L) refine_band(sc, *L, std::abs(tr.equilibrium));
      return sc;
    case TerminalReason::CrossingLimit:
      sc.kind = ShotKind::N;
      return sc;
    case TerminalReason::ReachedRmax:
      if (k > 0) {
        sc.kind = ShotKind::N;
        return sc;
      }
      throw Error(ErrorCode::Inconclusive, "reached r_max = " + std::to_string(tr.r_end) + " without a certificate");
    case TerminalReason::Trapped:
      throw Error(ErrorCode::Inconclusive, "trapped without a recorded certificate");
    case TerminalReason::DoubleZeroDetected:
      throw Error(ErrorCode::Inconclusive, "near double zero");
    case TerminalReason::Blowup:
      throw Error(ErrorCode::Inconclusive, "solution left the domain");
  }
  throw Error(ErrorCode::Inconclusive, "unknown terminal reason");
}

}  // namespace detail

inline ShotClass classify(const Trajectory& tr, const Landscape& landscape) {
  return detail::classify_impl(tr, &landscape);
}

/// Classification without landscape refinement.
inline ShotClass classify(const Trajectory& tr) { return detail::classify_impl(tr, nullptr); }

}  // namespace radshoot
