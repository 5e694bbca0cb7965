#pragma once

// Piecewise "magnitude jump" nonlinearities:
//
//   f = f_1                     on [0, a_1]
//       L_i                     on [a_i, a_i + e_i]          (i = 1..K-1)
//       A_{i+1}^2 f_{i+1}       on [a_i + e_i, a_{i+1}]      (last one to the domain top)
//
// where L_i is the straight line joining its neighbours.

#include <cmath>
#include <string>
#include <vector>

#include "radshoot/error.hpp"
#include "radshoot/nonlinearity.hpp"

namespace radshoot {

namespace detail {

// Restrict `form` (defined on [lo, hi]) to [nlo, nhi]; bridges are re-anchored.
inline FormPtr clip_form(const FormPtr& form, double lo, double hi, double nlo, double nhi) {
  if (const auto* br = std::get_if<LinearBridge>(&form->v)) {
    return make_form(LinearBridge{form_derivative(*form, nlo, lo, hi, 0), form_derivative(*form, nhi, lo, hi, 0)});
    (void)br;
  }
  if (const auto* sc = std::get_if<Scaled>(&form->v)) {
    return make_form(Scaled{sc->c2, clip_form(sc->inner, lo, hi, nlo, nhi)});
  }
  return form;
}

// Pieces of `spec` on [a, b], each scaled by c2 (c2 == 1 keeps the forms as they are).
inline void append_restricted(std::vector<Piece>& out, const NonlinearitySpec& spec, double a, double b, double c2) {
  if (b > spec.domain_top()) {
    throw Error(ErrorCode::DomainExceeded, "component nonlinearity is not defined up to " + std::to_string(b));
  }
  for (const auto& p : spec.pieces()) {
    const double lo = std::max(a, p.lo);
    const double hi = std::min(b, p.hi);
    if (!(hi > lo)) continue;
    FormPtr form = clip_form(p.form, p.lo, p.hi, lo, hi);
    if (c2 != 1.0) form = make_form(Scaled{c2, form});
    out.push_back(Piece{lo, hi, form});
  }
}

}  // namespace detail

/// Glues f_1, A_2^2 f_2, ..., A_K^2 f_K with linear bridges.
///
/// `bridge_starts` holds a_1..a_{K-1}, `widths` e_1..e_{K-1} and
/// `amp_squares` the factors A_2^2..A_K^2. Requires a_{i-1} + e_{i-1} < a_i
/// and each f_{i+1} positive on the range it is used on.
inline NonlinearitySpec build_jump_family(const std::vector<NonlinearitySpec>& f_list,
                                          const std::vector<double>& bridge_starts,
                                          const std::vector<double>& widths,
                                          const std::vector<double>& amp_squares) {
  const std::size_t K = f_list.size();
  if (K == 0) throw Error(ErrorCode::PreconditionFailed, "need at least one nonlinearity");
  if (bridge_starts.size() != K - 1 || widths.size() != K - 1 || amp_squares.size() != K - 1) {
    throw Error(ErrorCode::PreconditionFailed, "need K-1 bridge starts, widths and amplitudes for K nonlinearities");
  }
  for (std::size_t i = 0; i + 1 < K; ++i) {
    if (!(widths[i] > 0.0)) throw Error(ErrorCode::PreconditionFailed, "bridge widths must be positive");
    if (!(amp_squares[i] > 0.0)) throw Error(ErrorCode::PreconditionFailed, "amplitudes must be positive");
    if (!(bridge_starts[i] > 0.0)) throw Error(ErrorCode::OrderingViolated, "bridge starts must be positive");
    if (i > 0 && !(bridge_starts[i - 1] + widths[i - 1] < bridge_starts[i])) {
      throw Error(ErrorCode::OrderingViolated, "bridge " + std::to_string(i + 1) + " starts at " +
                                                   std::to_string(bridge_starts[i]) + " inside the previous bridge");
    }
  }

  const double top = f_list.back().domain_top();
  if (K > 1 && !(bridge_starts.back() + widths.back() < top)) {
    throw Error(ErrorCode::OrderingViolated, "last bridge reaches the domain top");
  }

  std::vector<Piece> pieces;
  const double first_end = K > 1 ? bridge_starts[0] : top;
  detail::append_restricted(pieces, f_list[0], 0.0, first_end, 1.0);

  for (std::size_t i = 1; i < K; ++i) {
    const double a = bridge_starts[i - 1];
    const double e = widths[i - 1];
    const double c2 = amp_squares[i - 1];
    const double seg_end = (i + 1 < K) ? bridge_starts[i] : top;

    // (H_5): the amplified piece must be positive on its range.
    const auto& fi = f_list[i];
    const int M = 200;
    for (int j = 0; j <= M; ++j) {
      const double s = (a + e) + (std::isfinite(seg_end) ? (seg_end - a - e) : 10.0 * (a + e)) * j / M;
      if (!(fi.f(std::min(s, fi.domain_top())) > 0.0)) {
        throw Error(ErrorCode::PreconditionFailed,
                    "nonlinearity " + std::to_string(i + 1) + " is not positive at s = " + std::to_string(s));
      }
    }

    const double f_left = pieces.back().form ? detail::form_derivative(*pieces.back().form, a, pieces.back().lo,
                                                                       pieces.back().hi, 0)
                                             : 0.0;
    const double f_right = c2 * fi.f(a + e);
    pieces.push_back(Piece{a, a + e, make_form(LinearBridge{f_left, f_right})});
    detail::append_restricted(pieces, fi, a + e, seg_end, c2);
  }

  return NonlinearitySpec(std::move(pieces), top);
}

}  // namespace radshoot
