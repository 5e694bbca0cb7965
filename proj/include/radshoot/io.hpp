#pragma once

// CSV and JSON emitters. Every number is written with 17 significant digits so
// a value read back is bit-identical.

#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "radshoot/classifier.hpp"
#include "radshoot/diagnostics.hpp"
#include "radshoot/error.hpp"
#include "radshoot/finder.hpp"
#include "radshoot/integrator.hpp"
#include "radshoot/nonlinearity.hpp"

namespace radshoot {

inline constexpr int kDigits = std::numeric_limits<double>::max_digits10;

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(kDigits) << v;
  return os.str();
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  os << "r,u,du\n";
  for (const auto& s : tr.samples) os << fmt(s.r) << ',' << fmt(s.u) << ',' << fmt(s.du) << '\n';
}

inline void write_energy_csv(std::ostream& os, const std::vector<EnergyPoint>& series) {
  os << "r,I\n";
  for (const auto& p : series) os << fmt(p.r) << ',' << fmt(p.I) << '\n';
}

inline nlohmann::json to_json(const State& s) { return {{"r", s.r}, {"u", s.u}, {"du", s.du}}; }

inline nlohmann::json to_json(const Event& e) {
  nlohmann::json j{{"kind", std::string(to_string(e.kind))}, {"r", e.state.r}, {"u", e.state.u}, {"du", e.state.du}};
  switch (e.kind) {
    case EventKind::ZeroCrossing: j["direction"] = e.direction; break;
    case EventKind::Extremum:
      j["extremum"] = e.extremum == ExtremumKind::Max ? "max" : "min";
      j["height"] = e.height;
      break;
    case EventKind::HeightCrossing:
      j["height"] = e.height;
      j["direction"] = e.direction;
      break;
    case EventKind::Trap:
      j["certificate"] = std::string(to_string(e.certificate));
      j["margin"] = e.margin;
      break;
    case EventKind::NearDoubleZero: break;
  }
  return j;
}

/// Events sidecar for a trajectory CSV.
inline nlohmann::json events_json(const Trajectory& tr) {
  nlohmann::json ev = nlohmann::json::array();
  for (const auto& e : tr.events) ev.push_back(to_json(e));
  return {{"N", tr.N},
          {"alpha", tr.alpha},
          {"h0", tr.h0},
          {"r_end", tr.r_end},
          {"reason", std::string(to_string(tr.reason))},
          {"node_count", node_count(tr)},
          {"events", ev}};
}

inline nlohmann::json to_json(const ShotClass& c) {
  nlohmann::json j{{"kind", std::string(to_string(c.kind))},
                   {"k", c.k},
                   {"refinement", std::string(to_string(c.refinement))},
                   {"evidence", c.evidence},
                   {"label", c.label()}};
  if (c.band > 0) j["band"] = c.band;
  return j;
}

inline nlohmann::json to_json(const BoundState& b, const std::string& witness_csv = {}) {
  nlohmann::json j{{"k", b.k},
                   {"alpha", b.alpha()},
                   {"lo", b.lo},
                   {"hi", b.hi},
                   {"width", b.width()},
                   {"class_lo", to_json(b.c_lo)},
                   {"class_hi", to_json(b.c_hi)},
                   {"bisection_steps", b.bisection_steps}};
  if (!witness_csv.empty()) j["witness"] = witness_csv;
  return j;
}

inline nlohmann::json to_json(const Landscape& L) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  return {{"b", num(L.b)},
          {"beta", num(L.beta)},
          {"delta", num(L.delta)},
          {"zeros_of_f", L.zeros_of_f},
          {"gamma_seq", L.gamma_seq},
          {"beta_star", num(L.beta_star)},
          {"gamma_star", num(L.gamma_star)},
          {"cap_touched", L.cap_touched}};
}

inline nlohmann::json to_json(const GstEntry& e) {
  return {{"s0", e.s0},
          {"r0", e.r0},
          {"C", std::isfinite(e.C) ? nlohmann::json(e.C) : nlohmann::json(nullptr)},
          {"verdict", std::string(to_string(e.verdict))}};
}

inline nlohmann::json to_json(const ExampleReport& rep) {
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& c : rep.classes) classes.push_back(to_json(c));
  nlohmann::json brackets = nlohmann::json::array();
  for (const auto& b : rep.brackets) brackets.push_back(to_json(b));
  nlohmann::json gst = nlohmann::json::array();
  for (const auto& g : rep.gst) gst.push_back(to_json(g));
  return {{"alpha_star", rep.alpha_star}, {"alphas", rep.alphas}, {"classes", classes}, {"brackets", brackets},
          {"gst", gst},  {"nonlinearity", to_json(rep.spec)}, {"ok", rep.ok}, {"failure", rep.failure}};
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Config, "cannot write " + path);
  out << text;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace radshoot
