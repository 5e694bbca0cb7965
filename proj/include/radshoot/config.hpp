#pragma once

// Run configuration for the command-line tool. The schema lives in
// schema/config.schema.json.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "radshoot/error.hpp"
#include "radshoot/finder.hpp"
#include "radshoot/io.hpp"
#include "radshoot/nonlinearity.hpp"

namespace radshoot {

struct JumpConfig {
  std::vector<NonlinearitySpec> f_list;
  std::vector<double> bridge_starts;
  std::vector<double> widths;
  std::vector<double> amp_squares;
};

struct RunConfig {
  std::optional<NonlinearitySpec> nonlinearity;
  int N = 4;
  SolverOptions solver;
  std::optional<double> alpha;
  std::optional<double> lo;
  std::optional<double> hi;
  std::size_t grid = 100;
  std::optional<int> k;
  int k_max = 60;
  double alpha_tol = 1e-10;
  std::optional<JumpConfig> jump;
  ExampleConfig example;
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  unsigned workers = 0;  ///< 0: hardware concurrency

  FinderOptions finder() const {
    FinderOptions o;
    o.solver = solver;
    o.alpha_tol = alpha_tol;
    o.workers = workers;
    return o;
  }
};

namespace detail {

inline int line_of(const std::string& text, std::size_t byte) {
  int line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

// Finds the line of the first occurrence of "key" in the text, for messages.
inline int line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  return pos == std::string::npos ? 0 : line_of(text, pos);
}

inline NonlinearitySpec spec_from_value(const nlohmann::json& v, const std::filesystem::path& base) {
  if (v.is_string()) {
    std::filesystem::path p = v.get<std::string>();
    if (p.is_relative()) p = base / p;
    const auto text = read_file(p.string());
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::Config, p.string() + " line " + std::to_string(line_of(text, e.byte)) + ": " + e.what());
    }
    return spec_from_json(j);
  }
  return spec_from_json(v);
}

}  // namespace detail

/// Parses a configuration document. `base` resolves relative nonlinearity paths.
inline RunConfig parse_config(const std::string& text, const std::filesystem::path& base = ".") {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::Config, "line " + std::to_string(detail::line_of(text, e.byte)) + ": " + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::Config, "line 1: configuration must be a JSON object");

  RunConfig c;
  std::string key;
  auto fail = [&](const std::string& msg) -> Error {
    const int line = detail::line_of_key(text, key);
    return Error(ErrorCode::Config, (line > 0 ? "line " + std::to_string(line) + ": " : "") + msg);
  };
  static const std::vector<std::string> known{"nonlinearity", "N",       "solver", "alpha",  "range",      "grid",
                                              "k",            "k_max",   "alpha_tol", "jump", "example",
                                              "output_dir",   "seed",    "workers"};
  try {
    for (const auto& [name, _] : j.items()) {
      key = name;
      if (std::find(known.begin(), known.end(), name) == known.end()) throw fail("unknown key '" + name + "'");
    }
    if (j.contains(key = "nonlinearity")) c.nonlinearity = detail::spec_from_value(j.at(key), base);
    if (j.contains(key = "N")) {
      c.N = j.at(key).get<int>();
      if (c.N < 2) throw fail("N must be at least 2");
    }
    if (j.contains(key = "solver")) {
      const auto& s = j.at(key);
      for (const auto& [name, v] : s.items()) {
        key = name;
        if (name == "rel_tol") c.solver.rel_tol = v.get<double>();
        else if (name == "abs_tol") c.solver.abs_tol = v.get<double>();
        else if (name == "r_max") c.solver.r_max = v.get<double>();
        else if (name == "event_tol") c.solver.event_tol = v.get<double>();
        else if (name == "h0") c.solver.h0 = v.get<double>();
        else throw fail("unknown solver key '" + name + "'");
      }
      if (!(c.solver.rel_tol > 0.0 && c.solver.abs_tol > 0.0 && c.solver.r_max > 0.0 && c.solver.event_tol > 0.0)) {
        key = "solver";
        throw fail("tolerances and r_max must be positive");
      }
    }
    if (j.contains(key = "alpha")) c.alpha = j.at(key).get<double>();
    if (j.contains(key = "range")) {
      const auto r = j.at(key).get<std::vector<double>>();
      if (r.size() != 2 || !(r[1] > r[0])) throw fail("range must be [lo, hi] with lo < hi");
      c.lo = r[0];
      c.hi = r[1];
    }
    if (j.contains(key = "grid")) {
      const int g = j.at(key).get<int>();
      if (g < 2) throw fail("grid must be at least 2");
      c.grid = static_cast<std::size_t>(g);
    }
    if (j.contains(key = "k")) {
      c.k = j.at(key).get<int>();
      if (*c.k < 0) throw fail("k must be non-negative");
    }
    if (j.contains(key = "k_max")) c.k_max = j.at(key).get<int>();
    if (j.contains(key = "alpha_tol")) {
      c.alpha_tol = j.at(key).get<double>();
      if (!(c.alpha_tol > 0.0)) throw fail("alpha_tol must be positive");
    }
    if (j.contains(key = "jump")) {
      const auto& jj = j.at(key);
      JumpConfig jc;
      for (const auto& f : jj.at("f_list")) jc.f_list.push_back(detail::spec_from_value(f, base));
      jc.bridge_starts = jj.at("bridge_starts").get<std::vector<double>>();
      jc.widths = jj.at("widths").get<std::vector<double>>();
      jc.amp_squares = jj.at("amp_squares").get<std::vector<double>>();
      c.jump = std::move(jc);
    }
    if (j.contains(key = "example")) {
      const auto& e = j.at(key);
      c.example.N = e.value("N", c.example.N);
      c.example.eps = e.value("eps", c.example.eps);
      c.example.amp2 = e.value("amp_squares", c.example.amp2);
      c.example.ground_lo = e.value("ground_lo", c.example.ground_lo);
      c.example.ground_hi = e.value("ground_hi", c.example.ground_hi);
      c.example.search_span = e.value("search_span", c.example.search_span);
    }
    if (j.contains(key = "output_dir")) c.output_dir = j.at(key).get<std::string>();
    if (j.contains(key = "seed")) c.seed = j.at(key).get<std::uint64_t>();
    if (j.contains(key = "workers")) c.workers = j.at(key).get<unsigned>();
  } catch (const nlohmann::json::exception& e) {
    throw fail(std::string("'") + key + "': " + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Config) throw;
    throw fail(std::string("'") + key + "': " + e.what());
  }
  return c;
}

}  // namespace radshoot
