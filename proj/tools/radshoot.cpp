#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "radshoot/config.hpp"
#include "radshoot/radshoot.hpp"

namespace fs = std::filesystem;
using namespace radshoot;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kConfig = 1, kInconclusive = 2, kNothing = 3, kReproduction = 4 };

struct Flags {
  std::string config;
  std::optional<double> alpha;
  std::string range;
  std::optional<int> grid;
  std::optional<int> k;
  std::string out;
  std::optional<unsigned> workers;
  std::optional<double> rel_tol;
  std::optional<double> abs_tol;
  std::optional<double> r_max;
};

RunConfig load(const Flags& fl) {
  RunConfig c;
  if (!fl.config.empty()) {
    const fs::path p = fl.config;
    c = parse_config(read_file(p.string()), p.parent_path().empty() ? fs::path(".") : p.parent_path());
  }
  if (fl.alpha) c.alpha = *fl.alpha;
  if (!fl.range.empty()) {
    const auto colon = fl.range.find(':');
    try {
      if (colon == std::string::npos) throw std::invalid_argument("missing ':'");
      c.lo = std::stod(fl.range.substr(0, colon));
      c.hi = std::stod(fl.range.substr(colon + 1));
    } catch (const std::exception&) {
      throw Error(ErrorCode::Config, "--range expects lo:hi, got '" + fl.range + "'");
    }
    if (!(*c.hi > *c.lo)) throw Error(ErrorCode::Config, "--range needs lo < hi");
  }
  if (fl.grid) {
    if (*fl.grid < 2) throw Error(ErrorCode::Config, "--grid must be at least 2");
    c.grid = static_cast<std::size_t>(*fl.grid);
  }
  if (fl.k) c.k = *fl.k;
  if (!fl.out.empty()) c.output_dir = fl.out;
  if (fl.workers) c.workers = *fl.workers;
  if (fl.rel_tol) c.solver.rel_tol = *fl.rel_tol;
  if (fl.abs_tol) c.solver.abs_tol = *fl.abs_tol;
  if (fl.r_max) c.solver.r_max = *fl.r_max;
  if (!(c.solver.rel_tol > 0.0 && c.solver.abs_tol > 0.0 && c.solver.r_max > 0.0)) {
    throw Error(ErrorCode::Config, "tolerances and r_max must be positive");
  }
  if (c.workers == 0) c.workers = std::max(1u, std::thread::hardware_concurrency());
  c.example.finder = c.finder();
  return c;
}

const NonlinearitySpec& need_spec(const RunConfig& c) {
  if (!c.nonlinearity) throw Error(ErrorCode::Config, "no nonlinearity in the configuration");
  return *c.nonlinearity;
}

void need_range(const RunConfig& c) {
  if (!c.lo || !c.hi) throw Error(ErrorCode::Config, "this command needs a range (--range lo:hi or \"range\")");
}

std::optional<Landscape> try_landscape(const NonlinearitySpec& spec) {
  try {
    return analyze_landscape(spec);
  } catch (const Error&) {
    return std::nullopt;
  }
}

fs::path out_dir(const RunConfig& c) {
  fs::path d = c.output_dir;
  fs::create_directories(d);
  return d;
}

void emit(const RunConfig& c, const std::string& name, const json& j) {
  write_file((out_dir(c) / name).string(), j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
}

std::string witness_csv(const RunConfig& c, const BoundState& b, const std::string& stem) {
  const auto path = out_dir(c) / (stem + ".csv");
  std::ostringstream os;
  write_trajectory_csv(os, b.witness);
  write_file(path.string(), os.str());
  return path.string();
}

int cmd_shoot(const RunConfig& c) {
  const auto& spec = need_spec(c);
  if (!c.alpha) throw Error(ErrorCode::Config, "shoot needs alpha");
  IVProblem pb{c.N, *c.alpha, spec, c.solver};
  const auto tr = integrate(pb);
  const auto L = try_landscape(spec);
  const auto dir = out_dir(c);

  std::ostringstream csv;
  write_trajectory_csv(csv, tr);
  write_file((dir / "trajectory.csv").string(), csv.str());
  write_file((dir / "events.json").string(), events_json(tr).dump(2) + "\n");

  const auto rep = diagnose(tr, spec, L ? &*L : nullptr);
  std::ostringstream ecsv;
  write_energy_csv(ecsv, rep.energy_series);
  write_file((dir / "energy.csv").string(), ecsv.str());
  write_file((dir / "diagnostics.json").string(), to_json(rep).dump(2) + "\n");

  ShotClass cls;
  try {
    cls = L ? classify(tr, *L) : classify(tr);
  } catch (const Error& e) {
    std::printf("alpha %.17g  inconclusive: %s\n", *c.alpha, e.what());
    write_file((dir / "class.json").string(), json{{"inconclusive", e.what()}}.dump(2) + "\n");
    return kInconclusive;
  }
  write_file((dir / "class.json").string(), to_json(cls).dump(2) + "\n");
  std::printf("alpha      %.17g\nclass      %s\nnodes      %d\nr_end      %.6g (%s)\npohozaev   %.3e\n", *c.alpha,
              cls.label().c_str(), cls.k, tr.r_end, std::string(to_string(tr.reason)).c_str(), rep.pohozaev_residual);
  return kOk;
}

int cmd_sweep(const RunConfig& c) {
  const auto& spec = need_spec(c);
  need_range(c);
  const auto L = try_landscape(spec);
  const int k = c.k.value_or(0);
  const auto map = sweep(spec, c.N, *c.lo, *c.hi, c.grid, c.finder(), k, L ? &*L : nullptr);
  json grid = json::array();
  for (const auto& s : map.grid) {
    grid.push_back({{"alpha", s.alpha}, {"class", s.cls ? to_json(*s.cls) : json(nullptr)}, {"error", s.error}});
  }
  json tr = json::array();
  for (const auto& t : map.transitions) {
    tr.push_back({{"lo", t.lo}, {"hi", t.hi}, {"class_lo", t.c_lo.label()}, {"class_hi", t.c_hi.label()}});
  }
  write_file((out_dir(c) / "sweep.json").string(), json{{"level", k}, {"grid", grid}, {"transitions", tr}}.dump(2));
  std::printf("%-24s %s\n", "alpha", "class");
  for (const auto& s : map.grid) std::printf("%-24.17g %s\n", s.alpha, s.cls ? s.cls->label().c_str() : "inconclusive");
  std::printf("%zu transitions at level %d\n", map.transitions.size(), k);
  return kOk;
}

int report_bound(const RunConfig& c, const BoundState& b, const std::string& name) {
  const auto csv = witness_csv(c, b, name + "_witness");
  const auto rep = diagnose(b.witness, need_spec(c));
  json j = to_json(b, csv);
  j["diagnostics"] = to_json(rep);
  write_file((out_dir(c) / (name + ".json")).string(), j.dump(2) + "\n");
  std::printf("k          %d\nalpha      %.17g\nbracket    [%.17g, %.17g]\nwidth      %.3e\nclasses    %s | %s\n", b.k,
              b.alpha(), b.lo, b.hi, b.width(), b.c_lo.label().c_str(), b.c_hi.label().c_str());
  return kOk;
}

int cmd_ground(const RunConfig& c) {
  need_range(c);
  const auto b = find_kth_bound_state(need_spec(c), c.N, 0, *c.lo, *c.hi, c.grid, c.finder());
  return report_bound(c, b, "ground");
}

int cmd_bound(const RunConfig& c) {
  need_range(c);
  if (!c.k) throw Error(ErrorCode::Config, "bound needs k");
  const auto b = find_kth_bound_state(need_spec(c), c.N, *c.k, *c.lo, *c.hi, c.grid, c.finder());
  return report_bound(c, b, "bound_k" + std::to_string(*c.k));
}

int cmd_scan(const RunConfig& c) {
  const auto& spec = need_spec(c);
  const auto L = analyze_landscape(spec);
  std::vector<MultiplicityResult> scans;
  int k0 = -1;
  if (c.k) {
    scans.push_back(multiplicity_scan(spec, L, c.N, *c.k, c.grid, c.finder()));
  } else {
    auto d = discover_k0(spec, L, c.N, c.k_max, c.grid, c.finder());
    k0 = d.k0;
    scans = std::move(d.scans);
  }
  json out = json::array();
  std::size_t total = 0;
  std::printf("%-4s %-9s %s\n", "k", "bound", "initial values");
  for (const auto& s : scans) {
    json states = json::array();
    for (const auto& b : s.states) states.push_back(to_json(b));
    const bool nb = nonexistence_bound(spec, L, c.N, s.k, spec.F(L.gamma_star));
    out.push_back({{"k", s.k}, {"lo", s.lo}, {"hi", s.hi}, {"nonexistence_bound", nb}, {"states", states},
                   {"discarded", s.discarded}});
    std::printf("%-4d %-9s", s.k, nb ? "true" : "false");
    for (const auto& b : s.states) std::printf(" %.12f", b.alpha());
    std::printf("\n");
    total += s.states.size();
  }
  json j{{"landscape", to_json(L)}, {"scans", out}};
  if (!c.k) j["k0"] = k0 >= 0 ? json(k0) : json(nullptr);
  write_file((out_dir(c) / "scan.json").string(), j.dump(2) + "\n");
  if (!c.k) return k0 >= 0 ? kOk : kNothing;
  return total > 0 ? kOk : kNothing;
}

int cmd_buildf(const RunConfig& c) {
  if (!c.jump) throw Error(ErrorCode::Config, "buildf needs a \"jump\" block");
  const auto& jc = *c.jump;
  const auto spec = build_jump_family(jc.f_list, jc.bridge_starts, jc.widths, jc.amp_squares);
  ConditionOptions co;
  co.seed = c.seed;
  const auto rep = check_shape_conditions(spec, c.N, co);
  write_file((out_dir(c) / "nonlinearity.json").string(), to_json(spec).dump(2) + "\n");
  write_file((out_dir(c) / "conditions.json").string(), to_json(rep).dump(2) + "\n");
  std::printf("%zu pieces\n", spec.pieces().size());
  for (const auto& p : spec.pieces()) {
    std::printf("  [%.10g, %.10g]  f: %.10g -> %.10g\n", p.lo, p.hi, spec.f(p.lo), spec.f(std::min(p.hi, 1e300)));
  }
  return kOk;
}

int cmd_example(const RunConfig& c) {
  const auto rep = run_example(c.example);
  write_file((out_dir(c) / "example.json").string(), to_json(rep).dump(2) + "\n");
  std::printf("alpha*     %.12f\n", rep.alpha_star);
  for (std::size_t i = 0; i < rep.alphas.size(); ++i) {
    std::printf("alpha_%zu    %.12f  %s\n", i, rep.alphas[i], i < rep.classes.size() ? rep.classes[i].label().c_str() : "-");
  }
  for (std::size_t i = 0; i < rep.brackets.size(); ++i) {
    std::printf("ground %zu   %.12f  width %.2e\n", i + 1, rep.brackets[i].alpha(), rep.brackets[i].width());
  }
  if (!rep.ok) {
    std::fprintf(stderr, "reproduction failed: %s\n", rep.failure.c_str());
    return kReproduction;
  }
  return kOk;
}

int exit_code(const Error& e) {
  switch (e.code()) {
    case ErrorCode::Config:
    case ErrorCode::InvalidSpec:
    case ErrorCode::ContinuityGap:
    case ErrorCode::OrderingViolated:
    case ErrorCode::PreconditionFailed:
    case ErrorCode::DomainExceeded: return kConfig;
    case ErrorCode::Inconclusive:
    case ErrorCode::StepSizeUnderflow:
    case ErrorCode::BracketBroken: return kInconclusive;
    case ErrorCode::NotFound:
    case ErrorCode::SearchExhausted: return kNothing;
    case ErrorCode::ReproductionFailed: return kReproduction;
    default: return kConfig;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radial shooting for bound states of  u'' + (N-1)/r u' + f(u) = 0"};
  app.require_subcommand(1);
  Flags fl;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", fl.config, "configuration JSON")->check(CLI::ExistingFile);
    sub->add_option("--alpha", fl.alpha, "initial value u(0)");
    sub->add_option("--range", fl.range, "search range lo:hi");
    sub->add_option("--grid", fl.grid, "sweep grid size");
    sub->add_option("--k", fl.k, "node count");
    sub->add_option("--out", fl.out, "output directory");
    sub->add_option("--workers", fl.workers, "worker threads");
    sub->add_option("--rel-tol", fl.rel_tol, "relative tolerance");
    sub->add_option("--abs-tol", fl.abs_tol, "absolute tolerance");
    sub->add_option("--r-max", fl.r_max, "integration horizon");
  };

  struct Cmd {
    const char* name;
    const char* help;
    int (*run)(const RunConfig&);
  };
  const Cmd cmds[] = {
      {"shoot", "integrate and classify one shot", cmd_shoot},
      {"sweep", "classify a grid of initial values", cmd_sweep},
      {"ground", "bracket a ground state", cmd_ground},
      {"bound", "bracket a k-node bound state", cmd_bound},
      {"scan", "count k-node bound states above beta*", cmd_scan},
      {"buildf", "assemble a magnitude-jump nonlinearity", cmd_buildf},
      {"example", "rebuild the five-ground-state example", cmd_example},
  };
  int (*chosen)(const RunConfig&) = nullptr;
  for (const auto& cmd : cmds) {
    auto* sub = app.add_subcommand(cmd.name, cmd.help);
    common(sub);
    sub->callback([&chosen, run = cmd.run] { chosen = run; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfig;
  }

  try {
    return chosen(load(fl));
  } catch (const Error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return exit_code(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kConfig;
  }
}
