#include "unravel/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "output.hpp"
#include "unravel/adaptive_mru.hpp"
#include "unravel/cmu_sse.hpp"
#include "unravel/direct_detection.hpp"
#include "unravel/ensemble_metrics.hpp"
#include "unravel/errors.hpp"
#include "unravel/parallel.hpp"
#include "unravel/survival.hpp"

namespace unravel {

namespace {

using cli::Cell;
using cli::Row;
using cli::Table;
using Json = nlohmann::ordered_json;

struct Scheme {
  enum class Kind { direct, mru, cmu } kind = Kind::direct;
  Complex upsilon{0.0};
  std::string label;
};

Scheme parse_scheme(const std::string& text) {
  if (text == "direct") return {Scheme::Kind::direct, {}, text};
  if (text == "mru") return {Scheme::Kind::mru, {}, text};
  if (text.rfind("cmu:", 0) == 0) {
    std::istringstream is(text.substr(4));
    double re = 0.0;
    double im = 0.0;
    if (!(is >> re)) throw std::invalid_argument("bad scheme '" + text + "'");
    if (is.peek() == ',') {
      is.get();
      if (!(is >> im)) throw std::invalid_argument("bad scheme '" + text + "'");
    }
    if (!is.eof() && is.peek() != std::char_traits<char>::eof()) {
      throw std::invalid_argument("bad scheme '" + text + "'");
    }
    const Upsilon checked{Complex{re, im}};  // rejects |v| > 1
    return {Scheme::Kind::cmu, checked.value(), text};
  }
  throw std::invalid_argument("unknown scheme '" + text + "' (direct, mru, cmu:RE[,IM])");
}

/// Options shared by every command. Dimensional inputs are in units of
/// gamma (rates) or 1/gamma (times).
struct Common {
  double gamma = 1.0;
  std::string format = "csv";
  std::string output;
  std::uint64_t seed = 1;
};

/// CMU integration settings in units of 1/gamma; dt = 0 selects the default.
struct CmuOptions {
  double dt = 0.0;
  double burn_in = 20.0;
  double duration = 2000.0;

  SseConfig config(const AtomParams& p, std::uint64_t seed) const {
    SseConfig c = SseConfig::defaults(p, seed);
    if (dt > 0.0) c.dt = dt / p.gamma();
    c.burn_in = burn_in / p.gamma();
    c.duration = duration / p.gamma();
    return c;
  }

  Json json() const {
    Json j;
    j["dt"] = dt > 0.0 ? Json(dt) : Json("auto");
    j["burn_in"] = burn_in;
    j["duration"] = duration;
    return j;
  }

  void add_to(CLI::App* app) {
    app->add_option("--dt", dt, "CMU step in 1/gamma (default 0.01 min(1, gamma/omega))");
    app->add_option("--burn-in", burn_in, "CMU burn-in in 1/gamma")->capture_default_str();
    app->add_option("--duration", duration, "CMU averaging time in 1/gamma")
        ->capture_default_str();
  }
};

Json base_config(const Common& c) {
  Json j;
  j["gamma"] = c.gamma;
  j["format"] = c.format;
  j["output"] = c.output.empty() ? Json("-") : Json(c.output);
  j["seed"] = c.seed;
  j["threads"] = worker_count();
  return j;
}

Json standard_units() {
  Json u;
  u["omega_over_gamma"] = "dimensionless (Omega / gamma)";
  u["time"] = "1/gamma";
  return u;
}

EnsembleMoments mru_moments(const AtomParams& p) {
  const BlochVector ss = steady_state(p);
  return {0.0, 0.0, ss.y, ss.z};
}

/// Moments of the scheme's stationary ensemble; CMU moments are seeded estimates.
EnsembleMoments scheme_moments(const AtomParams& p, const Scheme& s, const CmuOptions& cmu,
                               std::uint64_t seed) {
  switch (s.kind) {
    case Scheme::Kind::direct: {
      const DirectEnsembleGrid grid(p);
      return direct_moments(p, grid).moments;
    }
    case Scheme::Kind::mru:
      if (!(p.omega() > 0.0)) throw DegenerateError("degenerate: omega = 0");
      return mru_moments(p);
    case Scheme::Kind::cmu:
      return simulate_cmu(p, Upsilon(s.upsilon), cmu.config(p, seed)).moments;
  }
  throw std::logic_error("unreachable");
}

void emit(const Common& c, const Table& t, std::ostream& out) {
  std::ofstream file;
  std::ostream* os = &out;
  if (!c.output.empty()) {
    file.open(c.output);
    if (!file) throw std::invalid_argument("cannot open output file '" + c.output + "'");
    os = &file;
  }
  if (c.format == "json") {
    cli::write_json(*os, t);
  } else {
    cli::write_csv(*os, t);
    if (!c.output.empty()) {
      std::ofstream meta(c.output + ".meta.json");
      meta << cli::metadata(t).dump(2) << '\n';
    }
  }
}

// ---- survival ----

struct SurvivalArgs {
  double omega = 10.0;
  std::string scheme = "mru";
  double t_max = 5.0;
  std::size_t n_points = 201;
  CmuOptions cmu;
};

Table cmd_survival(const Common& c, const SurvivalArgs& a) {
  if (a.n_points < 1) throw std::invalid_argument("--n-points must be >= 1");
  if (!(a.t_max >= 0.0)) throw std::invalid_argument("--t-max must be >= 0");
  const Scheme s = parse_scheme(a.scheme);
  const AtomParams p(c.gamma, a.omega * c.gamma);
  Table t;
  t.command = "survival";
  t.config = base_config(c);
  t.config["omega"] = a.omega;
  t.config["scheme"] = a.scheme;
  t.config["t_max"] = a.t_max;
  t.config["n_points"] = a.n_points;
  if (s.kind == Scheme::Kind::cmu) t.config["cmu"] = a.cmu.json();
  t.units = standard_units();
  t.units["S"] = "probability";
  t.columns = {"t", "S"};

  const EnsembleMoments m = scheme_moments(p, s, a.cmu, c.seed);
  if (auto w = moments_warning(p, m)) t.warnings.push_back(*w);
  const std::size_t n = a.t_max == 0.0 ? 1 : a.n_points;
  const SurvivalCurve curve = survival_curve(p, m, a.t_max / c.gamma, n);
  for (std::size_t i = 0; i < curve.times.size(); ++i) {
    t.rows.push_back({curve.times[i] * c.gamma, curve.values[i]});
  }
  t.report["equilibrium"] = curve.equilibrium;
  t.report["moments"] = {{"v_var", m.v_var}, {"w_var", m.w_var}, {"mean_v", m.mean_v},
                         {"mean_w", m.mean_w}};
  if (p.omega() > 0.0) t.report["tau"] = survival_time(p, m).tau * c.gamma;
  return t;
}

// ---- sweep ----

struct SweepArgs {
  std::vector<double> omegas{0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0};
  std::vector<std::string> schemes{"direct", "mru"};
  CmuOptions cmu;
};

Table cmd_sweep(const Common& c, const SweepArgs& a) {
  std::vector<Scheme> schemes;
  for (const auto& s : a.schemes) schemes.push_back(parse_scheme(s));
  Table t;
  t.command = "sweep";
  t.config = base_config(c);
  t.config["omegas"] = a.omegas;
  t.config["schemes"] = a.schemes;
  t.config["cmu"] = a.cmu.json();
  t.units = standard_units();
  t.columns = {"omega_over_gamma", "status", "tau_analytic"};
  for (const auto& s : schemes) t.columns.push_back("tau_" + s.label);
  for (const auto& s : schemes) t.columns.push_back("near_tangent_" + s.label);

  for (double o : a.omegas) {
    if (!(o >= 0.0)) throw std::invalid_argument("--omegas entries must be >= 0");
  }
  t.rows = parallel_map<Row>(a.omegas.size(), [&](std::size_t i) {
    const double o = a.omegas[i];
    Row row{o};
    if (o == 0.0) {
      row.push_back(std::string("degenerate"));
      row.resize(t.columns.size());
      return row;
    }
    const AtomParams p(c.gamma, o * c.gamma);
    row.push_back(std::string("ok"));
    row.push_back(std::numbers::pi / (3.0 * o));
    Row flags;
    for (std::size_t k = 0; k < schemes.size(); ++k) {
      const EnsembleMoments m = scheme_moments(p, schemes[k], a.cmu, mix_seed(c.seed, i));
      const SurvivalTime st = survival_time(p, m);
      row.push_back(st.tau * c.gamma);
      flags.push_back(static_cast<std::int64_t>(st.near_tangent));
    }
    row.insert(row.end(), flags.begin(), flags.end());
    return row;
  });
  return t;
}

// ---- cloud ----

struct CloudArgs {
  double omega = 10.0;
  std::string scheme = "direct";
  std::size_t n = 1000;
  CmuOptions cmu;
};

Table cmd_cloud(const Common& c, const CloudArgs& a) {
  if (a.n < 1) throw std::invalid_argument("--n must be >= 1");
  const Scheme s = parse_scheme(a.scheme);
  const AtomParams p(c.gamma, a.omega * c.gamma);
  Table t;
  t.command = "cloud";
  t.config = base_config(c);
  t.config["omega"] = a.omega;
  t.config["scheme"] = a.scheme;
  t.config["n"] = a.n;
  if (s.kind == Scheme::Kind::cmu) t.config["cmu"] = a.cmu.json();
  t.units = standard_units();
  t.units["u,v,w"] = "Bloch components";
  t.columns = {"u", "v", "w", "weight"};

  auto add = [&](const BlochVector& b, double weight) { t.rows.push_back({b.x, b.y, b.z, weight}); };
  switch (s.kind) {
    case Scheme::Kind::direct: {
      const Ensemble e = sample_direct_ensemble(p, a.n, c.seed);
      for (const auto& m : e.members()) add(m.state.bloch(), m.weight);
      break;
    }
    case Scheme::Kind::mru: {
      const MruEnsemble pair = mru_pair(p);
      add(pair.b_plus, 0.5);
      add(pair.b_minus, 0.5);
      break;
    }
    case Scheme::Kind::cmu: {
      SseConfig cfg = a.cmu.config(p, c.seed);
      cfg.duration = std::max(cfg.duration,
                              static_cast<double>(a.n) * cfg.snapshot_interval * (1.0 + 1e-9));
      const CmuStats st = simulate_cmu(p, Upsilon(s.upsilon), cfg);
      const std::size_t n = std::min(a.n, st.snapshots.size());
      for (std::size_t i = 0; i < n; ++i) add(st.snapshots[i], 1.0 / static_cast<double>(n));
      break;
    }
  }
  return t;
}

// ---- distance ----

struct DistanceArgs {
  std::vector<double> omegas{1.0, 2.0, 5.0, 10.0, 20.0};
  std::vector<std::string> upsilons{"1", "0", "-1"};
  bool include_direct = true;
  CmuOptions cmu;
};

Table cmd_distance(const Common& c, const DistanceArgs& a) {
  std::vector<Scheme> schemes;
  if (a.include_direct) schemes.push_back(parse_scheme("direct"));
  for (const auto& u : a.upsilons) schemes.push_back(parse_scheme("cmu:" + u));
  for (double o : a.omegas) {
    if (!(o > 0.0)) throw std::invalid_argument("--omegas entries must be > 0");
  }
  Table t;
  t.command = "distance";
  t.config = base_config(c);
  t.config["omegas"] = a.omegas;
  t.config["upsilons"] = a.upsilons;
  t.config["include_direct"] = a.include_direct;
  t.config["cmu"] = a.cmu.json();
  t.units = standard_units();
  t.units["distance"] = "dimensionless, 0 = MRU ensemble";
  t.columns = {"omega_over_gamma", "scheme", "upsilon_re", "upsilon_im", "distance",
               "stat_error"};

  const std::size_t ns = schemes.size();
  std::vector<std::string> warnings(a.omegas.size() * ns);
  t.rows = parallel_map<Row>(a.omegas.size() * ns, [&](std::size_t idx) {
    const double o = a.omegas[idx / ns];
    const Scheme& s = schemes[idx % ns];
    const AtomParams p(c.gamma, o * c.gamma);
    if (s.kind == Scheme::Kind::direct) {
      // every member has u = 0
      return Row{o, s.label, Cell{}, Cell{}, distance_to_mru(p, 0.0), 0.0};
    }
    const CmuStats st = simulate_cmu(p, Upsilon(s.upsilon), a.cmu.config(p, mix_seed(c.seed, idx)));
    const BlochVector ss = steady_state(p);
    const double u0 = std::sqrt(1.0 - ss.y * ss.y - ss.z * ss.z);
    const double mean_abs_u = std::min(st.mean_abs_u, u0);
    const double d = distance_to_mru(p, mean_abs_u, &warnings[idx]);
    return Row{o, s.label, s.upsilon.real(), s.upsilon.imag(), d, st.mean_abs_u_error / u0};
  });
  for (const auto& w : warnings) {
    if (!w.empty()) t.warnings.push_back(w);
  }
  return t;
}

// ---- search ----

struct SearchArgs {
  double omega = 10.0;
  std::size_t n_radii = 9;
  std::size_t n_phases = 16;
  bool no_refine = false;
  CmuOptions cmu;
};

Json cell_json(const SearchCell& s, double gamma) {
  return {{"upsilon_re", s.upsilon.real()}, {"upsilon_im", s.upsilon.imag()},
          {"tau", s.tau * gamma},           {"tau_error", s.tau_error * gamma},
          {"refined", s.refined}};
}

Table cmd_search(const Common& c, const SearchArgs& a) {
  const AtomParams p(c.gamma, a.omega * c.gamma);
  Table t;
  t.command = "search";
  t.config = base_config(c);
  t.config["omega"] = a.omega;
  t.config["n_radii"] = a.n_radii;
  t.config["n_phases"] = a.n_phases;
  t.config["refine"] = !a.no_refine;
  t.config["cmu"] = a.cmu.json();
  t.units = standard_units();
  t.columns = {"upsilon_re", "upsilon_im", "radius", "phase", "tau", "tau_error",
               "v_var", "w_var", "refined"};

  const MrcmuResult r = mrcmu_search(p, a.cmu.config(p, c.seed),
                                     SearchGrid{a.n_radii, a.n_phases, !a.no_refine});
  for (const auto& s : r.cells) {
    t.rows.push_back({s.upsilon.real(), s.upsilon.imag(), std::abs(s.upsilon),
                      std::arg(s.upsilon), s.tau * c.gamma, s.tau_error * c.gamma,
                      s.moments.v_var, s.moments.w_var, static_cast<std::int64_t>(s.refined)});
  }
  t.report["best"] = cell_json(r.cells[r.best], c.gamma);
  t.report["runner_up"] = cell_json(r.cells[r.runner_up], c.gamma);
  t.report["separated"] = r.separated;
  t.report["real_axis_min"] = cell_json(r.cells[r.real_axis_min], c.gamma);
  t.report["radial_step"] = r.radial_step;
  t.report["phase_step"] = r.phase_step;
  if (!r.separated) {
    t.warnings.push_back("best and runner-up cells are not separated by 2 combined errors");
  }
  return t;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stationary ensembles of unravelings of a driven, damped two-level atom"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--gamma", common.gamma, "decay rate; all other inputs are in its units")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app.add_option("--format", common.format, "output format")
      ->capture_default_str()
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--output,-o", common.output, "output file (default stdout)");
  app.add_option("--seed", common.seed, "random seed")->capture_default_str();

  SurvivalArgs survival;
  auto* sub_survival = app.add_subcommand("survival", "ensemble-average survival curve S(t)");
  sub_survival->add_option("--omega", survival.omega, "Omega / gamma")->capture_default_str();
  sub_survival->add_option("--scheme", survival.scheme, "direct | mru | cmu:RE[,IM]")
      ->capture_default_str();
  sub_survival->add_option("--t-max", survival.t_max, "last time in 1/gamma")
      ->capture_default_str();
  sub_survival->add_option("--n-points", survival.n_points, "number of rows")
      ->capture_default_str();
  survival.cmu.add_to(sub_survival);

  SweepArgs sweep;
  auto* sub_sweep = app.add_subcommand("sweep", "survival time versus Omega");
  sub_sweep->add_option("--omegas", sweep.omegas, "Omega / gamma list")->delimiter(',');
  sub_sweep->add_option("--schemes", sweep.schemes, "schemes (space separated)");
  sweep.cmu.add_to(sub_sweep);

  CloudArgs cloud;
  auto* sub_cloud = app.add_subcommand("cloud", "sampled stationary ensemble members");
  sub_cloud->add_option("--omega", cloud.omega, "Omega / gamma")->capture_default_str();
  sub_cloud->add_option("--scheme", cloud.scheme, "direct | mru | cmu:RE[,IM]")
      ->capture_default_str();
  sub_cloud->add_option("--n", cloud.n, "number of members")->capture_default_str();
  cloud.cmu.add_to(sub_cloud);

  DistanceArgs distance;
  auto* sub_distance = app.add_subcommand("distance", "distance of ensembles from the MRU");
  sub_distance->add_option("--omegas", distance.omegas, "Omega / gamma list")->delimiter(',');
  sub_distance->add_option("--upsilons", distance.upsilons, "CMU parameters RE[,IM] (space separated)");
  sub_distance->add_flag("!--no-direct", distance.include_direct, "omit the direct-detection row");
  distance.cmu.add_to(sub_distance);

  SearchArgs search;
  auto* sub_search = app.add_subcommand("search", "most robust CMU over the unit disc");
  sub_search->add_option("--omega", search.omega, "Omega / gamma")->capture_default_str();
  sub_search->add_option("--n-radii", search.n_radii, "radii i/(n-1)")
      ->capture_default_str()
      ->check(CLI::Range(2, 1000));
  sub_search->add_option("--n-phases", search.n_phases, "phases")
      ->capture_default_str()
      ->check(CLI::Range(1, 1000));
  sub_search->add_flag("--no-refine", search.no_refine, "skip the half-step refinement");
  search.cmu.add_to(sub_search);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    Table t;
    if (*sub_survival) {
      t = cmd_survival(common, survival);
    } else if (*sub_sweep) {
      t = cmd_sweep(common, sweep);
    } else if (*sub_cloud) {
      t = cmd_cloud(common, cloud);
    } else if (*sub_distance) {
      t = cmd_distance(common, distance);
    } else {
      t = cmd_search(common, search);
    }
    for (const auto& w : t.warnings) err << "warning: " << w << '\n';
    emit(common, t, out);
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace unravel
