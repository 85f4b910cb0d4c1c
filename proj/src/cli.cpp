#include "svilab/cli.hpp"

#include "svilab/io.hpp"
#include "svilab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

namespace svilab {
namespace {

namespace fs = std::filesystem;

// Files of one run, written only after the whole computation succeeded.
struct Artifacts {
  std::map<std::string, std::string> files;
  std::string summary;
};

struct Context {
  const RunConfig& run;
  json config;
  std::string hash;

  json stamp(json j) const {
    j["schema_version"] = kSchemaVersion;
    j["config_hash"] = hash;
    j["seed"] = run.seed;
    return j;
  }
  std::string comment() const {
    return "config_hash=" + hash + " seed=" + std::to_string(run.seed);
  }
  std::string csv_header() const { return "# " + comment() + "\n"; }
  bool want_json() const { return run.format != OutputFormat::csv; }
  bool want_csv() const { return run.format != OutputFormat::json; }
  RunOptions options() const { return {run.seed, run.workers}; }
};

json read_config(const fs::path& path) {
  if (path.empty()) throw InputError("config: no --config file given");
  std::ifstream in(path);
  if (!in) throw InputError("config: cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("config: malformed JSON at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

std::string path_csv(const GridPath& p, const Context& ctx) {
  std::ostringstream out;
  write_csv(out, p, ctx.comment());
  return out.str();
}

double finite_or_nan(double x) { return std::isfinite(x) ? x : std::nan(""); }

json law_json(const OperatorLawReport& r) {
  return {{"cases", r.cases},
          {"nonexpansive_excess", r.nonexpansive_excess},
          {"lipschitz_excess", r.lipschitz_excess},
          {"monotone_deficit", r.monotone_deficit},
          {"moreau_error", r.moreau_error},
          {"norm_decrease", r.norm_decrease},
          {"section_gap", r.section_gap},
          {"pass", r.pass()}};
}

json vec(const Vector& v) { return std::vector<double>(v.begin(), v.end()); }

json validation_json(const ValidationReport& v) {
  return {{"initial", v.initial_ok},
          {"feasibility", v.feasibility_ok},
          {"variation", v.variation_ok},
          {"dynamics", v.dynamics_ok},
          {"flow", v.flow_ok},
          {"interior", v.interior_ok},
          {"all_pass", v.all_pass()},
          {"feasibility_error", v.feasibility_error},
          {"dynamics_residual", v.dynamics_residual},
          {"dynamics_budget", v.dynamics_budget},
          {"flow_slack", finite_or_nan(v.flow_slack)},
          {"interior_slack", finite_or_nan(v.interior_slack)}};
}

bool is_reflected_bm(const SviProblem& p) {
  if (p.dim() != 1 || p.noise_dim() != 1 || !p.drift.is_zero()) return false;
  const auto* box = std::get_if<IndicatorBox>(&p.spec.kind());
  const auto* sigma = std::get_if<ConstantDispersion>(&p.dispersion.kind());
  return box && sigma && box->lower[0] == 0.0 && std::isinf(box->upper[0]) &&
         sigma->value(0, 0) == 1.0;
}

Artifacts prox_check(const Context& ctx) {
  const ProxCheckConfig c = prox_check_config_from_json(ctx.config);
  Artifacts a;
  json points = json::array();
  std::ostringstream csv;
  csv << ctx.csv_header() << "point,lambda,value,resolvent,yosida,minimal_section\n";
  auto join = [](const Vector& v) {
    std::ostringstream s;
    s.precision(17);
    for (Eigen::Index i = 0; i < v.size(); ++i) s << (i ? " " : "") << v[i];
    return s.str();
  };
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    const Vector& x = c.points[i];
    const std::optional<Vector> section = minimal_section(c.spec, x);
    const double value = evaluate(c.spec, x);
    for (double lambda : c.lambdas) {
      const Vector j = resolvent(c.spec, lambda, x);
      const Vector y = (x - j) / lambda;
      points.push_back({{"point", vec(x)},
                        {"lambda", lambda},
                        {"value", std::isfinite(value) ? json(value) : json("inf")},
                        {"resolvent", vec(j)},
                        {"yosida", vec(y)},
                        {"minimal_section", section ? vec(*section) : json(nullptr)}});
      csv.precision(17);
      csv << i << ',' << lambda << ',' << value << ',' << join(j) << ',' << join(y) << ','
          << (section ? join(*section) : std::string()) << '\n';
    }
  }
  json report = {{"command", "prox-check"}, {"operator", to_json(c.spec)}, {"points", points}};
  bool pass = true;
  if (c.random_cases > 0) {
    const OperatorLawReport laws = check_operator_laws(c.spec, c.random_cases, ctx.run.seed);
    report["laws"] = law_json(laws);
    pass = laws.pass();
  }
  if (ctx.want_json()) a.files["report.json"] = ctx.stamp(report).dump(2) + "\n";
  if (ctx.want_csv()) a.files["prox.csv"] = csv.str();
  a.summary = std::string("prox-check: laws ") + (pass ? "pass" : "FAIL");
  return a;
}

Artifacts dvi(const Context& ctx) {
  const DviConfig c = dvi_config_from_json(ctx.config);
  const GridPath u = solve_dvi(c.problem, c.step);
  const EnergyReport energy = brezis_energy_check(c.problem, u);
  Artifacts a;
  a.files["u.csv"] = path_csv(u, ctx);
  json report = {{"command", "dvi"},
                 {"steps", u.steps()},
                 {"final", vec(u.node(u.steps()))},
                 {"energy", {{"lhs", energy.lhs}, {"rhs", energy.rhs}, {"pass", energy.pass}}}};
  if (ctx.want_json()) a.files["report.json"] = ctx.stamp(report).dump(2) + "\n";
  a.summary = std::string("dvi: energy estimate ") + (energy.pass ? "holds" : "FAILS");
  return a;
}

Artifacts skeleton_cmd(const Context& ctx) {
  const SkeletonConfig c = skeleton_config_from_json(ctx.config);
  const SkeletonPair pair = skeleton(c.input, c.step);
  const std::vector<GraphPair> pairs =
      sample_graph(c.input.spec, 200, derive_seed(ctx.run.seed, 0, tags::kGraph));
  const double flow = validate_flow(c.input.spec, pair.xi, pair.eta, pairs);
  const double interior =
      interior_inequality_slack(pair.xi, pair.eta, interior_certificate(c.input.spec));
  Artifacts a;
  a.files["xi.csv"] = path_csv(pair.xi, ctx);
  a.files["eta.csv"] = path_csv(pair.eta, ctx);
  json report = {{"command", "skeleton"},
                 {"steps", pair.xi.steps()},
                 {"recovery_defect", pair.recovery_defect},
                 {"flow_slack", finite_or_nan(flow)},
                 {"interior_slack", finite_or_nan(interior)},
                 {"eta_variation", running_variation(pair.eta).tail(1)[0]}};
  if (ctx.want_json()) a.files["report.json"] = ctx.stamp(report).dump(2) + "\n";
  a.summary = "skeleton: " + std::to_string(pair.xi.steps()) + " steps";
  return a;
}

Artifacts svi_cmd(const Context& ctx) {
  const SviRunConfig c = svi_run_config_from_json(ctx.config);
  const SviProblem& p = c.problem;
  const DyadicDriver driver = generate_driver(p.noise_dim(), p.horizon, c.fine_level,
                                              derive_seed(ctx.run.seed, 0, tags::kDriver));
  const SolutionPair sol = reference_solve(p, driver);
  const std::vector<GraphPair> pairs =
      sample_graph(p.spec, 200, derive_seed(ctx.run.seed, 0, tags::kGraph));
  const ValidationReport v =
      validate_solution(p, sol, driver.w, pairs, interior_certificate(p.spec));
  json report = {{"command", "svi"},
                 {"problem", to_json(p)},
                 {"fine_level", c.fine_level},
                 {"tv_k", sol.tv_k},
                 {"recovery_defect", sol.residual},
                 {"validation", validation_json(v)}};
  if (is_reflected_bm(p)) {
    const SolutionPair oracle = skorokhod_oracle(p.x[0], driver.w);
    report["oracle"] = {{"x_distance", sup_distance(sol.x, oracle.x, p.horizon)},
                        {"k_distance", sup_distance(sol.k, oracle.k, p.horizon)}};
  }
  Artifacts a;
  a.files["X.csv"] = path_csv(sol.x, ctx);
  a.files["K.csv"] = path_csv(sol.k, ctx);
  a.files["w.csv"] = path_csv(driver.w, ctx);
  if (ctx.want_json()) a.files["report.json"] = ctx.stamp(report).dump(2) + "\n";
  a.summary = std::string("svi: validation ") + (v.all_pass() ? "pass" : "FAIL");
  return a;
}

Artifacts oracle_compare(const Context& ctx) {
  const OracleCompareConfig c = oracle_compare_config_from_json(ctx.config);
  SviProblem p{OperatorSpec::box(Vector::Zero(1), Vector::Constant(1, kInfinity)), Drift::zero(1),
               Dispersion::constant(Matrix::Identity(1, 1)), Vector::Constant(1, c.x), c.horizon};
  const InteriorCertificate cert = interior_certificate(p.spec);
  const std::vector<GraphPair> pairs =
      sample_graph(p.spec, 200, derive_seed(ctx.run.seed, 0, tags::kGraph));
  struct Trial {
    double distance;
    bool valid;
    double flow;
    double interior;
  };
  auto results = parallel_map<Trial>(c.trials, ctx.run.workers, [&](long i) {
    const DyadicDriver driver = generate_driver(1, c.horizon, c.fine_level,
                                                derive_seed(ctx.run.seed, static_cast<std::uint64_t>(i), tags::kDriver));
    const SolutionPair sol = reference_solve(p, driver);
    const SolutionPair oracle = skorokhod_oracle(c.x, driver.w);
    const double d = std::max((sol.x.values() - oracle.x.values()).cwiseAbs().maxCoeff(),
                              (sol.k.values() - oracle.k.values()).cwiseAbs().maxCoeff());
    const ValidationReport v = validate_solution(p, sol, driver.w, pairs, cert);
    return Trial{d, v.all_pass(), v.flow_slack, v.interior_slack};
  });
  double worst = 0.0, flow = kInfinity, interior = kInfinity;
  long valid = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!results[i].value) throw NumericalError("trial " + std::to_string(i) + ": " + results[i].error, 0.0);
    const Trial& t = *results[i].value;
    worst = std::max(worst, t.distance);
    flow = std::min(flow, t.flow);
    interior = std::min(interior, t.interior);
    if (t.valid) ++valid;
  }
  const bool pass = worst <= 1e-10 && valid == c.trials;
  json report = {{"command", "oracle-compare"},
                 {"trials", c.trials},
                 {"max_node_distance", worst},
                 {"validated", valid},
                 {"min_flow_slack", finite_or_nan(flow)},
                 {"min_interior_slack", finite_or_nan(interior)},
                 {"pass", pass}};
  Artifacts a;
  if (ctx.want_json()) a.files["report.json"] = ctx.stamp(report).dump(2) + "\n";
  if (ctx.want_csv()) {
    std::ostringstream csv;
    csv.precision(17);
    csv << ctx.csv_header() << "trials,max_node_distance,validated,min_flow_slack,min_interior_slack\n"
        << c.trials << ',' << worst << ',' << valid << ',' << flow << ',' << interior << '\n';
    a.files["report.csv"] = csv.str();
  }
  a.summary = std::string("oracle-compare: ") + (pass ? "pass" : "FAIL");
  return a;
}

Artifacts study_artifacts(const Context& ctx, const ExperimentReport& r) {
  Artifacts a;
  json j = to_json(r);
  j["config_hash"] = ctx.hash;
  if (ctx.want_json()) a.files["report.json"] = j.dump(2) + "\n";
  if (ctx.want_csv()) a.files["report.csv"] = ctx.csv_header() + to_csv(r);
  std::ostringstream s;
  s << r.name << ": " << r.cells.size() << " cells, " << r.failed_trials << " failed trials";
  a.summary = s.str();
  return a;
}

using Handler = std::function<Artifacts(const Context&)>;

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> table = {
      {"prox-check", prox_check},
      {"dvi", dvi},
      {"skeleton", skeleton_cmd},
      {"svi", svi_cmd},
      {"oracle-compare", oracle_compare},
      {"limit-theorem",
       [](const Context& c) {
         return study_artifacts(c, limit_theorem_study(limit_config_from_json(c.config), c.options()));
       }},
      {"support-direct",
       [](const Context& c) {
         return study_artifacts(c, support_direct_study(limit_config_from_json(c.config), c.options()));
       }},
      {"continuity",
       [](const Context& c) {
         return study_artifacts(
             c, approx_continuity_study(continuity_config_from_json(c.config), c.options()));
       }},
      {"small-ball",
       [](const Context& c) {
         return study_artifacts(c, small_ball_study(small_ball_config_from_json(c.config), c.options()));
       }},
      {"levy-area",
       [](const Context& c) {
         return study_artifacts(c, levy_area_study(levy_config_from_json(c.config), c.options()));
       }},
      {"k-tail",
       [](const Context& c) {
         return study_artifacts(c, k_tail_study(k_tail_config_from_json(c.config), c.options()));
       }},
  };
  return table;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw InputError("out: cannot write '" + path.string() + "'");
}

void write_error(const RunConfig& run, int status, const std::string& kind,
                 const std::string& message, double residual, std::ostream& log) {
  // The field is the dotted path before the first ": " of the message.
  const auto colon = message.find(": ");
  json err = {{"schema_version", kSchemaVersion},
              {"status", status},
              {"kind", kind},
              {"command", run.command},
              {"seed", run.seed},
              {"field", colon == std::string::npos ? json(nullptr) : json(message.substr(0, colon))},
              {"message", message}};
  if (std::isfinite(residual)) err["residual"] = residual;
  log << "error: " << message << '\n';
  std::error_code ec;
  fs::create_directories(run.out, ec);
  std::ofstream out(run.out / "error.json");
  if (out) out << err.dump(2) << '\n';
}

}  // namespace

const std::vector<std::string>& cli_commands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, handler] : handlers()) v.push_back(name);
    return v;
  }();
  return names;
}

int run(const RunConfig& config, std::ostream& log) {
  try {
    const auto it = handlers().find(config.command);
    if (it == handlers().end()) throw InputError("command: unknown command '" + config.command + "'");
    if (config.workers < 1) throw InputError("workers: must be at least 1");
    Context ctx{config, read_config(config.config), {}};
    ctx.hash = config_hash(ctx.config);
    const Artifacts artifacts = it->second(ctx);

    std::error_code ec;
    fs::create_directories(config.out, ec);
    if (ec || !fs::is_directory(config.out)) {
      throw InputError("out: cannot create directory '" + config.out.string() + "'");
    }
    fs::remove(config.out / "error.json", ec);
    for (const auto& [name, content] : artifacts.files) write_file(config.out / name, content);
    log << artifacts.summary << '\n';
    return kExitOk;
  } catch (const InputError& e) {
    write_error(config, kExitInput, "input", e.what(), std::nan(""), log);
    return kExitInput;
  } catch (const UnsupportedError& e) {
    write_error(config, kExitInput, "unsupported", e.what(), std::nan(""), log);
    return kExitInput;
  } catch (const NumericalError& e) {
    write_error(config, kExitNumerical, "numerical", e.what(), e.residual(), log);
    return kExitNumerical;
  } catch (const std::exception& e) {
    write_error(config, kExitNumerical, "numerical", e.what(), std::nan(""), log);
    return kExitNumerical;
  }
}

}  // namespace svilab
