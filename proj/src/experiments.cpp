#include "svilab/experiments.hpp"

#include "svilab/io.hpp"
#include "svilab/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

namespace svilab {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double proportion_half_width(double p, long trials) {
  if (trials <= 0) return 1.0;
  const double n = static_cast<double>(trials);
  const double normal = 1.96 * std::sqrt(std::max(0.0, p * (1.0 - p)) / n);
  return std::max(normal, (p <= 0.0 || p >= 1.0) ? 3.0 / n : 0.0);
}

double median(std::vector<double> v) {
  std::erase_if(v, [](double x) { return std::isnan(x); });
  if (v.empty()) return kNaN;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  const double upper = *mid;
  if (v.size() % 2 == 1) return upper;
  return 0.5 * (upper + *std::max_element(v.begin(), mid));
}

double mean(const std::vector<double>& v) {
  double sum = 0.0;
  long n = 0;
  for (double x : v) {
    if (std::isnan(x)) continue;
    sum += x;
    ++n;
  }
  return n == 0 ? kNaN : sum / static_cast<double>(n);
}

GridPath difference(const GridPath& a, const GridPath& b) {
  return GridPath(a.dt(), a.values() - b.values());
}

template <class T>
void collect_failures(const std::vector<IndexedResult<T>>& results, ExperimentReport& report,
                      const char* what) {
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (results[i].value) continue;
    ++report.failed_trials;
    report.failures.push_back(std::string(what) + " " + std::to_string(i) + ": " +
                              results[i].error);
  }
}

void require_levels(const LimitTheoremConfig& c, const char* what) {
  const std::string w = what;
  c.problem.validate();
  require(c.trials >= 1, w + ": trials must be positive");
  require(!c.levels.empty(), w + ": levels must not be empty");
  require(c.fine_level >= 0 && c.fine_level <= kMaxDriverLevel, w + ": fine_level out of range");
  for (int n : c.levels) {
    require(n >= 0 && n <= c.fine_level, w + ": every level must lie in [0, fine_level]");
  }
  require(c.eps > 0.0, w + ": eps must be positive");
}

// Per-trial errors for each level; `direct` measures against the skeleton of w_n.
struct LevelErrors {
  std::vector<double> total;
  std::vector<double> x_part;
  std::vector<double> k_part;
};

ExperimentReport level_study(const LimitTheoremConfig& c, const RunOptions& run, bool direct,
                             const char* name) {
  const auto start = Clock::now();
  require_levels(c, name);
  const SviProblem& p = c.problem;
  const double horizon = p.horizon;
  const std::size_t levels = c.levels.size();

  auto results = parallel_map<LevelErrors>(c.trials, run.workers, [&](long i) {
    const DyadicDriver driver = generate_driver(p.noise_dim(), horizon, c.fine_level,
                                                derive_seed(run.seed, static_cast<std::uint64_t>(i), tags::kDriver));
    const SolutionPair ref = reference_solve(p, driver);
    LevelErrors e;
    for (int n : c.levels) {
      GridPath x_n;
      GridPath k_n;
      if (direct) {
        SkeletonInput input{p.spec, piecewise_linear_driver(driver, n, driver.dt()), p.x, p.drift,
                            p.dispersion};
        SkeletonPair pair = skeleton(input, driver.dt());
        x_n = std::move(pair.xi);
        k_n = std::move(pair.eta);
      } else {
        SolutionPair sol = wong_zakai_solve(p, driver, n, driver.dt());
        x_n = std::move(sol.x);
        k_n = std::move(sol.k);
      }
      const double ex = sup_distance(x_n, ref.x, horizon);
      const double ek = sup_distance(k_n, ref.k, horizon);
      e.x_part.push_back(ex);
      e.k_part.push_back(ek);
      e.total.push_back(ex + ek);
    }
    return e;
  });

  ExperimentReport report;
  report.name = name;
  report.parameters = to_json(c);
  report.seed = run.seed;
  collect_failures(results, report, "trial");
  const char* series_prefix = direct ? "distance_level_" : "error_level_";
  for (std::size_t l = 0; l < levels; ++l) {
    std::vector<double> total, xs, ks;
    long hits = 0;
    long ok = 0;
    for (const auto& r : results) {
      if (!r.value) {
        total.push_back(kNaN);
        continue;
      }
      const double e = r.value->total[l];
      total.push_back(e);
      xs.push_back(r.value->x_part[l]);
      ks.push_back(r.value->k_part[l]);
      ++ok;
      if (e > c.eps) ++hits;
    }
    const int n = c.levels[l];
    Cell cell = binomial_cell("level=" + std::to_string(n), {{"level", n}}, hits, ok);
    cell.extras["median_error"] = median(total);
    cell.extras["mean_error"] = mean(total);
    cell.extras["median_x_error"] = median(xs);
    cell.extras["median_k_error"] = median(ks);
    report.cells.push_back(std::move(cell));
    report.series[series_prefix + std::to_string(n)] = std::move(total);
  }
  const double first = report.cells.front().extras["median_error"];
  const double last = report.cells.back().extras["median_error"];
  report.summary["median_ratio_last_to_first"] = first > 0.0 ? last / first : kNaN;
  report.wall_seconds = seconds_since(start);
  return report;
}

// Rejection sampling with nested acceptance: draw i is accepted for every
// delta with dist(i) < delta; each delta keeps its first `target` acceptances
// in index order, so the outcome is independent of the worker count.
struct RejectionOutcome {
  std::vector<std::vector<long>> accepted;  // per delta
  std::vector<long> draws;                  // draws consumed per delta
};

template <class Dist>
RejectionOutcome rejection_sample(const std::vector<double>& deltas, long target, long max_draws,
                                  int workers, Dist&& dist) {
  constexpr long kBatch = 4096;
  const double widest = *std::max_element(deltas.begin(), deltas.end());
  RejectionOutcome out;
  out.accepted.resize(deltas.size());
  out.draws.assign(deltas.size(), -1);
  long begin = 0;
  auto done = [&] {
    return std::all_of(out.draws.begin(), out.draws.end(), [](long d) { return d >= 0; });
  };
  while (begin < max_draws && !done()) {
    const long count = std::min(kBatch, max_draws - begin);
    auto batch = parallel_map<double>(count, workers, [&](long j) { return dist(begin + j, widest); });
    for (long j = 0; j < count; ++j) {
      const auto& r = batch[static_cast<std::size_t>(j)];
      if (!r.value) throw NumericalError("rejection sampling draw failed: " + r.error, kNaN);
      for (std::size_t d = 0; d < deltas.size(); ++d) {
        if (out.draws[d] >= 0 || !(*r.value < deltas[d])) continue;
        out.accepted[d].push_back(begin + j);
        if (static_cast<long>(out.accepted[d].size()) == target) out.draws[d] = begin + j + 1;
      }
    }
    begin += count;
  }
  for (long& d : out.draws) {
    if (d < 0) d = begin;
  }
  return out;
}

void check_deltas(const std::vector<double>& deltas, const char* what) {
  const std::string w = what;
  require(!deltas.empty(), w + ": deltas must not be empty");
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    require(deltas[i] > 0.0 && std::isfinite(deltas[i]), w + ": deltas must be positive");
    if (i > 0) require(deltas[i] < deltas[i - 1], w + ": deltas must be decreasing");
  }
}

std::string format_number(double x) {
  std::ostringstream s;
  s << std::setprecision(17) << x;
  return s.str();
}

std::string short_number(double x) {
  std::ostringstream s;
  s << x;
  return s.str();
}

}  // namespace

const Cell* ExperimentReport::find(const std::string& label) const {
  for (const Cell& c : cells) {
    if (c.label == label) return &c;
  }
  return nullptr;
}

double binomial_half_width(long hits, long trials) {
  if (trials <= 0) return 1.0;
  return proportion_half_width(static_cast<double>(hits) / static_cast<double>(trials), trials);
}

Cell binomial_cell(std::string label, nlohmann::json coords, long hits, long trials) {
  Cell cell;
  cell.label = std::move(label);
  cell.coords = std::move(coords);
  cell.trials = trials;
  cell.hits = hits;
  cell.estimate = trials > 0 ? static_cast<double>(hits) / static_cast<double>(trials) : kNaN;
  cell.half_width = binomial_half_width(hits, trials);
  cell.underpowered = trials < kMinPoweredTrials;
  return cell;
}

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size(), "least_squares: size mismatch");
  LinearFit fit;
  fit.points = static_cast<int>(x.size());
  if (x.size() < 2) {
    fit.slope = fit.intercept = fit.r_squared = kNaN;
    return fit;
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) {
    fit.slope = fit.intercept = fit.r_squared = kNaN;
    return fit;
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

ExperimentReport limit_theorem_study(const LimitTheoremConfig& config, const RunOptions& run) {
  return level_study(config, run, false, "limit-theorem");
}

ExperimentReport support_direct_study(const LimitTheoremConfig& config, const RunOptions& run) {
  return level_study(config, run, true, "support-direct");
}

// ---- approximate continuity -----------------------------------------------------

ExperimentReport approx_continuity_study(const ContinuityConfig& c, const RunOptions& run) {
  const auto start = Clock::now();
  const SviProblem& p = c.problem;
  p.validate();
  check_deltas(c.deltas, "continuity");
  require(c.eps > 0.0, "continuity: eps must be positive");
  require(c.trials_target >= 1, "continuity: trials_target must be positive");
  require(c.max_draws >= 1, "continuity: max_draws must be positive");
  require(c.fine_level >= 0 && c.fine_level <= kMaxDriverLevel,
          "continuity: fine_level out of range");
  const int d = p.noise_dim();
  const int steps = 1 << c.fine_level;
  const double dt = p.horizon / steps;

  GridPath h = GridPath::constant(dt, steps, Vector::Zero(d));
  if (c.control) {
    require(c.control->dim() == d, "continuity: control dimension differs from the noise dimension");
    require(c.control->horizon() >= p.horizon * (1 - 1e-12), "continuity: control does not cover [0, T]");
    h = GridPath::sample(dt, steps, d, [&](double t) { return c.control->at(t); });
  }
  const SkeletonPair target = skeleton(SkeletonInput{p.spec, h, p.x, p.drift, p.dispersion}, dt);

  // Streams the increments exactly as generate_driver does, stopping early
  // once the distance to h reaches `limit`.
  auto distance = [&](long i, double limit) {
    IncrementSource source(derive_seed(run.seed, static_cast<std::uint64_t>(i), tags::kDriver), dt);
    Vector w = Vector::Zero(d);
    double worst = 0.0;
    for (int k = 0; k < steps; ++k) {
      for (int j = 0; j < d; ++j) w[j] += source.next();
      worst = std::max(worst, (w - h.node(k + 1)).norm());
      if (worst >= limit) return kInfinity;
    }
    return worst;
  };
  const RejectionOutcome drawn =
      rejection_sample(c.deltas, c.trials_target, c.max_draws, run.workers, distance);

  std::set<long> unique;
  for (const auto& list : drawn.accepted) unique.insert(list.begin(), list.end());
  const std::vector<long> indices(unique.begin(), unique.end());
  struct Outcome {
    double sup_error;
    double tv_error;
  };
  auto solved = parallel_map<Outcome>(static_cast<long>(indices.size()), run.workers, [&](long j) {
    const long i = indices[static_cast<std::size_t>(j)];
    const DyadicDriver driver = generate_driver(d, p.horizon, c.fine_level,
                                                derive_seed(run.seed, static_cast<std::uint64_t>(i), tags::kDriver));
    const SolutionPair sol = reference_solve(p, driver);
    const double ex = sup_distance(sol.x, target.xi, p.horizon);
    const double ek = sup_distance(sol.k, target.eta, p.horizon);
    const double tv = total_variation(difference(sol.k, target.eta), p.horizon);
    return Outcome{ex + ek, ex + tv};
  });

  ExperimentReport report;
  report.name = "continuity";
  report.parameters = to_json(c);
  report.seed = run.seed;
  for (std::size_t j = 0; j < indices.size(); ++j) {
    if (solved[j].value) continue;
    ++report.failed_trials;
    report.failures.push_back("draw " + std::to_string(indices[j]) + ": " + solved[j].error);
  }
  std::map<long, Outcome> by_index;
  for (std::size_t j = 0; j < indices.size(); ++j) {
    if (solved[j].value) by_index.emplace(indices[j], *solved[j].value);
  }
  for (std::size_t k = 0; k < c.deltas.size(); ++k) {
    long ok = 0, hits = 0, tv_hits = 0;
    std::vector<double> errors;
    for (long i : drawn.accepted[k]) {
      const auto it = by_index.find(i);
      if (it == by_index.end()) continue;
      ++ok;
      if (it->second.sup_error < c.eps) ++hits;
      if (it->second.tv_error < c.eps) ++tv_hits;
      errors.push_back(it->second.sup_error);
    }
    const double delta = c.deltas[k];
    Cell cell = binomial_cell("delta=" + short_number(delta), {{"delta", delta}}, hits, ok);
    cell.underpowered = ok < kMinPoweredTrials || ok < c.trials_target;
    const long accepted = static_cast<long>(drawn.accepted[k].size());
    cell.extras["accepted"] = static_cast<double>(accepted);
    cell.extras["draws"] = static_cast<double>(drawn.draws[k]);
    cell.extras["acceptance_rate"] =
        static_cast<double>(accepted) / static_cast<double>(std::max<long>(1, drawn.draws[k]));
    cell.extras["tv_estimate"] = ok > 0 ? static_cast<double>(tv_hits) / static_cast<double>(ok) : kNaN;
    cell.extras["tv_half_width"] = binomial_half_width(tv_hits, ok);
    cell.extras["median_error"] = median(errors);
    report.cells.push_back(std::move(cell));
  }
  report.summary["skeleton_recovery_defect"] = target.recovery_defect;
  report.summary["total_draws"] =
      static_cast<double>(*std::max_element(drawn.draws.begin(), drawn.draws.end()));
  report.wall_seconds = seconds_since(start);
  return report;
}

// ---- small ball -----------------------------------------------------------------

double bridge_survival(double a, double b, double lower, double upper, double t) {
  require(upper > lower && t > 0.0, "bridge_survival: need lower < upper and t > 0");
  const double width = upper - lower;
  const double x = a - lower;
  const double y = b - lower;
  if (x <= 0.0 || y <= 0.0 || x >= width || y >= width) return 0.0;
  // Images of the killed-Brownian-motion density divided by the free density.
  double p = 0.0;
  for (int k = -3; k <= 3; ++k) {
    const double kl = k * width;
    p += std::exp(-2.0 * kl * (kl - (y - x)) / t) - std::exp(-2.0 * (x - kl) * (y - kl) / t);
  }
  return std::clamp(p, 0.0, 1.0);
}

ExperimentReport small_ball_study(const SmallBallConfig& c, const RunOptions& run) {
  const auto start = Clock::now();
  require(c.noise_dim >= 1, "small-ball: noise_dim must be positive");
  require(c.horizon > 0.0 && std::isfinite(c.horizon), "small-ball: horizon must be positive");
  require(!c.eps_grid.empty(), "small-ball: eps_grid must not be empty");
  for (double e : c.eps_grid) require(e > 0.0, "small-ball: eps values must be positive");
  require(c.trials >= 1, "small-ball: trials must be positive");
  require(c.fine_level >= 0 && c.fine_level <= kMaxDriverLevel, "small-ball: fine_level out of range");

  const int d = c.noise_dim;
  const int steps = 1 << c.fine_level;
  const double dt = c.horizon / steps;
  const std::size_t cells = c.eps_grid.size();
  const bool bridge = d == 1;
  // Beyond this exponent a bridge step's exit probability is below e^-40.
  constexpr double kNearBarrier = 40.0;

  struct Sums {
    std::vector<double> weight;
    std::vector<double> weight_sq;
    std::vector<long> grid_hits;
  };
  constexpr long kChunk = 8192;
  const long chunks = (c.trials + kChunk - 1) / kChunk;
  auto partial = parallel_map<Sums>(chunks, run.workers, [&](long chunk) {
    Sums s{std::vector<double>(cells, 0.0), std::vector<double>(cells, 0.0),
           std::vector<long>(cells, 0)};
    std::vector<double> weight(cells);
    std::vector<char> alive(cells);
    Vector w(d);
    const long end = std::min(c.trials, (chunk + 1) * kChunk);
    for (long i = chunk * kChunk; i < end; ++i) {
      IncrementSource source(derive_seed(run.seed, static_cast<std::uint64_t>(i), tags::kSmallBall), dt);
      std::fill(weight.begin(), weight.end(), 1.0);
      std::fill(alive.begin(), alive.end(), 1);
      std::size_t living = cells;
      w.setZero();
      for (int k = 0; k < steps && living > 0; ++k) {
        const double before = w[0];
        for (int j = 0; j < d; ++j) w[j] += source.next();
        const double norm = w.norm();
        for (std::size_t e = 0; e < cells; ++e) {
          if (!alive[e]) continue;
          const double eps = c.eps_grid[e];
          if (norm >= eps) {
            alive[e] = 0;
            weight[e] = 0.0;
            --living;
            continue;
          }
          if (!bridge) continue;
          const double gap = std::min((eps - before) * (eps - w[0]), (eps + before) * (eps + w[0]));
          if (2.0 * gap / dt < kNearBarrier) weight[e] *= bridge_survival(before, w[0], -eps, eps, dt);
        }
      }
      for (std::size_t e = 0; e < cells; ++e) {
        if (alive[e]) ++s.grid_hits[e];
        s.weight[e] += weight[e];
        s.weight_sq[e] += weight[e] * weight[e];
      }
    }
    return s;
  });

  ExperimentReport report;
  report.name = "small-ball";
  report.parameters = to_json(c);
  report.seed = run.seed;
  collect_failures(partial, report, "chunk");
  if (report.failed_trials > 0) throw NumericalError("small-ball: " + report.failures.front(), kNaN);

  std::vector<double> fit_x, fit_y;
  for (std::size_t e = 0; e < cells; ++e) {
    double weight = 0.0, weight_sq = 0.0;
    long grid = 0;
    for (const auto& part : partial) {
      weight += part.value->weight[e];
      weight_sq += part.value->weight_sq[e];
      grid += part.value->grid_hits[e];
    }
    const double n = static_cast<double>(c.trials);
    const double eps = c.eps_grid[e];
    Cell cell;
    cell.label = "eps=" + short_number(eps);
    cell.coords = {{"eps", eps}};
    cell.trials = c.trials;
    cell.hits = grid;
    cell.estimate = weight / n;
    cell.half_width = proportion_half_width(cell.estimate, c.trials);
    cell.underpowered = c.trials < kMinPoweredTrials || grid == 0;
    const double variance = std::max(0.0, weight_sq / n - cell.estimate * cell.estimate);
    cell.extras["grid_estimate"] = static_cast<double>(grid) / n;
    cell.extras["grid_half_width"] = binomial_half_width(grid, c.trials);
    cell.extras["weight_half_width"] = 1.96 * std::sqrt(variance / n);
    cell.extras["neg_log_estimate"] = cell.estimate > 0.0 ? -std::log(cell.estimate) : kInfinity;
    if (cell.estimate > 0.0 && cell.estimate < 1.0) {
      fit_x.push_back(1.0 / (eps * eps));
      fit_y.push_back(-std::log(cell.estimate));
    }
    report.cells.push_back(std::move(cell));
  }
  const LinearFit fit = least_squares(fit_x, fit_y);
  report.summary["fit_slope"] = fit.slope;
  report.summary["fit_intercept"] = fit.intercept;
  report.summary["fit_r_squared"] = fit.r_squared;
  report.summary["fit_points"] = fit.points;
  report.summary["bridge_corrected"] = bridge ? 1.0 : 0.0;
  report.wall_seconds = seconds_since(start);
  return report;
}

// ---- Levy area ------------------------------------------------------------------

LevyArea LevyArea::from_path(const GridPath& w) {
  LevyArea area;
  area.noise_dim = w.dim();
  area.zeta.reserve(static_cast<std::size_t>(w.steps() + 1));
  Matrix z = Matrix::Zero(w.dim(), w.dim());
  area.zeta.push_back(z);
  for (int k = 0; k < w.steps(); ++k) {
    const Vector mid = 0.5 * (w.node(k) + w.node(k + 1));
    const Vector dw = w.node(k + 1) - w.node(k);
    z += mid * dw.transpose();
    area.zeta.push_back(z);
  }
  return area;
}

double LevyArea::sup_abs(int i, int j) const {
  double worst = 0.0;
  for (const Matrix& z : zeta) worst = std::max(worst, std::abs(z(i, j)));
  return worst;
}

double LevyArea::identity_error(const GridPath& w) const {
  require(w.dim() == noise_dim && static_cast<std::size_t>(w.steps() + 1) == zeta.size(),
          "LevyArea::identity_error: path does not match");
  double worst = 0.0;
  for (std::size_t k = 0; k < zeta.size(); ++k) {
    const auto v = w.node(static_cast<int>(k));
    for (int i = 0; i < noise_dim; ++i) {
      worst = std::max(worst, std::abs(zeta[k](i, i) - 0.5 * v[i] * v[i]));
      for (int j = i + 1; j < noise_dim; ++j) {
        worst = std::max(worst, std::abs(zeta[k](i, j) + zeta[k](j, i) - v[i] * v[j]));
      }
    }
  }
  return worst;
}

ExperimentReport levy_area_study(const LevyAreaConfig& c, const RunOptions& run) {
  const auto start = Clock::now();
  require(c.noise_dim >= 2, "levy-area: noise_dim must be at least 2");
  require(c.horizon > 0.0 && std::isfinite(c.horizon), "levy-area: horizon must be positive");
  check_deltas(c.deltas, "levy-area");
  require(!c.multipliers.empty(), "levy-area: multipliers must not be empty");
  for (double m : c.multipliers) require(m >= 0.0, "levy-area: multipliers must be nonnegative");
  require(c.trials_target >= 1, "levy-area: trials_target must be positive");
  require(c.max_draws >= 1, "levy-area: max_draws must be positive");
  require(c.fine_level >= 0 && c.fine_level <= kMaxDriverLevel, "levy-area: fine_level out of range");
  const int d = c.noise_dim;
  const int steps = 1 << c.fine_level;
  const double dt = c.horizon / steps;

  auto seed_of = [&](long i) {
    return derive_seed(run.seed, static_cast<std::uint64_t>(i), tags::kLevy);
  };
  auto distance = [&](long i, double limit) {
    IncrementSource source(seed_of(i), dt);
    Vector w = Vector::Zero(d);
    double worst = 0.0;
    for (int k = 0; k < steps; ++k) {
      for (int j = 0; j < d; ++j) w[j] += source.next();
      worst = std::max(worst, w.norm());
      if (worst >= limit) return kInfinity;
    }
    return worst;
  };
  const RejectionOutcome drawn =
      rejection_sample(c.deltas, c.trials_target, c.max_draws, run.workers, distance);

  std::set<long> unique;
  for (const auto& list : drawn.accepted) unique.insert(list.begin(), list.end());
  const std::vector<long> indices(unique.begin(), unique.end());
  struct Areas {
    double off_diagonal;
    double diagonal;
    double identity_error;
  };
  auto areas = parallel_map<Areas>(static_cast<long>(indices.size()), run.workers, [&](long j) {
    const DyadicDriver driver =
        generate_driver(d, c.horizon, c.fine_level, seed_of(indices[static_cast<std::size_t>(j)]));
    const LevyArea area = LevyArea::from_path(driver.w);
    return Areas{area.sup_abs(0, 1), area.sup_abs(0, 0), area.identity_error(driver.w)};
  });

  ExperimentReport report;
  report.name = "levy-area";
  report.parameters = to_json(c);
  report.seed = run.seed;
  std::map<long, Areas> by_index;
  double identity = 0.0;
  for (std::size_t j = 0; j < indices.size(); ++j) {
    if (!areas[j].value) {
      ++report.failed_trials;
      report.failures.push_back("draw " + std::to_string(indices[j]) + ": " + areas[j].error);
      continue;
    }
    by_index.emplace(indices[j], *areas[j].value);
    identity = std::max(identity, areas[j].value->identity_error);
  }
  std::map<double, double> sup_over_delta;
  for (std::size_t k = 0; k < c.deltas.size(); ++k) {
    const double delta = c.deltas[k];
    const long accepted = static_cast<long>(drawn.accepted[k].size());
    for (double m : c.multipliers) {
      for (const bool diagonal : {false, true}) {
        long ok = 0, hits = 0;
        for (long i : drawn.accepted[k]) {
          const auto it = by_index.find(i);
          if (it == by_index.end()) continue;
          ++ok;
          const double value = diagonal ? it->second.diagonal : it->second.off_diagonal;
          if (value > m * delta) ++hits;
        }
        const std::string ij = diagonal ? "11" : "12";
        Cell cell = binomial_cell(
            "delta=" + short_number(delta) + ",M=" + short_number(m) + ",ij=" + ij,
            {{"delta", delta}, {"M", m}, {"ij", ij}}, hits, ok);
        cell.underpowered = ok < kMinPoweredTrials || ok < c.trials_target;
        cell.extras["accepted"] = static_cast<double>(accepted);
        cell.extras["draws"] = static_cast<double>(drawn.draws[k]);
        cell.extras["acceptance_rate"] =
            static_cast<double>(accepted) / static_cast<double>(std::max<long>(1, drawn.draws[k]));
        if (!diagonal) {
          auto [it, fresh] = sup_over_delta.emplace(m, cell.estimate);
          if (!fresh) it->second = std::max(it->second, cell.estimate);
        }
        report.cells.push_back(std::move(cell));
      }
    }
  }
  for (const auto& [m, value] : sup_over_delta) {
    report.summary["sup_over_delta_M=" + short_number(m)] = value;
  }
  report.summary["identity_error_max"] = identity;
  report.summary["paths_checked"] = static_cast<double>(by_index.size());
  report.wall_seconds = seconds_since(start);
  return report;
}

// ---- tail of |K|_T ----------------------------------------------------------------

ExperimentReport k_tail_study(const KTailConfig& c, const RunOptions& run) {
  const auto start = Clock::now();
  const SviProblem& p = c.problem;
  p.validate();
  require(c.trials >= 1, "k-tail: trials must be positive");
  require(c.fine_level >= 0 && c.fine_level <= kMaxDriverLevel, "k-tail: fine_level out of range");
  std::vector<double> grid = c.r_grid;
  if (grid.empty()) {
    for (int i = 1; i <= 16; ++i) grid.push_back(0.25 * i);
  }
  for (double r : grid) require(r >= 0.0, "k-tail: r_grid values must be nonnegative");

  struct Trial {
    double tv_k;
    double w_sup;
  };
  auto results = parallel_map<Trial>(c.trials, run.workers, [&](long i) {
    const DyadicDriver driver = generate_driver(p.noise_dim(), p.horizon, c.fine_level,
                                                derive_seed(run.seed, static_cast<std::uint64_t>(i), tags::kDriver));
    const SolutionPair sol = reference_solve(p, driver);
    return Trial{sol.tv_k, sup_norm(driver.w)};
  });

  ExperimentReport report;
  report.name = "k-tail";
  report.parameters = to_json(c);
  report.seed = run.seed;
  collect_failures(results, report, "trial");
  std::vector<double> tv;
  long ok = 0, violations = 0, k_over_3 = 0, w_over = 0;
  for (const auto& r : results) {
    if (!r.value) {
      tv.push_back(kNaN);
      continue;
    }
    ++ok;
    tv.push_back(r.value->tv_k);
    if (r.value->tv_k > 2.0 * r.value->w_sup + 1e-9) ++violations;
    if (r.value->tv_k > 3.0) ++k_over_3;
    if (r.value->w_sup > 1.5) ++w_over;
  }
  std::vector<double> fit_x, fit_y;
  for (double r : grid) {
    long hits = 0;
    for (double v : tv) {
      if (!std::isnan(v) && v > r) ++hits;
    }
    Cell cell = binomial_cell("r=" + short_number(r), {{"r", r}}, hits, ok);
    cell.underpowered = ok < kMinPoweredTrials || hits < 5;
    if (hits >= 5 && hits < ok) {
      fit_x.push_back(r * r);
      fit_y.push_back(std::log(cell.estimate));
    }
    report.cells.push_back(std::move(cell));
  }
  const LinearFit fit = least_squares(fit_x, fit_y);
  report.summary["fit_slope"] = fit.slope;
  report.summary["fit_intercept"] = fit.intercept;
  report.summary["fit_r_squared"] = fit.r_squared;
  report.summary["fit_points"] = fit.points;
  report.summary["bound_violations"] = static_cast<double>(violations);
  report.summary["p_k_over_3"] = ok > 0 ? static_cast<double>(k_over_3) / ok : kNaN;
  report.summary["p_w_over_1_5"] = ok > 0 ? static_cast<double>(w_over) / ok : kNaN;
  report.summary["median_tv_k"] = median(tv);
  report.series["tv_k"] = std::move(tv);
  report.wall_seconds = seconds_since(start);
  return report;
}

// ---- reporting --------------------------------------------------------------------

namespace {

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double number_from(const json& j) {
  if (j.is_null()) return kNaN;
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return kInfinity;
    if (s == "-inf") return -kInfinity;
    return kNaN;
  }
  return j.get<double>();
}

json finite_or_tagged(double x) {
  if (std::isnan(x)) return nullptr;
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

json map_to_json(const std::map<std::string, double>& m) {
  json out = json::object();
  for (const auto& [k, v] : m) out[k] = finite_or_tagged(v);
  return out;
}

std::map<std::string, double> map_from_json(const json& j) {
  std::map<std::string, double> out;
  for (const auto& [k, v] : j.items()) out[k] = number_from(v);
  return out;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

bool same_map(const std::map<std::string, double>& a, const std::map<std::string, double>& b) {
  if (a.size() != b.size()) return false;
  for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib) {
    if (ia->first != ib->first || !same_bits(ia->second, ib->second)) return false;
  }
  return true;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

json to_json(const ExperimentReport& r) {
  json cells = json::array();
  for (const Cell& c : r.cells) {
    cells.push_back({{"label", c.label},
                     {"coords", c.coords},
                     {"estimate", finite_or_tagged(c.estimate)},
                     {"trials", c.trials},
                     {"hits", c.hits},
                     {"half_width", finite_or_tagged(c.half_width)},
                     {"underpowered", c.underpowered},
                     {"extras", map_to_json(c.extras)}});
  }
  json series = json::object();
  for (const auto& [k, v] : r.series) {
    json values = json::array();
    for (double x : v) values.push_back(number_or_null(x));
    series[k] = std::move(values);
  }
  return {{"schema_version", kSchemaVersion},
          {"name", r.name},
          {"seed", r.seed},
          {"parameters", r.parameters},
          {"cells", std::move(cells)},
          {"summary", map_to_json(r.summary)},
          {"series", std::move(series)},
          {"failed_trials", r.failed_trials},
          {"failures", r.failures},
          {"wall_seconds", r.wall_seconds}};
}

ExperimentReport report_from_json(const json& j) {
  ExperimentReport r;
  try {
    r.name = j.at("name").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.parameters = j.at("parameters");
    for (const json& c : j.at("cells")) {
      Cell cell;
      cell.label = c.at("label").get<std::string>();
      cell.coords = c.at("coords");
      cell.estimate = number_from(c.at("estimate"));
      cell.trials = c.at("trials").get<long>();
      cell.hits = c.at("hits").get<long>();
      cell.half_width = number_from(c.at("half_width"));
      cell.underpowered = c.at("underpowered").get<bool>();
      cell.extras = map_from_json(c.at("extras"));
      r.cells.push_back(std::move(cell));
    }
    r.summary = map_from_json(j.at("summary"));
    for (const auto& [k, v] : j.at("series").items()) {
      std::vector<double> values;
      for (const json& x : v) values.push_back(number_from(x));
      r.series[k] = std::move(values);
    }
    r.failed_trials = j.at("failed_trials").get<long>();
    r.failures = j.at("failures").get<std::vector<std::string>>();
    r.wall_seconds = j.value("wall_seconds", 0.0);
  } catch (const json::exception& e) {
    throw InputError(std::string("report: ") + e.what());
  }
  return r;
}

std::string to_csv(const ExperimentReport& r) {
  std::set<std::string> coord_keys, extra_keys;
  for (const Cell& c : r.cells) {
    for (const auto& [k, v] : c.coords.items()) coord_keys.insert(k);
    for (const auto& [k, v] : c.extras) extra_keys.insert(k);
  }
  std::ostringstream out;
  out << "label";
  for (const auto& k : coord_keys) out << ',' << csv_field(k);
  out << ",estimate,trials,hits,half_width,underpowered";
  for (const auto& k : extra_keys) out << ',' << csv_field(k);
  out << '\n';
  for (const Cell& c : r.cells) {
    out << csv_field(c.label);
    for (const auto& k : coord_keys) {
      out << ',';
      if (!c.coords.contains(k)) continue;
      const json& v = c.coords.at(k);
      out << csv_field(v.is_string() ? v.get<std::string>() : v.dump());
    }
    out << ',' << format_number(c.estimate) << ',' << c.trials << ',' << c.hits << ','
        << format_number(c.half_width) << ',' << (c.underpowered ? 1 : 0);
    for (const auto& k : extra_keys) {
      out << ',';
      const auto it = c.extras.find(k);
      if (it != c.extras.end()) out << format_number(it->second);
    }
    out << '\n';
  }
  return out.str();
}

bool same_results(const ExperimentReport& a, const ExperimentReport& b) {
  if (a.name != b.name || a.seed != b.seed || a.parameters != b.parameters) return false;
  if (a.failed_trials != b.failed_trials || a.failures != b.failures) return false;
  if (a.cells.size() != b.cells.size() || !same_map(a.summary, b.summary)) return false;
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    const Cell& x = a.cells[i];
    const Cell& y = b.cells[i];
    if (x.label != y.label || x.coords != y.coords || x.trials != y.trials || x.hits != y.hits ||
        x.underpowered != y.underpowered || !same_bits(x.estimate, y.estimate) ||
        !same_bits(x.half_width, y.half_width) || !same_map(x.extras, y.extras)) {
      return false;
    }
  }
  if (a.series.size() != b.series.size()) return false;
  for (auto ia = a.series.begin(), ib = b.series.begin(); ia != a.series.end(); ++ia, ++ib) {
    if (ia->first != ib->first || ia->second.size() != ib->second.size()) return false;
    for (std::size_t k = 0; k < ia->second.size(); ++k) {
      if (!same_bits(ia->second[k], ib->second[k])) return false;
    }
  }
  return true;
}

}  // namespace svilab
