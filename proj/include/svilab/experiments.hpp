#ifndef SVILAB_EXPERIMENTS_HPP
#define SVILAB_EXPERIMENTS_HPP

// Monte Carlo studies of the Wong-Zakai limit, approximate continuity under
// small-ball conditioning, small-ball decay, Levy areas and tails of |K|_T.
//
// Every trial (or rejection-sampling draw) i reads its randomness from
// derive_seed(seed, i, tag). Work is split into fixed-size chunks whose
// results are reduced in chunk order, so reports do not depend on the
// number of workers.

#include "svilab/svi.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace svilab {

/// One estimated probability (or other scalar) with its confidence data.
struct Cell {
  std::string label;
  nlohmann::json coords = nlohmann::json::object();
  double estimate = 0.0;
  long trials = 0;
  long hits = 0;
  double half_width = 0.0;
  bool underpowered = false;
  std::map<std::string, double> extras;
};

struct ExperimentReport {
  std::string name;
  nlohmann::json parameters = nlohmann::json::object();
  std::uint64_t seed = 0;
  std::vector<Cell> cells;
  std::map<std::string, double> summary;
  std::map<std::string, std::vector<double>> series;
  long failed_trials = 0;
  std::vector<std::string> failures;
  double wall_seconds = 0.0;

  const Cell* find(const std::string& label) const;
};

inline constexpr long kMinPoweredTrials = 50;

/// 1.96 sqrt(p(1-p)/n), floored by the rule of three 3/n for zero-hit (or all-hit) cells.
double binomial_half_width(long hits, long trials);

Cell binomial_cell(std::string label, nlohmann::json coords, long hits, long trials);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int points = 0;
};

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

struct RunOptions {
  std::uint64_t seed = 0;
  int workers = 1;
};

/// Stream tags; trial drivers share one tag so studies over the same seed see the same paths.
namespace tags {
inline constexpr std::uint64_t kDriver = 1;
inline constexpr std::uint64_t kSmallBall = 2;
inline constexpr std::uint64_t kLevy = 3;
inline constexpr std::uint64_t kGraph = 4;
}  // namespace tags

/// Runs fn(i) for i in [0, count) on `workers` threads; results are stored by index.
/// Exceptions are captured per index.
template <class T>
struct IndexedResult {
  std::optional<T> value;
  std::string error;
};

template <class T, class F>
std::vector<IndexedResult<T>> parallel_map(long count, int workers, F&& fn) {
  std::vector<IndexedResult<T>> results(static_cast<std::size_t>(count));
  std::atomic<long> next{0};
  auto work = [&] {
    for (long i = next++; i < count; i = next++) {
      try {
        results[static_cast<std::size_t>(i)].value.emplace(fn(i));
      } catch (const std::exception& e) {
        results[static_cast<std::size_t>(i)].error = e.what();
      }
    }
  };
  const int n = static_cast<int>(std::max<long>(1, std::min<long>(workers, count)));
  if (n == 1) {
    work();
    return results;
  }
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(n));
  for (int t = 0; t < n; ++t) pool.emplace_back(work);
  pool.clear();
  return results;
}

// ---- studies -------------------------------------------------------------------

struct LimitTheoremConfig {
  SviProblem problem;
  std::vector<int> levels;
  int fine_level = 14;
  double eps = 0.1;
  long trials = 200;
};

/// Per trial, error_n = ||X_n - X||_T + ||K_n - K||_T against the finest-level reference.
ExperimentReport limit_theorem_study(const LimitTheoremConfig& config, const RunOptions& run);

/// Same drivers as limit_theorem_study; the distance is taken to the skeleton
/// pair (xi(w_n, x), eta(w_n, x)) computed directly from the control w_n.
ExperimentReport support_direct_study(const LimitTheoremConfig& config, const RunOptions& run);

struct ContinuityConfig {
  SviProblem problem;
  std::optional<GridPath> control;  // h; zero when absent
  double eps = 0.2;
  std::vector<double> deltas;       // decreasing
  long trials_target = 200;
  long max_draws = 1'000'000;
  int fine_level = 10;
};

/// Conditional on ||w - h||_T < delta (rejection sampling), the probability that
/// ||X - xi(h)||_T + ||K - eta(h)||_T < eps.
ExperimentReport approx_continuity_study(const ContinuityConfig& config, const RunOptions& run);

struct SmallBallConfig {
  int noise_dim = 1;
  double horizon = 1.0;
  std::vector<double> eps_grid;
  long trials = 100'000;
  int fine_level = 10;
};

/// Estimates P(||w||_T < eps). In one dimension each path contributes the
/// product of Brownian-bridge survival probabilities between grid nodes, an
/// unbiased estimate of the continuous-time event; the raw grid-maximum
/// indicator is reported alongside.
ExperimentReport small_ball_study(const SmallBallConfig& config, const RunOptions& run);

/// Probability that a Brownian bridge from a to b over time t stays in (lower, upper).
double bridge_survival(double a, double b, double lower, double upper, double t);

/// Iterated Stratonovich integrals zeta^{ij}(t) = int_0^t w^i o dw^j by midpoint sums.
struct LevyArea {
  int noise_dim = 0;
  std::vector<Matrix> zeta;  // one d x d matrix per grid node

  static LevyArea from_path(const GridPath& w);
  /// sup_t |zeta^{ij}(t)|.
  double sup_abs(int i, int j) const;
  /// max over nodes of |zeta^{ii} - w_i^2 / 2| and |zeta^{ij} + zeta^{ji} - w_i w_j|.
  double identity_error(const GridPath& w) const;
};

struct LevyAreaConfig {
  int noise_dim = 2;
  double horizon = 1.0;
  std::vector<double> deltas;
  std::vector<double> multipliers;
  long trials_target = 200;
  long max_draws = 5'000'000;
  int fine_level = 10;
};

ExperimentReport levy_area_study(const LevyAreaConfig& config, const RunOptions& run);

struct KTailConfig {
  SviProblem problem;
  long trials = 1000;
  int fine_level = 10;
  std::vector<double> r_grid;  // empty: 0.25, 0.5, ..., 4
};

/// Empirical tail of |K|_T and a least-squares fit of log P(|K|_T > r) against r^2.
ExperimentReport k_tail_study(const KTailConfig& config, const RunOptions& run);

// ---- reporting ------------------------------------------------------------------

nlohmann::json to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const nlohmann::json& j);
/// One row per cell.
std::string to_csv(const ExperimentReport& report);

/// Cells, summary, series and failures compared bit for bit; wall-clock ignored.
bool same_results(const ExperimentReport& a, const ExperimentReport& b);

}  // namespace svilab

#endif  // SVILAB_EXPERIMENTS_HPP
