#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "bba/models/train.hpp"
#include "bba/oracle/oracle.hpp"

namespace bba::substitute {

using models::Classifier;
using nd::Vec;

/// What to train as the substitute each epoch.
struct SubstituteModelSpec {
  bool logistic = false;            // true: multinomial LR
  models::ArchitectureSpec arch;    // used when !logistic
};

struct SubstituteConfig {
  SubstituteModelSpec model;
  double lambda = 0.1;
  std::optional<int> tau;           // periodic step-size period; unset = constant
  bool reservoir = false;
  int sigma = 3;                    // warmup epochs before reservoir sampling
  int kappa = 400;                  // reservoir subset size
  int max_rho = 6;                  // augmentation epochs
  models::TrainingConfig inner;     // per-epoch from-scratch training recipe

  void validate() const;
};

struct EpochStats {
  int rho = 0;
  std::size_t set_size = 0;
  std::uint64_t new_queries = 0;
  std::uint64_t cum_queries = 0;
  double heldout_agreement = -1.0;  // <0: not evaluated
};

struct SubstituteRun {
  std::unique_ptr<Classifier> substitute;
  std::vector<EpochStats> history;
  bool budget_exhausted = false;
};

/// Insertion-ordered set of unique input vectors keyed by exact fingerprint.
class PointSet {
 public:
  bool insert(Vec x);  // false when already present
  std::size_t size() const { return points_.size(); }
  const std::vector<Vec>& points() const { return points_; }

 private:
  std::vector<Vec> points_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Signed step for augmentation epoch rho: lambda * (-1)^floor(rho/tau);
/// with tau unset, lambda unchanged.
double periodic_step(double lambda, std::optional<int> tau, int rho);

/// One Jacobian-based augmentation pass over the points at `targets`:
/// inserts clamp01(x + lambda_rho * sgn(J_F[label(x)])) for each target,
/// deduplicated. Returns the number of new points.
std::size_t augment(const Classifier& substitute, PointSet& set,
                    std::span<const int> labels, std::span<const std::size_t> targets,
                    double lambda_rho);

/// Uniform kappa-subset of [0, n) via single-pass reservoir sampling;
/// returns all of [0, n) when kappa >= n. Indices come back sorted.
std::vector<std::size_t> reservoir_select(std::size_t n, int kappa, nd::SeededRng& rng);

/// Worst-case distinct-query count (no collisions): n * 2^rho vanilla,
/// n * 2^sigma + kappa * (rho - sigma) with reservoir sampling.
std::uint64_t predicted_query_count(std::uint64_t n_seeds, int rho, int sigma, int kappa,
                                    bool reservoir);

/// Optional per-epoch probe (e.g. held-out oracle agreement).
using EvalHook = std::function<double(const Classifier&)>;

/// The full substitute training loop: label the seed set, train from
/// scratch, then max_rho rounds of [augment -> label new points -> retrain].
/// On budget exhaustion the partial history and last trained substitute are
/// returned with budget_exhausted set.
SubstituteRun train_substitute(oracle::OracleHandle& o, std::span<const Vec> seeds,
                               const SubstituteConfig& cfg, nd::SeededRng rng,
                               const EvalHook* eval = nullptr);

/// Run manifest rows ("rho,set_size,new_queries,cum_queries,agreement").
std::string history_csv(const std::vector<EpochStats>& history);

}  // namespace bba::substitute
