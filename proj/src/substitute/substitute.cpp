#include "bba/substitute/substitute.hpp"

#include <charconv>
#include <cmath>

#include "bba/error.hpp"
#include "bba/nd/kernels.hpp"

namespace bba::substitute {

void SubstituteConfig::validate() const {
  if (lambda <= 0) throw ConfigError("substitute: lambda must be > 0");
  if (tau && *tau < 1) throw ConfigError("substitute: tau must be >= 1");
  if (max_rho < 0) throw ConfigError("substitute: max_rho must be >= 0");
  if (reservoir) {
    if (kappa <= 0) throw ConfigError("substitute: kappa must be > 0");
    if (sigma >= max_rho && max_rho > 0)
      throw ConfigError("substitute: sigma must be < max_rho with reservoir sampling");
  }
  inner.validate();
}

bool PointSet::insert(Vec x) {
  std::string fp = nd::fingerprint_bytes(x);
  const auto [it, fresh] = index_.emplace(std::move(fp), points_.size());
  if (!fresh) return false;
  points_.push_back(std::move(x));
  return true;
}

double periodic_step(double lambda, std::optional<int> tau, int rho) {
  if (!tau) return lambda;
  if (*tau < 1) throw ContractViolation("periodic_step: tau must be >= 1");
  return (rho / *tau) % 2 == 0 ? lambda : -lambda;
}

std::size_t augment(const Classifier& substitute, PointSet& set,
                    std::span<const int> labels, std::span<const std::size_t> targets,
                    double lambda_rho) {
  if (!substitute.differentiable())
    throw UnsupportedOperation("augment: substitute must be differentiable");
  const auto& k = nd::kern::kernels();
  std::size_t added = 0;
  // Snapshot: augmentation reads S_rho, never the points it just added.
  const std::vector<Vec>& pts = set.points();
  std::vector<Vec> fresh;
  fresh.reserve(targets.size());
  for (const std::size_t ix : targets) {
    const Vec& x = pts[ix];
    const nd::Mat j = substitute.jacobian(x);
    const int label = labels[ix];
    Vec step(x.size());
    k.sgn(j.row(static_cast<std::size_t>(label)), step.data(), step.size());
    Vec nx(x.size());
    k.scale(lambda_rho, step.data(), step.data(), step.size());
    k.add(x.data(), step.data(), nx.data(), nx.size());
    nd::clamp01_inplace(nx);
    fresh.push_back(std::move(nx));
  }
  for (Vec& nx : fresh)
    if (set.insert(std::move(nx))) ++added;
  return added;
}

std::vector<std::size_t> reservoir_select(std::size_t n, int kappa, nd::SeededRng& rng) {
  if (kappa < 1) throw ContractViolation("reservoir_select: kappa must be >= 1");
  const std::size_t k = static_cast<std::size_t>(kappa);
  std::vector<std::size_t> chosen;
  if (k >= n) {
    chosen.resize(n);
    for (std::size_t i = 0; i < n; ++i) chosen[i] = i;
    return chosen;
  }
  chosen.resize(k);
  for (std::size_t i = 0; i < k; ++i) chosen[i] = i;
  for (std::size_t i = k; i < n; ++i) {
    const std::uint64_t j = rng.below(i + 1);
    if (j < k) chosen[static_cast<std::size_t>(j)] = i;
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

std::uint64_t predicted_query_count(std::uint64_t n_seeds, int rho, int sigma, int kappa,
                                    bool reservoir) {
  if (rho < 0) throw ContractViolation("predicted_query_count: rho must be >= 0");
  if (!reservoir) return n_seeds << static_cast<unsigned>(rho);
  if (sigma >= rho)
    throw ContractViolation("predicted_query_count: sigma must be < rho with rs");
  return (n_seeds << static_cast<unsigned>(sigma)) +
         static_cast<std::uint64_t>(kappa) * static_cast<std::uint64_t>(rho - sigma);
}

namespace {

std::unique_ptr<Classifier> train_fresh(const SubstituteModelSpec& spec,
                                        const std::vector<Vec>& xs,
                                        const std::vector<int>& ys, int oracle_classes,
                                        const models::TrainingConfig& inner,
                                        nd::SeededRng rng) {
  data::LabeledDataset ds;
  ds.inputs = xs;
  ds.labels = ys;
  ds.rows = 1;
  ds.cols = static_cast<int>(xs.front().size());
  ds.channels = 1;
  ds.classes = spec.logistic ? oracle_classes : spec.arch.out_dim;
  models::TrainingConfig cfg = inner;
  cfg.rng = rng;
  if (spec.logistic) return models::train_logistic(ds, cfg);
  ds.rows = spec.arch.in_rows;
  ds.cols = spec.arch.in_cols;
  ds.channels = spec.arch.in_channels;
  return models::train_network(spec.arch, ds, cfg);
}

}  // namespace

SubstituteRun train_substitute(oracle::OracleHandle& o, std::span<const Vec> seeds,
                               const SubstituteConfig& cfg, nd::SeededRng rng,
                               const EvalHook* eval) {
  cfg.validate();
  if (seeds.empty()) throw ContractViolation("train_substitute: no seeds");

  SubstituteRun run;
  PointSet set;
  for (const Vec& s : seeds) set.insert(s);
  std::vector<int> labels;  // parallel to set.points()

  for (int rho = 0; rho <= cfg.max_rho; ++rho) {
    o.begin_epoch();
    EpochStats stats;
    stats.rho = rho;
    stats.set_size = set.size();

    // Label points added since the previous epoch (the oracle cache keeps
    // re-labeling of old points free; the ledger counts only fresh ones).
    const std::uint64_t before = o.ledger().total();
    try {
      for (std::size_t i = labels.size(); i < set.size(); ++i)
        labels.push_back(o.query_label(set.points()[i]));
    } catch (const BudgetExhausted&) {
      run.budget_exhausted = true;
      run.history.push_back(stats);
      return run;
    }
    stats.new_queries = o.ledger().total() - before;
    stats.cum_queries = o.ledger().total();

    // Retrain from scratch on everything labeled so far.
    run.substitute = train_fresh(cfg.model, set.points(), labels, o.classes(), cfg.inner,
                                 rng.child(static_cast<std::uint64_t>(rho)));
    if (eval != nullptr) stats.heldout_agreement = (*eval)(*run.substitute);
    run.history.push_back(stats);

    if (rho == cfg.max_rho) break;

    // Jacobian-based augmentation towards S_{rho+1}.
    const double lam = periodic_step(cfg.lambda, cfg.tau, rho);
    std::vector<std::size_t> targets;
    if (cfg.reservoir && rho >= cfg.sigma) {
      nd::SeededRng rs = rng.child(0x5E5E0000ULL + static_cast<std::uint64_t>(rho));
      targets = reservoir_select(set.size(), cfg.kappa, rs);
    } else {
      targets.resize(set.size());
      for (std::size_t i = 0; i < targets.size(); ++i) targets[i] = i;
    }
    augment(*run.substitute, set, labels, targets, lam);
  }
  return run;
}

std::string history_csv(const std::vector<EpochStats>& history) {
  std::string out = "rho,set_size,new_queries,cum_queries,heldout_agreement\n";
  char buf[64];
  for (const EpochStats& e : history) {
    out += std::to_string(e.rho) + ',' + std::to_string(e.set_size) + ',' +
           std::to_string(e.new_queries) + ',' + std::to_string(e.cum_queries) + ',';
    if (e.heldout_agreement >= 0) {
      const auto r = std::to_chars(buf, buf + sizeof buf, e.heldout_agreement);
      out.append(buf, r.ptr);
    }
    out += '\n';
  }
  return out;
}

}  // namespace bba::substitute
