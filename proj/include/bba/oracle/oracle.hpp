#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "bba/models/classifier.hpp"
#include "bba/nd/mat.hpp"

namespace bba::oracle {

using models::Classifier;
using nd::Vec;

/// Query accounting. total() counts distinct labeled inputs (cache hits are
/// free); per-epoch buckets are advanced by begin_epoch().
class QueryLedger {
 public:
  void set_budget(std::optional<std::uint64_t> budget) { budget_ = budget; }
  std::optional<std::uint64_t> budget() const { return budget_; }

  std::uint64_t total() const { return total_; }
  const std::vector<std::uint64_t>& per_epoch() const { return per_epoch_; }

  void begin_epoch() { per_epoch_.push_back(0); }
  bool would_exceed(std::uint64_t extra = 1) const {
    return budget_ && total_ + extra > *budget_;
  }
  void count_one();

 private:
  std::uint64_t total_ = 0;
  std::optional<std::uint64_t> budget_;
  std::vector<std::uint64_t> per_epoch_{0};
};

/// The label-only oracle view. Only class indices ever cross this boundary;
/// the wrapped model (Local) or endpoint (Remote) is inaccessible to
/// callers. Repeated queries of the same input are served from the
/// fingerprint cache and charged once.
class OracleHandle {
 public:
  static OracleHandle local(std::shared_ptr<const Classifier> model,
                            std::optional<std::uint64_t> budget = {});
  static OracleHandle remote(const std::string& base_url,
                             std::optional<std::uint64_t> budget = {});
  ~OracleHandle();
  OracleHandle(OracleHandle&&) noexcept;
  OracleHandle& operator=(OracleHandle&&) noexcept;
  OracleHandle(const OracleHandle&) = delete;
  OracleHandle& operator=(const OracleHandle&) = delete;

  int in_dim() const { return in_dim_; }
  int classes() const { return classes_; }

  /// Label for x. Throws BudgetExhausted / RemoteUnreachable /
  /// MalformedResponse; never reveals probabilities.
  int query_label(const Vec& x);

  /// Element-wise query_label, order preserved. Fails lazily: a
  /// BudgetExhausted raised mid-way carries the completed prefix.
  std::vector<int> batch_query(std::span<const Vec> xs);

  /// Cached label for a previously queried input, if any (free).
  std::optional<int> cached_label(const Vec& x) const;

  const QueryLedger& ledger() const { return ledger_; }
  void begin_epoch() { ledger_.begin_epoch(); }
  std::size_t cache_size() const { return cache_.size(); }

 private:
  OracleHandle() = default;
  int backend_query(const Vec& x);

  std::shared_ptr<const Classifier> model_;  // Local backend
  struct RemoteState;                        // Remote backend (httplib client)
  std::unique_ptr<RemoteState> remote_;
  std::unordered_map<std::string, int> cache_;
  QueryLedger ledger_;
  int in_dim_ = 0;
  int classes_ = 0;
};

}  // namespace bba::oracle
