#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "bba/models/classifier.hpp"

namespace bba::oracle {

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 0;  // 0: pick a free port
  std::optional<std::uint64_t> budget;
};

/// Label-only HTTP oracle:
///   POST /v1/label {"input":[f64,...]} -> 200 {"label":int}
///                                       | 400 {"error":"malformed"}
///                                       | 422 {"error":"dimension"}
///                                       | 429 {"error":"budget_exhausted"}
///   GET  /v1/meta -> 200 {"in_dim":int,"classes":int}
/// A 200 label response carries no other field. Every valid label request
/// counts against the budget; deduplication is the client's business.
class OracleService {
 public:
  OracleService(std::shared_ptr<const models::Classifier> model, ServeOptions opts);
  ~OracleService();
  OracleService(const OracleService&) = delete;
  OracleService& operator=(const OracleService&) = delete;

  /// Binds and serves on a background thread; returns once listening.
  void start();
  /// Serve on the calling thread (CLI mode); returns after stop().
  void run();
  void stop();

  int port() const;
  std::uint64_t total_queries() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace bba::oracle
