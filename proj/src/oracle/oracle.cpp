#include "bba/oracle/oracle.hpp"

#include <httplib.h>
#include <json.hpp>

#include "bba/error.hpp"

namespace bba::oracle {

using nlohmann::json;

void QueryLedger::count_one() {
  if (budget_ && total_ + 1 > *budget_)
    throw BudgetExhausted("oracle: query budget exhausted at " + std::to_string(*budget_));
  ++total_;
  ++per_epoch_.back();
}

struct OracleHandle::RemoteState {
  std::string base_url;
  httplib::Client client;
  explicit RemoteState(const std::string& url) : base_url(url), client(url) {
    client.set_connection_timeout(10);
    client.set_read_timeout(60);
  }
};

OracleHandle::~OracleHandle() = default;
OracleHandle::OracleHandle(OracleHandle&&) noexcept = default;
OracleHandle& OracleHandle::operator=(OracleHandle&&) noexcept = default;

OracleHandle OracleHandle::local(std::shared_ptr<const Classifier> model,
                                 std::optional<std::uint64_t> budget) {
  OracleHandle h;
  h.model_ = std::move(model);
  h.in_dim_ = h.model_->in_dim();
  h.classes_ = h.model_->n_classes();
  h.ledger_.set_budget(budget);
  return h;
}

OracleHandle OracleHandle::remote(const std::string& base_url,
                                  std::optional<std::uint64_t> budget) {
  OracleHandle h;
  h.remote_ = std::make_unique<RemoteState>(base_url);
  h.ledger_.set_budget(budget);
  auto res = h.remote_->client.Get("/v1/meta");
  if (!res) throw RemoteUnreachable("oracle: cannot reach " + base_url);
  if (res->status != 200)
    throw MalformedResponse("oracle: /v1/meta returned " + std::to_string(res->status));
  try {
    const json meta = json::parse(res->body);
    h.in_dim_ = meta.at("in_dim").get<int>();
    h.classes_ = meta.at("classes").get<int>();
  } catch (const json::exception& e) {
    throw MalformedResponse(std::string("oracle: bad /v1/meta body: ") + e.what());
  }
  return h;
}

int OracleHandle::backend_query(const Vec& x) {
  if (model_) return model_->predict_label(x);

  json body;
  body["input"] = x;
  auto res = remote_->client.Post("/v1/label", body.dump(), "application/json");
  if (!res) throw RemoteUnreachable("oracle: cannot reach " + remote_->base_url);
  if (res->status == 429) throw BudgetExhausted("oracle: remote budget exhausted");
  if (res->status != 200)
    throw MalformedResponse("oracle: /v1/label returned " + std::to_string(res->status) +
                            " body " + res->body);
  try {
    const json out = json::parse(res->body);
    // Information hiding: a label is the only thing the protocol carries.
    if (out.size() != 1 || !out.contains("label"))
      throw MalformedResponse("oracle: unexpected fields in label response");
    return out.at("label").get<int>();
  } catch (const json::exception& e) {
    throw MalformedResponse(std::string("oracle: bad /v1/label body: ") + e.what());
  }
}

int OracleHandle::query_label(const Vec& x) {
  if (static_cast<int>(x.size()) != in_dim_)
    throw DimensionError("oracle: input dimension mismatch");
  nd::require_finite(x, "oracle input");
  const std::string fp = nd::fingerprint_bytes(x);
  if (auto it = cache_.find(fp); it != cache_.end()) return it->second;
  if (ledger_.would_exceed())
    throw BudgetExhausted("oracle: query budget exhausted");
  const int label = backend_query(x);
  ledger_.count_one();
  cache_.emplace(fp, label);
  return label;
}

std::vector<int> OracleHandle::batch_query(std::span<const Vec> xs) {
  std::vector<int> out;
  out.reserve(xs.size());
  for (const Vec& x : xs) {
    try {
      out.push_back(query_label(x));
    } catch (BudgetExhausted& e) {
      throw BudgetExhausted(e.what(), std::move(out));
    }
  }
  return out;
}

std::optional<int> OracleHandle::cached_label(const Vec& x) const {
  if (auto it = cache_.find(nd::fingerprint_bytes(x)); it != cache_.end()) return it->second;
  return std::nullopt;
}

}  // namespace bba::oracle
