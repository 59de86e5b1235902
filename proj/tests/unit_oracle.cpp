#include <doctest.h>

#include <httplib.h>
#include <json.hpp>

#include "bba/data/dataset.hpp"
#include "bba/error.hpp"
#include "bba/models/train.hpp"
#include "bba/oracle/oracle.hpp"
#include "bba/oracle/service.hpp"

using namespace bba;
using namespace bba::oracle;
using nlohmann::json;

namespace {

std::shared_ptr<const models::Classifier> tiny_model() {
  const auto ds = data::synth_blobs(3, 6, 30, 0.02, nd::SeededRng(2, 0));
  models::TrainingConfig cfg;
  cfg.epochs = 5;
  cfg.rng = nd::SeededRng(3, 0);
  return std::shared_ptr<const models::Classifier>(models::train_logistic(ds, cfg));
}

nd::Vec random_input(nd::SeededRng& r, std::size_t n = 6) {
  nd::Vec x(n);
  for (auto& v : x) v = r.uniform01();
  return x;
}

}  // namespace

TEST_CASE("local oracle passes labels through and caches") {
  auto model = tiny_model();
  OracleHandle o = OracleHandle::local(model);
  nd::SeededRng r(5, 0);
  const nd::Vec x = random_input(r);
  const int l1 = o.query_label(x);
  CHECK(l1 == model->predict_label(x));
  CHECK(o.ledger().total() == 1);
  CHECK(o.query_label(x) == l1);
  CHECK(o.ledger().total() == 1);  // cache hit is free

  // budget 0: first novel query explodes
  OracleHandle tight = OracleHandle::local(model, 0);
  CHECK_THROWS_AS(tight.query_label(x), BudgetExhausted);
}

TEST_CASE("batch_query preserves order, dedups, fails lazily with prefix") {
  auto model = tiny_model();
  OracleHandle o = OracleHandle::local(model);
  CHECK(o.batch_query(std::vector<nd::Vec>{}).empty());
  CHECK(o.ledger().total() == 0);

  nd::SeededRng r(6, 0);
  const nd::Vec x = random_input(r);
  const std::vector<nd::Vec> dup{x, x, x};
  const auto labels = o.batch_query(dup);
  CHECK(labels.size() == 3);
  CHECK(o.ledger().total() == 1);

  OracleHandle tight = OracleHandle::local(model, 2);
  std::vector<nd::Vec> batch;
  for (int i = 0; i < 4; ++i) batch.push_back(random_input(r));
  try {
    tight.batch_query(batch);
    FAIL("expected BudgetExhausted");
  } catch (const BudgetExhausted& e) {
    CHECK(e.completed.size() == 2);
  }
}

TEST_CASE("ledger epochs partition the total") {
  auto model = tiny_model();
  OracleHandle o = OracleHandle::local(model);
  nd::SeededRng r(7, 0);
  o.query_label(random_input(r));
  o.begin_epoch();
  o.query_label(random_input(r));
  o.query_label(random_input(r));
  const auto& eps = o.ledger().per_epoch();
  REQUIRE(eps.size() == 2);
  CHECK(eps[0] == 1);
  CHECK(eps[1] == 2);
  CHECK(o.ledger().total() == 3);
}

TEST_CASE("http service round trip, schema, and budget") {
  auto model = tiny_model();
  OracleService service(model, {});
  service.start();
  const std::string url = "http://127.0.0.1:" + std::to_string(service.port());

  OracleHandle remote = OracleHandle::remote(url);
  CHECK(remote.in_dim() == 6);
  CHECK(remote.classes() == 3);

  nd::SeededRng r(8, 0);
  OracleHandle local = OracleHandle::local(model);
  for (int i = 0; i < 100; ++i) {
    const nd::Vec x = random_input(r);
    CHECK(remote.query_label(x) == local.query_label(x));
  }

  httplib::Client raw(url);
  // 200 responses carry exactly one field.
  {
    json body;
    body["input"] = random_input(r);
    auto res = raw.Post("/v1/label", body.dump(), "application/json");
    REQUIRE(res);
    REQUIRE(res->status == 200);
    const json out = json::parse(res->body);
    CHECK(out.size() == 1);
    CHECK(out.contains("label"));
  }
  {
    auto res = raw.Post("/v1/label", "{not json", "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);
    CHECK(json::parse(res->body).at("error") == "malformed");
  }
  {
    json body;
    body["input"] = nd::Vec{0.1, 0.2};  // wrong dimension
    auto res = raw.Post("/v1/label", body.dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == 422);
    CHECK(json::parse(res->body).at("error") == "dimension");
  }
  service.stop();
}

TEST_CASE("service budget trips at exactly budget+1") {
  auto model = tiny_model();
  OracleService service(model, {.host = "127.0.0.1", .port = 0, .budget = 5});
  service.start();
  const std::string url = "http://127.0.0.1:" + std::to_string(service.port());
  httplib::Client raw(url);
  nd::SeededRng r(9, 0);
  for (int i = 0; i < 5; ++i) {
    json body;
    body["input"] = random_input(r);
    auto res = raw.Post("/v1/label", body.dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
  }
  json body;
  body["input"] = random_input(r);
  auto res = raw.Post("/v1/label", body.dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == 429);
  CHECK(json::parse(res->body).at("error") == "budget_exhausted");
  CHECK(service.total_queries() == 5);
  service.stop();
}

TEST_CASE("remote handle maps 429 to BudgetExhausted") {
  auto model = tiny_model();
  OracleService service(model, {.host = "127.0.0.1", .port = 0, .budget = 1});
  service.start();
  OracleHandle remote =
      OracleHandle::remote("http://127.0.0.1:" + std::to_string(service.port()));
  nd::SeededRng r(10, 0);
  remote.query_label(random_input(r));
  CHECK_THROWS_AS(remote.query_label(random_input(r)), BudgetExhausted);
  service.stop();
}

TEST_CASE("unreachable endpoint raises RemoteUnreachable") {
  CHECK_THROWS_AS(OracleHandle::remote("http://127.0.0.1:1"), RemoteUnreachable);
}
