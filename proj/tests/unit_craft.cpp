#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "bba/craft/craft.hpp"
#include "bba/data/dataset.hpp"
#include "bba/error.hpp"
#include "bba/models/train.hpp"

using namespace bba;
using namespace bba::craft;
using nd::Vec;

namespace {

std::unique_ptr<models::Classifier> trained_lr(int classes = 3, int dims = 8) {
  const auto ds = data::synth_blobs(classes, dims, 40, 0.05, nd::SeededRng(400, 0));
  models::TrainingConfig cfg;
  cfg.epochs = 10;
  cfg.rng = nd::SeededRng(401, 0);
  return models::train_logistic(ds, cfg);
}

}  // namespace

TEST_CASE("fgsm: perturbation bound, clamping, sign structure") {
  auto f = trained_lr();
  nd::SeededRng r(402, 0);
  for (int t = 0; t < 20; ++t) {
    Vec x(8);
    for (auto& v : x) v = r.uniform01();
    const double eps = 0.1;
    const AdversarialRecord rec = fgsm(*f, x, f->predict_label(x), eps);
    CHECK(nd::linf_norm(rec.delta) <= eps + 1e-15);
    for (std::size_t i = 0; i < rec.x_star.size(); ++i) {
      CHECK(rec.x_star[i] >= 0.0);
      CHECK(rec.x_star[i] <= 1.0);
      CHECK(rec.delta[i] == rec.x_star[i] - rec.x[i]);
    }
  }
  CHECK_THROWS_AS(fgsm(*f, Vec(8, 0.5), 0, 0.0), ConfigError);
  CHECK_THROWS_AS(fgsm(*f, Vec(8, 0.5), 0, -0.1), ConfigError);
}

TEST_CASE("fgsm scalar arithmetic: interior and clamped components") {
  // One-dense-layer model with handmade weights; gradient signs known.
  models::Network net(models::logistic_architecture(2, 2));
  net.weights()[0](0, 0) = 2.3;
  net.weights()[0](0, 1) = -1.0;
  net.weights()[0](1, 0) = -2.3;
  net.weights()[0](1, 1) = 1.0;
  models::NetworkClassifier f(std::move(net));
  // cost gradient at y=1 points along +w0 - w1 => component 0 positive.
  {
    const AdversarialRecord rec = fgsm(f, Vec{0.5, 0.5}, 1, 0.1);
    CHECK(rec.x_star[0] == doctest::Approx(0.6).epsilon(1e-12));
  }
  {
    const AdversarialRecord rec = fgsm(f, Vec{0.95, 0.5}, 1, 0.1);
    CHECK(rec.x_star[0] == 1.0);  // clamped at the boundary
  }
}

TEST_CASE("saliency implements the two-branch rule") {
  // Hand-built 3x4 Jacobian, target t=0.
  nd::Mat j(3, 4);
  // col 0: dFt = -0.2 -> zero branch
  j(0, 0) = -0.2;
  // col 1: dFt = 0.2, others sum -0.5 -> 0.1
  j(0, 1) = 0.2;
  j(1, 1) = -0.3;
  j(2, 1) = -0.2;
  // col 2: dFt = 0.4, others sum +0.1 -> zero branch
  j(0, 2) = 0.4;
  j(1, 2) = 0.2;
  j(2, 2) = -0.1;
  // col 3: dFt = 0 -> product 0
  const Vec s = saliency(j, 0);
  CHECK(s[0] == 0.0);
  CHECK(s[1] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(s[2] == 0.0);
  CHECK(s[3] == 0.0);
  for (double v : s) CHECK(v >= 0.0);
  CHECK_THROWS_AS(saliency(j, 5), ContractViolation);
}

TEST_CASE("softmax saliency equals squared target derivative when positive") {
  auto f = trained_lr();
  nd::SeededRng r(403, 0);
  Vec x(8);
  for (auto& v : x) v = r.uniform01();
  const nd::Mat j = f->jacobian(x);
  const Vec s = saliency(j, 1);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double dt = j(1, i);
    if (dt > 0.0)
      CHECK(s[i] == doctest::Approx(dt * dt).epsilon(1e-6));
    else
      CHECK(s[i] == 0.0);
  }
}

TEST_CASE("jsma changes exactly the budgeted component count") {
  auto f = trained_lr(3, 8);
  nd::SeededRng r(404, 0);
  Vec x(8);
  for (auto& v : x) v = r.uniform(0.1, 0.6);
  JsmaConfig cfg;
  cfg.upsilon = 1.0 / 8;  // exactly one component
  cfg.epsilon = 1.0;
  cfg.target = 1;
  const AdversarialRecord one = jsma(*f, x, cfg, 0);
  CHECK(one.components_changed == 1);

  cfg.upsilon = 0.5;  // ceil(0.5*8) = 4 components
  const AdversarialRecord four = jsma(*f, x, cfg, 0);
  if (!four.saliency_exhausted) CHECK(four.components_changed == 4);
  int nonzero = 0;
  for (double d : four.delta)
    if (d != 0.0) ++nonzero;
  CHECK(nonzero == four.components_changed);
}

TEST_CASE("jsma first pick matches the brute-force saliency argmax") {
  auto f = trained_lr(3, 4);
  nd::SeededRng r(405, 0);
  for (int t = 0; t < 10; ++t) {
    Vec x(4);
    for (auto& v : x) v = r.uniform(0.05, 0.7);
    JsmaConfig cfg;
    cfg.upsilon = 0.25;  // one component
    cfg.target = 2;
    const AdversarialRecord rec = jsma(*f, x, cfg, 0);
    if (rec.saliency_exhausted) continue;
    const Vec s = saliency(f->jacobian(x), 2);
    std::size_t best = nd::argmax(s);
    std::size_t picked = 0;
    for (std::size_t i = 0; i < rec.delta.size(); ++i)
      if (rec.delta[i] != 0.0) picked = i;
    CHECK(picked == best);
  }
}

TEST_CASE("jsma determinism") {
  auto f = trained_lr(3, 8);
  Vec x(8, 0.3);
  JsmaConfig cfg;
  cfg.upsilon = 0.4;
  cfg.target = 0;
  const auto a = jsma(*f, x, cfg, 0);
  const auto b = jsma(*f, x, cfg, 0);
  CHECK(a.x_star == b.x_star);
}

TEST_CASE("l1_budget is the published product") {
  CHECK(l1_budget(1.0, 0.4) == doctest::Approx(0.4));
  CHECK(l1_budget(0.4, 1.0) == doctest::Approx(0.4));
  CHECK(l1_budget(0.5, 0.0) == 0.0);
  CHECK_THROWS_AS(l1_budget(0.0, 0.5), ContractViolation);
}

TEST_CASE("record batch file round-trips") {
  auto f = trained_lr();
  nd::SeededRng r(406, 0);
  std::vector<AdversarialRecord> recs;
  for (int i = 0; i < 5; ++i) {
    Vec x(8);
    for (auto& v : x) v = r.uniform01();
    recs.push_back(fgsm(*f, x, f->predict_label(x), 0.25));
  }
  const auto path =
      (std::filesystem::temp_directory_path() / "bba_records_test.bin").string();
  save_records(recs, "eps=0.25", path);
  const RecordBatch back = load_records(path);
  CHECK(back.config_echo == "eps=0.25");
  REQUIRE(back.records.size() == recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(back.records[i].x == recs[i].x);
    CHECK(back.records[i].x_star == recs[i].x_star);
    CHECK(back.records[i].delta == recs[i].delta);
    CHECK(back.records[i].substitute_label == recs[i].substitute_label);
  }
}
