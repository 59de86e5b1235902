#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bba/data/dataset.hpp"
#include "bba/error.hpp"
#include "bba/models/classifier.hpp"
#include "bba/models/train.hpp"

using namespace bba;
using namespace bba::models;

namespace {

data::LabeledDataset separable_blobs(int classes = 2, int dims = 6, int per_class = 40) {
  // Small spread vs center distance: linearly separable by construction.
  return data::synth_blobs(classes, dims, per_class, 0.01, nd::SeededRng(99, 0));
}

}  // namespace

TEST_CASE("architecture registry matches the published table") {
  auto cm = [](int f) { return LayerSpec{LayerKind::ConvMax, f}; };
  auto d = [](int u) { return LayerSpec{LayerKind::Dense, u}; };
  auto rl = LayerSpec{LayerKind::ReLU, 0};
  auto sg = LayerSpec{LayerKind::Sigmoid, 0};
  auto sm = LayerSpec{LayerKind::Softmax, 0};

  struct Row {
    const char* id;
    int in, out;
    std::vector<LayerSpec> layers;
  };
  const std::vector<Row> table = {
      {"A", 784, 10, {cm(32), cm(64), d(200), rl, d(200), rl, d(10), sm}},
      {"B", 3072, 43, {cm(64), cm(128), d(256), rl, d(256), rl, d(43), sm}},
      {"C", 3072, 43, {cm(32), cm(64), d(200), rl, d(200), rl, d(43), sm}},
      {"D", 3072, 43, {cm(32), cm(64), d(200), rl, d(200), rl, d(43), sm}},
      {"E", 3072, 43, {cm(64), cm(64), d(200), rl, d(200), rl, d(100), rl, d(43), sm}},
      {"F", 784, 10, {cm(32), cm(64), d(200), rl, d(10), sm}},
      {"G", 784, 10, {cm(32), cm(64), d(10), sm}},
      {"H", 784, 10, {cm(32), d(200), rl, d(200), rl, d(10), sm}},
      {"I", 784, 10, {d(200), rl, d(200), rl, d(200), rl, d(10), sm}},
      {"J", 784, 10, {d(1000), rl, d(200), rl, d(10), sm}},
      {"K", 784, 10, {d(1000), rl, d(500), rl, d(200), rl, d(10), sm}},
      {"L", 784, 10, {cm(32), d(1000), rl, d(200), rl, d(10), sm}},
      {"M", 784, 10, {cm(32), d(200), sg, d(200), sg, d(10), sm}},
  };
  REQUIRE(architecture_registry().size() == table.size());
  for (const Row& row : table) {
    const ArchitectureSpec a = registry_architecture(row.id);
    CHECK(a.in_dim == row.in);
    CHECK(a.out_dim == row.out);
    CHECK(a.layers == row.layers);
  }
}

TEST_CASE("custom architecture DSL") {
  const ArchitectureSpec a = make_architecture("cm8-cm16-d64r", 28, 28, 1, 10);
  REQUIRE(a.layers.size() == 6);
  CHECK(a.layers[0] == LayerSpec{LayerKind::ConvMax, 8});
  CHECK(a.layers[3] == LayerSpec{LayerKind::ReLU, 0});
  CHECK(a.layers[4] == LayerSpec{LayerKind::Dense, 10});
  CHECK(a.layers[5] == LayerSpec{LayerKind::Softmax, 0});
  CHECK_THROWS_AS(make_architecture("frob42", 28, 28, 1, 10), ConfigError);
  CHECK_THROWS_AS(make_architecture("A", 16, 16, 1, 10), ConfigError);
}

TEST_CASE("zero-weight network outputs the uniform distribution") {
  Network net(make_architecture("d16r", 4, 4, 1, 10));
  // params left at zero
  const Vec p = net.forward(Vec(16, 0.3));
  for (double v : p) CHECK(v == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("forward outputs normalize across kinds") {
  const auto ds = separable_blobs(3, 6, 30);
  TrainingConfig cfg;
  cfg.epochs = 3;
  cfg.rng = nd::SeededRng(1, 1);

  std::vector<std::unique_ptr<Classifier>> models;
  models.push_back(train_network(make_architecture("d12r", 1, 6, 1, 3), ds, cfg));
  models.push_back(train_logistic(ds, cfg));
  models.push_back(train_linear_svm(ds, cfg));
  models.push_back(train_decision_tree(ds));
  models.push_back(train_knn(ds, 3));

  nd::SeededRng rng(7, 7);
  for (const auto& m : models) {
    for (int t = 0; t < 40; ++t) {
      Vec x(6);
      for (auto& v : x) v = rng.uniform01();
      const Vec p = m->forward(x);
      REQUIRE(p.size() == 3);
      double sum = 0.0;
      for (double v : p) {
        CHECK(v >= 0.0);
        sum += v;
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("cost basics") {
  Network net(logistic_architecture(4, 10));
  NetworkClassifier c(std::move(net));
  // zero weights -> uniform 10-class output -> cost = ln 10
  CHECK(c.cost(Vec{0.1, 0.2, 0.3, 0.4}, 3) == doctest::Approx(std::log(10.0)).epsilon(1e-12));
  CHECK(c.cost(Vec{0.1, 0.2, 0.3, 0.4}, 0) >= 0.0);
}

TEST_CASE("non-differentiable kinds refuse gradients") {
  const auto ds = separable_blobs();
  auto tree = train_decision_tree(ds);
  auto knn = train_knn(ds, 1);
  CHECK_THROWS_AS(tree->cost(ds.inputs[0], 0), UnsupportedOperation);
  CHECK_THROWS_AS(knn->input_cost_gradient(ds.inputs[0], 0), UnsupportedOperation);
  CHECK_THROWS_AS(tree->jacobian(ds.inputs[0]), UnsupportedOperation);
  CHECK_FALSE(tree->differentiable());
}

TEST_CASE("knn with k=1 is one-hot at a stored point") {
  const auto ds = separable_blobs();
  auto knn = train_knn(ds, 1);
  const Vec p = knn->forward(ds.inputs[5]);
  CHECK(p[static_cast<std::size_t>(ds.labels[5])] == 1.0);
}

TEST_CASE("every kind separates easy blobs at 100% train accuracy") {
  const auto ds = separable_blobs(2, 6, 40);
  TrainingConfig cfg;
  cfg.epochs = 30;
  cfg.rng = nd::SeededRng(3, 1);
  CHECK(accuracy(*train_network(make_architecture("d8r", 1, 6, 1, 2), ds, cfg), ds) == 1.0);
  CHECK(accuracy(*train_logistic(ds, cfg), ds) == 1.0);
  CHECK(accuracy(*train_linear_svm(ds, cfg), ds) == 1.0);
  CHECK(accuracy(*train_decision_tree(ds), ds) == 1.0);
  CHECK(accuracy(*train_knn(ds, 3), ds) == 1.0);
}

TEST_CASE("training reduces mean cross-entropy") {
  const auto ds = data::synth_blobs(3, 8, 50, 0.08, nd::SeededRng(123, 0));
  TrainingConfig cfg;
  cfg.epochs = 8;
  cfg.rng = nd::SeededRng(5, 1);
  Network untrained(make_architecture("d16r", 1, 8, 1, 3));
  untrained.init_params(cfg.rng.child(0));
  NetworkClassifier before(std::move(untrained));
  const double cost_before = mean_cost(before, ds);
  auto after = train_network(make_architecture("d16r", 1, 8, 1, 3), ds, cfg);
  CHECK(mean_cost(*after, ds) < cost_before);
}

TEST_CASE("training is bit-deterministic given the same rng") {
  const auto ds = separable_blobs(3, 16, 20);
  TrainingConfig cfg;
  cfg.epochs = 4;
  cfg.rng = nd::SeededRng(77, 2);
  auto a = train_network(make_architecture("cm4-d8r", 4, 4, 1, 3), ds, cfg);
  auto b = train_network(make_architecture("cm4-d8r", 4, 4, 1, 3), ds, cfg);
  // Serialize both; streams must match byte for byte.
  std::ostringstream sa, sb;
  a->save(sa);
  b->save(sb);
  CHECK(sa.str() == sb.str());
}

TEST_CASE("predict_label tie-break and invariances") {
  Network net(logistic_architecture(4, 5));
  NetworkClassifier c(std::move(net));
  // uniform output -> class 0
  CHECK(c.predict_label(Vec{0.5, 0.5, 0.5, 0.5}) == 0);
}

TEST_CASE("serialization round trip is bit exact across kinds") {
  const auto ds = separable_blobs(3, 16, 25);
  TrainingConfig cfg;
  cfg.epochs = 3;
  cfg.rng = nd::SeededRng(11, 4);

  std::vector<std::unique_ptr<Classifier>> models;
  models.push_back(train_network(make_architecture("cm4-d8r", 4, 4, 1, 3), ds, cfg));
  models.push_back(train_logistic(ds, cfg));
  models.push_back(train_linear_svm(ds, cfg));
  models.push_back(train_decision_tree(ds));
  models.push_back(train_knn(ds, 3));

  nd::SeededRng rng(13, 13);
  for (const auto& m : models) {
    std::ostringstream out;
    m->save(out);
    std::istringstream in(out.str());
    auto loaded = Classifier::load(in);
    REQUIRE(loaded->kind() == m->kind());
    std::ostringstream out2;
    loaded->save(out2);
    CHECK(out.str() == out2.str());
    for (int t = 0; t < 10; ++t) {
      Vec x(16);
      for (auto& v : x) v = rng.uniform01();
      CHECK(m->forward(x) == loaded->forward(x));
    }
  }
}

TEST_CASE("convmax geometry composes on odd grids") {
  // 6x6 -> conv 5x5 -> pool 2x2 (odd edge dropped), per filter.
  Network net(make_architecture("cm3", 6, 6, 1, 4));
  nd::SeededRng rng(17, 0);
  Network::Trace t;
  Vec x(36);
  for (auto& v : x) v = rng.uniform01();
  net.init_params(rng.child(1));
  net.forward_trace(x, t);
  CHECK(t.out[0].size() == 3u * 2 * 2);
}
