#include <doctest.h>

#include <cmath>

#include "bba/error.hpp"
#include "bba/nd/mat.hpp"
#include "bba/nd/rng.hpp"

using namespace bba;
using namespace bba::nd;

TEST_CASE("sgn maps to the three-valued sign") {
  const Vec v{2.3, -0.1, 0.0};
  const Vec s = sgn(v);
  CHECK(s == Vec{1.0, -1.0, 0.0});

  Mat zero(3, 4);
  CHECK(sgn(zero).data() == Vec(12, 0.0));
}

TEST_CASE("sgn is idempotent") {
  SeededRng r(3, 0);
  Vec v(64);
  for (auto& x : v) x = r.uniform(-2, 2);
  const Vec s1 = sgn(v);
  CHECK(sgn(s1) == s1);
}

TEST_CASE("clamp01 boundary, identity and idempotence") {
  CHECK(clamp01(Vec{-0.2, 0.5, 1.3}) == Vec{0.0, 0.5, 1.0});
  const Vec in{0.0, 0.25, 1.0};
  CHECK(clamp01(in) == in);
  SeededRng r(4, 0);
  Vec v(128);
  for (auto& x : v) x = r.uniform(-4, 4);
  const Vec once = clamp01(v);
  CHECK(clamp01(once) == once);
}

TEST_CASE("argmax picks the lowest index on ties") {
  CHECK(argmax(Vec{0.1, 0.7, 0.2}) == 1);
  CHECK(argmax(Vec{0.5, 0.5}) == 0);
  CHECK_THROWS_AS(argmax(Vec{}), ContractViolation);
  // invariant under adding a constant
  SeededRng r(5, 0);
  for (int t = 0; t < 50; ++t) {
    Vec v(10);
    for (auto& x : v) x = r.uniform(-1, 1);
    Vec shifted = v;
    for (auto& x : shifted) x += 3.7;
    CHECK(argmax(v) == argmax(shifted));
  }
}

TEST_CASE("matmul identity, scalar and triple-loop oracle") {
  Mat id(3, 3);
  for (int i = 0; i < 3; ++i) id(i, i) = 1.0;
  Mat b(3, 2, Vec{1, 2, 3, 4, 5, 6});
  CHECK(matmul(id, b) == b);

  Mat a1(1, 1, Vec{2.0});
  Mat b1(1, 1, Vec{3.0});
  CHECK(matmul(a1, b1)(0, 0) == 6.0);

  SeededRng r(6, 0);
  Mat a(4, 5), c(5, 3);
  for (auto& x : a.data()) x = r.uniform(-1, 1);
  for (auto& x : c.data()) x = r.uniform(-1, 1);
  const Mat prod = matmul(a, c);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < 5; ++p) acc += a(i, p) * c(p, j);
      CHECK(prod(i, j) == doctest::Approx(acc).epsilon(1e-13));
    }

  CHECK_THROWS_AS(matmul(a, b), DimensionError);
}

TEST_CASE("softmax normalizes and respects temperature") {
  Vec z{1.0, 2.0, 3.0};
  softmax_inplace(z);
  double s = z[0] + z[1] + z[2];
  CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(z[2] > z[1]);

  Vec zt{1.0, 2.0, 3.0};
  softmax_inplace(zt, 1000.0);
  CHECK(zt[0] == doctest::Approx(1.0 / 3).epsilon(1e-3));
}

TEST_CASE("fingerprints are exact and order-sensitive") {
  const Vec a{0.1, 0.2};
  const Vec b{0.2, 0.1};
  CHECK(fingerprint_bytes(a) != fingerprint_bytes(b));
  CHECK(fingerprint_bytes(a) == fingerprint_bytes(Vec{0.1, 0.2}));
  CHECK(fingerprint_hash(a) != fingerprint_hash(b));
}

TEST_CASE("require_finite rejects NaN") {
  CHECK_THROWS_AS(require_finite(Vec{0.0, std::nan("")}, "test"), ContractViolation);
}
