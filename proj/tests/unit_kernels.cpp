#include <doctest.h>

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "bba/nd/kernels.hpp"
#include "bba/nd/rng.hpp"

using namespace bba::nd;

namespace {

std::vector<double> random_buf(SeededRng& r, std::size_t n, bool spicy = false) {
  std::vector<double> v(n);
  for (auto& x : v) {
    x = r.uniform(-3.0, 3.0);
    if (spicy) {
      const auto pick = r.below(16);
      if (pick == 0) x = 0.0;
      if (pick == 1) x = -0.0;
      if (pick == 2) x *= 1e-300;
      if (pick == 3) x *= 1e300;
    }
  }
  return v;
}

bool bits_equal(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i]))
      return false;
  return true;
}

}  // namespace

// Every available variant must be bit-identical to the scalar reference,
// including awkward lengths (tails) and extreme magnitudes.
TEST_CASE("kernel variants are bit-identical to the scalar reference") {
  const auto& ref = kern::scalar_kernels();
  SeededRng rng(2024, 0);
  for (const auto* table : kern::available_kernels()) {
    CAPTURE(table->name);
    for (std::size_t n : {std::size_t{1}, std::size_t{3}, std::size_t{4}, std::size_t{7},
                          std::size_t{8}, std::size_t{64}, std::size_t{1023}}) {
      auto a = random_buf(rng, n, true);
      auto b = random_buf(rng, n, true);
      std::vector<double> out_ref(n), out_var(n);

      ref.add(a.data(), b.data(), out_ref.data(), n);
      table->add(a.data(), b.data(), out_var.data(), n);
      REQUIRE(bits_equal(out_ref, out_var));

      ref.sub(a.data(), b.data(), out_ref.data(), n);
      table->sub(a.data(), b.data(), out_var.data(), n);
      REQUIRE(bits_equal(out_ref, out_var));

      ref.mul(a.data(), b.data(), out_ref.data(), n);
      table->mul(a.data(), b.data(), out_var.data(), n);
      REQUIRE(bits_equal(out_ref, out_var));

      ref.scale(1.7, a.data(), out_ref.data(), n);
      table->scale(1.7, a.data(), out_var.data(), n);
      REQUIRE(bits_equal(out_ref, out_var));

      auto y_ref = b, y_var = b;
      ref.axpy(-0.31, a.data(), y_ref.data(), n);
      table->axpy(-0.31, a.data(), y_var.data(), n);
      REQUIRE(bits_equal(y_ref, y_var));

      const double d_ref = ref.dot(a.data(), b.data(), n);
      const double d_var = table->dot(a.data(), b.data(), n);
      REQUIRE(std::bit_cast<std::uint64_t>(d_ref) == std::bit_cast<std::uint64_t>(d_var));

      ref.relu(a.data(), out_ref.data(), n);
      table->relu(a.data(), out_var.data(), n);
      REQUIRE(bits_equal(out_ref, out_var));

      ref.relu_bwd(a.data(), b.data(), out_ref.data(), n);
      table->relu_bwd(a.data(), b.data(), out_var.data(), n);
      REQUIRE(bits_equal(out_ref, out_var));

      ref.clamp01(a.data(), out_ref.data(), n);
      table->clamp01(a.data(), out_var.data(), n);
      REQUIRE(bits_equal(out_ref, out_var));

      ref.sgn(a.data(), out_ref.data(), n);
      table->sgn(a.data(), out_var.data(), n);
      REQUIRE(bits_equal(out_ref, out_var));
    }
  }
}

TEST_CASE("dot matches a plain sequential sum within rounding") {
  SeededRng rng(5, 5);
  const auto a = random_buf(rng, 501);
  const auto b = random_buf(rng, 501);
  double plain = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) plain += a[i] * b[i];
  const double lane = kern::kernels().dot(a.data(), b.data(), a.size());
  CHECK(lane == doctest::Approx(plain).epsilon(1e-12));
}

TEST_CASE("kernel selection") {
  REQUIRE(kern::select_kernels("scalar"));
  CHECK(std::string(kern::kernels().name) == "scalar");
  CHECK_FALSE(kern::select_kernels("no-such-isa"));
  // Restore the default for the rest of the suite.
  for (const auto* t : kern::available_kernels()) kern::select_kernels(t->name);
}
