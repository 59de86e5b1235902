#include <doctest.h>

#include <cmath>

#include "bba/analysis/metrics.hpp"
#include "bba/analysis/signstats.hpp"
#include "bba/data/dataset.hpp"
#include "bba/error.hpp"
#include "bba/models/train.hpp"
#include "bba/nd/special.hpp"

using namespace bba;
using namespace bba::analysis;
using nd::Vec;

namespace {

std::shared_ptr<const models::Classifier> blob_lr(std::uint64_t seed = 500) {
  const auto ds = data::synth_blobs(3, 8, 50, 0.05, nd::SeededRng(seed, 0));
  models::TrainingConfig cfg;
  cfg.epochs = 10;
  cfg.rng = nd::SeededRng(seed + 1, 0);
  return std::shared_ptr<const models::Classifier>(models::train_logistic(ds, cfg));
}

// Brute-force numeric integration of the chi-square density on [0, stat],
// the independent oracle for the survival routine.
double chisq_pdf(double x, double a) {
  if (x <= 0.0) return 0.0;
  return std::exp((a - 1.0) * std::log(x) - x / 2.0 - a * std::log(2.0) - std::lgamma(a));
}

double simpson_adapt(double a, double lo, double hi, double flo, double fmid, double fhi,
                     int depth) {
  const double mid = 0.5 * (lo + hi);
  const double lmid = 0.5 * (lo + mid);
  const double rmid = 0.5 * (mid + hi);
  const double flm = chisq_pdf(lmid, a);
  const double frm = chisq_pdf(rmid, a);
  const double whole = (hi - lo) / 6.0 * (flo + 4 * fmid + fhi);
  const double left = (mid - lo) / 6.0 * (flo + 4 * flm + fmid);
  const double right = (hi - mid) / 6.0 * (fmid + 4 * frm + fhi);
  if (depth > 42 || std::fabs(left + right - whole) < 1e-13)
    return left + right + (left + right - whole) / 15.0;
  return simpson_adapt(a, lo, mid, flo, flm, fmid, depth + 1) +
         simpson_adapt(a, mid, hi, fmid, frm, fhi, depth + 1);
}

double integrate_pdf(double a, double lo, double hi) {
  const double mid = 0.5 * (lo + hi);
  return simpson_adapt(a, lo, hi, chisq_pdf(lo, a), chisq_pdf(mid, a), chisq_pdf(hi, a), 0);
}

double gauss_kernel(double u) { return std::exp(-0.5 * u * u); }

double simpson_gauss(double lo, double hi, double flo, double fmid, double fhi, int depth) {
  const double mid = 0.5 * (lo + hi);
  const double lmid = 0.5 * (lo + mid);
  const double rmid = 0.5 * (mid + hi);
  const double flm = gauss_kernel(lmid);
  const double frm = gauss_kernel(rmid);
  const double whole = (hi - lo) / 6.0 * (flo + 4 * fmid + fhi);
  const double left = (mid - lo) / 6.0 * (flo + 4 * flm + fmid);
  const double right = (hi - mid) / 6.0 * (fmid + 4 * frm + fhi);
  if (depth > 42 || std::fabs(left + right - whole) < 1e-14)
    return left + right + (left + right - whole) / 15.0;
  return simpson_gauss(lo, mid, flo, flm, fmid, depth + 1) +
         simpson_gauss(mid, hi, fmid, frm, fhi, depth + 1);
}

double chisq_survival_quadrature(double stat, double dof) {
  if (dof == 1.0) {
    // x = u^2 removes the x^{-1/2} singularity: the mass below stat is
    // sqrt(2/pi) * integral_0^sqrt(stat) exp(-u^2/2) du.
    const double hi = std::sqrt(stat);
    const double mass = std::sqrt(2.0 / M_PI) *
                        simpson_gauss(0.0, hi, 1.0, gauss_kernel(hi / 2), gauss_kernel(hi), 0);
    return 1.0 - mass;
  }
  const double a = dof / 2.0;
  // Split at the mode for stability at large dof.
  const double mode = std::max(dof - 2.0, 0.0);
  double mass = 0.0;
  if (stat <= mode)
    mass = integrate_pdf(a, 0.0, stat);
  else
    mass = integrate_pdf(a, 0.0, mode) + integrate_pdf(a, mode, stat);
  return 1.0 - mass;
}

}  // namespace

TEST_CASE("p-value routine matches numeric integration at dof 1, 4, 729") {
  const struct {
    double dof;
    std::vector<double> stats;
  } cases[] = {
      {1.0, {0.1, 1.0, 3.84, 10.0}},
      {4.0, {0.5, 4.0, 9.49, 20.0}},
      {729.0, {596.0, 670.0, 729.0, 800.0, 900.0}},
  };
  for (const auto& c : cases)
    for (double s : c.stats) {
      const double mine = nd::chi_square_survival(s, c.dof);
      const double oracle = chisq_survival_quadrature(s, c.dof);
      CHECK(std::fabs(mine - oracle) < 1e-8);
    }
}

TEST_CASE("chi-square independence fixed point: r = p*q gives stat 0, p-value 1") {
  FrequencyTriple f{nd::Mat(2, 2), nd::Mat(2, 2), nd::Mat(2, 2), 100};
  for (std::size_t i = 0; i < 4; ++i) {
    f.p.data()[i] = 0.4;
    f.q.data()[i] = 0.7;
    f.r.data()[i] = 0.4 * 0.7;
  }
  const ChiSquareResult res = chi_square(f);
  CHECK(res.stat == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(res.p_value == 1.0);
  CHECK(res.dof == 1);
}

TEST_CASE("chi-square is symmetric in sequence relabeling") {
  FrequencyTriple f{nd::Mat(3, 3), nd::Mat(3, 3), nd::Mat(3, 3), 50};
  nd::SeededRng r(600, 0);
  for (std::size_t i = 0; i < 9; ++i) {
    f.p.data()[i] = r.uniform(0.2, 0.8);
    f.q.data()[i] = r.uniform(0.2, 0.8);
    f.r.data()[i] = r.uniform(0.05, 0.2);
  }
  FrequencyTriple swapped{f.q, f.p, f.r, f.samples};
  CHECK(chi_square(f).stat == doctest::Approx(chi_square(swapped).stat).epsilon(1e-12));
}

TEST_CASE("frequencies: identical, independent and constant sequences") {
  nd::SeededRng r(601, 0);
  SignMatrixSequence s1, s2;
  s1.rows = s2.rows = 4;
  s1.cols = s2.cols = 4;
  const int n = 10000;
  for (int k = 0; k < n; ++k) {
    nd::Mat a(4, 4), b(4, 4);
    for (auto& v : a.data()) v = r.uniform01() < 0.5 ? -1.0 : 1.0;
    for (auto& v : b.data()) v = r.uniform01() < 0.5 ? -1.0 : 1.0;
    s1.matrices.push_back(a);
    s2.matrices.push_back(b);
  }
  // identical sequences: r == p (up to smoothing), massive correlation
  const FrequencyTriple same = frequencies(s1, s1);
  for (std::size_t i = 0; i < same.p.data().size(); ++i)
    CHECK(same.r.data()[i] == doctest::Approx(same.p.data()[i]).epsilon(1e-3));
  CHECK(chi_square(same).p_value < 1e-5);

  // independent fair coins: r ~ p*q within 0.02
  const FrequencyTriple ind = frequencies(s1, s2);
  for (std::size_t i = 0; i < ind.p.data().size(); ++i)
    CHECK(std::fabs(ind.r.data()[i] - ind.p.data()[i] * ind.q.data()[i]) < 0.02);
  CHECK(chi_square(ind).p_value > 0.5);

  // all-(+1) sequences: p = q = r = (N+1)/(N+2)
  SignMatrixSequence ones;
  ones.rows = ones.cols = 2;
  for (int k = 0; k < 10; ++k) {
    nd::Mat m(2, 2);
    for (auto& v : m.data()) v = 1.0;
    ones.matrices.push_back(m);
  }
  const FrequencyTriple all1 = frequencies(ones, ones);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(all1.p.data()[i] == doctest::Approx(11.0 / 12.0));
    CHECK(all1.r.data()[i] == doctest::Approx(11.0 / 12.0));
  }
}

TEST_CASE("sign_sequence resolves zeros to +1 and sizes follow samples") {
  models::Network zero(models::logistic_architecture(16, 3));
  models::LogisticClassifier constant(std::move(zero));
  std::vector<Vec> xs(7, Vec(16, 0.3));
  std::vector<int> ys(7, 1);
  const SignMatrixSequence seq = sign_sequence(constant, xs, ys, 4, 4, "const");
  CHECK(seq.count() == 7);
  for (const auto& m : seq.matrices)
    for (double v : m.data()) CHECK(v == 1.0);
}

TEST_CASE("per-class frequencies restrict and flag empties") {
  auto model = blob_lr();
  nd::SeededRng r(602, 0);
  std::vector<Vec> xs;
  std::vector<int> ys;
  for (int i = 0; i < 30; ++i) {
    Vec x(8);
    for (auto& v : x) v = r.uniform01();
    xs.push_back(x);
    ys.push_back(i % 2);  // classes 0 and 1 only; class 2 empty
  }
  const auto s1 = sign_sequence(*model, xs, ys, 2, 4, "a");
  const auto s2 = sign_sequence(*model, xs, ys, 2, 4, "b");
  const auto per = per_class_frequencies(s1, s2, ys, 3);
  REQUIRE(per.size() == 3);
  CHECK(per[0].has_value());
  CHECK(per[1].has_value());
  CHECK_FALSE(per[2].has_value());
  CHECK(per[0]->samples + per[1]->samples == 30);
}

TEST_CASE("metrics: identity substitute, delta-zero records, order independence") {
  auto model = blob_lr();
  oracle::OracleHandle o = oracle::OracleHandle::local(model);
  const auto ds = data::synth_blobs(3, 8, 20, 0.05, nd::SeededRng(603, 0));

  // agreement of the oracle's own model is 1
  CHECK(agreement(*model, o, ds.inputs) == 1.0);

  // delta = 0 records: transferability reduces to the oracle's plain error
  std::vector<craft::AdversarialRecord> recs;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    craft::AdversarialRecord r;
    r.x = ds.inputs[i];
    r.x_star = ds.inputs[i];
    r.delta.assign(8, 0.0);
    r.source_label = ds.labels[i];
    r.substitute_label = model->predict_label(ds.inputs[i]);
    recs.push_back(std::move(r));
  }
  double plain_err = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (model->predict_label(ds.inputs[i]) != ds.labels[i]) plain_err += 1.0;
  plain_err /= static_cast<double>(ds.size());

  oracle::OracleHandle eval = oracle::OracleHandle::local(model);
  const double t1 = transferability(eval, recs);
  CHECK(t1 == doctest::Approx(plain_err));
  CHECK(success_rate(recs) == doctest::Approx(plain_err));

  // cache determinism + order independence
  const double t2 = transferability(eval, recs);
  CHECK(t1 == t2);
  std::reverse(recs.begin(), recs.end());
  CHECK(transferability(eval, recs) == t1);

  // confusion columns normalize to 1
  const ConfusionMatrix cm = confusion(eval, recs);
  const nd::Mat norm = cm.normalized();
  for (std::size_t c = 0; c < norm.cols(); ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < norm.rows(); ++r) sum += norm(r, c);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}
