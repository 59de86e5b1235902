#include "bba/craft/craft.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>

#include "bba/error.hpp"
#include "bba/nd/kernels.hpp"

namespace bba::craft {

void FgsmConfig::validate() const {
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    throw ConfigError("fgsm: epsilon must be in (0, 1]");
}

void JsmaConfig::validate(int classes) const {
  if (!(upsilon > 0.0 && upsilon <= 1.0))
    throw ConfigError("jsma: upsilon must be in (0, 1]");
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    throw ConfigError("jsma: epsilon must be in (0, 1]");
  if (target < 0 || target >= classes) throw ConfigError("jsma: target out of range");
}

namespace {

void finalize(AdversarialRecord& r, const Classifier& f) {
  const auto& k = nd::kern::kernels();
  r.delta.resize(r.x.size());
  k.sub(r.x_star.data(), r.x.data(), r.delta.data(), r.delta.size());
  int changed = 0;
  for (double d : r.delta)
    if (d != 0.0) ++changed;
  r.components_changed = changed;
  r.substitute_label = f.predict_label(r.x_star);
}

}  // namespace

AdversarialRecord fgsm(const Classifier& f, const Vec& x, int y_grad, double eps,
                       std::optional<int> source_label) {
  FgsmConfig{eps}.validate();
  if (!f.differentiable()) throw UnsupportedOperation("fgsm: model kind has no gradients");
  const auto& k = nd::kern::kernels();
  const Vec g = f.input_cost_gradient(x, y_grad);
  AdversarialRecord r;
  r.x = x;
  r.x_star.resize(x.size());
  k.sgn(g.data(), r.x_star.data(), g.size());
  k.scale(eps, r.x_star.data(), r.x_star.data(), g.size());
  k.add(x.data(), r.x_star.data(), r.x_star.data(), g.size());
  nd::clamp01_inplace(r.x_star);
  r.source_label = source_label.value_or(y_grad);
  finalize(r, f);
  return r;
}

Vec saliency(const Mat& jacobian, int t) {
  if (t < 0 || static_cast<std::size_t>(t) >= jacobian.rows())
    throw ContractViolation("saliency: target class out of range");
  const std::size_t m = jacobian.cols();
  Vec s(m, 0.0);
  const double* target_row = jacobian.row(static_cast<std::size_t>(t));
  for (std::size_t i = 0; i < m; ++i) {
    const double dt = target_row[i];
    if (dt < 0.0) continue;
    double others = 0.0;
    for (std::size_t r = 0; r < jacobian.rows(); ++r)
      if (static_cast<int>(r) != t) others += jacobian(r, i);
    if (others > 0.0) continue;
    s[i] = dt * std::fabs(others);
  }
  return s;
}

AdversarialRecord jsma(const Classifier& f, const Vec& x, const JsmaConfig& cfg,
                       std::optional<int> source_label) {
  cfg.validate(f.n_classes());
  if (!f.differentiable()) throw UnsupportedOperation("jsma: model kind has no gradients");
  const std::size_t m = x.size();
  const int budget = static_cast<int>(std::ceil(cfg.upsilon * static_cast<double>(m)));

  AdversarialRecord r;
  r.x = x;
  r.x_star = x;
  r.source_label = source_label.value_or(-1);
  std::vector<bool> perturbed(m, false);
  int changed = 0;
  while (changed < budget) {
    const Mat j = f.jacobian(r.x_star);
    const Vec s = saliency(j, cfg.target);
    // Max-saliency unperturbed component that can still move; lowest index
    // wins ties.
    std::size_t pick = m;
    double best = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (perturbed[i] || r.x_star[i] >= 1.0) continue;
      if (s[i] > best) {
        best = s[i];
        pick = i;
      }
    }
    if (pick == m) {
      r.saliency_exhausted = true;
      break;
    }
    perturbed[pick] = true;
    r.x_star[pick] = std::min(1.0, r.x_star[pick] + cfg.epsilon);
    ++changed;
  }
  finalize(r, f);
  return r;
}

double l1_budget(double eps, double changed_fraction) {
  if (!(eps > 0.0 && eps <= 1.0) || changed_fraction < 0.0 || changed_fraction > 1.0)
    throw ContractViolation("l1_budget: arguments outside (0,1] x [0,1]");
  return eps * changed_fraction;
}

namespace {

constexpr char kBatchMagic[4] = {'B', 'B', 'A', 'R'};

void put_u64(std::ostream& o, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  o.write(b, 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw IoError("records: truncated stream");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
  return v;
}

void put_vec(std::ostream& o, const Vec& v) {
  put_u64(o, v.size());
  for (double d : v) put_u64(o, std::bit_cast<std::uint64_t>(d));
}

Vec get_vec(std::istream& in) {
  Vec v(get_u64(in));
  for (double& d : v) d = std::bit_cast<double>(get_u64(in));
  return v;
}

}  // namespace

void save_records(std::span<const AdversarialRecord> records, const std::string& config_echo,
                  const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("records: cannot write " + path);
  out.write(kBatchMagic, 4);
  put_u64(out, config_echo.size());
  out.write(config_echo.data(), static_cast<std::streamsize>(config_echo.size()));
  put_u64(out, records.size());
  for (const AdversarialRecord& r : records) {
    put_vec(out, r.x);
    put_vec(out, r.x_star);
    put_u64(out, static_cast<std::uint64_t>(static_cast<std::int64_t>(r.source_label)));
    put_u64(out, static_cast<std::uint64_t>(static_cast<std::int64_t>(r.substitute_label)));
    put_u64(out, static_cast<std::uint64_t>(static_cast<std::int64_t>(r.oracle_label)));
    put_u64(out, static_cast<std::uint64_t>(r.components_changed));
    put_u64(out, r.saliency_exhausted ? 1 : 0);
  }
}

RecordBatch load_records(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("records: cannot open " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::string_view(magic, 4) != std::string_view(kBatchMagic, 4))
    throw IoError("records: bad magic");
  RecordBatch batch;
  batch.config_echo.resize(get_u64(in));
  if (!batch.config_echo.empty() &&
      !in.read(batch.config_echo.data(),
               static_cast<std::streamsize>(batch.config_echo.size())))
    throw IoError("records: truncated config echo");
  const std::uint64_t n = get_u64(in);
  batch.records.resize(n);
  const auto& k = nd::kern::kernels();
  for (auto& r : batch.records) {
    r.x = get_vec(in);
    r.x_star = get_vec(in);
    r.source_label = static_cast<int>(static_cast<std::int64_t>(get_u64(in)));
    r.substitute_label = static_cast<int>(static_cast<std::int64_t>(get_u64(in)));
    r.oracle_label = static_cast<int>(static_cast<std::int64_t>(get_u64(in)));
    r.components_changed = static_cast<int>(get_u64(in));
    r.saliency_exhausted = get_u64(in) != 0;
    r.delta.resize(r.x.size());
    k.sub(r.x_star.data(), r.x.data(), r.delta.data(), r.delta.size());
  }
  return batch;
}

}  // namespace bba::craft
