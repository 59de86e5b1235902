#include "bba/analysis/metrics.hpp"

#include <charconv>

#include "bba/error.hpp"

namespace bba::analysis {

double success_rate(std::span<const AdversarialRecord> records) {
  if (records.empty()) throw ContractViolation("success_rate: no records");
  std::size_t miss = 0;
  for (const auto& r : records)
    if (r.substitute_label != r.source_label) ++miss;
  return static_cast<double>(miss) / static_cast<double>(records.size());
}

double transferability(oracle::OracleHandle& o, std::span<AdversarialRecord> records) {
  if (records.empty()) throw ContractViolation("transferability: no records");
  std::size_t miss = 0;
  for (auto& r : records) {
    r.oracle_label = o.query_label(r.x_star);
    if (r.oracle_label != r.source_label) ++miss;
  }
  return static_cast<double>(miss) / static_cast<double>(records.size());
}

double agreement(const Classifier& substitute, oracle::OracleHandle& o,
                 std::span<const Vec> inputs) {
  if (inputs.empty()) throw ContractViolation("agreement: no inputs");
  std::size_t match = 0;
  for (const Vec& x : inputs)
    if (substitute.predict_label(x) == o.query_label(x)) ++match;
  return static_cast<double>(match) / static_cast<double>(inputs.size());
}

ConfusionMatrix confusion(oracle::OracleHandle& o, std::span<AdversarialRecord> records) {
  if (records.empty()) throw ContractViolation("confusion: no records");
  const std::size_t n = static_cast<std::size_t>(o.classes());
  ConfusionMatrix cm{nd::Mat(n, n)};
  for (auto& r : records) {
    r.oracle_label = o.query_label(r.x_star);
    if (r.source_label < 0 || static_cast<std::size_t>(r.source_label) >= n)
      throw ContractViolation("confusion: source label out of range");
    cm.counts(static_cast<std::size_t>(r.oracle_label),
              static_cast<std::size_t>(r.source_label)) += 1.0;
  }
  return cm;
}

nd::Mat ConfusionMatrix::normalized() const {
  nd::Mat out(counts.rows(), counts.cols());
  for (std::size_t c = 0; c < counts.cols(); ++c) {
    double total = 0.0;
    for (std::size_t r = 0; r < counts.rows(); ++r) total += counts(r, c);
    if (total == 0.0) continue;
    for (std::size_t r = 0; r < counts.rows(); ++r) out(r, c) = counts(r, c) / total;
  }
  return out;
}

std::string confusion_csv(const ConfusionMatrix& cm) {
  const nd::Mat norm = cm.normalized();
  std::string out = "oracle_class";
  for (std::size_t c = 0; c < norm.cols(); ++c) out += ",source_" + std::to_string(c);
  out += '\n';
  char buf[64];
  for (std::size_t r = 0; r < norm.rows(); ++r) {
    out += std::to_string(r);
    for (std::size_t c = 0; c < norm.cols(); ++c) {
      out += ',';
      const auto res = std::to_chars(buf, buf + sizeof buf, norm(r, c));
      out.append(buf, res.ptr);
    }
    out += '\n';
  }
  return out;
}

}  // namespace bba::analysis
