#pragma once

#include <span>
#include <string>
#include <vector>

#include "bba/craft/craft.hpp"
#include "bba/data/dataset.hpp"
#include "bba/oracle/oracle.hpp"

namespace bba::analysis {

using craft::AdversarialRecord;
using models::Classifier;
using nd::Vec;

/// Fraction of records whose substitute verdict differs from the source
/// label. Throws on empty input.
double success_rate(std::span<const AdversarialRecord> records);

/// Fraction of records whose x* the oracle labels differently from the
/// source label. Queries (and caches) through the given handle, filling
/// oracle_label on each record; charge this to an evaluation ledger.
double transferability(oracle::OracleHandle& o, std::span<AdversarialRecord> records);

/// Fraction of inputs where the substitute's label matches the oracle's.
double agreement(const Classifier& substitute, oracle::OracleHandle& o,
                 std::span<const Vec> inputs);

/// Oracle-verdict confusion: counts(x, y) tallies records with source class
/// y labeled x by the oracle. The normalized view divides each column by
/// its count.
struct ConfusionMatrix {
  nd::Mat counts;
  nd::Mat normalized() const;
};
ConfusionMatrix confusion(oracle::OracleHandle& o, std::span<AdversarialRecord> records);

std::string confusion_csv(const ConfusionMatrix& cm);

}  // namespace bba::analysis
