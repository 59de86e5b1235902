#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "bba/data/dataset.hpp"
#include "bba/error.hpp"

using namespace bba;
using namespace bba::data;

namespace {
std::filesystem::path tmp_dir() {
  auto p = std::filesystem::temp_directory_path() / "bba_data_test";
  std::filesystem::create_directories(p);
  return p;
}
}  // namespace

TEST_CASE("idx round trip and validation") {
  nd::SeededRng rng(11, 0);
  LabeledDataset ds = synth_digits(40, rng);
  ds.validate();
  const auto dir = tmp_dir();
  const auto img = (dir / "img.idx").string();
  const auto lab = (dir / "lab.idx").string();
  save_idx(ds, img, lab);
  LabeledDataset back = load_idx(img, lab);
  CHECK(back.size() == ds.size());
  CHECK(back.rows == 28);
  CHECK(back.cols == 28);
  CHECK(back.labels == ds.labels);
  // Pixels quantized to bytes: reload matches within half a byte step.
  for (std::size_t i = 0; i < ds.size(); ++i)
    for (std::size_t p = 0; p < ds.inputs[i].size(); ++p)
      CHECK(std::abs(back.inputs[i][p] - ds.inputs[i][p]) <= 0.5 / 255.0 + 1e-12);
  back.validate();
}

TEST_CASE("idx rejects bad magic and truncation") {
  const auto dir = tmp_dir();
  const auto bad = (dir / "bad.idx").string();
  {
    std::ofstream f(bad, std::ios::binary);
    const char junk[8] = {0, 0, 1, 9, 0, 0, 0, 1};
    f.write(junk, 8);
  }
  CHECK_THROWS_AS(load_idx(bad, bad), IoError);
}

TEST_CASE("csv round trip is bit exact and auto-scales byte data") {
  const auto dir = tmp_dir();
  LabeledDataset ds;
  ds.rows = 1;
  ds.cols = 3;
  ds.classes = 2;
  ds.inputs = {{0.0, 0.5, 1.0}, {0.125, 0.2499999999999999, 0.3}, {0.0, 0.0, 0.0}};
  ds.labels = {0, 1, 0};
  const auto path = (dir / "toy.csv").string();
  save_csv(ds, path, 0);
  LabeledDataset back = load_csv(path, 0);
  REQUIRE(back.size() == 3);
  CHECK(back.labels == ds.labels);
  for (std::size_t i = 0; i < 3; ++i) CHECK(back.inputs[i] == ds.inputs[i]);

  const auto bytes = (dir / "bytes.csv").string();
  {
    std::ofstream f(bytes);
    f << "1,0,128,255\n0,64,0,32\n";
  }
  LabeledDataset scaled = load_csv(bytes, 0);
  CHECK(scaled.inputs[0][1] == doctest::Approx(128.0 / 255.0));
  CHECK(scaled.inputs[0][2] == 1.0);

  const auto ragged = (dir / "ragged.csv").string();
  {
    std::ofstream f(ragged);
    f << "1,0,0.5\n0,1\n";
  }
  CHECK_THROWS_AS(load_csv(ragged, 0), IoError);

  const auto alpha = (dir / "alpha.csv").string();
  {
    std::ofstream f(alpha);
    f << "1,zero,0.5\n";
  }
  CHECK_THROWS_AS(load_csv(alpha, 0), IoError);
}

TEST_CASE("synth_blobs is deterministic, clamped and degenerate at spread 0") {
  nd::SeededRng rng(21, 0);
  LabeledDataset a = synth_blobs(3, 8, 10, 0.05, rng);
  LabeledDataset b = synth_blobs(3, 8, 10, 0.05, nd::SeededRng(21, 0));
  CHECK(a.inputs == b.inputs);
  CHECK(a.labels == b.labels);
  a.validate();

  LabeledDataset d0 = synth_blobs(2, 4, 5, 0.0, nd::SeededRng(22, 0));
  for (int i = 1; i < 5; ++i) CHECK(d0.inputs[static_cast<std::size_t>(i)] == d0.inputs[0]);
}

TEST_CASE("synth_digits emits valid 28x28 10-class data, deterministic") {
  LabeledDataset a = synth_digits(64, nd::SeededRng(31, 0));
  LabeledDataset b = synth_digits(64, nd::SeededRng(31, 0));
  CHECK(a.inputs == b.inputs);
  a.validate();
  CHECK(a.dim() == 784);
  std::set<int> seen(a.labels.begin(), a.labels.end());
  CHECK(seen.size() >= 8);  // 64 draws over 10 classes
}

TEST_CASE("take_seed_set: exact split, disjointness, label drop") {
  LabeledDataset ds = synth_digits(200, nd::SeededRng(41, 0));
  SeedSplit split = take_seed_set(ds, 30, nd::SeededRng(42, 0));
  CHECK(split.seeds.size() == 30);
  CHECK(split.eval.size() == 170);
  split.eval.validate();

  std::set<std::string> seed_fp;
  for (const auto& s : split.seeds) seed_fp.insert(nd::fingerprint_bytes(s));
  for (const auto& e : split.eval.inputs)
    CHECK(seed_fp.find(nd::fingerprint_bytes(e)) == seed_fp.end());

  CHECK_THROWS_AS(take_seed_set(ds, 0, nd::SeededRng(1, 0)), ContractViolation);
  CHECK_THROWS_AS(take_seed_set(ds, 201, nd::SeededRng(1, 0)), ContractViolation);
}

TEST_CASE("take_seed_set_per_class picks n per class") {
  LabeledDataset ds = synth_digits(400, nd::SeededRng(51, 0));
  SeedSplit split = take_seed_set_per_class(ds, 3, nd::SeededRng(52, 0));
  CHECK(split.seeds.size() == 30);
  CHECK(split.eval.size() == ds.size() - 30);
}
