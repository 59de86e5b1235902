#include "bba/data/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "bba/error.hpp"

namespace bba::data {

void LabeledDataset::validate() const {
  if (inputs.size() != labels.size())
    throw ContractViolation("dataset: inputs/labels length mismatch");
  if (classes <= 0) throw ContractViolation("dataset: classes must be positive");
  const std::size_t m = static_cast<std::size_t>(dim());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].size() != m) throw ContractViolation("dataset: input dim mismatch");
    for (double v : inputs[i])
      if (!(v >= 0.0 && v <= 1.0))
        throw ContractViolation("dataset: input entry outside [0,1]");
    if (labels[i] < 0 || labels[i] >= classes)
      throw ContractViolation("dataset: label out of range");
  }
}

namespace {

std::uint32_t read_be32(std::istream& in, const char* what) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw IoError(std::string("idx: truncated ") + what);
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
         (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

void write_be32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw IoError("idx: cannot open " + images_path);
  if (read_be32(img, "image magic") != 2051u)
    throw IoError("idx: bad image magic in " + images_path);
  const std::uint32_t count = read_be32(img, "image count");
  const std::uint32_t rows = read_be32(img, "rows");
  const std::uint32_t cols = read_be32(img, "cols");

  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw IoError("idx: cannot open " + labels_path);
  if (read_be32(lab, "label magic") != 2049u)
    throw IoError("idx: bad label magic in " + labels_path);
  const std::uint32_t lcount = read_be32(lab, "label count");
  if (lcount != count) throw IoError("idx: image/label count mismatch");

  LabeledDataset ds;
  ds.rows = static_cast<int>(rows);
  ds.cols = static_cast<int>(cols);
  ds.channels = 1;
  const std::size_t pixels = std::size_t(rows) * cols;
  std::vector<unsigned char> buf(pixels);
  ds.inputs.reserve(count);
  ds.labels.reserve(count);
  int max_label = 0;
  for (std::uint32_t i = 0; i < count; ++i) {
    if (!img.read(reinterpret_cast<char*>(buf.data()), std::streamsize(pixels)))
      throw IoError("idx: truncated image data");
    Vec x(pixels);
    for (std::size_t p = 0; p < pixels; ++p) x[p] = buf[p] / 255.0;
    ds.inputs.push_back(std::move(x));
    char lb = 0;
    if (!lab.read(&lb, 1)) throw IoError("idx: truncated label data");
    const int label = static_cast<unsigned char>(lb);
    max_label = std::max(max_label, label);
    ds.labels.push_back(label);
  }
  ds.classes = max_label + 1;
  return ds;
}

void save_idx(const LabeledDataset& ds, const std::string& images_path,
              const std::string& labels_path) {
  if (ds.channels != 1) throw IoError("idx: only single-channel datasets");
  std::ofstream img(images_path, std::ios::binary);
  if (!img) throw IoError("idx: cannot write " + images_path);
  write_be32(img, 2051u);
  write_be32(img, static_cast<std::uint32_t>(ds.size()));
  write_be32(img, static_cast<std::uint32_t>(ds.rows));
  write_be32(img, static_cast<std::uint32_t>(ds.cols));
  std::vector<unsigned char> buf;
  for (const Vec& x : ds.inputs) {
    buf.resize(x.size());
    for (std::size_t p = 0; p < x.size(); ++p)
      buf[p] = static_cast<unsigned char>(std::lround(x[p] * 255.0));
    img.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
  }
  std::ofstream lab(labels_path, std::ios::binary);
  if (!lab) throw IoError("idx: cannot write " + labels_path);
  write_be32(lab, 2049u);
  write_be32(lab, static_cast<std::uint32_t>(ds.size()));
  for (int l : ds.labels) {
    const char b = static_cast<char>(l);
    lab.write(&b, 1);
  }
}

namespace {

double parse_cell(std::string_view cell, const std::string& path) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  const auto r = std::from_chars(first, last, v);
  if (r.ec != std::errc{} || r.ptr != last)
    throw IoError("csv: non-numeric cell '" + std::string(cell) + "' in " + path);
  return v;
}

std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

LabeledDataset load_csv(const std::string& path, int label_column) {
  std::ifstream in(path);
  if (!in) throw IoError("csv: cannot open " + path);
  LabeledDataset ds;
  std::string line;
  std::size_t width = 0;
  double max_value = 0.0;
  std::vector<std::vector<double>> raw;
  std::vector<int> labels;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (start <= line.size()) {
      std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) comma = line.size();
      std::string_view cell(line.data() + start, comma - start);
      row.push_back(parse_cell(cell, path));
      start = comma + 1;
    }
    if (width == 0)
      width = row.size();
    else if (row.size() != width)
      throw IoError("csv: ragged row in " + path);
    if (label_column < 0 || static_cast<std::size_t>(label_column) >= width)
      throw IoError("csv: label column out of range");
    const double lv = row[static_cast<std::size_t>(label_column)];
    if (lv != std::floor(lv) || lv < 0)
      throw IoError("csv: label must be a non-negative integer");
    labels.push_back(static_cast<int>(lv));
    row.erase(row.begin() + label_column);
    for (double v : row) max_value = std::max(max_value, std::fabs(v));
    raw.push_back(std::move(row));
  }
  if (raw.empty()) throw IoError("csv: empty file " + path);
  const double scale = max_value > 1.0 ? 1.0 / 255.0 : 1.0;
  ds.inputs.reserve(raw.size());
  for (auto& row : raw) {
    Vec x(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) x[i] = row[i] * scale;
    ds.inputs.push_back(std::move(x));
  }
  ds.labels = std::move(labels);
  ds.rows = 1;
  ds.cols = static_cast<int>(width - 1);
  ds.channels = 1;
  ds.classes = *std::max_element(ds.labels.begin(), ds.labels.end()) + 1;
  ds.validate();
  return ds;
}

void save_csv(const LabeledDataset& ds, const std::string& path, int label_column) {
  std::ofstream out(path);
  if (!out) throw IoError("csv: cannot write " + path);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const Vec& x = ds.inputs[i];
    std::size_t xi = 0;
    const std::size_t total = x.size() + 1;
    for (std::size_t c = 0; c < total; ++c) {
      if (c) out << ',';
      if (static_cast<int>(c) == label_column)
        out << ds.labels[i];
      else
        out << format_double(x[xi++]);
    }
    out << '\n';
  }
}

LabeledDataset synth_blobs(int classes, int dims, int per_class, double spread,
                           nd::SeededRng rng) {
  if (classes < 2 || dims < 2)
    throw ContractViolation("synth_blobs: need classes >= 2 and dims >= 2");
  LabeledDataset ds;
  ds.rows = 1;
  ds.cols = dims;
  ds.channels = 1;
  ds.classes = classes;
  std::vector<Vec> centers;
  nd::SeededRng center_rng = rng.child(0);
  for (int c = 0; c < classes; ++c) {
    Vec center(dims);
    for (double& v : center) v = center_rng.uniform(0.2, 0.8);
    centers.push_back(std::move(center));
  }
  for (int c = 0; c < classes; ++c) {
    nd::SeededRng point_rng = rng.child(1 + static_cast<std::uint64_t>(c));
    for (int i = 0; i < per_class; ++i) {
      Vec x(dims);
      for (int d = 0; d < dims; ++d) x[d] = centers[c][d] + spread * point_rng.normal();
      nd::clamp01_inplace(x);
      ds.inputs.push_back(std::move(x));
      ds.labels.push_back(c);
    }
  }
  return ds;
}

namespace {

struct Segment {
  double x0, y0, x1, y1;
};

// Seven-segment skeletons in a unit glyph box.
//      A
//    F   B
//      G
//    E   C
//      D
const Segment kSegments[7] = {
    {0.30, 0.18, 0.70, 0.18},  // A
    {0.72, 0.20, 0.72, 0.48},  // B
    {0.72, 0.52, 0.72, 0.80},  // C
    {0.30, 0.82, 0.70, 0.82},  // D
    {0.28, 0.52, 0.28, 0.80},  // E
    {0.28, 0.20, 0.28, 0.48},  // F
    {0.32, 0.50, 0.68, 0.50},  // G
};

const int kDigitSegments[10] = {
    0b0111111,  // 0: ABCDEF
    0b0000110,  // 1: BC
    0b1011011,  // 2: ABDEG
    0b1001111,  // 3: ABCDG
    0b1100110,  // 4: BCFG
    0b1101101,  // 5: ACDFG
    0b1111101,  // 6: ACDEFG
    0b0000111,  // 7: ABC
    0b1111111,  // 8: all
    0b1101111,  // 9: ABCDFG
};

double point_segment_dist(double px, double py, const Segment& s) {
  const double dx = s.x1 - s.x0;
  const double dy = s.y1 - s.y0;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((px - s.x0) * dx + (py - s.y0) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double cx = s.x0 + t * dx;
  const double cy = s.y0 + t * dy;
  return std::hypot(px - cx, py - cy);
}

}  // namespace

LabeledDataset synth_digits(int count, nd::SeededRng rng, double noise_sd, double wobble) {
  constexpr int kSide = 28;
  const double w1 = wobble - 1.0;
  LabeledDataset ds;
  ds.rows = kSide;
  ds.cols = kSide;
  ds.channels = 1;
  ds.classes = 10;
  ds.inputs.reserve(count);
  ds.labels.reserve(count);
  for (int i = 0; i < count; ++i) {
    nd::SeededRng r = rng.child(static_cast<std::uint64_t>(i));
    const int digit = static_cast<int>(r.below(10));

    // Random affine placement of the glyph box onto the canvas.
    const double scale_x = r.uniform(0.80 - 0.06 * w1, 1.10 + 0.04 * w1);
    const double scale_y = r.uniform(0.80 - 0.06 * w1, 1.10 + 0.04 * w1);
    const double angle = r.uniform(-(0.18 + 0.10 * w1), 0.18 + 0.10 * w1);
    const double shear = r.uniform(-(0.15 + 0.10 * w1), 0.15 + 0.10 * w1);
    const double shift_x = r.uniform(-(2.4 + 1.2 * w1), 2.4 + 1.2 * w1);
    const double shift_y = r.uniform(-(2.4 + 1.2 * w1), 2.4 + 1.2 * w1);
    const double width = r.uniform(0.95 - 0.12 * w1, 1.65 + 0.12 * w1);
    const double peak = r.uniform(0.82, 1.0);  // stroke intensity
    const double ca = std::cos(angle), sa = std::sin(angle);

    // Transform segment endpoints from glyph space to pixel space.
    std::vector<Segment> segs;
    std::vector<double> seg_peak;
    for (int s = 0; s < 7; ++s) {
      if (!(kDigitSegments[digit] >> s & 1)) continue;
      Segment seg = kSegments[s];
      auto map = [&](double gx, double gy, double& ox, double& oy) {
        double u = (gx - 0.5) * scale_x + shear * (gy - 0.5);
        double v = (gy - 0.5) * scale_y;
        const double ru = ca * u - sa * v;
        const double rv = sa * u + ca * v;
        ox = (ru + 0.5) * kSide + shift_x;
        oy = (rv + 0.5) * kSide + shift_y;
      };
      map(seg.x0, seg.y0, seg.x0, seg.y0);
      map(seg.x1, seg.y1, seg.x1, seg.y1);
      segs.push_back(seg);
      // Per-segment fading makes near-miss glyph pairs genuinely collide.
      // Drawn only in wobble mode so the default stream stays unchanged.
      seg_peak.push_back(w1 > 0.0 ? peak * r.uniform(1.0 - 0.40 * w1, 1.0) : peak);
    }

    Vec img(kSide * kSide, 0.0);
    for (int y = 0; y < kSide; ++y) {
      for (int x = 0; x < kSide; ++x) {
        double v = 0.0;
        for (std::size_t s = 0; s < segs.size(); ++s) {
          const double d = point_segment_dist(x + 0.5, y + 0.5, segs[s]);
          // Soft-edged stroke profile.
          v = std::max(v, seg_peak[s] / (1.0 + std::exp((d - width) / 0.35)));
        }
        img[y * kSide + x] = v + noise_sd * r.normal();
      }
    }
    nd::clamp01_inplace(img);
    ds.inputs.push_back(std::move(img));
    ds.labels.push_back(digit);
  }
  return ds;
}

namespace {

SeedSplit split_by_indices(const LabeledDataset& ds, const std::vector<std::size_t>& picked) {
  std::vector<bool> is_seed(ds.size(), false);
  for (std::size_t i : picked) is_seed[i] = true;
  SeedSplit out;
  out.seeds.reserve(picked.size());
  for (std::size_t i : picked) out.seeds.push_back(ds.inputs[i]);
  out.eval.rows = ds.rows;
  out.eval.cols = ds.cols;
  out.eval.channels = ds.channels;
  out.eval.classes = ds.classes;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (is_seed[i]) continue;
    out.eval.inputs.push_back(ds.inputs[i]);
    out.eval.labels.push_back(ds.labels[i]);
  }
  return out;
}

}  // namespace

SeedSplit take_seed_set(const LabeledDataset& ds, int n_total, nd::SeededRng rng) {
  if (n_total <= 0 || static_cast<std::size_t>(n_total) > ds.size())
    throw ContractViolation("take_seed_set: insufficient samples");
  // Partial Fisher-Yates over index array.
  std::vector<std::size_t> idx(ds.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < n_total; ++i) {
    const std::size_t j = i + rng.below(idx.size() - static_cast<std::size_t>(i));
    std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
  }
  idx.resize(static_cast<std::size_t>(n_total));
  return split_by_indices(ds, idx);
}

SeedSplit take_seed_set_per_class(const LabeledDataset& ds, int n_per_class,
                                  nd::SeededRng rng) {
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(ds.classes));
  for (std::size_t i = 0; i < ds.size(); ++i)
    by_class[static_cast<std::size_t>(ds.labels[i])].push_back(i);
  std::vector<std::size_t> picked;
  for (int c = 0; c < ds.classes; ++c) {
    auto& pool = by_class[static_cast<std::size_t>(c)];
    if (pool.size() < static_cast<std::size_t>(n_per_class))
      throw ContractViolation("take_seed_set: insufficient samples in class");
    for (int i = 0; i < n_per_class; ++i) {
      const std::size_t j = static_cast<std::size_t>(i) +
                            rng.below(pool.size() - static_cast<std::size_t>(i));
      std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
      picked.push_back(pool[static_cast<std::size_t>(i)]);
    }
  }
  return split_by_indices(ds, picked);
}

void write_dataset_manifest(const LabeledDataset& ds, const std::string& path) {
  std::uint64_t checksum = 0xCBF29CE484222325ULL;
  for (const Vec& x : ds.inputs)
    checksum ^= nd::fingerprint_hash(x) + 0x9E3779B97F4A7C15ULL + (checksum << 6) + (checksum >> 2);
  nlohmann::json j{{"count", ds.size()},
                   {"rows", ds.rows},
                   {"cols", ds.cols},
                   {"channels", ds.channels},
                   {"classes", ds.classes},
                   {"checksum", checksum}};
  std::ofstream out(path);
  if (!out) throw IoError("manifest: cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace bba::data
