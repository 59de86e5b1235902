#include <bit>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>

#include "bba/error.hpp"
#include "bba/models/classifier.hpp"

// Self-describing little-endian binary model container:
//   magic "BBAM", u32 version, u8 kind, kind-specific payload.
// Round-trips are bit-exact: doubles are stored as raw IEEE-754 bits.

namespace bba::models {

namespace {

constexpr char kMagic[4] = {'B', 'B', 'A', 'M'};
constexpr std::uint32_t kVersion = 1;

void put_u8(std::ostream& o, std::uint8_t v) { o.put(static_cast<char>(v)); }

void put_u32(std::ostream& o, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  o.write(b, 4);
}

void put_i32(std::ostream& o, std::int32_t v) { put_u32(o, static_cast<std::uint32_t>(v)); }

void put_u64(std::ostream& o, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  o.write(b, 8);
}

void put_f64(std::ostream& o, double v) { put_u64(o, std::bit_cast<std::uint64_t>(v)); }

void put_string(std::ostream& o, const std::string& s) {
  put_u32(o, static_cast<std::uint32_t>(s.size()));
  o.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void put_f64s(std::ostream& o, const Vec& v) {
  put_u64(o, v.size());
  for (double x : v) put_f64(o, x);
}

std::uint8_t get_u8(std::istream& in) {
  const int c = in.get();
  if (c == EOF) throw IoError("model: truncated stream");
  return static_cast<std::uint8_t>(c);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw IoError("model: truncated stream");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t(b[i]) << (8 * i);
  return v;
}

std::int32_t get_i32(std::istream& in) { return static_cast<std::int32_t>(get_u32(in)); }

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw IoError("model: truncated stream");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

std::string get_string(std::istream& in) {
  const std::uint32_t n = get_u32(in);
  std::string s(n, '\0');
  if (n && !in.read(s.data(), n)) throw IoError("model: truncated stream");
  return s;
}

Vec get_f64s(std::istream& in) {
  const std::uint64_t n = get_u64(in);
  Vec v(n);
  for (std::uint64_t i = 0; i < n; ++i) v[i] = get_f64(in);
  return v;
}

void put_header(std::ostream& o, ClassifierKind kind) {
  o.write(kMagic, 4);
  put_u32(o, kVersion);
  put_u8(o, static_cast<std::uint8_t>(kind));
}

void put_network(std::ostream& o, const Network& net) {
  const ArchitectureSpec& a = net.arch();
  put_string(o, a.id);
  put_i32(o, a.in_dim);
  put_i32(o, a.out_dim);
  put_i32(o, a.in_rows);
  put_i32(o, a.in_cols);
  put_i32(o, a.in_channels);
  put_u32(o, static_cast<std::uint32_t>(a.layers.size()));
  for (const LayerSpec& l : a.layers) {
    put_u8(o, static_cast<std::uint8_t>(l.kind));
    put_i32(o, l.units);
  }
  put_f64(o, net.temperature());
  put_u32(o, static_cast<std::uint32_t>(net.weights().size()));
  for (std::size_t p = 0; p < net.weights().size(); ++p) {
    const Mat& w = net.weights()[p];
    put_u64(o, w.rows());
    put_u64(o, w.cols());
    for (double x : w.data()) put_f64(o, x);
    put_f64s(o, net.biases()[p]);
  }
}

Network get_network(std::istream& in) {
  ArchitectureSpec a;
  a.id = get_string(in);
  a.in_dim = get_i32(in);
  a.out_dim = get_i32(in);
  a.in_rows = get_i32(in);
  a.in_cols = get_i32(in);
  a.in_channels = get_i32(in);
  const std::uint32_t n_layers = get_u32(in);
  for (std::uint32_t i = 0; i < n_layers; ++i) {
    const auto kind = static_cast<LayerKind>(get_u8(in));
    const int units = get_i32(in);
    a.layers.push_back({kind, units});
  }
  Network net(a);
  net.set_temperature(get_f64(in));
  const std::uint32_t n_params = get_u32(in);
  if (n_params != net.weights().size()) throw IoError("model: parameter count mismatch");
  for (std::uint32_t p = 0; p < n_params; ++p) {
    const std::uint64_t rows = get_u64(in);
    const std::uint64_t cols = get_u64(in);
    Mat& w = net.weights()[p];
    if (rows != w.rows() || cols != w.cols()) throw IoError("model: weight shape mismatch");
    for (double& x : w.data()) x = get_f64(in);
    Vec b = get_f64s(in);
    if (b.size() != net.biases()[p].size()) throw IoError("model: bias shape mismatch");
    net.biases()[p] = std::move(b);
  }
  return net;
}

}  // namespace

void NetworkClassifier::save(std::ostream& out) const {
  put_header(out, ClassifierKind::Network);
  put_network(out, network());
}

void LogisticClassifier::save(std::ostream& out) const {
  put_header(out, ClassifierKind::LogisticRegression);
  put_network(out, network());
}

void SvmClassifier::save(std::ostream& out) const {
  put_header(out, ClassifierKind::LinearSvm);
  put_u64(out, w_.rows());
  put_u64(out, w_.cols());
  for (double x : w_.data()) put_f64(out, x);
  put_f64s(out, b_);
}

void TreeClassifier::save(std::ostream& out) const {
  put_header(out, ClassifierKind::DecisionTree);
  put_i32(out, in_dim_);
  put_i32(out, classes_);
  put_u64(out, nodes_.size());
  for (const Node& n : nodes_) {
    put_i32(out, n.feature);
    put_f64(out, n.threshold);
    put_i32(out, n.left);
    put_i32(out, n.right);
    put_f64s(out, n.dist);
  }
}

void KnnClassifier::save(std::ostream& out) const {
  put_header(out, ClassifierKind::Knn);
  put_i32(out, k_);
  put_i32(out, classes_);
  put_u64(out, xs_.size());
  put_u64(out, xs_.empty() ? 0 : xs_[0].size());
  for (const Vec& x : xs_)
    for (double v : x) put_f64(out, v);
  for (int y : ys_) put_i32(out, y);
}

std::unique_ptr<Classifier> Classifier::load(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::string_view(magic, 4) != std::string_view(kMagic, 4))
    throw IoError("model: bad magic");
  const std::uint32_t version = get_u32(in);
  if (version != kVersion) throw IoError("model: unsupported version");
  const auto kind = static_cast<ClassifierKind>(get_u8(in));
  switch (kind) {
    case ClassifierKind::Network:
      return std::make_unique<NetworkClassifier>(get_network(in));
    case ClassifierKind::LogisticRegression:
      return std::make_unique<LogisticClassifier>(get_network(in));
    case ClassifierKind::LinearSvm: {
      const std::uint64_t rows = get_u64(in);
      const std::uint64_t cols = get_u64(in);
      Mat w(rows, cols);
      for (double& x : w.data()) x = get_f64(in);
      Vec b = get_f64s(in);
      return std::make_unique<SvmClassifier>(std::move(w), std::move(b));
    }
    case ClassifierKind::DecisionTree: {
      const int in_dim = get_i32(in);
      const int classes = get_i32(in);
      const std::uint64_t count = get_u64(in);
      std::vector<TreeClassifier::Node> nodes(count);
      for (auto& n : nodes) {
        n.feature = get_i32(in);
        n.threshold = get_f64(in);
        n.left = get_i32(in);
        n.right = get_i32(in);
        n.dist = get_f64s(in);
      }
      return std::make_unique<TreeClassifier>(std::move(nodes), in_dim, classes);
    }
    case ClassifierKind::Knn: {
      const int k = get_i32(in);
      const int classes = get_i32(in);
      const std::uint64_t count = get_u64(in);
      const std::uint64_t dim = get_u64(in);
      std::vector<Vec> xs(count, Vec(dim));
      for (auto& x : xs)
        for (double& v : x) v = get_f64(in);
      std::vector<int> ys(count);
      for (int& y : ys) y = get_i32(in);
      return std::make_unique<KnnClassifier>(std::move(xs), std::move(ys), k, classes);
    }
  }
  throw IoError("model: unknown kind tag");
}

void save_classifier(const Classifier& c, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("model: cannot write " + path);
  c.save(out);
  if (!out) throw IoError("model: write failure on " + path);
}

std::unique_ptr<Classifier> load_classifier(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("model: cannot open " + path);
  return Classifier::load(in);
}

}  // namespace bba::models
