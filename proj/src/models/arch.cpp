#include "bba/models/arch.hpp"

#include <charconv>

#include "bba/error.hpp"

namespace bba::models {

namespace {

LayerSpec cm(int filters) { return {LayerKind::ConvMax, filters}; }
LayerSpec d(int units) { return {LayerKind::Dense, units}; }
LayerSpec relu() { return {LayerKind::ReLU, 0}; }
LayerSpec sigmoid() { return {LayerKind::Sigmoid, 0}; }
LayerSpec softmax() { return {LayerKind::Softmax, 0}; }

ArchitectureSpec mnist_arch(std::string id, std::vector<LayerSpec> layers) {
  return ArchitectureSpec{std::move(id), 784, 10, 28, 28, 1, std::move(layers)};
}

ArchitectureSpec gtsrb_arch(std::string id, std::vector<LayerSpec> layers) {
  return ArchitectureSpec{std::move(id), 3072, 43, 32, 32, 3, std::move(layers)};
}

std::vector<ArchitectureSpec> build_registry() {
  std::vector<ArchitectureSpec> r;
  r.push_back(mnist_arch("A", {cm(32), cm(64), d(200), relu(), d(200), relu(), d(10), softmax()}));
  r.push_back(gtsrb_arch("B", {cm(64), cm(128), d(256), relu(), d(256), relu(), d(43), softmax()}));
  r.push_back(gtsrb_arch("C", {cm(32), cm(64), d(200), relu(), d(200), relu(), d(43), softmax()}));
  r.push_back(gtsrb_arch("D", {cm(32), cm(64), d(200), relu(), d(200), relu(), d(43), softmax()}));
  r.push_back(gtsrb_arch("E", {cm(64), cm(64), d(200), relu(), d(200), relu(), d(100), relu(), d(43), softmax()}));
  r.push_back(mnist_arch("F", {cm(32), cm(64), d(200), relu(), d(10), softmax()}));
  r.push_back(mnist_arch("G", {cm(32), cm(64), d(10), softmax()}));
  r.push_back(mnist_arch("H", {cm(32), d(200), relu(), d(200), relu(), d(10), softmax()}));
  r.push_back(mnist_arch("I", {d(200), relu(), d(200), relu(), d(200), relu(), d(10), softmax()}));
  r.push_back(mnist_arch("J", {d(1000), relu(), d(200), relu(), d(10), softmax()}));
  r.push_back(mnist_arch("K", {d(1000), relu(), d(500), relu(), d(200), relu(), d(10), softmax()}));
  r.push_back(mnist_arch("L", {cm(32), d(1000), relu(), d(200), relu(), d(10), softmax()}));
  r.push_back(mnist_arch("M", {cm(32), d(200), sigmoid(), d(200), sigmoid(), d(10), softmax()}));
  return r;
}

int parse_int(std::string_view s, const std::string& ctx) {
  int v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size() || v <= 0)
    throw ConfigError("architecture: bad unit count in '" + ctx + "'");
  return v;
}

}  // namespace

const std::vector<ArchitectureSpec>& architecture_registry() {
  static const std::vector<ArchitectureSpec> registry = build_registry();
  return registry;
}

ArchitectureSpec registry_architecture(const std::string& id) {
  for (const auto& a : architecture_registry())
    if (a.id == id) return a;
  throw ConfigError("architecture: unknown registry id '" + id + "'");
}

ArchitectureSpec make_architecture(const std::string& spec, int in_rows, int in_cols,
                                   int in_channels, int classes) {
  if (spec.size() == 1 && spec[0] >= 'A' && spec[0] <= 'M') {
    ArchitectureSpec a = registry_architecture(spec);
    if (a.in_dim != in_rows * in_cols * in_channels || a.out_dim != classes)
      throw ConfigError("architecture: registry id '" + spec +
                        "' does not match the dataset geometry");
    return a;
  }
  ArchitectureSpec a;
  a.id = spec;
  a.in_rows = in_rows;
  a.in_cols = in_cols;
  a.in_channels = in_channels;
  a.in_dim = in_rows * in_cols * in_channels;
  a.out_dim = classes;
  std::size_t start = 0;
  const std::string s = spec;
  while (start < s.size()) {
    std::size_t dash = s.find('-', start);
    if (dash == std::string::npos) dash = s.size();
    const std::string_view tok(s.data() + start, dash - start);
    if (tok == "sm") {
      a.layers.push_back({LayerKind::Softmax, 0});
    } else if (tok.starts_with("cm")) {
      a.layers.push_back({LayerKind::ConvMax, parse_int(tok.substr(2), s)});
    } else if (tok.starts_with("d")) {
      std::string_view body = tok.substr(1);
      char act = 0;
      if (!body.empty() && (body.back() == 'r' || body.back() == 's')) {
        act = body.back();
        body.remove_suffix(1);
      }
      a.layers.push_back({LayerKind::Dense, parse_int(body, s)});
      if (act == 'r') a.layers.push_back({LayerKind::ReLU, 0});
      if (act == 's') a.layers.push_back({LayerKind::Sigmoid, 0});
    } else {
      throw ConfigError("architecture: unknown layer token '" + std::string(tok) + "'");
    }
    start = dash + 1;
  }
  if (a.layers.empty()) throw ConfigError("architecture: empty layer stack");
  if (a.layers.back().kind != LayerKind::Softmax) {
    a.layers.push_back({LayerKind::Dense, classes});
    a.layers.push_back({LayerKind::Softmax, 0});
  }
  return a;
}

ArchitectureSpec logistic_architecture(int in_dim, int classes) {
  ArchitectureSpec a;
  a.id = "LR";
  a.in_dim = in_dim;
  a.out_dim = classes;
  a.in_rows = 1;
  a.in_cols = in_dim;
  a.in_channels = 1;
  a.layers = {{LayerKind::Dense, classes}, {LayerKind::Softmax, 0}};
  return a;
}

}  // namespace bba::models
