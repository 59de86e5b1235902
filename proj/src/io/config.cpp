#include "bba/io/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "bba/error.hpp"

namespace bba::io {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

long long to_int(const std::string& v, const std::string& where) {
  long long out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc{} || r.ptr != v.data() + v.size())
    throw ConfigError("config: bad integer for " + where + ": '" + v + "'");
  return out;
}

double to_double(const std::string& v, const std::string& where) {
  double out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc{} || r.ptr != v.data() + v.size())
    throw ConfigError("config: bad number for " + where + ": '" + v + "'");
  return out;
}

bool to_bool(const std::string& v, const std::string& where) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: bad boolean for " + where + ": '" + v + "'");
}

std::vector<double> to_list(const std::string& v, const std::string& where) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= v.size()) {
    std::size_t comma = v.find(',', start);
    if (comma == std::string::npos) comma = v.size();
    const std::string item = trim(std::string_view(v).substr(start, comma - start));
    if (!item.empty()) out.push_back(to_double(item, where));
    start = comma + 1;
  }
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& schema() {
  static const std::map<std::string, Setter> s = [] {
    std::map<std::string, Setter> m;
    auto add = [&m](const char* key, Setter set) { m.emplace(key, std::move(set)); };

    add("dataset.kind", [](auto& c, auto& v, auto&) { c.dataset.kind = v; });
    add("dataset.train_count",
        [](auto& c, auto& v, auto& w) { c.dataset.train_count = (int)to_int(v, w); });
    add("dataset.test_count",
        [](auto& c, auto& v, auto& w) { c.dataset.test_count = (int)to_int(v, w); });
    add("dataset.noise_sd",
        [](auto& c, auto& v, auto& w) { c.dataset.noise_sd = to_double(v, w); });
    add("dataset.classes",
        [](auto& c, auto& v, auto& w) { c.dataset.classes = (int)to_int(v, w); });
    add("dataset.dims", [](auto& c, auto& v, auto& w) { c.dataset.dims = (int)to_int(v, w); });
    add("dataset.per_class",
        [](auto& c, auto& v, auto& w) { c.dataset.per_class = (int)to_int(v, w); });
    add("dataset.spread",
        [](auto& c, auto& v, auto& w) { c.dataset.spread = to_double(v, w); });
    add("dataset.train_images", [](auto& c, auto& v, auto&) { c.dataset.train_images = v; });
    add("dataset.train_labels", [](auto& c, auto& v, auto&) { c.dataset.train_labels = v; });
    add("dataset.test_images", [](auto& c, auto& v, auto&) { c.dataset.test_images = v; });
    add("dataset.test_labels", [](auto& c, auto& v, auto&) { c.dataset.test_labels = v; });
    add("dataset.train_path", [](auto& c, auto& v, auto&) { c.dataset.train_path = v; });
    add("dataset.test_path", [](auto& c, auto& v, auto&) { c.dataset.test_path = v; });
    add("dataset.label_column",
        [](auto& c, auto& v, auto& w) { c.dataset.label_column = (int)to_int(v, w); });

    add("oracle.kind", [](auto& c, auto& v, auto&) { c.oracle.kind = v; });
    add("oracle.arch", [](auto& c, auto& v, auto&) { c.oracle.arch = v; });
    add("oracle.epochs", [](auto& c, auto& v, auto& w) { c.oracle.epochs = (int)to_int(v, w); });
    add("oracle.learning_rate",
        [](auto& c, auto& v, auto& w) { c.oracle.learning_rate = to_double(v, w); });
    add("oracle.momentum",
        [](auto& c, auto& v, auto& w) { c.oracle.momentum = to_double(v, w); });
    add("oracle.decay_factor",
        [](auto& c, auto& v, auto& w) { c.oracle.decay_factor = to_double(v, w); });
    add("oracle.decay_every",
        [](auto& c, auto& v, auto& w) { c.oracle.decay_every = (int)to_int(v, w); });
    add("oracle.batch_size",
        [](auto& c, auto& v, auto& w) { c.oracle.batch_size = (int)to_int(v, w); });
    add("oracle.model_path", [](auto& c, auto& v, auto&) { c.oracle.model_path = v; });
    add("oracle.k", [](auto& c, auto& v, auto& w) { c.oracle.k = (int)to_int(v, w); });
    add("oracle.max_depth",
        [](auto& c, auto& v, auto& w) { c.oracle.max_depth = (int)to_int(v, w); });
    add("oracle.min_leaf",
        [](auto& c, auto& v, auto& w) { c.oracle.min_leaf = (int)to_int(v, w); });
    add("oracle.l2", [](auto& c, auto& v, auto& w) { c.oracle.l2 = to_double(v, w); });

    add("substitute.kind", [](auto& c, auto& v, auto&) { c.substitute.kind = v; });
    add("substitute.arch", [](auto& c, auto& v, auto&) { c.substitute.arch = v; });
    add("substitute.seeds",
        [](auto& c, auto& v, auto& w) { c.substitute.seeds = (int)to_int(v, w); });
    add("substitute.seeds_per_class",
        [](auto& c, auto& v, auto& w) { c.substitute.seeds_per_class = (int)to_int(v, w); });
    add("substitute.lambda",
        [](auto& c, auto& v, auto& w) { c.substitute.lambda = to_double(v, w); });
    add("substitute.tau",
        [](auto& c, auto& v, auto& w) { c.substitute.tau = (int)to_int(v, w); });
    add("substitute.reservoir",
        [](auto& c, auto& v, auto& w) { c.substitute.reservoir = to_bool(v, w); });
    add("substitute.sigma",
        [](auto& c, auto& v, auto& w) { c.substitute.sigma = (int)to_int(v, w); });
    add("substitute.kappa",
        [](auto& c, auto& v, auto& w) { c.substitute.kappa = (int)to_int(v, w); });
    add("substitute.max_rho",
        [](auto& c, auto& v, auto& w) { c.substitute.max_rho = (int)to_int(v, w); });
    add("substitute.epochs",
        [](auto& c, auto& v, auto& w) { c.substitute.epochs = (int)to_int(v, w); });
    add("substitute.learning_rate",
        [](auto& c, auto& v, auto& w) { c.substitute.learning_rate = to_double(v, w); });
    add("substitute.momentum",
        [](auto& c, auto& v, auto& w) { c.substitute.momentum = to_double(v, w); });
    add("substitute.batch_size",
        [](auto& c, auto& v, auto& w) { c.substitute.batch_size = (int)to_int(v, w); });
    add("substitute.agreement_count",
        [](auto& c, auto& v, auto& w) { c.substitute.agreement_count = (int)to_int(v, w); });

    add("craft.fgsm_epsilons",
        [](auto& c, auto& v, auto& w) { c.craft.fgsm_epsilons = to_list(v, w); });
    add("craft.jsma_upsilons",
        [](auto& c, auto& v, auto& w) { c.craft.jsma_upsilons = to_list(v, w); });
    add("craft.jsma_epsilon",
        [](auto& c, auto& v, auto& w) { c.craft.jsma_epsilon = to_double(v, w); });
    add("craft.jsma_samples",
        [](auto& c, auto& v, auto& w) { c.craft.jsma_samples = (int)to_int(v, w); });
    add("craft.eval_count",
        [](auto& c, auto& v, auto& w) { c.craft.eval_count = (int)to_int(v, w); });
    add("craft.emit_records",
        [](auto& c, auto& v, auto& w) { c.craft.emit_records = to_bool(v, w); });

    add("defense.mode", [](auto& c, auto& v, auto&) { c.defense.mode = v; });
    add("defense.train_epsilons",
        [](auto& c, auto& v, auto& w) { c.defense.train_epsilons = to_list(v, w); });
    add("defense.temperatures",
        [](auto& c, auto& v, auto& w) { c.defense.temperatures = to_list(v, w); });
    add("defense.attack_epsilons",
        [](auto& c, auto& v, auto& w) { c.defense.attack_epsilons = to_list(v, w); });
    add("defense.epochs",
        [](auto& c, auto& v, auto& w) { c.defense.epochs = (int)to_int(v, w); });
    add("defense.decay_every",
        [](auto& c, auto& v, auto& w) { c.defense.decay_every = (int)to_int(v, w); });
    add("defense.eval_count",
        [](auto& c, auto& v, auto& w) { c.defense.eval_count = (int)to_int(v, w); });

    add("run.seed",
        [](auto& c, auto& v, auto& w) { c.run.seed = (std::uint64_t)to_int(v, w); });
    add("run.budget",
        [](auto& c, auto& v, auto& w) { c.run.budget = (std::uint64_t)to_int(v, w); });
    return m;
  }();
  return s;
}

void validate(const ExperimentConfig& c) {
  auto one_of = [](const std::string& v, std::initializer_list<const char*> allowed,
                   const char* what) {
    for (const char* a : allowed)
      if (v == a) return;
    throw ConfigError(std::string("config: ") + what + " has unknown value '" + v + "'");
  };
  one_of(c.dataset.kind, {"synthetic-digits", "synthetic-blobs", "idx", "csv"},
         "dataset.kind");
  one_of(c.oracle.kind, {"network", "logistic", "svm", "tree", "knn"}, "oracle.kind");
  one_of(c.substitute.kind, {"network", "logistic"}, "substitute.kind");
  one_of(c.defense.mode, {"advtrain", "distill"}, "defense.mode");
  if (c.dataset.kind == "idx" &&
      (c.dataset.train_images.empty() || c.dataset.train_labels.empty() ||
       c.dataset.test_images.empty() || c.dataset.test_labels.empty()))
    throw ConfigError("config: idx dataset needs train/test image and label paths");
  if (c.dataset.kind == "csv" &&
      (c.dataset.train_path.empty() || c.dataset.test_path.empty()))
    throw ConfigError("config: csv dataset needs train_path and test_path");
  for (double e : c.craft.fgsm_epsilons)
    if (!(e > 0.0 && e <= 1.0)) throw ConfigError("config: fgsm epsilon outside (0,1]");
  for (double u : c.craft.jsma_upsilons)
    if (!(u > 0.0 && u <= 1.0)) throw ConfigError("config: jsma upsilon outside (0,1]");
  if (c.substitute.lambda <= 0) throw ConfigError("config: substitute.lambda must be > 0");
  if (c.substitute.tau && *c.substitute.tau < 1)
    throw ConfigError("config: substitute.tau must be >= 1");
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  cfg.raw = text;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ConfigError("config: bad section header at line " + std::to_string(line_no));
      section = trim(std::string_view(t).substr(1, t.size() - 2));
      if (section != "dataset" && section != "oracle" && section != "substitute" &&
          section != "craft" && section != "defense" && section != "run")
        throw ConfigError("config: unknown section '" + section + "'");
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: expected key = value at line " + std::to_string(line_no));
    if (section.empty())
      throw ConfigError("config: key before any section at line " + std::to_string(line_no));
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    const std::string full = section + "." + key;
    const auto it = schema().find(full);
    if (it == schema().end()) throw ConfigError("config: unknown key '" + full + "'");
    if (!value.empty()) it->second(cfg, value, full);
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

}  // namespace bba::io
