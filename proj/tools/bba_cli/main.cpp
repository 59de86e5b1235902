#include <CLI11.hpp>
#include <json.hpp>

#include <csignal>
#include <cstdio>
#include <iostream>

#include "bba/error.hpp"
#include "bba/exp/runner.hpp"
#include "bba/io/config.hpp"
#include "bba/io/report.hpp"
#include "bba/models/classifier.hpp"
#include "bba/oracle/service.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;
constexpr int kExitUnreachable = 4;

bba::oracle::OracleService* g_service = nullptr;

void handle_signal(int) {
  if (g_service != nullptr) g_service->stop();
}

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::optional<std::uint64_t> budget;
};

bba::io::ExperimentConfig load(const CommonArgs& args) {
  bba::io::ExperimentConfig cfg = bba::io::load_config(args.config_path);
  if (args.budget) cfg.run.budget = args.budget;
  return cfg;
}

std::uint64_t effective_seed(const CommonArgs& args, const bba::io::ExperimentConfig& cfg) {
  return args.seed_set ? args.seed : cfg.run.seed;
}

int cmd_train_oracle(const CommonArgs& args) {
  const auto cfg = load(args);
  const std::uint64_t seed = effective_seed(args, cfg);
  bba::io::ensure_directory(args.out_dir);
  const auto ds = bba::exp::load_dataset(cfg.dataset, seed);
  auto model = bba::exp::train_oracle_model(cfg, ds.train, seed);
  const double acc = bba::models::accuracy(*model, ds.test);
  bba::models::save_classifier(*model, args.out_dir + "/model.bin");
  bba::data::write_dataset_manifest(ds.train, args.out_dir + "/train_manifest.json");
  bba::data::write_dataset_manifest(ds.test, args.out_dir + "/test_manifest.json");
  nlohmann::json metrics{{"kind", cfg.oracle.kind},
                         {"test_accuracy", acc},
                         {"train_count", ds.train.size()},
                         {"test_count", ds.test.size()},
                         {"seed", seed}};
  bba::io::write_text_file(args.out_dir + "/metrics.json", metrics.dump(2) + "\n");
  std::printf("oracle %s: test accuracy %.4f, model at %s/model.bin\n",
              cfg.oracle.kind.c_str(), acc, args.out_dir.c_str());
  return kExitOk;
}

int cmd_serve_oracle(const std::string& model_path, const std::string& bind,
                     std::optional<std::uint64_t> budget, const std::string& out_dir) {
  const std::size_t colon = bind.rfind(':');
  if (colon == std::string::npos)
    throw bba::ConfigError("serve: --bind must be host:port");
  const std::string host = bind.substr(0, colon);
  const int port = std::stoi(bind.substr(colon + 1));

  auto model = std::shared_ptr<const bba::models::Classifier>(
      bba::models::load_classifier(model_path));
  bba::oracle::OracleService service(model, {host, port, budget});
  g_service = &service;
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  std::printf("serving %s on %s (budget %s)\n", model_path.c_str(), bind.c_str(),
              budget ? std::to_string(*budget).c_str() : "none");
  std::fflush(stdout);
  service.run();  // returns after stop()
  g_service = nullptr;
  if (!out_dir.empty()) {
    bba::io::ensure_directory(out_dir);
    nlohmann::json ledger{{"total_queries", service.total_queries()}};
    bba::io::write_text_file(out_dir + "/ledger.json", ledger.dump(2) + "\n");
  }
  std::printf("served %llu label queries\n",
              static_cast<unsigned long long>(service.total_queries()));
  return kExitOk;
}

int cmd_attack(const CommonArgs& args, const std::string& oracle_url) {
  const auto cfg = load(args);
  const std::uint64_t seed = effective_seed(args, cfg);
  const auto outcome = bba::exp::run_attack(cfg, args.out_dir, seed, oracle_url);
  for (const auto& row : outcome.fgsm_rows)
    std::printf("fgsm eps=%.3f success=%.4f transfer=%.4f\n", row[0], row[1], row[2]);
  if (outcome.final_agreement >= 0)
    std::printf("final substitute agreement: %.4f\n", outcome.final_agreement);
  if (outcome.budget_exhausted) {
    std::fprintf(stderr, "attack: query budget exhausted; partial bundle written\n");
    return kExitBudget;
  }
  std::printf("attack bundle written to %s\n", args.out_dir.c_str());
  return kExitOk;
}

int cmd_defense(const CommonArgs& args) {
  const auto cfg = load(args);
  bba::exp::run_defense(cfg, args.out_dir, effective_seed(args, cfg));
  std::printf("defense report written to %s\n", args.out_dir.c_str());
  return kExitOk;
}

int cmd_analyze(const CommonArgs& args, const std::string& substitute_path,
                const std::string& oracle_path) {
  const auto cfg = load(args);
  bba::exp::run_analyze(cfg, substitute_path, oracle_path, args.out_dir,
                        effective_seed(args, cfg));
  std::printf("analysis bundle written to %s\n", args.out_dir.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"black-box substitute attack workbench"};
  app.require_subcommand(1);

  CommonArgs common;
  std::string oracle_url;
  std::string model_path;
  std::string bind = "127.0.0.1:8080";
  std::string substitute_path;
  std::string oracle_model_path;
  std::uint64_t budget_value = 0;

  auto add_common = [&](CLI::App* sub, bool needs_config = true) {
    if (needs_config)
      sub->add_option("--config", common.config_path, "experiment config file")
          ->required();
    sub->add_option("--out", common.out_dir, "output directory");
    sub->add_option("--seed", common.seed, "master seed (overrides config)")
        ->each([&](const std::string&) { common.seed_set = true; });
    sub->add_option("--budget", budget_value, "oracle query budget")
        ->each([&](const std::string&) { common.budget = budget_value; });
  };

  CLI::App* train = app.add_subcommand("train-oracle", "train and save an oracle model");
  add_common(train);

  CLI::App* serve = app.add_subcommand("serve-oracle", "serve a saved model as a label API");
  serve->add_option("--model", model_path, "model file")->required();
  serve->add_option("--bind", bind, "host:port");
  serve->add_option("--budget", budget_value, "label query budget")
      ->each([&](const std::string&) { common.budget = budget_value; });
  serve->add_option("--out", common.out_dir, "ledger output directory");

  CLI::App* attack = app.add_subcommand("attack", "run the black-box attack end to end");
  add_common(attack);
  attack->add_option("--oracle-url", oracle_url, "attack a remote label API instead");

  CLI::App* defense = app.add_subcommand("defense", "defended-oracle study");
  add_common(defense);

  CLI::App* analyze = app.add_subcommand("analyze", "gradient-sign correlation study");
  add_common(analyze);
  analyze->add_option("--substitute", substitute_path, "substitute model file")->required();
  analyze->add_option("--oracle-model", oracle_model_path, "oracle model file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (train->parsed()) return cmd_train_oracle(common);
    if (serve->parsed()) return cmd_serve_oracle(model_path, bind, common.budget, common.out_dir);
    if (attack->parsed()) return cmd_attack(common, oracle_url);
    if (defense->parsed()) return cmd_defense(common);
    if (analyze->parsed()) return cmd_analyze(common, substitute_path, oracle_model_path);
  } catch (const bba::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const bba::BudgetExhausted& e) {
    std::fprintf(stderr, "budget exhausted: %s\n", e.what());
    return kExitBudget;
  } catch (const bba::RemoteUnreachable& e) {
    std::fprintf(stderr, "remote unreachable: %s\n", e.what());
    return kExitUnreachable;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kExitConfig;
}
