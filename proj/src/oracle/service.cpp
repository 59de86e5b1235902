#include "bba/oracle/service.hpp"

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "bba/error.hpp"
#include "bba/nd/mat.hpp"

namespace bba::oracle {

using nlohmann::json;

struct OracleService::Impl {
  std::shared_ptr<const models::Classifier> model;
  ServeOptions opts;
  httplib::Server server;
  std::thread thread;
  std::atomic<std::uint64_t> queries{0};
  int bound_port = 0;

  Impl(std::shared_ptr<const models::Classifier> m, ServeOptions o)
      : model(std::move(m)), opts(std::move(o)) {
    server.Get("/v1/meta", [this](const httplib::Request&, httplib::Response& res) {
      const json meta{{"in_dim", model->in_dim()}, {"classes", model->n_classes()}};
      res.set_content(meta.dump(), "application/json");
    });

    server.Post("/v1/label", [this](const httplib::Request& req, httplib::Response& res) {
      json body;
      try {
        body = json::parse(req.body);
      } catch (const json::exception&) {
        res.status = 400;
        res.set_content(R"({"error": "malformed"})", "application/json");
        return;
      }
      if (!body.is_object() || !body.contains("input") || !body["input"].is_array()) {
        res.status = 400;
        res.set_content(R"({"error": "malformed"})", "application/json");
        return;
      }
      nd::Vec x;
      x.reserve(body["input"].size());
      for (const auto& v : body["input"]) {
        if (!v.is_number()) {
          res.status = 400;
          res.set_content(R"({"error": "malformed"})", "application/json");
          return;
        }
        const double d = v.get<double>();
        if (!std::isfinite(d)) {
          res.status = 400;
          res.set_content(R"({"error": "malformed"})", "application/json");
          return;
        }
        x.push_back(d);
      }
      if (static_cast<int>(x.size()) != model->in_dim()) {
        res.status = 422;
        res.set_content(R"({"error": "dimension"})", "application/json");
        return;
      }
      // Atomically reserve a budget slot for this request.
      if (opts.budget) {
        std::uint64_t cur = queries.load();
        for (;;) {
          if (cur + 1 > *opts.budget) {
            res.status = 429;
            res.set_content(R"({"error": "budget_exhausted"})", "application/json");
            return;
          }
          if (queries.compare_exchange_weak(cur, cur + 1)) break;
        }
      } else {
        queries.fetch_add(1);
      }
      const int label = model->predict_label(x);
      const json out{{"label", label}};
      res.set_content(out.dump(), "application/json");
    });
  }
};

OracleService::OracleService(std::shared_ptr<const models::Classifier> model,
                             ServeOptions opts)
    : impl_(std::make_unique<Impl>(std::move(model), std::move(opts))) {}

OracleService::~OracleService() { stop(); }

void OracleService::start() {
  auto& im = *impl_;
  if (im.opts.port == 0) {
    im.bound_port = im.server.bind_to_any_port(im.opts.host);
    if (im.bound_port <= 0) throw IoError("serve: cannot bind " + im.opts.host);
  } else {
    if (!im.server.bind_to_port(im.opts.host, im.opts.port))
      throw IoError("serve: cannot bind " + im.opts.host + ":" +
                    std::to_string(im.opts.port));
    im.bound_port = im.opts.port;
  }
  im.thread = std::thread([&im] { im.server.listen_after_bind(); });
  im.server.wait_until_ready();
}

void OracleService::run() {
  auto& im = *impl_;
  if (im.opts.port == 0) throw ConfigError("serve: run() needs an explicit port");
  im.bound_port = im.opts.port;
  if (!im.server.listen(im.opts.host, im.opts.port))
    throw IoError("serve: cannot bind " + im.opts.host + ":" + std::to_string(im.opts.port));
}

void OracleService::stop() {
  auto& im = *impl_;
  im.server.stop();
  if (im.thread.joinable()) im.thread.join();
}

int OracleService::port() const { return impl_->bound_port; }

std::uint64_t OracleService::total_queries() const { return impl_->queries.load(); }

}  // namespace bba::oracle
