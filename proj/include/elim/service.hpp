/*
 * Copyright 2026 The Elim Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// JSON-over-HTTP front end. All routes live under /v1:
//
//   GET  /v1/health
//   POST /v1/datasets                 text/csv (?label=&categorical=&name=) or
//                                     {"mixture": spec, "n": count} or {"dataset": doc}
//   GET  /v1/datasets/{id}
//   POST /v1/models                   {dataset_id, kind, config} or {model: doc}
//   GET  /v1/models/{id}
//   POST /v1/models/{id}/classify     {features, rho?, n_samples?, seed?, policy?}
//   POST /v1/models/{id}/sweep        {features, rho_grid, n_samples?, seed?}
//   POST /v1/models/{id}/sensitivity  {features, rho0, feature, s_grid, n_samples?, seed?}
//   POST /v1/models/{id}/intervals    {features, margin?}
//   GET  /v1/models/{id}/metrics?dataset={id}[&thresholds=0,0.5,...]
//   POST /v1/compare                  {model_a, model_b, dataset_id}
//
// Errors carry {code, message, detail}: 404 unknown id, 409 class-set
// mismatch, 422 invalid payload, 500 anything else.

#ifndef ELIM_SERVICE_HPP_
#define ELIM_SERVICE_HPP_

#include <atomic>
#include <filesystem>
#include <map>
#include <mutex>
#include <shared_mutex>

// Eigen must come first: httplib pulls in <resolv.h>, whose _res macro
// breaks Eigen's product kernels.
#include "elim/factory.hpp"

#include <httplib.h>

namespace elim {

inline constexpr std::string_view kServiceVersion = "1.0.0";

struct DatasetEntry {
  std::shared_ptr<const Dataset> data;
  std::optional<GaussianMixtureSpec> mixture;
};

// Id-keyed stores; entries are immutable once published.
class ResourceRegistry {
 public:
  explicit ResourceRegistry(std::optional<std::filesystem::path> dir = std::nullopt) : dir_(std::move(dir)) {
    if (dir_) std::filesystem::create_directories(*dir_);
  }

  std::string add_dataset(DatasetEntry e) {
    std::unique_lock lock(mu_);
    const std::string id = "ds-" + std::to_string(++next_dataset_);
    if (dir_) save_dataset(*e.data, (*dir_ / (id + ".json")).string());
    datasets_.emplace(id, std::move(e));
    return id;
  }
  std::string add_model(ClassifierPtr m) {
    std::unique_lock lock(mu_);
    const std::string id = "m-" + std::to_string(++next_model_);
    if (dir_) save_model(*m, (*dir_ / (id + ".json")).string());
    models_.emplace(id, std::move(m));
    return id;
  }

  DatasetEntry dataset(const std::string& id) const {
    std::shared_lock lock(mu_);
    auto it = datasets_.find(id);
    require(it != datasets_.end(), ErrorCode::kNotFound, "no dataset with id '" + id + "'");
    return it->second;
  }
  ClassifierPtr model(const std::string& id) const {
    std::shared_lock lock(mu_);
    auto it = models_.find(id);
    require(it != models_.end(), ErrorCode::kNotFound, "no model with id '" + id + "'");
    return it->second;
  }

 private:
  mutable std::shared_mutex mu_;
  std::map<std::string, DatasetEntry> datasets_;
  std::map<std::string, ClassifierPtr> models_;
  std::size_t next_dataset_ = 0;
  std::size_t next_model_ = 0;
  std::optional<std::filesystem::path> dir_;
};

inline int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kClassMismatch: return 409;
    case ErrorCode::kSchema:
    case ErrorCode::kParse:
    case ErrorCode::kValidation:
    case ErrorCode::kConfig:
    case ErrorCode::kDimension:
    case ErrorCode::kCorruptFile:
    case ErrorCode::kVersionMismatch:
    case ErrorCode::kBorderline:
    case ErrorCode::kDegenerate: return 422;
    default: return 500;
  }
}

class Service {
 public:
  explicit Service(std::optional<std::filesystem::path> store = std::nullopt) : registry_(std::move(store)) {
    routes();
  }

  httplib::Server& server() { return server_; }
  ResourceRegistry& registry() { return registry_; }

  // Binds; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port) {
    const int bound = port == 0 ? server_.bind_to_any_port(host) : (server_.bind_to_port(host, port) ? port : -1);
    require(bound > 0, ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
    return bound;
  }
  bool listen_after_bind() { return server_.listen_after_bind(); }
  void stop() { server_.stop(); }

 private:
  using Handler = std::function<Json(const httplib::Request&)>;

  static Json error_body(const std::string& code, const std::string& message, Json detail = Json::object()) {
    return {{"code", code}, {"message", message}, {"detail", std::move(detail)}};
  }

  static void reply(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static void wrap(const Handler& h, const httplib::Request& req, httplib::Response& res, int ok_status) {
    try {
      reply(res, ok_status, h(req));
    } catch (const Error& e) {
      reply(res, http_status(e.code()), error_body(std::string(e.code_name()), e.what(), {{"path", req.path}}));
    } catch (const Json::exception& e) {
      reply(res, 422, error_body("schema_error", e.what(), {{"path", req.path}}));
    } catch (const std::exception& e) {
      reply(res, 500, error_body("internal_error", e.what(), {{"path", req.path}}));
    }
  }

  void get(const std::string& pattern, Handler h) {
    server_.Get(pattern, [h](const httplib::Request& req, httplib::Response& res) { wrap(h, req, res, 200); });
  }
  void post(const std::string& pattern, Handler h, int ok_status = 200) {
    server_.Post(pattern,
                 [h, ok_status](const httplib::Request& req, httplib::Response& res) { wrap(h, req, res, ok_status); });
  }

  static Json body(const httplib::Request& req) {
    Json j = Json::parse(req.body, nullptr, false);
    require(!j.is_discarded() && j.is_object(), ErrorCode::kSchema, "request body must be a JSON object");
    return j;
  }

  static std::vector<double> features(const Json& j, const Classifier& m) {
    require(j.contains("features"), ErrorCode::kSchema, "missing 'features'");
    auto x = j.at("features").get<std::vector<double>>();
    require(x.size() == m.num_features(), ErrorCode::kDimension,
            "expected " + std::to_string(m.num_features()) + " features, got " + std::to_string(x.size()));
    check_finite(x);
    return x;
  }

  static McConfig mc_config(const Json& j) {
    McConfig mc;
    mc.n_samples = j.value("n_samples", mc.n_samples);
    mc.seed = j.value("seed", mc.seed);
    require(mc.n_samples >= 2, ErrorCode::kConfig, "n_samples must be at least 2");
    return mc;
  }

  static Json probabilities_json(const Classifier& m, const ClassProbabilities& p) {
    Json out = Json::object();
    for (std::size_t c = 0; c < p.size(); ++c) out[m.class_names()[c]] = p[c];
    return out;
  }

  static Json dataset_summary(const std::string& id, const DatasetEntry& e) {
    Json features = Json::array();
    for (const auto& f : e.data->features) features.push_back(to_json(f));
    return {{"id", id},
            {"name", e.data->name},
            {"n", e.data->size()},
            {"class_names", e.data->class_names},
            {"class_counts", e.data->class_counts()},
            {"features", features}};
  }

  static Json model_summary(const std::string& id, const Classifier& m) {
    return {{"id", id}, {"kind", m.kind()}, {"class_names", m.class_names()}, {"num_features", m.num_features()}};
  }

  Json post_dataset(const httplib::Request& req) {
    const std::string type = req.get_header_value("Content-Type");
    DatasetEntry e;
    if (type.rfind("text/csv", 0) == 0) {
      const std::string label = req.has_param("label") ? req.get_param_value("label") : "class";
      std::set<std::string> categorical;
      if (req.has_param("categorical")) {
        for (const auto& c : detail::split_csv_line(req.get_param_value("categorical")))
          if (!c.empty()) categorical.insert(c);
      }
      std::istringstream in(req.body);
      e.data = std::make_shared<Dataset>(
          ingest_csv(in, label, categorical, req.has_param("name") ? req.get_param_value("name") : "upload"));
    } else {
      const Json j = body(req);
      if (j.contains("mixture")) {
        e.mixture = mixture_spec_from_json(j.at("mixture"));
        GaussianMixture mix(*e.mixture);
        e.data = std::make_shared<Dataset>(sample_mixture(mix, j.value("n", std::size_t{500})));
      } else if (j.contains("dataset")) {
        e.data = std::make_shared<Dataset>(dataset_from_json(j.at("dataset")));
      } else {
        throw Error(ErrorCode::kSchema, "expected text/csv, 'mixture' or 'dataset'");
      }
    }
    const std::string id = registry_.add_dataset(e);
    return dataset_summary(id, e);
  }

  Json post_model(const httplib::Request& req) {
    const Json j = body(req);
    if (j.contains("model")) {
      auto m = model_from_json(j.at("model"));
      const std::string id = registry_.add_model(m);
      Json out = model_summary(id, *m);
      out["training_log"] = nullptr;
      return out;
    }
    require(j.contains("dataset_id") && j.contains("kind"), ErrorCode::kSchema,
            "expected {dataset_id, kind, config} or {model}");
    const auto entry = registry_.dataset(j.at("dataset_id").get<std::string>());
    Json config = j.value("config", Json::object());
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "bayes" && !config.contains("mixture") && entry.mixture) config["mixture"] = to_json(*entry.mixture);
    auto built = build_model(*entry.data, kind, config);
    const std::string id = registry_.add_model(built.model);
    Json out = model_summary(id, *built.model);
    out["training_log"] = built.log;
    return out;
  }

  Json classify(const httplib::Request& req) {
    const auto m = registry_.model(req.path_params.at("id"));
    const Json j = body(req);
    const auto x = features(j, *m);
    UncertaintyProfile profile = UncertaintyProfile::global(j.value("rho", 0.0));
    if (j.contains("dispersions")) {
      auto s = j.at("dispersions").get<std::vector<double>>();
      require(s.size() == m->num_features(), ErrorCode::kDimension, "one dispersion per feature required");
      for (std::size_t i = 0; i < s.size(); ++i) profile.overrides[i] = s[i];
    }
    const McEstimate e = mc_probabilities(*m, x, profile, mc_config(j));
    const auto policy = EliminationPolicy::from_json(j.value("policy", Json::object()));
    return {{"probabilities", probabilities_json(*m, e.probs)},
            {"probs", e.probs.vector()},
            {"standard_error", e.standard_error},
            {"verdict", eliminate(e.probs, policy).to_json(m->class_names())}};
  }

  Json sweep(const httplib::Request& req) {
    const auto m = registry_.model(req.path_params.at("id"));
    const Json j = body(req);
    const auto x = features(j, *m);
    require(j.contains("rho_grid"), ErrorCode::kSchema, "missing 'rho_grid'");
    const auto grid = j.at("rho_grid").get<std::vector<double>>();
    Json out = rho_sweep(*m, x, grid, mc_config(j)).to_json();
    out["class_names"] = m->class_names();
    return out;
  }

  static std::size_t feature_index(const Json& f, const Classifier& m) {
    if (f.is_string()) {
      const auto& fs = m.info().features;
      for (std::size_t i = 0; i < fs.size(); ++i)
        if (fs[i].name == f.get<std::string>()) return i;
      throw Error(ErrorCode::kConfig, "unknown feature '" + f.get<std::string>() + "'");
    }
    return f.get<std::size_t>();
  }

  Json sensitivity(const httplib::Request& req) {
    const auto m = registry_.model(req.path_params.at("id"));
    const Json j = body(req);
    const auto x = features(j, *m);
    require(j.contains("feature") && j.contains("s_grid"), ErrorCode::kSchema, "missing 'feature' or 's_grid'");
    const auto grid = j.at("s_grid").get<std::vector<double>>();
    Json out = sensitivity_sweep(*m, x, j.value("rho0", 0.0), feature_index(j.at("feature"), *m), grid, mc_config(j))
                   .to_json();
    out["class_names"] = m->class_names();
    return out;
  }

  Json intervals(const httplib::Request& req) {
    const auto m = registry_.model(req.path_params.at("id"));
    const Json j = body(req);
    const auto x = features(j, *m);
    const double margin = j.value("margin", 1.0);
    Json rows = Json::array();
    for (std::size_t f = 0; f < m->num_features(); ++f) {
      if (!m->info().features[f].continuous()) continue;
      Json r = confidence_interval(*m, x, f, margin).to_json();
      r["name"] = m->info().features[f].name;
      rows.push_back(r);
    }
    const auto p = m->predict(x);
    return {{"class", m->class_names()[p.argmax()]}, {"intervals", rows}};
  }

  Json metrics(const httplib::Request& req) {
    const auto m = registry_.model(req.path_params.at("id"));
    require(req.has_param("dataset"), ErrorCode::kSchema, "missing 'dataset' query parameter");
    const auto entry = registry_.dataset(req.get_param_value("dataset"));
    check_compatible(*m, *entry.data);
    const std::vector<double> thresholds =
        req.has_param("thresholds") ? parse_thresholds(req.get_param_value("thresholds")) : default_thresholds();
    const auto cm = confusion(*m, *entry.data);
    return {{"report", metric_report(cm).to_json()},
            {"confusion", cm.to_json()},
            {"confused_pairs", to_json(confused_pairs(cm), cm.names())},
            {"rejection_curve", to_json(rejection_curve(*m, *entry.data, thresholds))}};
  }

  Json compare(const httplib::Request& req) {
    const Json j = body(req);
    require(j.contains("model_a") && j.contains("model_b") && j.contains("dataset_id"), ErrorCode::kSchema,
            "expected {model_a, model_b, dataset_id}");
    const auto a = registry_.model(j.at("model_a").get<std::string>());
    const auto b = registry_.model(j.at("model_b").get<std::string>());
    const auto entry = registry_.dataset(j.at("dataset_id").get<std::string>());
    check_compatible(*a, *entry.data);
    check_compatible(*b, *entry.data);
    return compare_models(*a, *b, *entry.data);
  }

 public:
  static std::vector<double> default_thresholds() {
    std::vector<double> t;
    for (int i = 0; i < 20; ++i) t.push_back(i * 0.05);
    return t;
  }

  static Json compare_models(const Classifier& a, const Classifier& b, const Dataset& data) {
    const auto ra = metric_report(confusion(a, data));
    const auto rb = metric_report(confusion(b, data));
    Json out = z_score(ra.tau, ra.var_tau, rb.tau, rb.var_tau).to_json();
    out["a"] = ra.to_json();
    out["b"] = rb.to_json();
    return out;
  }

 private:
  void routes() {
    server_.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                 {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                 {"Access-Control-Allow-Headers", "Content-Type"}});
    server_.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    get("/v1/health", [](const httplib::Request&) -> Json {
      return {{"status", "ok"}, {"version", kServiceVersion}, {"model_kinds", model_kinds()}};
    });
    post("/v1/datasets", [this](const httplib::Request& r) { return post_dataset(r); }, 201);
    get("/v1/datasets/:id", [this](const httplib::Request& r) {
      const std::string id = r.path_params.at("id");
      return dataset_summary(id, registry_.dataset(id));
    });
    post("/v1/models", [this](const httplib::Request& r) { return post_model(r); }, 201);
    get("/v1/models/:id", [this](const httplib::Request& r) {
      return model_to_json(*registry_.model(r.path_params.at("id")));
    });
    post("/v1/models/:id/classify", [this](const httplib::Request& r) { return classify(r); });
    post("/v1/models/:id/sweep", [this](const httplib::Request& r) { return sweep(r); });
    post("/v1/models/:id/sensitivity", [this](const httplib::Request& r) { return sensitivity(r); });
    post("/v1/models/:id/intervals", [this](const httplib::Request& r) { return intervals(r); });
    get("/v1/models/:id/metrics", [this](const httplib::Request& r) { return metrics(r); });
    post("/v1/compare", [this](const httplib::Request& r) { return compare(r); });

    server_.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      if (res.status == 404 && res.body.empty())
        reply(res, 404, error_body("not_found", "no route for " + req.method + " " + req.path));
    });
  }

  ResourceRegistry registry_;
  httplib::Server server_;
};

}  // namespace elim

#endif  // ELIM_SERVICE_HPP_
