#include "hmf/config.hpp"

#include <filesystem>
#include <set>

#include "hmf/error.hpp"
#include "hmf/matrix_io.hpp"

namespace hmf {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <typename T>
T get(const json& obj, const std::string& where, const std::string& key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

template <typename T>
T require(const json& obj, const std::string& where, const std::string& key) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
  return get<T>(obj, where, key, T{});
}

Negativity parse_negativity(const std::string& s, const std::string& where) {
  if (s == "nonnegative") return Negativity::nonnegative;
  if (s == "real") return Negativity::real;
  throw ConfigError(where + ": negativity must be nonnegative or real, got '" + s + "'");
}

PriorKind parse_prior(const std::string& s, const std::string& where) {
  if (s == "exponential") return PriorKind::exponential;
  if (s == "gaussian") return PriorKind::gaussian;
  throw ConfigError(where + ": private_prior must be exponential or gaussian, got '" + s + "'");
}

DrawMode parse_draw_mode(const std::string& s) {
  if (s == "elementwise") return DrawMode::elementwise;
  if (s == "rowwise") return DrawMode::rowwise;
  throw ConfigError("draw_mode must be elementwise or rowwise, got '" + s + "'");
}

}  // namespace

RunConfig parse_config(const json& doc, const std::string& base_dir) {
  check_keys(doc, "config",
             {"entity_types", "datasets", "hyper", "schedule", "init", "draw_mode"});
  RunConfig rc;
  HmfModel& m = rc.model;
  json out = json::object();

  const json hyper = doc.value("hyper", json::object());
  check_keys(hyper, "hyper",
             {"alpha_tau", "beta_tau", "alpha_0", "beta_0", "lambda_private_default", "ard"});
  m.hyper.alpha_tau = get(hyper, "hyper", "alpha_tau", m.hyper.alpha_tau);
  m.hyper.beta_tau = get(hyper, "hyper", "beta_tau", m.hyper.beta_tau);
  m.hyper.alpha_0 = get(hyper, "hyper", "alpha_0", m.hyper.alpha_0);
  m.hyper.beta_0 = get(hyper, "hyper", "beta_0", m.hyper.beta_0);
  m.hyper.lambda_private_default =
      get(hyper, "hyper", "lambda_private_default", m.hyper.lambda_private_default);
  m.hyper.ard = get(hyper, "hyper", "ard", m.hyper.ard);
  out["hyper"] = {{"alpha_tau", m.hyper.alpha_tau},
                  {"beta_tau", m.hyper.beta_tau},
                  {"alpha_0", m.hyper.alpha_0},
                  {"beta_0", m.hyper.beta_0},
                  {"lambda_private_default", m.hyper.lambda_private_default},
                  {"ard", m.hyper.ard}};

  const json sched = doc.value("schedule", json::object());
  check_keys(sched, "schedule", {"iterations", "burn_in", "thinning", "seed"});
  m.schedule.iterations = get(sched, "schedule", "iterations", m.schedule.iterations);
  m.schedule.burn_in = get(sched, "schedule", "burn_in", m.schedule.burn_in);
  m.schedule.thinning = get(sched, "schedule", "thinning", m.schedule.thinning);
  m.schedule.seed = get(sched, "schedule", "seed", m.schedule.seed);
  out["schedule"] = {{"iterations", m.schedule.iterations},
                     {"burn_in", m.schedule.burn_in},
                     {"thinning", m.schedule.thinning},
                     {"seed", m.schedule.seed}};

  const json init = doc.value("init", json::object());
  check_keys(init, "init", {"shared", "private"});
  rc.init.shared = parse_shared_init(get<std::string>(init, "init", "shared", "kmeans"));
  rc.init.private_ = parse_private_init(get<std::string>(init, "init", "private", "leastsquares"));
  out["init"] = {{"shared", to_string(rc.init.shared)}, {"private", to_string(rc.init.private_)}};

  rc.draw_mode = parse_draw_mode(get<std::string>(doc, "config", "draw_mode", "elementwise"));
  out["draw_mode"] = to_string(rc.draw_mode);

  if (!doc.contains("entity_types") || !doc["entity_types"].is_array())
    throw ConfigError("config: 'entity_types' must be an array");
  if (!doc.contains("datasets") || !doc["datasets"].is_array())
    throw ConfigError("config: 'datasets' must be an array");

  struct PendingEntity {
    std::string name;
    Index k;
    Negativity neg;
  };
  std::vector<PendingEntity> entities;
  for (std::size_t t = 0; t < doc["entity_types"].size(); ++t) {
    const json& e = doc["entity_types"][t];
    const std::string where = "entity_types[" + std::to_string(t) + "]";
    check_keys(e, where, {"name", "K", "negativity"});
    const auto k = get<long long>(e, where, "K", 10);
    if (k < 1) throw ConfigError(where + ".K must be at least 1");
    entities.push_back({require<std::string>(e, where, "name"), static_cast<Index>(k),
                        parse_negativity(get<std::string>(e, where, "negativity", "nonnegative"), where)});
  }
  auto entity_id = [&](const std::string& name, const std::string& where) {
    for (std::size_t t = 0; t < entities.size(); ++t)
      if (entities[t].name == name) return t;
    throw ConfigError(where + ": unknown entity type '" + name + "'");
  };

  struct PendingDataset {
    std::string name;
    DatasetKind kind;
    std::size_t row, col;
    ObservedMatrix data;
    double importance, lambda;
    PriorKind prior;
    bool cp;
  };
  std::vector<PendingDataset> datasets;
  std::vector<Index> instances(entities.size(), -1);
  json out_datasets = json::array();
  for (std::size_t n = 0; n < doc["datasets"].size(); ++n) {
    const json& d = doc["datasets"][n];
    const std::string where = "datasets[" + std::to_string(n) + "]";
    check_keys(d, where,
               {"name", "kind", "row_entity", "col_entity", "feature_count", "path", "importance",
                "private_prior", "lambda", "cp_constrained"});
    PendingDataset p;
    p.name = require<std::string>(d, where, "name");
    const auto kind = require<std::string>(d, where, "kind");
    if (kind == "R") p.kind = DatasetKind::main;
    else if (kind == "D") p.kind = DatasetKind::feature;
    else if (kind == "C") p.kind = DatasetKind::similarity;
    else throw ConfigError(where + ".kind must be R, D or C, got '" + kind + "'");
    p.row = entity_id(require<std::string>(d, where, "row_entity"), where);
    p.col = kNoEntity;
    if (p.kind == DatasetKind::main) {
      p.col = entity_id(require<std::string>(d, where, "col_entity"), where);
    } else if (d.contains("col_entity")) {
      throw ConfigError(where + ": col_entity only applies to R datasets");
    }
    if (p.kind != DatasetKind::feature && d.contains("feature_count"))
      throw ConfigError(where + ": feature_count only applies to D datasets");
    if (p.kind == DatasetKind::feature && d.contains("lambda"))
      throw ConfigError(where + ": D datasets take the entity's ARD precisions; remove 'lambda'");
    if (p.kind != DatasetKind::main && d.contains("cp_constrained"))
      throw ConfigError(where + ": cp_constrained only applies to R datasets");

    fs::path path = require<std::string>(d, where, "path");
    if (path.is_relative()) path = fs::path(base_dir) / path;
    path = path.lexically_normal();
    p.data = load_matrix(path.string());
    p.importance = get(d, where, "importance", 1.0);
    p.prior = parse_prior(get<std::string>(d, where, "private_prior", "exponential"), where);
    p.lambda = get(d, where, "lambda", m.hyper.lambda_private_default);
    p.cp = get(d, where, "cp_constrained", false);

    if (p.kind == DatasetKind::feature && d.contains("feature_count")) {
      const auto fc = get<long long>(d, where, "feature_count", 0);
      if (fc != p.data.cols())
        throw ConfigError(where + ": feature_count " + std::to_string(fc) + " but the matrix has " +
                          std::to_string(p.data.cols()) + " columns");
    }
    if (instances[p.row] < 0) instances[p.row] = p.data.rows();
    if (p.kind == DatasetKind::main && instances[p.col] < 0) instances[p.col] = p.data.cols();

    json o = {{"name", p.name},
              {"kind", kind},
              {"row_entity", entities[p.row].name},
              {"path", path.string()},
              {"importance", p.importance},
              {"private_prior", to_string(p.prior)}};
    if (p.kind == DatasetKind::main) {
      o["col_entity"] = entities[p.col].name;
      o["cp_constrained"] = p.cp;
    }
    if (p.kind == DatasetKind::feature) o["feature_count"] = p.data.cols();
    else o["lambda"] = p.lambda;
    out_datasets.push_back(std::move(o));
    datasets.push_back(std::move(p));
  }

  json out_entities = json::array();
  for (std::size_t t = 0; t < entities.size(); ++t) {
    if (instances[t] < 0)
      throw ConfigError("entity type '" + entities[t].name + "' is not used by any dataset");
    add_entity(m, entities[t].name, instances[t], entities[t].k, entities[t].neg);
    out_entities.push_back({{"name", entities[t].name},
                            {"K", entities[t].k},
                            {"negativity", to_string(entities[t].neg)}});
  }
  for (auto& p : datasets) {
    switch (p.kind) {
      case DatasetKind::main:
        add_main_dataset(m, p.name, p.row, p.col, std::move(p.data), p.prior, p.lambda,
                         p.importance, p.cp);
        break;
      case DatasetKind::feature:
        add_feature_dataset(m, p.name, p.row, std::move(p.data), p.prior, p.importance);
        break;
      case DatasetKind::similarity:
        add_similarity_dataset(m, p.name, p.row, std::move(p.data), p.prior, p.lambda,
                               p.importance);
        break;
    }
  }
  out["entity_types"] = std::move(out_entities);
  out["datasets"] = std::move(out_datasets);
  rc.resolved = std::move(out);
  return rc;
}

RunConfig load_config(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
  if (doc.is_object() && doc.contains("manifest_version")) {
    if (!doc.contains("config")) throw ConfigError(path + ": manifest without 'config'");
    doc = doc["config"];
  }
  const fs::path base = fs::absolute(fs::path(path)).parent_path();
  return parse_config(doc, base.string());
}

}  // namespace hmf
