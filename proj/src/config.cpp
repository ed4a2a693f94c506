#include "menunet/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/core.h>

#include "menunet/toml_lite.hpp"

namespace menunet {

ConfigError::ConfigError(std::string field, const std::string& what)
    : std::runtime_error(fmt::format("config field '{}': {}", field, what)), field_(std::move(field)) {}

namespace {

using nlohmann::json;

// Section reader that remembers which keys were consumed.
class Section {
 public:
  Section(const json& root, std::string name) : name_(std::move(name)) {
    if (root.contains(name_)) {
      node_ = &root.at(name_);
      if (!node_->is_object()) throw ConfigError(name_, "must be a table");
    }
  }

  bool has(const std::string& key) const { return node_ && node_->contains(key); }

  std::string path(const std::string& key) const { return name_ + "." + key; }

  const json& get(const std::string& key) {
    used_.insert(key);
    return node_->at(key);
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = get(key);
    if (!v.is_number()) throw ConfigError(path(key), "must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(path(key), "must be finite");
    return d;
  }

  double required_number(const std::string& key) {
    if (!has(key)) throw ConfigError(path(key), "is required");
    return number(key, 0.0);
  }

  std::size_t count(const std::string& key, std::size_t fallback) {
    if (!has(key)) return fallback;
    const json& v = get(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
      throw ConfigError(path(key), "must be a nonnegative integer");
    }
    return static_cast<std::size_t>(v.get<std::int64_t>());
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = get(key);
    if (!v.is_number_integer()) throw ConfigError(path(key), "must be an integer");
    return v.get<std::int64_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = get(key);
    if (!v.is_boolean()) throw ConfigError(path(key), "must be true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = get(key);
    if (!v.is_string()) throw ConfigError(path(key), "must be a string");
    return v.get<std::string>();
  }

  std::vector<std::size_t> counts(const std::string& key, std::vector<std::size_t> fallback) {
    if (!has(key)) return fallback;
    const json& v = get(key);
    if (!v.is_array()) throw ConfigError(path(key), "must be an array of integers");
    std::vector<std::size_t> out;
    for (const json& e : v) {
      if (!e.is_number_integer() || e.get<std::int64_t>() < 1) {
        throw ConfigError(path(key), "must be an array of positive integers");
      }
      out.push_back(static_cast<std::size_t>(e.get<std::int64_t>()));
    }
    return out;
  }

  std::vector<double> numbers(const std::string& key) {
    if (!has(key)) throw ConfigError(path(key), "is required");
    const json& v = get(key);
    if (!v.is_array()) throw ConfigError(path(key), "must be an array of numbers");
    std::vector<double> out;
    for (const json& e : v) {
      if (!e.is_number()) throw ConfigError(path(key), "must be an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  // Wraps library validation errors so they name this section's field.
  template <class F>
  auto convert(const std::string& key, F&& f) {
    try {
      return f();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(path(key), e.what());
    }
  }

  void reject_unknown() const {
    if (!node_) return;
    for (const auto& [key, value] : node_->items()) {
      if (!used_.count(key)) throw ConfigError(path(key), "unknown key");
    }
  }

 private:
  std::string name_;
  const json* node_ = nullptr;
  std::set<std::string> used_;
};

DistributionSpec parse_distribution(Section& s) {
  const std::string kind = s.string("kind", "uniform_rect");
  if (kind == "uniform_rect") {
    const double c1 = s.number("c1", 1.0);
    const double c2 = s.number("c2", 1.0);
    return s.convert("c2", [&] { return DistributionSpec::uniform_rect(c1, c2); });
  }
  if (kind == "uniform_triangle") {
    const double c = s.required_number("c");
    return s.convert("c", [&] { return DistributionSpec::uniform_triangle(c); });
  }
  if (kind == "custom") {
    CustomDensity t;
    t.width = s.required_number("width");
    t.height = s.required_number("height");
    t.nx = s.count("nx", 0);
    t.ny = s.count("ny", 0);
    t.density = s.numbers("density");
    return s.convert("density", [&] { return DistributionSpec::custom(std::move(t)); });
  }
  throw ConfigError(s.path("kind"), fmt::format("unknown distribution '{}'", kind));
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  json root;
  std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      root = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError("<json>", e.what());
    }
  } else {
    try {
      root = parse_toml(text);
    } catch (const TomlError& e) {
      throw ConfigError("<toml>", e.what());
    }
  }
  if (!root.is_object()) throw ConfigError("<root>", "must be a table");

  static const std::set<std::string> sections{"name",  "distribution", "buyer", "mechanism", "train",
                                              "compare", "output",     "lp",    "bench"};
  for (const auto& [key, value] : root.items()) {
    if (!sections.count(key)) throw ConfigError(key, "unknown section");
  }

  ExperimentConfig cfg;
  if (root.contains("name")) {
    if (!root["name"].is_string()) throw ConfigError("name", "must be a string");
    cfg.name = root["name"].get<std::string>();
  }

  Section dist(root, "distribution");
  cfg.distribution = parse_distribution(dist);
  dist.reject_unknown();

  Section buyer(root, "buyer");
  const std::string valuation = buyer.string("valuation", "additive");
  cfg.valuation = buyer.convert("valuation", [&] { return valuation_from_string(valuation); });
  buyer.reject_unknown();

  TrainConfig& t = cfg.train;
  Section mech(root, "mechanism");
  const std::string mode = mech.string("mode", to_string(t.mode));
  t.mode = mech.convert("mode", [&] { return mode_from_string(mode); });
  t.k = mech.count("k", t.mode == MechanismMode::DeterministicPricesOnly ? 4 : t.k);
  mech.reject_unknown();
  if (t.mode == MechanismMode::DeterministicPricesOnly && t.k != deterministic_menu_size(2)) {
    throw ConfigError("mechanism.k", fmt::format("deterministic mode on two goods needs k = {}",
                                                 deterministic_menu_size(2)));
  }

  Section tr(root, "train");
  t.iterations = tr.count("iterations", t.iterations);
  t.learning_rate = tr.number("learning_rate", t.learning_rate);
  const std::string optimizer = tr.string("optimizer", to_string(t.optimizer));
  t.optimizer = tr.convert("optimizer", [&] { return optimizer_from_string(optimizer); });
  const std::int64_t seed = tr.integer("seed", static_cast<std::int64_t>(t.seed));
  if (seed < 0) throw ConfigError(tr.path("seed"), "must be nonnegative");
  t.seed = static_cast<std::uint64_t>(seed);
  t.grid_n = tr.count("grid_n", t.grid_n);
  t.restarts = tr.count("restarts", t.restarts);
  // Absent means all logical cores; results do not depend on the thread count.
  const std::int64_t threads = tr.integer("threads", 0);
  if (threads < 0) throw ConfigError(tr.path("threads"), "must be nonnegative");
  t.threads = static_cast<int>(threads);
  t.init_logit_scale = tr.number("init_logit_scale", t.init_logit_scale);
  t.lr_lambda_ref = tr.number("lr_lambda_ref", t.lr_lambda_ref);
  t.lambda.start = tr.number("lambda_start", t.lambda.start);
  t.lambda.final = tr.number("lambda_final", t.lambda.final);
  const std::string ramp = tr.string("lambda_ramp", to_string(t.lambda.ramp));
  t.lambda.ramp = tr.convert("lambda_ramp", [&] { return ramp_from_string(ramp); });
  t.lambda.ramp_fraction = tr.number("ramp_fraction", t.lambda.ramp_fraction);
  tr.reject_unknown();

  // TrainConfig::validate names its own fields; map them into the train section.
  try {
    t.validate();
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    const std::string field = msg.substr(0, msg.find(':'));
    const std::string section =
        (field == "k" || field == "mode") ? "mechanism" : "train";
    throw ConfigError(section + "." + field, msg);
  }

  Section cmp(root, "compare");
  cfg.compare.oracle = cmp.boolean("oracle", false);
  cfg.compare.lp = cmp.boolean("lp", false);
  cfg.compare.duality = cmp.boolean("duality", false);
  cmp.reject_unknown();

  Section out(root, "output");
  cfg.output_dir = out.string("dir", cfg.output_dir);
  out.reject_unknown();

  Section lp(root, "lp");
  cfg.lp.grid_n = lp.count("grid_n", cfg.lp.grid_n);
  if (cfg.lp.grid_n < 1) throw ConfigError("lp.grid_n", "must be at least 1");
  cfg.lp.export_mps = lp.boolean("export_mps", cfg.lp.export_mps);
  lp.reject_unknown();

  Section bench(root, "bench");
  cfg.bench.shared_grids = bench.counts("shared_grids", cfg.bench.shared_grids);
  cfg.bench.trainer_grids = bench.counts("trainer_grids", cfg.bench.trainer_grids);
  cfg.bench.iterations = bench.count("iterations", cfg.bench.iterations);
  cfg.bench.restarts = bench.count("restarts", cfg.bench.restarts);
  if (cfg.bench.iterations < 1) throw ConfigError("bench.iterations", "must be at least 1");
  if (cfg.bench.restarts < 1) throw ConfigError("bench.restarts", "must be at least 1");
  bench.reject_unknown();

  if (cfg.compare.oracle && !reference_for(cfg)) {
    throw ConfigError("compare.oracle", fmt::format("no known optimum for {} with k = {}",
                                                    cfg.distribution.describe(), t.k));
  }
  if (cfg.compare.duality && !std::holds_alternative<UniformTriangle>(cfg.distribution.variant())) {
    throw ConfigError("compare.duality", "duality certificates exist only for uniform_triangle");
  }
  if (cfg.compare.lp && cfg.valuation != ValuationKind::Additive) {
    throw ConfigError("compare.lp", "the LP baseline assumes additive valuations");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", fmt::format("cannot read '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::optional<OptimalReference> reference_for(const ExperimentConfig& config) {
  if (config.valuation != ValuationKind::Additive) return std::nullopt;
  const TrainConfig& t = config.train;
  if (t.mode == MechanismMode::UnitDemand) return std::nullopt;
  const auto& v = config.distribution.variant();
  if (const auto* r = std::get_if<UniformRect>(&v)) {
    if (r->c1 != 1.0) return std::nullopt;
    if (r->c2 == 1.0 && t.mode == MechanismMode::Free) {
      if (t.k == 2) return optimal_2menu();
      if (t.k == 3) return optimal_3menu();
    }
    if (t.k < 4) return std::nullopt;
    try {
      return optimal_rect(r->c2);
    } catch (const std::invalid_argument&) {
      return std::nullopt;
    }
  }
  if (const auto* tri = std::get_if<UniformTriangle>(&v)) {
    OptimalReference ref = optimal_triangle(tri->c);
    if (ref.menu && t.k < ref.menu->size()) return std::nullopt;
    return ref;
  }
  return std::nullopt;
}

nlohmann::json to_json(const ExperimentConfig& config) {
  // Mirrors the config file layout, so the result parses back unchanged.
  const TrainConfig& t = config.train;
  return {{"name", config.name},
          {"distribution", to_json(config.distribution)},
          {"buyer", {{"valuation", to_string(config.valuation)}}},
          {"mechanism", {{"mode", to_string(t.mode)}, {"k", t.k}}},
          {"train",
           {{"iterations", t.iterations},
            {"learning_rate", t.learning_rate},
            {"optimizer", to_string(t.optimizer)},
            {"seed", t.seed},
            {"grid_n", t.grid_n},
            {"restarts", t.restarts},
            {"threads", t.threads},
            {"init_logit_scale", t.init_logit_scale},
            {"lr_lambda_ref", t.lr_lambda_ref},
            {"lambda_start", t.lambda.start},
            {"lambda_final", t.lambda.final},
            {"lambda_ramp", to_string(t.lambda.ramp)},
            {"ramp_fraction", t.lambda.ramp_fraction}}},
          {"compare",
           {{"oracle", config.compare.oracle},
            {"lp", config.compare.lp},
            {"duality", config.compare.duality}}},
          {"lp", {{"grid_n", config.lp.grid_n}, {"export_mps", config.lp.export_mps}}},
          {"bench",
           {{"shared_grids", config.bench.shared_grids},
            {"trainer_grids", config.bench.trainer_grids},
            {"iterations", config.bench.iterations},
            {"restarts", config.bench.restarts}}},
          {"output", {{"dir", config.output_dir}}}};
}

}  // namespace menunet
