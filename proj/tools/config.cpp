#include "config.hpp"

#include <fstream>
#include <set>

namespace dioph::cli {

namespace {

const std::set<std::string> kTopLevel = {
    "system", "v", "N", "D", "s", "b", "accelerate", "m", "eps", "eta", "R", "omega", "q",
    "weight", "primes", "levels", "gamma", "alpha", "theta", "Q_max", "P_max", "max_level",
    "level_cost", "local_method", "integral", "seed", "samples", "delta", "Phi", "budget",
    "workers"};

std::string where(const std::string& key) { return "config: '" + key + "'"; }

template <typename T>
T get_as(const json& node, const std::string& key) {
  try {
    return node.get<T>();
  } catch (const json::exception&) {
    fail(where(key) + " has the wrong type");
  }
}

Int get_int(const json& node, const std::string& key) {
  require(node.is_number_integer(), where(key) + " must be an integer");
  return node.get<Int>();
}

double get_number(const json& node, const std::string& key) {
  require(node.is_number(), where(key) + " must be a number");
  return node.get<double>();
}

IVec get_ivec(const json& node, const std::string& key) {
  require(node.is_array(), where(key) + " must be an array of integers");
  IVec out(static_cast<Eigen::Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) out[i] = get_int(node[i], key);
  return out;
}

json ivec_json(const IVec& x) {
  json out = json::array();
  for (Eigen::Index i = 0; i < x.size(); ++i) out.push_back(x[i]);
  return out;
}

forms::FormSystem parse_system(const json& node, std::optional<forms::LinearFamily>& linear,
                               json& canonical) {
  require(node.is_object(), where("system") + " must be an object");
  for (const auto& [key, _] : node.items()) {
    require(key == "variables" || key == "forms" || key == "declared_rank" || key == "linear",
            where("system." + key) + " is not a known key");
  }
  require(node.contains("variables"), where("system.variables") + " is required");
  require(node.contains("forms"), where("system.forms") + " is required");
  const Int n = get_int(node["variables"], "system.variables");
  require(n >= 1 && n <= 64, where("system.variables") + " must be in [1, 64]");

  const json& forms_node = node["forms"];
  require(forms_node.is_array() && !forms_node.empty(), where("system.forms") + " must be a non-empty array");
  std::vector<std::vector<forms::Monomial>> forms;
  for (const auto& form : forms_node) {
    require(form.is_array() && !form.empty(), where("system.forms") + " entries must be non-empty monomial lists");
    std::vector<forms::Monomial> terms;
    for (const auto& mono : form) {
      require(mono.is_object() && mono.contains("coefficient") && mono.contains("exponents"),
              where("system.forms") + " monomials need 'coefficient' and 'exponents'");
      forms::Monomial t;
      t.coefficient = get_int(mono["coefficient"], "system.forms.coefficient");
      const IVec e = get_ivec(mono["exponents"], "system.forms.exponents");
      require(e.size() == n, where("system.forms.exponents") + " length must equal variables");
      for (Eigen::Index j = 0; j < e.size(); ++j) {
        require(e[j] >= 0, where("system.forms.exponents") + " must be non-negative");
        t.exponents.push_back(static_cast<int>(e[j]));
      }
      terms.push_back(std::move(t));
    }
    forms.push_back(std::move(terms));
  }
  std::optional<int> rank;
  if (node.contains("declared_rank") && !node["declared_rank"].is_null()) {
    rank = static_cast<int>(get_int(node["declared_rank"], "system.declared_rank"));
  }
  forms::FormSystem F = forms::FormSystem::from_monomials(static_cast<int>(n), forms, rank);

  canonical = json::object();
  canonical["variables"] = n;
  canonical["forms"] = forms_node;
  canonical["declared_rank"] = rank ? json(*rank) : json(nullptr);
  canonical["linear"] = nullptr;
  if (node.contains("linear") && !node["linear"].is_null()) {
    const json& rows = node["linear"];
    require(rows.is_array() && !rows.empty(), where("system.linear") + " must be a non-empty matrix");
    IMat m(static_cast<Eigen::Index>(rows.size()), n);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const IVec row = get_ivec(rows[i], "system.linear");
      require(row.size() == n, where("system.linear") + " rows must have one entry per variable");
      m.row(static_cast<Eigen::Index>(i)) = row.transpose();
    }
    linear = forms::LinearFamily::from_rows(m);
    canonical["linear"] = rows;
  }
  return F;
}

GammaSpec parse_gamma(const json& node, json& canonical) {
  GammaSpec spec;
  require(node.is_object(), where("gamma") + " must be an object");
  const std::string source = node.value("source", std::string("synthetic"));
  canonical = json::object();
  canonical["source"] = source;
  if (source == "synthetic") {
    spec.source = GammaSource::synthetic;
    spec.m = static_cast<int>(get_int(node.value("m", json(1)), "gamma.m"));
    require(spec.m >= 1, where("gamma.m") + " must be positive");
    canonical["m"] = spec.m;
  } else if (source == "table") {
    spec.source = GammaSource::table;
    require(node.contains("values") && node["values"].is_object(),
            where("gamma.values") + " must map primes to values");
    for (const auto& [key, value] : node["values"].items()) {
      UInt p = 0;
      try {
        p = std::stoull(key);
      } catch (const std::exception&) {
        fail(where("gamma.values") + " keys must be primes");
      }
      spec.values[p] = get_number(value, "gamma.values");
    }
    canonical["values"] = node["values"];
    if (node.contains("m")) {
      spec.table_fallback = true;
      spec.m = static_cast<int>(get_int(node["m"], "gamma.m"));
      canonical["m"] = spec.m;
    }
  } else if (source == "system") {
    spec.source = GammaSource::system;
    spec.level = static_cast<int>(get_int(node.value("level", json(2)), "gamma.level"));
    require(spec.level >= 1, where("gamma.level") + " must be positive");
    canonical["level"] = spec.level;
  } else {
    fail(where("gamma.source") + " must be synthetic, table or system");
  }
  return spec;
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  require(doc.is_object(), "config: top level must be an object");
  for (const auto& [key, _] : doc.items()) {
    require(kTopLevel.count(key) == 1, where(key) + " is not a known key");
  }
  require(doc.contains("system"), where("system") + " is required");

  ExperimentConfig c;
  json& out = c.canonical;
  out = json::object();
  c.system = parse_system(doc["system"], c.linear, out["system"]);
  const int n = c.system.variables();
  const int r = c.system.forms();

  c.v = doc.contains("v") ? get_ivec(doc["v"], "v") : IVec::Zero(r);
  require(c.v.size() == r, where("v") + " needs one entry per form");
  out["v"] = ivec_json(c.v);

  auto integer = [&](const char* key, Int fallback, Int lo) {
    const Int value = doc.contains(key) ? get_int(doc[key], key) : fallback;
    require(value >= lo, where(key) + " must be at least " + std::to_string(lo));
    out[key] = value;
    return value;
  };
  auto number = [&](const char* key, double fallback) {
    const double value = doc.contains(key) ? get_number(doc[key], key) : fallback;
    out[key] = value;
    return value;
  };
  auto optional_number = [&](const char* key) -> std::optional<double> {
    if (!doc.contains(key) || doc[key].is_null()) {
      out[key] = nullptr;
      return std::nullopt;
    }
    const double value = get_number(doc[key], key);
    out[key] = value;
    return value;
  };
  auto text = [&](const char* key, const std::string& fallback, std::set<std::string> allowed) {
    const std::string value = doc.contains(key) ? get_as<std::string>(doc[key], key) : fallback;
    require(allowed.count(value) == 1, where(key) + " has an unsupported value '" + value + "'");
    out[key] = value;
    return value;
  };

  c.N = integer("N", 1, 1);
  c.D = integer("D", 1, 1);
  c.s = doc.contains("s") ? get_ivec(doc["s"], "s") : IVec::Zero(n);
  require(c.s.size() == n, where("s") + " needs one entry per variable");
  out["s"] = ivec_json(c.s);
  if (doc.contains("b") && !doc["b"].is_null()) {
    c.b = get_ivec(doc["b"], "b");
    require(c.b->size() == n, where("b") + " needs one entry per variable");
    out["b"] = ivec_json(*c.b);
  } else {
    out["b"] = nullptr;
  }
  c.accelerate = doc.contains("accelerate") ? get_as<bool>(doc["accelerate"], "accelerate") : false;
  out["accelerate"] = c.accelerate;

  c.m = static_cast<int>(integer("m", 1, 1));
  c.eps = optional_number("eps");
  c.eta = optional_number("eta");
  c.R = optional_number("R");
  if (c.R) require(*c.R >= 2, where("R") + " must be at least 2");
  if (c.eps) require(*c.eps > 0 && *c.eps < 1, where("eps") + " must lie in (0, 1)");
  if (c.eta) require(*c.eta > 0 && *c.eta < 1, where("eta") + " must lie in (0, 1)");
  if (c.eps && c.eta) require(*c.eps < *c.eta, "config: need eps < eta");
  c.omega = static_cast<UInt>(integer("omega", 1, 1));
  if (doc.contains("q") && !doc["q"].is_null()) {
    c.q = static_cast<UInt>(get_int(doc["q"], "q"));
    require(*c.q >= 2, where("q") + " must be at least 2");
    out["q"] = *c.q;
  } else {
    out["q"] = nullptr;
  }
  c.weight = text("weight", "gpy", {"gpy", "unit"});

  auto int_list = [&](const char* key, std::vector<Int> fallback) {
    std::vector<Int> values = fallback;
    if (doc.contains(key)) {
      const IVec x = get_ivec(doc[key], key);
      values.assign(x.data(), x.data() + x.size());
    }
    out[key] = values;
    return values;
  };
  for (Int p : int_list("primes", {2, 3, 5, 7})) {
    require(p >= 2, where("primes") + " entries must be primes");
    c.primes.push_back(static_cast<UInt>(p));
  }
  for (Int l : int_list("levels", {1, 2})) {
    require(l >= 0 && l <= 16, where("levels") + " entries must be in [0, 16]");
    c.levels.push_back(static_cast<int>(l));
  }
  c.gamma = parse_gamma(doc.contains("gamma") ? doc["gamma"] : json::object(), out["gamma"]);

  if (doc.contains("alpha") && !doc["alpha"].is_null()) {
    const json& a = doc["alpha"];
    require(a.is_array() && static_cast<int>(a.size()) == r, where("alpha") + " needs one entry per form");
    RVec alpha(r);
    for (int i = 0; i < r; ++i) alpha[i] = get_number(a[i], "alpha");
    c.alpha = alpha;
    out["alpha"] = a;
  } else {
    out["alpha"] = nullptr;
  }
  c.theta = number("theta", 0.1);
  require(c.theta > 0, where("theta") + " must be positive");
  c.Q_max = integer("Q_max", 20, 1);
  c.P_max = static_cast<UInt>(integer("P_max", 50, 1));
  c.max_level = static_cast<int>(integer("max_level", 6, 1));
  c.level_cost = number("level_cost", 2e6);
  c.local_method = text("local_method", "padic", {"padic", "singular_series"});
  c.integral = text("integral", "monte_carlo", {"monte_carlo", "oscillatory"});
  c.seed = static_cast<std::uint64_t>(integer("seed", 20240601, 0));
  c.samples = static_cast<std::uint64_t>(integer("samples", 1'000'000, 1));
  c.delta = optional_number("delta");
  if (c.delta) require(*c.delta > 0, where("delta") + " must be positive");
  c.Phi = number("Phi", 20);
  c.budget = number("budget", 1e9);
  require(c.budget >= 0, where("budget") + " must be non-negative");
  c.workers = static_cast<unsigned>(integer("workers", 1, 1));
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "config: cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    fail("config: " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

json cache_inputs(const ExperimentConfig& config) {
  json inputs = config.canonical;
  inputs.erase("workers");
  return inputs;
}

}  // namespace dioph::cli
