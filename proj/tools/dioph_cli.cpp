#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "cache.hpp"
#include "config.hpp"
#include "dioph/arith.hpp"
#include "dioph/circle.hpp"
#include "dioph/counter.hpp"
#include "dioph/padic.hpp"
#include "dioph/sieve.hpp"
#include "dioph/verify.hpp"

using namespace dioph;
using namespace dioph::cli;

namespace {

constexpr const char* kReportFormat = "dioph-report/1";
constexpr const char* kCsvHeader = "command,quantity,index,value,uncertainty,level,truncation,seed";

enum Exit { ok = 0, failed = 1, validation = 2, budget = 3, internal = 4 };

/// One CSV row; empty strings stay blank.
struct Row {
  std::string quantity;
  std::string index;
  double value = 0;
  std::string uncertainty, level, truncation, seed;
};

json row_json(const Row& r) {
  return {r.quantity, r.index, r.value, r.uncertainty, r.level, r.truncation, r.seed};
}

/// What a command produces; cached as a whole.
struct Outcome {
  json results = json::object();
  json rows = json::array();
  json warnings = json::array();

  void row(Row r) { rows.push_back(row_json(r)); }
};

std::string str(double x) { return json(x).dump(); }

std::string rational_text(const Rational& q) {
  std::ostringstream out;
  out << q;
  return out.str();
}

json estimate_json(const circle::SingularIntegralEstimate& J) {
  json out = {{"value", J.value}, {"seed", J.seed}, {"samples", J.samples}};
  if (J.method == circle::IntegralMethod::monte_carlo) {
    out["method"] = "monte_carlo";
    out["delta"] = J.delta;
    out["standard_error"] = J.standard_error;
    out["half_delta_value"] = J.half_delta_value;
  } else {
    out["method"] = "oscillatory";
    out["Phi"] = J.Phi;
  }
  return out;
}

circle::IntegralControls integral_controls(const ExperimentConfig& c) {
  circle::IntegralControls controls;
  controls.method = c.integral == "oscillatory" ? circle::IntegralMethod::oscillatory
                                                : circle::IntegralMethod::monte_carlo;
  controls.samples = c.samples;
  controls.delta = c.delta;
  controls.seed = c.seed;
  controls.Phi = c.Phi;
  controls.limits = c.limits();
  return controls;
}

const forms::LinearFamily& need_linear(const ExperimentConfig& c, const std::string& command) {
  require(c.linear.has_value(), command + ": config needs system.linear");
  return *c.linear;
}

sieve::SievePlan make_plan(const ExperimentConfig& c, const std::string& command) {
  if (c.R) return sieve::SievePlan::with_level(c.m, *c.R, c.omega, static_cast<double>(c.N));
  require(c.eta && c.eps, command + ": config needs R, or eta and eps");
  return sieve::SievePlan::from_exponents(c.m, static_cast<double>(c.N), *c.eta, *c.eps, c.omega);
}

json plan_json(const sieve::SievePlan& plan) {
  return {{"m", plan.m}, {"R", plan.R}, {"omega", plan.omega}, {"W", plan.W},
          {"log_R", plan.log_R()}, {"coprime_density", plan.coprime_density()}};
}

Outcome run_count(const ExperimentConfig& c) {
  Outcome out;
  const counter::BoxSpec box{c.N, c.system.variables()};
  const counter::CongruenceRestriction restriction{c.D, c.s};
  const auto r = c.accelerate
                     ? counter::last_variable_accelerated_count(c.system, c.v, box, restriction, c.limits())
                     : counter::count_congruent_solutions(c.system, c.v, box, restriction, c.limits());
  out.results = {{"count", r.count},
                 {"method", c.accelerate ? "last_variable" : "enumeration"},
                 {"cost", r.cost},
                 {"N", c.N},
                 {"D", c.D}};
  out.row({"count", "", static_cast<double>(r.count), "", "", "N=" + std::to_string(c.N), ""});
  return out;
}

Outcome run_almost_prime(const ExperimentConfig& c) {
  require(c.eps.has_value(), "almost-prime: config needs eps");
  Outcome out;
  const auto r = counter::count_almost_prime_solutions(c.system, need_linear(c, "almost-prime"), c.v,
                                                       {c.N, c.system.variables()}, *c.eps, c.limits());
  out.results = {{"count", r.count},
                 {"solutions", r.solutions},
                 {"zero_exclusions", r.zero_exclusions},
                 {"roughness_bound", r.bound},
                 {"eps", *c.eps},
                 {"N", c.N}};
  if (r.zero_exclusions > 0) {
    out.warnings.push_back(std::to_string(r.zero_exclusions) +
                           " solutions with some l_i(x) = 0 were excluded");
  }
  out.row({"almost_prime_count", "", static_cast<double>(r.count), "", "", "N=" + std::to_string(c.N), ""});
  out.row({"solutions", "", static_cast<double>(r.solutions), "", "", "N=" + std::to_string(c.N), ""});
  return out;
}

Outcome run_sieve_sum(const ExperimentConfig& c) {
  Outcome out;
  const auto plan = make_plan(c, "sieve-sum");
  counter::WeightedSumOptions options;
  options.b = c.b;
  options.q = c.q;
  options.mode = c.weight == "unit" ? counter::WeightMode::unit : counter::WeightMode::gpy;
  const auto r = counter::sieve_weighted_sum(c.system, need_linear(c, "sieve-sum"), c.v,
                                             {c.N, c.system.variables()}, plan, options, c.limits());
  out.results = {{"value", r.value},
                 {"solutions", r.solutions},
                 {"zero_exclusions", r.zero_exclusions},
                 {"weight", c.weight},
                 {"plan", plan_json(plan)},
                 {"N", c.N}};
  out.results["q"] = c.q ? json(*c.q) : json(nullptr);
  if (r.zero_exclusions > 0) {
    out.warnings.push_back(std::to_string(r.zero_exclusions) +
                           " solutions with some l_i(x) = 0 were excluded");
  }
  out.row({"weighted_sum", "", r.value, "", "", "R=" + str(plan.R) + " W=" + std::to_string(plan.W), ""});
  return out;
}

Outcome run_local(const ExperimentConfig& c) {
  Outcome out;
  padic::Options options{c.limits(), padic::Method::automatic};
  json entries = json::array();
  for (UInt p : c.primes) {
    require(arith::is_prime(p), "local: " + std::to_string(p) + " is not prime");
    for (int l : c.levels) {
      const auto sigma = padic::sigma_p_l(c.system, c.v, p, l, c.D, c.s, options);
      json e = {{"p", p}, {"level", l}, {"sigma", to_double(sigma.value)},
                {"sigma_exact", rational_text(sigma.value)}};
      out.row({"sigma", std::to_string(p), to_double(sigma.value), "", std::to_string(l), "", ""});
      if (c.linear && l >= 1) {
        const auto star = padic::sigma_star_p(c.system, *c.linear, c.v, p, l, options);
        const auto gamma = padic::gamma_p(c.system, *c.linear, c.v, p, l, padic::GammaRoute::hybrid, options);
        e["sigma_star"] = to_double(star.value);
        e["gamma"] = to_double(gamma.value);
        e["gamma_exact"] = rational_text(gamma.value);
        e["gamma_degenerate"] = gamma.degenerate;
        if (gamma.degenerate) {
          out.warnings.push_back("gamma_" + std::to_string(p) + " at level " + std::to_string(l) +
                                 ": local density vanished, factor set to 0");
        }
        out.row({"sigma_star", std::to_string(p), to_double(star.value), "", std::to_string(l), "", ""});
        out.row({"gamma", std::to_string(p), to_double(gamma.value), "", std::to_string(l), "", ""});
      }
      entries.push_back(std::move(e));
    }
  }
  out.results = {{"densities", entries}, {"D", c.D}};
  return out;
}

Outcome run_euler_sum(const ExperimentConfig& c) {
  Outcome out;
  const auto plan = make_plan(c, "euler-sum");
  std::optional<sieve::GammaModel> model;
  std::map<UInt, double> computed;
  switch (c.gamma.source) {
    case GammaSource::synthetic:
      model = sieve::GammaModel::synthetic(c.gamma.m);
      break;
    case GammaSource::table:
      model = sieve::GammaModel::table(c.gamma.values, c.gamma.table_fallback
                                                           ? std::optional<int>(c.gamma.m)
                                                           : std::nullopt);
      break;
    case GammaSource::system: {
      const auto& L = need_linear(c, "euler-sum");
      padic::Options options{c.limits(), padic::Method::automatic};
      model = sieve::GammaModel::from_function(
          [&, options](UInt p) {
            auto it = computed.find(p);
            if (it == computed.end()) {
              const auto g = padic::gamma_p(c.system, L, c.v, p, c.gamma.level,
                                            padic::GammaRoute::hybrid, options);
              it = computed.emplace(p, to_double(g.value)).first;
            }
            return it->second;
          },
          "system gamma_p at level " + std::to_string(c.gamma.level));
      break;
    }
  }
  const sieve::WeightFunction f(c.m);
  const auto sum = sieve::euler_sieve_sum(*model, f, plan.R, plan.W, c.q);
  sieve::MainTermInputs in;
  in.m = c.m;
  in.log_R = plan.log_R();
  in.coprime_density = plan.coprime_density();
  in.q = c.q;
  const double main = sieve::predicted_main_term(
      c.q ? sieve::MainTermKind::sieve_sum_q : sieve::MainTermKind::sieve_sum, in);
  out.results = {{"value", sum.value},
                 {"terms", sum.terms},
                 {"gamma", model->label()},
                 {"plan", plan_json(plan)},
                 {"main_term", main},
                 {"ratio", sum.value / main}};
  out.results["q"] = c.q ? json(*c.q) : json(nullptr);
  const std::string trunc = "R=" + str(plan.R) + " W=" + std::to_string(plan.W);
  out.row({"euler_sum", "", sum.value, "", "", trunc, ""});
  out.row({"main_term", "", main, "", "", trunc, ""});
  out.row({"ratio", "", sum.value / main, "", "", trunc, ""});
  return out;
}

Outcome run_circle(const ExperimentConfig& c) {
  Outcome out;
  const auto series = circle::singular_series(c.system, c.v, c.D, c.s, c.Q_max, c.limits());
  out.results["singular_series"] = {{"real", series.value.real()},
                                    {"imag", series.value.imag()},
                                    {"Q_max", series.Q_max},
                                    {"tail", series.tail}};
  out.row({"singular_series", "", series.value.real(), str(series.tail), "",
           "Q_max=" + std::to_string(series.Q_max), ""});

  const double scale = std::pow(static_cast<double>(c.N), c.system.degree());
  RVec u(c.v.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = static_cast<double>(c.v[i]) / scale;
  const auto J = circle::singular_integral_J(c.system, u, integral_controls(c));
  out.results["singular_integral"] = estimate_json(J);
  out.row({"singular_integral", "", J.value, str(J.standard_error), "",
           J.method == circle::IntegralMethod::oscillatory ? "Phi=" + str(J.Phi) : "delta=" + str(J.delta),
           std::to_string(J.seed)});

  if (c.alpha) {
    const Complex S = circle::exp_sum(c.system, c.D, c.s, *c.alpha, c.N, c.limits());
    const Int N1 = std::max<Int>(1, c.N / c.D);
    const double rhs = circle::weyl_rhs(c.system, c.D, *c.alpha, N1, c.limits());
    circle::MajorArcParams params;
    params.theta = c.theta;
    params.N1 = static_cast<double>(N1);
    params.r = c.system.forms();
    params.k = c.system.degree();
    const auto arc = circle::major_arc_membership(*c.alpha, params);
    json arc_json = nullptr;
    if (arc) {
      json a = json::array();
      for (Eigen::Index i = 0; i < arc->a.size(); ++i) a.push_back(arc->a[i]);
      arc_json = {{"a", a}, {"q", arc->q}};
    }
    out.results["exp_sum"] = {{"real", S.real()}, {"imag", S.imag()}, {"abs", std::abs(S)}, {"N", c.N}};
    out.results["weyl"] = {{"N1", N1}, {"rhs", rhs}};
    out.results["major_arc"] = arc_json;
    out.row({"exp_sum_abs", "", std::abs(S), "", "", "N=" + std::to_string(c.N), ""});
    out.row({"weyl_rhs", "", rhs, "", "", "N1=" + std::to_string(N1), ""});
  }
  return out;
}

Outcome run_predict(const ExperimentConfig& c) {
  Outcome out;
  circle::BirchOptions options;
  options.method = c.local_method == "singular_series" ? circle::LocalProductMethod::singular_series
                                                       : circle::LocalProductMethod::padic;
  options.P_max = c.P_max;
  options.max_level = c.max_level;
  options.level_cost = c.level_cost;
  options.Q_max = c.Q_max;
  options.J = integral_controls(c);
  const auto pred = circle::birch_prediction(c.system, c.v, c.N, c.D, c.s, options);
  json factors = json::array();
  for (const auto& f : pred.factors) {
    factors.push_back({{"p", f.p}, {"level", f.level}, {"value", f.value}});
    out.row({"local_factor", std::to_string(f.p), f.value, "", std::to_string(f.level), "", ""});
  }
  out.results = {{"main_term", pred.value},
                 {"scale", pred.scale},
                 {"local_product", pred.local_product},
                 {"local_method", c.local_method},
                 {"singular_integral", estimate_json(pred.J)},
                 {"factors", factors},
                 {"N", c.N},
                 {"D", c.D}};
  if (pred.series) {
    out.results["singular_series"] = {{"real", pred.series->value.real()},
                                      {"imag", pred.series->value.imag()},
                                      {"Q_max", pred.series->Q_max},
                                      {"tail", pred.series->tail}};
  } else {
    out.results["P_max"] = c.P_max;
  }
  if (pred.J.value == 0) out.warnings.push_back("singular integral is zero: no real solutions in the box");
  out.row({"main_term", "", pred.value, "", "", "P_max=" + std::to_string(c.P_max), std::to_string(pred.J.seed)});
  out.row({"singular_integral", "", pred.J.value, str(pred.J.standard_error), "", "", std::to_string(pred.J.seed)});
  return out;
}

void write_csv(const std::string& path, const std::string& command, const json& rows) {
  std::ofstream out(path);
  require(static_cast<bool>(out), "cannot write CSV to " + path);
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << command << ',' << r[0].get<std::string>() << ',' << r[1].get<std::string>() << ','
        << r[2].dump() << ',' << r[3].get<std::string>() << ',' << r[4].get<std::string>() << ','
        << r[5].get<std::string>() << ',' << r[6].get<std::string>() << '\n';
  }
}

json error_json(const std::string& kind, const std::string& message) {
  return {{"kind", kind}, {"message", message}};
}

void emit(const json& report) { std::cout << report.dump(2) << std::endl; }

/// Config keys that can be set from the command line; a set flag wins.
struct Overrides {
  std::optional<Int> N, D, m, omega, q, Q_max, P_max, max_level, workers;
  std::optional<std::uint64_t> seed, samples;
  std::optional<double> eps, eta, R, budget, theta, delta, Phi, level_cost;
  std::optional<std::string> integral, local_method, weight;
  std::optional<std::vector<Int>> v, s, b;
  std::optional<std::vector<double>> alpha;
  bool accelerate = false;
  CLI::Option* accelerate_flag = nullptr;

  void attach(CLI::App& app) {
    app.add_option("--N", N, "box side");
    app.add_option("--D", D, "congruence modulus");
    app.add_option("--v", v, "right-hand side, one entry per form");
    app.add_option("--s", s, "residue class mod D");
    app.add_option("--b", b, "residue class mod W (sieve-sum)");
    app.add_option("--m", m, "sieve dimension");
    app.add_option("--eps", eps, "roughness exponent");
    app.add_option("--eta", eta, "level exponent, R = N^eta");
    app.add_option("--R", R, "explicit sieve level");
    app.add_option("--omega", omega, "W is the product of primes <= omega");
    app.add_option("--q", q, "divisibility restriction");
    app.add_option("--weight", weight, "gpy or unit");
    app.add_option("--alpha", alpha, "frequency, one entry per form (circle)");
    app.add_option("--theta", theta, "major arc parameter");
    app.add_option("--Q_max", Q_max, "singular series truncation");
    app.add_option("--P_max", P_max, "largest prime in the local product");
    app.add_option("--max_level", max_level, "per-prime level ceiling");
    app.add_option("--level_cost", level_cost, "per-prime cost ceiling for choosing the level");
    app.add_option("--local_method", local_method, "padic or singular_series");
    app.add_option("--integral", integral, "monte_carlo or oscillatory");
    app.add_option("--seed", seed, "RNG seed");
    app.add_option("--samples", samples, "Monte Carlo samples");
    app.add_option("--delta", delta, "slab width");
    app.add_option("--Phi", Phi, "oscillatory integral cutoff");
    app.add_option("--budget", budget, "elementary-step ceiling");
    app.add_option("--workers", workers, "worker threads");
    accelerate_flag = app.add_flag("--accelerate{true}", accelerate, "solve for the last variable (count)");
  }

  void apply(json& doc) const {
    auto set = [&](const char* key, const auto& value) {
      if (value) doc[key] = *value;
    };
    set("N", N);
    set("D", D);
    set("v", v);
    set("s", s);
    set("b", b);
    set("m", m);
    set("eps", eps);
    set("eta", eta);
    set("R", R);
    set("omega", omega);
    set("q", q);
    set("weight", weight);
    set("alpha", alpha);
    set("theta", theta);
    set("Q_max", Q_max);
    set("P_max", P_max);
    set("max_level", max_level);
    set("level_cost", level_cost);
    set("local_method", local_method);
    set("integral", integral);
    set("seed", seed);
    set("samples", samples);
    set("delta", delta);
    set("Phi", Phi);
    set("budget", budget);
    set("workers", workers);
    if (accelerate_flag && accelerate_flag->count() > 0) doc["accelerate"] = accelerate;
  }
};

int run_verify(const ExperimentConfig* config, const Overrides& flags) {
  verify::SuiteOptions options;
  if (config) {
    options.workers = config->workers;
    options.seed = config->seed;
  }
  if (flags.workers) options.workers = static_cast<unsigned>(*flags.workers);
  if (flags.seed) options.seed = *flags.seed;
  const auto start = std::chrono::steady_clock::now();
  json criteria = json::array();
  int passed = 0;
  for (const auto& r : verify::run_suite(options, [](const verify::CriterionResult& r) {
         std::cerr << verify::format_line(r) << std::endl;
       })) {
    passed += r.passed;
    criteria.push_back({{"id", r.id}, {"title", r.title}, {"passed", r.passed}, {"detail", r.detail},
                        {"seconds", r.seconds}, {"limit_seconds", r.limit_seconds}});
  }
  json diag = json::array();
  for (const auto& d : verify::diagnostics(options)) diag.push_back({{"name", d.name}, {"detail", d.detail}});
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  emit({{"format", kReportFormat},
        {"version", DIOPH_VERSION},
        {"command", "verify"},
        {"results", {{"criteria", criteria}, {"passed", passed}, {"total", verify::kCriteria},
                     {"diagnostics", diag}, {"seed", options.seed}}},
        {"timings", {{"seconds", seconds}}}});
  return passed == verify::kCriteria ? Exit::ok : Exit::failed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Counts, local densities, sieve sums and circle-method predictions for systems of forms"};
  app.set_version_flag("--version", std::string(DIOPH_VERSION));
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::string> config_path, cache_dir, csv_path;
  bool no_cache = false;
  app.add_option("--config", config_path, "experiment config (JSON)");
  app.add_option("--cache-dir", cache_dir, "result cache directory (overrides DIOPH_CACHE_DIR)");
  app.add_flag("--no-cache", no_cache, "neither read nor write the result cache");
  app.add_option("--csv", csv_path, "also write the result table as CSV");
  Overrides flags;
  flags.attach(app);

  const std::map<std::string, Outcome (*)(const ExperimentConfig&)> commands = {
      {"count", run_count},         {"almost-prime", run_almost_prime}, {"sieve-sum", run_sieve_sum},
      {"local", run_local},         {"euler-sum", run_euler_sum},       {"circle", run_circle},
      {"predict", run_predict}};
  app.add_subcommand("count", "solutions in [1,N]^n with x = s mod D");
  app.add_subcommand("almost-prime", "solutions with N^eps-rough linear form values");
  app.add_subcommand("sieve-sum", "GPY-weighted sum over solutions");
  app.add_subcommand("local", "local densities, unit-restricted densities and Euler factors");
  app.add_subcommand("euler-sum", "Euler sieve sum against its predicted main term");
  app.add_subcommand("circle", "singular series, singular integral and exponential sums");
  app.add_subcommand("predict", "Birch main-term prediction");
  app.add_subcommand("verify", "run the acceptance suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? Exit::ok : Exit::validation;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  json report = {{"format", kReportFormat}, {"version", DIOPH_VERSION}, {"command", command}};
  try {
    std::optional<ExperimentConfig> config;
    if (config_path || command != "verify") {
      require(config_path.has_value(), command + ": --config is required");
      std::ifstream in(*config_path);
      require(static_cast<bool>(in), "config: cannot open " + *config_path);
      json doc = json::parse(in, nullptr, false);
      require(!doc.is_discarded(), "config: " + *config_path + " is not valid JSON");
      flags.apply(doc);
      config = parse_config(doc);
    }
    if (command == "verify") return run_verify(config ? &*config : nullptr, flags);

    const auto start = std::chrono::steady_clock::now();
    ResultCache cache;
    if (!no_cache) {
      if (auto dir = ResultCache::default_dir(cache_dir)) cache = ResultCache(*dir);
    }
    const std::string key = cache_key(command, cache_inputs(*config));
    std::optional<json> stored = cache.get(key);
    Outcome outcome;
    const bool hit = stored && stored->contains("results") && stored->contains("rows");
    if (hit) {
      outcome.results = (*stored)["results"];
      outcome.rows = (*stored)["rows"];
      outcome.warnings = stored->value("warnings", json::array());
    } else {
      outcome = commands.at(command)(*config);
      cache.put(key, {{"results", outcome.results}, {"rows", outcome.rows}, {"warnings", outcome.warnings}});
    }
    for (const auto& w : cache.warnings()) {
      outcome.warnings.push_back(w);
      std::cerr << "warning: " << w << std::endl;
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report["config"] = config->canonical;
    report["results"] = outcome.results;
    report["warnings"] = outcome.warnings;
    report["cache"] = {{"enabled", cache.enabled()}, {"hit", hit}, {"key", key}};
    report["timings"] = {{"seconds", seconds}};
    if (csv_path) write_csv(*csv_path, command, outcome.rows);
    emit(report);
    return Exit::ok;
  } catch (const BudgetExceeded& e) {
    report["error"] = error_json("budget", e.what());
    report["error"]["operation"] = e.operation();
    report["error"]["required"] = e.required();
    report["error"]["ceiling"] = e.ceiling();
    emit(report);
    std::cerr << "error: " << e.what() << std::endl;
    return Exit::budget;
  } catch (const Error& e) {
    const bool bad_input = e.kind() == ErrorKind::validation || e.kind() == ErrorKind::unsupported;
    report["error"] = error_json(bad_input ? (e.kind() == ErrorKind::validation ? "validation" : "unsupported")
                                           : "internal",
                                 e.what());
    emit(report);
    std::cerr << "error: " << e.what() << std::endl;
    return bad_input ? Exit::validation : Exit::internal;
  } catch (const std::exception& e) {
    report["error"] = error_json("internal", e.what());
    emit(report);
    std::cerr << "error: " << e.what() << std::endl;
    return Exit::internal;
  }
}
