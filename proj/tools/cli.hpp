#pragma once

// Subcommand dispatch for the randsub executable. Kept in a header so the
// test suite can drive it in-process with captured streams.
//
// Exit status: 0 success, 1 domain/parse error, 2 infeasible requested size
// (the report then carries the largest size that was achievable).

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "randsub/randsub.hpp"

namespace randsub::cli {

using io::Json;

inline constexpr const char* kSeedVariable = "RANDSUB_SEED";

struct Environment {
  std::optional<std::string> seed;  // value of RANDSUB_SEED, if set

  static Environment from_process() {
    Environment env;
    if (const char* s = std::getenv(kSeedVariable)) env.seed = s;
    return env;
  }
};

enum class OutputFormat { kRecord, kText, kCsv };

struct SeedChoice {
  std::uint64_t value = kDefaultSeed;
  std::string source = "default";
};

inline std::uint64_t parse_seed(const std::string& text, const std::string& origin) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used, 10);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size() || text.front() == '-') {
    throw DomainError(origin + " is not a 64-bit unsigned integer: '" + text + "'");
  }
  return v;
}

// Flag beats environment beats the documented default.
inline SeedChoice resolve_seed(const std::optional<std::string>& flag, const Environment& env) {
  if (flag) return {parse_seed(*flag, "--seed"), "flag"};
  if (env.seed) return {parse_seed(*env.seed, kSeedVariable), "env"};
  return {};
}

// A readable file, or a built-in name: k<p> complete, t<p> transitive
// tournament, c<p> directed cycle, s<p> symmetric cycle, e<p> edgeless, loop.
inline DirectedGraph resolve_graph(const std::string& name) {
  if (std::filesystem::is_regular_file(name)) return io::read_graph(io::Document::from_file(name));
  if (name == "loop") return loop_graph();
  static const std::regex builtin("([ktcse])([0-9]{1,3})");
  std::smatch m;
  if (std::regex_match(name, m, builtin)) {
    const std::size_t p = std::stoul(m[2].str());
    switch (m[1].str()[0]) {
      case 'k': return complete_graph(p);
      case 't': return transitive_tournament(p);
      case 'c': return directed_cycle(p);
      case 's': return symmetric_cycle(p);
      case 'e': return edgeless_graph(p);
    }
  }
  throw DomainError("cannot open graph '" + name + "' (not a file or built-in name)");
}

inline Json rank_json(const Rank& r) { return r.is_cycle() ? Json("cycle") : Json(r.value()); }

// CSV view of a flat report: one "key,value" row per scalar field.
inline std::string flat_csv(const Json& report) {
  std::string out = "key,value\n";
  for (auto it = report.begin(); it != report.end(); ++it) {
    if (it->is_object()) continue;
    std::string v = it->is_array() ? io::rounded(*it).dump() : io::render_scalar(*it);
    if (v.find_first_of(",\"") != std::string::npos) {
      std::string quoted = "\"";
      for (char c : v) quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
      v = quoted + "\"";
    }
    out += it.key() + "," + v + "\n";
  }
  return out;
}

class Dispatcher {
 public:
  Dispatcher(std::ostream& out, std::ostream& err, Environment env)
      : out_(out), err_(err), env_(std::move(env)) {}

  int run(const std::vector<std::string>& args) {
    CLI::App app{"Capacities, random-subgraph thresholds and Ramsey extraction on finite windows", "randsub"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    std::string format = "record";
    std::optional<std::string> seed_flag;
    auto add_common = [&](CLI::App* sub) {
      sub->add_option("--format", format, "Report format")->check(CLI::IsMember({"record", "text", "csv"}));
      sub->add_option("--seed", seed_flag, "64-bit seed (overrides RANDSUB_SEED)");
    };

    // capacity
    std::string graph_name, method = "auto";
    std::size_t grid = 60, restarts = 64;
    auto* cap = app.add_subcommand("capacity", "Capacity c0(F) of a finite digraph");
    cap->add_option("--graph", graph_name, "Graph file or built-in name")->required();
    cap->add_option("--method", method, "auto|closed|numeric|enum")
        ->check(CLI::IsMember({"auto", "closed", "numeric", "enum"}));
    cap->add_option("--grid", grid, "Lattice resolution for the enumeration oracle");
    cap->add_option("--restarts", restarts, "Random restarts of the numeric optimizer");
    add_common(cap);

    // hom
    std::string source_spec, target_spec;
    auto* hom = app.add_subcommand("hom", "Search for a homomorphism source -> target");
    hom->add_option("--source", source_spec, "Source graph")->required();
    hom->add_option("--target", target_spec, "Target graph")->required();
    add_common(hom);

    // rank
    auto* rank = app.add_subcommand("rank", "Rank (longest path from each vertex) of a digraph");
    rank->add_option("--graph", graph_name, "Graph file or built-in name")->required();
    add_common(rank);

    // model-probe
    std::string model_path, event_spec, marginal_spec;
    bool equal = false;
    auto* probe = app.add_subcommand("model-probe", "Exact event probabilities and marginals of a model");
    probe->add_option("--model", model_path, "Model file")->required();
    auto* ev = probe->add_option("--event", event_spec, "order:i,j | equal:i,j | neq:i,j");
    auto* eq = probe->add_flag("--equal", equal, "Probability that two coordinates agree");
    auto* mg = probe->add_option("--marginal", marginal_spec, "Comma-separated increasing indices");
    ev->excludes(eq)->excludes(mg);
    eq->excludes(mg);
    add_common(probe);

    // simulate-threshold
    std::optional<double> edge_prob;
    std::size_t p = 0, window = 0, trials = 0;
    std::string csv_path;
    auto* sim = app.add_subcommand("simulate-threshold", "Monte Carlo estimate of mu(path of length >= p)");
    auto* sim_model = sim->add_option("--model", model_path, "Model file (order subgraph of sampled words)");
    auto* sim_q = sim->add_option("--edge-prob", edge_prob, "Independent edges with this probability");
    sim_model->excludes(sim_q);
    sim->add_option("--p", p, "Target path length in edges")->required();
    sim->add_option("--window", window, "Window size")->required();
    sim->add_option("--trials", trials, "Number of samples")->required();
    sim->add_option("--csv", csv_path, "Write per-trial rows to this file");
    add_common(sim);

    // ramsey-extract
    std::string fn_path, metric_path;
    std::size_t k = 0, size = 0;
    double eps = 0.0;
    auto* rx = app.add_subcommand("ramsey-extract", "Index set with certified partial limits");
    rx->add_option("--fn", fn_path, "Tuple table file")->required();
    rx->add_option("--metric", metric_path, "Points file")->required();
    rx->add_option("--k", k, "Arity (must match the table)")->required();
    rx->add_option("--eps", eps, "Oscillation budget")->required();
    rx->add_option("--size", size, "Requested |J|")->required();
    add_common(rx);

    // intersect
    std::string sets_path, mu_path;
    double lambda = 0.0;
    auto* ix = app.add_subcommand("intersect", "Index set whose tuple events keep a large intersection");
    ix->add_option("--sets", sets_path, "Indicator rows file")->required();
    ix->add_option("--mu", mu_path, "Probability vector file")->required();
    ix->add_option("--lambda", lambda, "Lower bound on every row's measure")->required();
    ix->add_option("--eps", eps, "Budget; guarantee is lambda - 2 k eps")->required();
    ix->add_option("--size", size, "Requested |J|")->required();
    add_common(ix);

    try {
      std::vector<std::string> reversed(args.rbegin(), args.rend());
      app.parse(reversed);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out_, err_);
      return code == 0 ? 0 : 1;
    }

    const OutputFormat fmt = format == "text" ? OutputFormat::kText
                             : format == "csv" ? OutputFormat::kCsv
                                               : OutputFormat::kRecord;
    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    Json report{{"record", name}};
    try {
      const SeedChoice seed = resolve_seed(seed_flag, env_);
      report["seed"] = seed.value;
      report["seed_source"] = seed.source;
      std::string csv_body;
      if (name == "capacity") {
        report["config"] = {{"graph", graph_name}, {"method", method}, {"grid", grid}, {"restarts", restarts}};
        capacity(report, resolve_graph(graph_name), method, grid, restarts, seed.value);
      } else if (name == "hom") {
        report["config"] = {{"source", source_spec}, {"target", target_spec}};
        const auto w = hom_exists(resolve_graph(source_spec), resolve_graph(target_spec));
        report["exists"] = w.has_value();
        report["assignment"] = w ? Json(w->assignment) : Json(nullptr);
      } else if (name == "rank") {
        report["config"] = {{"graph", graph_name}};
        const DirectedGraph g = resolve_graph(graph_name);
        Json ranks = Json::array();
        for (const Rank& r : rank_vector(g)) ranks.push_back(rank_json(r));
        report["ranks"] = ranks;
        report["longest_path"] = rank_json(longest_path_length(g));
      } else if (name == "model-probe") {
        model_probe(report, model_path, event_spec, equal, marginal_spec);
      } else if (name == "simulate-threshold") {
        csv_body = simulate(report, model_path, edge_prob, p, window, trials, csv_path, seed.value);
      } else if (name == "ramsey-extract") {
        report["config"] = {{"fn", fn_path}, {"metric", metric_path}, {"k", k}, {"eps", eps}, {"size", size}};
        ramsey_extract(report, fn_path, metric_path, k, eps, size);
      } else if (name == "intersect") {
        report["config"] = {{"sets", sets_path}, {"mu", mu_path}, {"lambda", lambda}, {"eps", eps}, {"size", size}};
        intersect(report, sets_path, mu_path, lambda, eps, size);
      }
      report["status"] = "ok";
      emit(report, fmt, csv_body);
      return 0;
    } catch (const InfeasibleError& e) {
      report["status"] = "infeasible";
      report["message"] = e.what();
      report["max_achievable"] = e.max_achievable();
      emit(report, fmt, "");
      return 2;
    } catch (const ParseError& e) {
      err_ << "error: " << e.what() << "\n";
      return 1;
    } catch (const std::exception& e) {
      err_ << "error: " << e.what() << "\n";
      return 1;
    }
  }

 private:
  void emit(const Json& report, OutputFormat fmt, const std::string& csv_body) {
    switch (fmt) {
      case OutputFormat::kRecord: out_ << io::render_record(report); break;
      case OutputFormat::kText: out_ << io::render_text(report); break;
      case OutputFormat::kCsv: out_ << (csv_body.empty() ? flat_csv(report) : csv_body); break;
    }
  }

  static Json simplex_json(const SimplexDist& d) { return d.weights(); }

  static void capacity(Json& report, const DirectedGraph& g, const std::string& method, std::size_t grid,
                       std::size_t restarts, std::uint64_t seed) {
    OptimizerConfig cfg;
    cfg.seed = seed;
    cfg.restarts = restarts;
    CapacityResult r;
    if (method == "closed") {
      auto c = capacity_closed_form_result(g);
      if (!c) throw DomainError("no closed form: graph is neither loop-carrying, symmetric nor antisymmetric");
      r = std::move(*c);
    } else if (method == "numeric") {
      r = capacity_numeric(g, cfg);
    } else if (method == "enum") {
      r = capacity_support_enum(g, grid);
    } else {
      r = capacity_auto(g, cfg);
    }
    report["vertex_count"] = g.vertex_count();
    report["edge_count"] = g.edge_count();
    report["value"] = r.value;
    report["method"] = to_string(r.method);
    // Numeric and lattice values are attained by the reported maximizer: lower bounds.
    report["exact"] = r.method == CapacityMethod::kClosedForm;
    report["maximizer"] = simplex_json(r.maximizer);
    report["certificate"] = r.certificate ? Json(*r.certificate) : Json(nullptr);
  }

  static std::vector<std::size_t> parse_index_list(const std::string& text, const std::string& what) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos) {
        throw DomainError(what + ": '" + text + "' is not a comma-separated index list");
      }
      out.push_back(std::stoul(item));
    }
    if (out.empty()) throw DomainError(what + ": empty index list");
    return out;
  }

  static void model_probe(Json& report, const std::string& path, const std::string& event, bool equal,
                          const std::string& marginal_spec) {
    report["config"] = {{"model", path}};
    const MeasureModel m = io::read_model(io::Document::from_file(path));
    report["variant"] = to_string(m.kind());
    report["window"] = m.window();
    report["alphabet"] = m.alphabet();
    if (equal) {
      report["config"]["equal"] = true;
      report["probability"] = equal_prob(m);
    } else if (!marginal_spec.empty()) {
      report["config"]["marginal"] = marginal_spec;
      const auto idx = parse_index_list(marginal_spec, "--marginal");
      const MarginalTable t = marginal(m, idx);
      report["indices"] = t.indices;
      report["probabilities"] = t.probabilities;
    } else if (!event.empty()) {
      report["config"]["event"] = event;
      const auto colon = event.find(':');
      if (colon == std::string::npos) throw DomainError("--event expects kind:i,j");
      const std::string kind = event.substr(0, colon);
      const auto ij = parse_index_list(event.substr(colon + 1), "--event");
      if (ij.size() != 2) throw DomainError("--event expects exactly two indices");
      EventSpec spec;
      if (kind == "order") spec = EventSpec::order(ij[0], ij[1]);
      else if (kind == "equal") spec = EventSpec::equal(ij[0], ij[1]);
      else if (kind == "neq") spec = EventSpec::neq(ij[0], ij[1]);
      else throw DomainError("unknown event kind '" + kind + "' (order, equal, neq)");
      report["probability"] = event_prob(m, spec);
    } else {
      throw DomainError("model-probe needs one of --event, --equal, --marginal");
    }
  }

  static std::string simulate(Json& report, const std::string& model_path, const std::optional<double>& q,
                              std::size_t p, std::size_t window, std::size_t trials, const std::string& csv_path,
                              std::uint64_t seed) {
    Json config{{"p", p}, {"window", window}, {"trials", trials}};
    ThresholdReport r;
    if (q) {
      config["edge_prob"] = *q;
      r = estimate_path_probability(IndependentEdges{*q}, p, window, trials, seed);
    } else if (!model_path.empty()) {
      config["model"] = model_path;
      r = estimate_path_probability(io::read_model(io::Document::from_file(model_path)), p, window, trials, seed);
    } else {
      throw DomainError("simulate-threshold needs --model or --edge-prob");
    }
    if (!csv_path.empty()) config["csv"] = csv_path;
    report["config"] = config;
    report["lambda_p"] = r.lambda_p;
    report["min_edge_prob"] = r.min_edge_prob;
    report["mu_path"] = r.mu_path;
    report["stderr"] = r.stderr_mu;
    report["bound"] = r.bound;
    report["exact_min_edge_prob"] = r.exact_min_edge_prob ? Json(*r.exact_min_edge_prob) : Json(nullptr);
    report["exact_bound"] = r.exact_bound ? Json(*r.exact_bound) : Json(nullptr);
    report["bound_holds_4sigma"] = verify_finpath_bound(r, 4.0);
    std::string csv = "trial,longest_path,has_path_ge_p\n";
    for (std::size_t t = 0; t < r.longest_paths.size(); ++t)
      csv += std::to_string(t) + "," + std::to_string(r.longest_paths[t]) + "," +
             (r.longest_paths[t] >= p ? "1" : "0") + "\n";
    if (!csv_path.empty()) {
      std::ofstream f(csv_path, std::ios::binary);
      if (!f) throw DomainError("cannot write " + csv_path);
      f << csv;
    }
    return csv;
  }

  static void ramsey_extract(Json& report, const std::string& fn_path, const std::string& metric_path,
                             std::size_t k, double eps, std::size_t size) {
    const TupleFunction f = io::read_tuple_function(io::Document::from_file(fn_path));
    const MetricPoints m = io::read_points(io::Document::from_file(metric_path));
    if (f.arity() != k) {
      throw DomainError("--k " + std::to_string(k) + " does not match table arity " + std::to_string(f.arity()));
    }
    const ExtractionResult r = extract_convergent(f, m, eps, size);
    const ExtractionCheck check = verify_extraction(f, m, r);
    report["J"] = r.J;
    Json limits = Json::array();
    for (const auto& [prefix, x] : r.prefix_limits) limits.push_back({{"prefix", prefix}, {"limit", x}});
    report["prefix_limits"] = limits;
    report["achieved_oscillation"] = r.achieved;
    report["verified"] = check.ok;
    report["checks"] = check.checks;
  }

  static void intersect(Json& report, const std::string& sets_path, const std::string& mu_path, double lambda,
                        double eps, std::size_t size) {
    const TupleRows rows = io::read_rows(io::Document::from_file(sets_path));
    const std::vector<double> mu = io::read_mu(io::Document::from_file(mu_path));
    const IntersectionResult r = intersect_extract(rows, mu, lambda, eps, size);
    report["J"] = r.J;
    report["achieved_measure"] = r.achieved_measure;
    report["guaranteed"] = r.guaranteed;
    report["arity"] = rows.arity;
  }

  std::ostream& out_;
  std::ostream& err_;
  Environment env_;
};

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
               Environment env = Environment::from_process()) {
  return Dispatcher(out, err, std::move(env)).run(args);
}

}  // namespace randsub::cli
