#include "spinlab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <sstream>

#include <json.hpp>

namespace spinlab {

namespace {

std::string double_key(double v) { return format_g17(v); }

}  // namespace

std::string ModelSpec::describe() const {
  std::ostringstream os;
  os << kind;
  if (kind == "ising") os << "(beta=" << double_key(beta) << ",h=" << double_key(h) << ")";
  if (kind == "potts") os << "(q=" << q << ",beta=" << double_key(beta) << ")";
  if (kind == "hardcore") os << "(lambda=" << double_key(lambda) << ")";
  if (kind == "colorings") os << "(q=" << q << ")";
  os << " on ";
  if (!graph_path.empty()) {
    os << graph_path;
  } else {
    os << family;
    for (long p : family_params) os << "_" << p;
  }
  if (!boundary.empty()) os << " +boundary";
  return os.str();
}

Instance make_instance(const ModelSpec& spec, const Caps& caps) {
  Graph g;
  if (!spec.graph_path.empty())
    g = Graph::load(spec.graph_path);
  else
    g = make_graph_family(spec.family, spec.family_params, spec.graph_seed);
  if (!spec.boundary.empty()) {
    if (g.num_boundary > 0)
      throw std::invalid_argument("boundary given both in graph file and model spec");
    g = g.with_boundary(spec.boundary);
  }
  SpinSystem sys;
  if (spec.kind == "ising")
    sys = build_ising(g, spec.beta, spec.h, caps);
  else if (spec.kind == "potts")
    sys = build_potts(g, spec.q, spec.beta, VectorXd(), caps);
  else if (spec.kind == "hardcore")
    sys = build_hardcore(g, spec.lambda, caps);
  else if (spec.kind == "colorings")
    sys = build_colorings(g, spec.q, caps);
  else if (spec.kind == "general") {
    if (spec.interaction.size() == 0)
      throw std::invalid_argument("general model: interaction matrix required");
    sys = build_general(g, spec.q, {spec.interaction}, {}, caps);
  } else {
    throw std::invalid_argument("unknown model kind: " + spec.kind);
  }
  Instance inst;
  inst.name = spec.describe();
  inst.sys = std::make_shared<SpinSystem>(std::move(sys));
  inst.table = enumerate(inst.sys, {}, caps);
  return inst;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  return from_json_text(read_file(path), std::filesystem::path(path).parent_path().string());
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text,
                                                  const std::string& base_dir) {
  nlohmann::json j = nlohmann::json::parse(text);
  ExperimentConfig cfg;
  const auto& jm = j.at("model");
  cfg.model.kind = jm.at("kind").get<std::string>();
  if (jm.contains("params")) {
    const auto& p = jm["params"];
    cfg.model.beta = p.value("beta", 0.0);
    cfg.model.h = p.value("h", 0.0);
    cfg.model.lambda = p.value("lambda", 1.0);
    cfg.model.q = p.value("q", 2);
    if (p.contains("interaction")) {
      auto rows = p["interaction"].get<std::vector<std::vector<double>>>();
      cfg.model.interaction.resize(Index(rows.size()), Index(rows[0].size()));
      for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
          cfg.model.interaction(Index(r), Index(c)) = rows[r][c];
    }
  }
  if (jm.contains("graph_path")) {
    std::string p = jm["graph_path"].get<std::string>();
    cfg.model.graph_path =
        (!base_dir.empty() && !std::filesystem::path(p).is_absolute())
            ? (std::filesystem::path(base_dir) / p).string()
            : p;
  } else if (jm.contains("graph")) {
    const auto& jg = jm["graph"];
    if (jg.contains("path")) {
      std::string p = jg["path"].get<std::string>();
      cfg.model.graph_path =
          (!base_dir.empty() && !std::filesystem::path(p).is_absolute())
              ? (std::filesystem::path(base_dir) / p).string()
              : p;
    } else {
      cfg.model.family = jg.at("family").get<std::string>();
      for (const auto& key : {"n", "a", "b", "rows", "cols", "degree"})
        if (jg.contains(key)) cfg.model.family_params.push_back(jg[key].get<long>());
      if (jg.contains("params")) cfg.model.family_params = jg["params"].get<std::vector<long>>();
      cfg.model.graph_seed = jg.value("seed", 1);
    }
  } else {
    throw std::invalid_argument("config: model.graph or model.graph_path required");
  }
  if (jm.contains("boundary"))
    for (auto& [k, v] : jm["boundary"].items())
      cfg.model.boundary.push_back({std::stoi(k), v.get<int>() - 1});
  cfg.suites = j.value("suites", std::vector<std::string>{});
  for (auto& s : cfg.suites) {
    auto known = known_suites();
    if (std::find(known.begin(), known.end(), s) == known.end())
      throw std::invalid_argument("config: unknown suite " + s);
  }
  if (j.contains("caps")) {
    const auto& jc = j["caps"];
    cfg.caps.state_cap = jc.value("state_cap", cfg.caps.state_cap);
    cfg.caps.pinning_cap = jc.value("pinning_cap", cfg.caps.pinning_cap);
    cfg.caps.pair_state_cap = jc.value("pair_state_cap", cfg.caps.pair_state_cap);
    cfg.caps.pinning_sample = jc.value("pinning_sample", cfg.caps.pinning_sample);
    cfg.caps.allow_sampled = jc.value("allow_sampled", cfg.caps.allow_sampled);
    if (cfg.caps.state_cap <= 0 || cfg.caps.pinning_cap <= 0 || cfg.caps.pair_state_cap <= 0)
      throw std::invalid_argument("config: caps must be positive");
  }
  cfg.seed = j.value("seed", 1);
  if (j.contains("output")) {
    cfg.json_out = j["output"].value("json", "");
    cfg.csv_out = j["output"].value("csv", "");
  }
  cfg.flip_params_path = j.value("flip_params", "");
  if (!cfg.flip_params_path.empty() && !base_dir.empty() &&
      !std::filesystem::path(cfg.flip_params_path).is_absolute())
    cfg.flip_params_path = (std::filesystem::path(base_dir) / cfg.flip_params_path).string();
  return cfg;
}

std::vector<std::string> known_suites() {
  return {"exactness",  "contraction_si", "dobrushin_si",     "stein",
          "entropy_identities", "factorization",  "recursion",        "pinsker",
          "block_decay", "sw_chain",       "sampler_fidelity", "spectral_gap",
          "mixing",      "sweep_metrics"};
}

namespace {

std::vector<CheckRecord> run_suite_by_name(const std::string& name, const Instance& inst,
                                           const ExperimentConfig& cfg, Rng rng) {
  if (name == "exactness") return suite_exactness(inst, cfg.caps, rng);
  if (name == "contraction_si") return suite_contraction_si(inst, cfg.caps, rng);
  if (name == "dobrushin_si") return suite_dobrushin_si(inst, cfg.caps, rng);
  if (name == "stein") return suite_stein(inst, cfg.caps, rng);
  if (name == "entropy_identities") return suite_entropy_identities(inst, cfg.caps, rng);
  if (name == "factorization") return suite_factorization(inst, cfg.caps, rng);
  if (name == "recursion") return suite_recursion(inst, cfg.caps, rng);
  if (name == "pinsker") return suite_pinsker(inst, cfg.caps, rng);
  if (name == "block_decay") return suite_block_decay(inst, cfg.caps, rng);
  if (name == "sw_chain") return suite_sw_chain(inst, cfg.caps, rng);
  if (name == "sampler_fidelity")
    return suite_sampler_fidelity(inst, cfg.caps, rng, cfg.flip_params_path);
  if (name == "spectral_gap") return suite_spectral_gap(inst, cfg.caps, rng);
  if (name == "mixing") return suite_mixing(inst, cfg.caps, rng);
  if (name == "sweep_metrics") return suite_sweep_metrics(inst, cfg.caps, rng);
  throw std::invalid_argument("unknown suite: " + name);
}

}  // namespace

Report run(const ExperimentConfig& config) {
  Report report;
  report.seed = config.seed;
  report.config_echo = config.model.describe();
  Rng root(config.seed);
  Instance inst = make_instance(config.model, config.caps);
  for (const std::string& suite : config.suites) {
    auto t0 = std::chrono::steady_clock::now();
    std::vector<CheckRecord> recs;
    try {
      recs = run_suite_by_name(suite, inst, config, root.child("suite:" + suite));
    } catch (const CapExceeded& e) {
      CheckRecord rec;
      rec.suite = suite;
      rec.name = "cap_exceeded";
      rec.input("error", e.what());
      rec.pass = false;
      recs.push_back(rec);
    }
    auto t1 = std::chrono::steady_clock::now();
    double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    for (auto& r : recs) {
      r.suite = suite;
      r.runtime_ms = ms / double(recs.size());
      r.input("instance", inst.name);
      report.checks.push_back(std::move(r));
    }
  }
  if (!config.json_out.empty()) write_file(config.json_out, report.to_json());
  if (!config.csv_out.empty()) write_file(config.csv_out, report.to_csv());
  return report;
}

std::vector<std::string> parse_grid(const std::string& spec) {
  std::vector<std::string> out;
  if (spec.find(':') != std::string::npos) {
    // lo:step:hi inclusive
    double lo, step, hi;
    char c1, c2;
    std::istringstream is(spec);
    if (!(is >> lo >> c1 >> step >> c2 >> hi) || c1 != ':' || c2 != ':' || step <= 0)
      throw std::invalid_argument("bad grid spec: " + spec);
    for (double v = lo; v <= hi + 1e-12; v += step) out.push_back(format_g17(v));
    return out;
  }
  std::istringstream is(spec);
  std::string item;
  while (std::getline(is, item, ',')) out.push_back(item);
  if (out.empty()) throw std::invalid_argument("empty grid");
  return out;
}

std::string SweepResult::to_csv() const {
  std::ostringstream os;
  os << "param,eta,kappa,delta,t_mix,ok,error\n";
  for (auto& p : points) {
    os << p.label << ',' << (std::isnan(p.eta) ? "" : format_g17(p.eta)) << ','
       << (std::isnan(p.kappa) ? "" : format_g17(p.kappa)) << ','
       << (std::isnan(p.delta) ? "" : format_g17(p.delta)) << ','
       << (std::isnan(p.t_mix) ? "" : format_g17(p.t_mix)) << ',' << (p.ok ? 1 : 0) << ','
       << p.error << '\n';
  }
  return os.str();
}

SweepResult sweep(const ExperimentConfig& config, const std::string& parameter,
                  const std::vector<std::string>& grid) {
  if (grid.empty()) throw std::invalid_argument("sweep: empty grid");
  SweepResult result;
  for (const std::string& value : grid) {
    SweepPoint point;
    point.label = parameter + "=" + value;
    ExperimentConfig cfg = config;
    try {
      if (parameter == "beta")
        cfg.model.beta = std::stod(value);
      else if (parameter == "q")
        cfg.model.q = std::stoi(value);
      else if (parameter == "n") {
        if (cfg.model.family.empty()) throw std::invalid_argument("n sweep needs a graph generator");
        if (cfg.model.family_params.empty())
          cfg.model.family_params.push_back(std::stol(value));
        else
          cfg.model.family_params[0] = std::stol(value);
      } else if (parameter == "family") {
        if (cfg.model.family.empty()) throw std::invalid_argument("family sweep needs a graph generator");
        cfg.model.family = value;
      } else {
        throw std::invalid_argument("unknown sweep parameter: " + parameter);
      }
      point.param_value = parameter == "family" ? kNaN : std::stod(value);
      cfg.seed = Rng(config.seed).child("sweep:" + point.label).key();
      auto suites = cfg.suites;
      if (std::find(suites.begin(), suites.end(), "sweep_metrics") == suites.end())
        suites.push_back("sweep_metrics");
      cfg.suites = suites;
      cfg.json_out.clear();
      cfg.csv_out.clear();
      point.report = run(cfg);
      for (auto& c : point.report.checks) {
        if (c.suite != "sweep_metrics") continue;
        for (auto& [k, v] : c.values) {
          if (k == "eta") point.eta = v;
          if (k == "kappa") point.kappa = v;
          if (k == "delta") point.delta = v;
          if (k == "t_mix") point.t_mix = v;
        }
      }
      point.ok = true;
    } catch (const std::exception& e) {
      point.ok = false;
      point.error = e.what();
    }
    result.points.push_back(std::move(point));
  }
  return result;
}

}  // namespace spinlab
