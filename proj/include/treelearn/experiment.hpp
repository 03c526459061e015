#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "treelearn/advice.hpp"
#include "treelearn/datagen.hpp"
#include "treelearn/dfta.hpp"
#include "treelearn/learner.hpp"
#include "treelearn/oracle.hpp"
#include "treelearn/rng.hpp"

namespace treelearn {

enum class Setting { S1, S2, S3, S4, S5, S6 };

inline std::string setting_name(Setting s) {
  switch (s) {
    case Setting::S1: return "S1";
    case Setting::S2: return "S2";
    case Setting::S3: return "S3";
    case Setting::S4: return "S4";
    case Setting::S5: return "S5";
    case Setting::S6: return "S6";
  }
  return "?";
}

inline Setting parse_setting(const std::string& s) {
  if (s == "S1") return Setting::S1;
  if (s == "S2") return Setting::S2;
  if (s == "S3") return Setting::S3;
  if (s == "S4") return Setting::S4;
  if (s == "S5") return Setting::S5;
  if (s == "S6") return Setting::S6;
  throw std::invalid_argument("unknown setting: " + s);
}

inline bool setting_uses_advice(Setting s) { return s != Setting::S1 && s != Setting::S3; }
inline bool setting_uses_sampler(Setting s) { return s != Setting::S1 && s != Setting::S2; }

// Advice instantiated per instance signature: either a builtin family or
// fixed TRS files.
struct AdviceSpec {
  std::optional<RuleFamily> family;          // instantiated over the instance signature
  std::optional<RuleFamily> mem_family;      // cache TRS family
  std::optional<std::string> full_path, positive_path, negative_path, mem_path;

  AdviceConfig instantiate(const Signature& sig) const {
    AdviceConfig cfg;
    cfg.full_trs.signature = sig;
    cfg.positive_trs.signature = sig;
    cfg.negative_trs.signature = sig;
    cfg.mem_trs.signature = sig;
    if (family) cfg.full_trs = builtin_rules(*family, family_symbols(*family), sig);
    if (mem_family) cfg.mem_trs = builtin_rules(*mem_family, family_symbols(*mem_family), sig);
    if (full_path) cfg.full_trs = load_trs(*full_path);
    if (positive_path) cfg.positive_trs = load_trs(*positive_path);
    if (negative_path) cfg.negative_trs = load_trs(*negative_path);
    if (mem_path) cfg.mem_trs = load_trs(*mem_path);
    return cfg;
  }

  static std::vector<std::string> family_symbols(RuleFamily f) {
    switch (f) {
      case RuleFamily::DistributivityUnary: return {"g", "f"};
      case RuleFamily::DistributivityLeft:
      case RuleFamily::DistributivityRight: return {"f", "g"};
      case RuleFamily::UnaryCommutation: return {"g", "f"};
      default: return {"f"};
    }
  }
};

inline std::optional<RuleFamily> parse_family(const std::string& name) {
  if (name == "assoc") return RuleFamily::Associativity;
  if (name == "commut") return RuleFamily::Commutativity;
  if (name == "distrib") return RuleFamily::DistributivityUnary;
  if (name == "distrib-left") return RuleFamily::DistributivityLeft;
  if (name == "distrib-right") return RuleFamily::DistributivityRight;
  if (name == "unary-commut") return RuleFamily::UnaryCommutation;
  if (name == "idempotence") return RuleFamily::Idempotence;
  if (name == "none") return std::nullopt;
  throw std::invalid_argument("unknown rule family: " + name);
}

struct MetricsRow {
  std::string instance_id;
  std::size_t repetition = 0;
  std::string setting;
  std::size_t eq_queries_to_oracle = 0;
  std::size_t inferred_equivalences = 0;
  std::size_t membership_queries = 0;  // queries reaching the oracle
  std::size_t cache_hits = 0;
  std::uint64_t tokens = 0;
  std::size_t learned_states = 0;
  bool correct = false;
  std::size_t heuristic_unsound = 0;
  double wall_time_s = 0.0;
  double simulated_cost_s = 0.0;
};

inline const char* kMetricsCsvHeader =
    "instance,repetition,setting,eq_queries_to_oracle,inferred_equivalences,"
    "membership_queries,cache_hits,tokens,learned_states,correct,"
    "heuristic_unsound,wall_time_s,simulated_cost_s";

inline std::string metrics_csv_row(const MetricsRow& r) {
  std::ostringstream os;
  os << r.instance_id << ',' << r.repetition << ',' << r.setting << ','
     << r.eq_queries_to_oracle << ',' << r.inferred_equivalences << ','
     << r.membership_queries << ',' << r.cache_hits << ',' << r.tokens << ','
     << r.learned_states << ',' << (r.correct ? 1 : 0) << ',' << r.heuristic_unsound << ','
     << std::fixed
     << std::setprecision(6) << r.wall_time_s << ',' << r.simulated_cost_s;
  return os.str();
}

struct ExperimentConfig {
  Setting setting = Setting::S1;
  std::string dataset_dir;
  AdviceSpec advice;
  SamplerConfig sampler;
  std::uint64_t master_seed = 0;
  double membership_cost_per_token_ms = 0.0;
  std::size_t repetitions = 1;
  std::size_t jobs = 1;
  std::size_t iteration_cap = 1000;
  bool measure_time = true;  // false zeroes timing columns for reproducibility runs
};

// One learning run, wired per setting.
inline MetricsRow run_instance(const Dfta& target, const std::string& instance_id,
                               std::size_t repetition, const ExperimentConfig& cfg,
                               std::uint64_t stream_seed) {
  MetricsRow row;
  row.instance_id = instance_id;
  row.repetition = repetition;
  row.setting = setting_name(cfg.setting);

  std::unique_ptr<Teacher> teacher;
  if (setting_uses_sampler(cfg.setting)) {
    SamplerConfig sampler = cfg.sampler;
    sampler.seed = derive_stream(stream_seed, 1);
    teacher = std::make_unique<ApproxTeacher>(target, sampler);
  } else {
    teacher = std::make_unique<ExactTeacher>(target);
  }

  AdviceConfig advice_cfg;
  if (setting_uses_advice(cfg.setting)) {
    advice_cfg = cfg.advice.instantiate(target.signature());
    advice_cfg.approx_seed = derive_stream(stream_seed, 2);
    if (cfg.setting == Setting::S5) advice_cfg.check_mode = CheckMode::Approximate;
    if (cfg.setting == Setting::S6) advice_cfg.check_mode = CheckMode::CountingThenExact;
  }
  AdviceSession session(advice_cfg, *teacher);

  auto start = std::chrono::steady_clock::now();
  LearnResult result =
      learn(target.signature(), [&](const Term& t) { return session.membership(t); },
            [&](const Dfta& cand) { return session.equivalence(cand); }, cfg.iteration_cap,
            session.seed_terms());
  auto stop = std::chrono::steady_clock::now();

  row.eq_queries_to_oracle = teacher->counters().equivalence_queries;
  row.inferred_equivalences = session.stats().inferred_equivalences;
  row.membership_queries = teacher->counters().membership_queries;
  row.cache_hits = session.stats().cache_hits;
  if (auto* approx = dynamic_cast<ApproxTeacher*>(teacher.get()))
    row.tokens = approx->ledger().tokens;
  row.learned_states = result.dfta.num_states();
  row.correct = check_equivalence(result.dfta, target).equal();
  row.heuristic_unsound = session.stats().heuristic_unsound;
  if (cfg.measure_time) {
    row.wall_time_s = std::chrono::duration<double>(stop - start).count();
    row.simulated_cost_s =
        row.wall_time_s + static_cast<double>(row.tokens) * cfg.membership_cost_per_token_ms / 1e3;
  }
  return row;
}

// ---- Datasets -------------------------------------------------------------

struct DatasetInstance {
  std::string id;
  std::string file;  // relative to the dataset dir
  std::uint64_t seed = 0;
};

struct Dataset {
  std::string family;  // "assoc" or "distrib"
  GenSpec spec;
  std::vector<DatasetInstance> instances;
  std::size_t generated_attempts = 0;  // distrib: attempts incl. rejections
};

inline nlohmann::json genspec_to_json(const GenSpec& s) {
  return {{"alphabet_min", s.alphabet_min},   {"alphabet_max", s.alphabet_max},
          {"states_min", s.states_min},       {"states_max", s.states_max},
          {"acceptance_density", s.acceptance_density},
          {"seed", s.seed},                   {"count", s.count},
          {"triviality_threshold", s.triviality_threshold},
          {"max_dfta_states", s.max_dfta_states}};
}

inline GenSpec genspec_from_json(const nlohmann::json& j) {
  GenSpec s;
  s.alphabet_min = j.value("alphabet_min", s.alphabet_min);
  s.alphabet_max = j.value("alphabet_max", s.alphabet_max);
  s.states_min = j.value("states_min", s.states_min);
  s.states_max = j.value("states_max", s.states_max);
  s.acceptance_density = j.value("acceptance_density", s.acceptance_density);
  s.seed = j.value("seed", s.seed);
  s.count = j.value("count", s.count);
  s.triviality_threshold = j.value("triviality_threshold", s.triviality_threshold);
  s.max_dfta_states = j.value("max_dfta_states", s.max_dfta_states);
  return s;
}

// Baseline equivalence-query count with an exact teacher; used by the
// triviality filter.
inline std::size_t baseline_eq_queries(const Dfta& target, std::size_t iteration_cap = 1000) {
  ExactTeacher teacher(target);
  AdviceSession session(AdviceConfig{}, teacher);
  learn(target.signature(), [&](const Term& t) { return session.membership(t); },
        [&](const Dfta& cand) { return session.equivalence(cand); }, iteration_cap);
  return teacher.counters().equivalence_queries;
}

template <typename InstanceVec>
InstanceVec filter_trivial(const InstanceVec& instances, std::size_t threshold) {
  InstanceVec kept;
  for (const auto& inst : instances)
    if (baseline_eq_queries(inst) > threshold) kept.push_back(inst);
  return kept;
}

// Generates `spec.count` non-trivial instances; attempts that blow the
// state cap or learn trivially are skipped (per-attempt RNG streams keep
// the accepted sequence reproducible).
inline Dataset generate_assoc_dataset(const GenSpec& spec, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  Dataset ds;
  ds.family = "assoc";
  ds.spec = spec;
  std::size_t attempt = 0;
  while (ds.instances.size() < spec.count) {
    std::uint64_t inst_seed = derive_stream(spec.seed, attempt);
    ++attempt;
    ++ds.generated_attempts;
    Rng rng = make_rng(inst_seed);
    Dfa dfa = random_dfa(spec, rng);
    Dfta dfta;
    try {
      dfta = dfa_to_yield_dfta(dfa, spec.max_dfta_states);
    } catch (const BudgetExceeded&) {
      continue;
    }
    if (baseline_eq_queries(dfta) <= spec.triviality_threshold) continue;
    std::string id = "assoc_" + std::to_string(ds.instances.size());
    std::string file = id + ".dfta";
    std::ofstream out(fs::path(out_dir) / file);
    out << dfta_to_string(dfta);
    ds.instances.push_back({id, file, inst_seed});
  }
  return ds;
}

inline Dataset generate_distrib_dataset(const GenSpec& spec, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  Dataset ds;
  ds.family = "distrib";
  ds.spec = spec;
  std::size_t attempt = 0;
  while (ds.instances.size() < spec.count) {
    std::uint64_t inst_seed = derive_stream(spec.seed, attempt);
    ++attempt;
    ++ds.generated_attempts;
    Rng rng = make_rng(inst_seed);
    auto dfta = random_distributive_dfta(spec, rng);
    if (!dfta) continue;
    if (baseline_eq_queries(*dfta) <= spec.triviality_threshold) continue;
    std::string id = "distrib_" + std::to_string(ds.instances.size());
    std::string file = id + ".dfta";
    std::ofstream out(fs::path(out_dir) / file);
    out << dfta_to_string(*dfta);
    ds.instances.push_back({id, file, inst_seed});
  }
  return ds;
}

inline void save_manifest(const Dataset& ds, const std::string& out_dir) {
  nlohmann::json j;
  j["family"] = ds.family;
  j["spec"] = genspec_to_json(ds.spec);
  j["generated_attempts"] = ds.generated_attempts;
  j["instances"] = nlohmann::json::array();
  for (const auto& inst : ds.instances)
    j["instances"].push_back({{"id", inst.id}, {"file", inst.file}, {"seed", inst.seed}});
  std::ofstream out(std::filesystem::path(out_dir) / "manifest.json");
  out << j.dump(2) << '\n';
}

inline Dataset load_manifest(const std::string& dir) {
  std::ifstream in(std::filesystem::path(dir) / "manifest.json");
  if (!in) throw std::runtime_error("cannot open manifest in " + dir);
  nlohmann::json j;
  in >> j;
  Dataset ds;
  ds.family = j.value("family", "");
  ds.spec = genspec_from_json(j.at("spec"));
  ds.generated_attempts = j.value("generated_attempts", 0u);
  for (const auto& inst : j.at("instances"))
    ds.instances.push_back({inst.at("id"), inst.at("file"), inst.at("seed")});
  return ds;
}

// ---- Batch execution ------------------------------------------------------

inline std::vector<MetricsRow> run_experiment(const ExperimentConfig& cfg) {
  Dataset ds = load_manifest(cfg.dataset_dir);
  namespace fs = std::filesystem;
  struct Job {
    std::size_t instance_index;
    std::size_t repetition;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < ds.instances.size(); ++i)
    for (std::size_t r = 0; r < cfg.repetitions; ++r) jobs.push_back({i, r});
  std::vector<MetricsRow> rows(jobs.size());

  auto work = [&](std::size_t j) {
    const auto& inst = ds.instances[jobs[j].instance_index];
    try {
      Dfta target = load_dfta((fs::path(cfg.dataset_dir) / inst.file).string()).dfta;
      std::uint64_t stream = derive_stream(
          cfg.master_seed, jobs[j].instance_index * 1000003 + jobs[j].repetition);
      rows[j] = run_instance(target, inst.id, jobs[j].repetition, cfg, stream);
    } catch (const std::exception& e) {
      // Report the failure in-band; the batch keeps going.
      rows[j].instance_id = inst.id;
      rows[j].repetition = jobs[j].repetition;
      rows[j].setting = setting_name(cfg.setting) + std::string(":error:") + e.what();
    }
  };

  if (cfg.jobs <= 1) {
    for (std::size_t j = 0; j < jobs.size(); ++j) work(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < cfg.jobs; ++w)
      pool.emplace_back([&] {
        for (;;) {
          std::size_t j = next.fetch_add(1);
          if (j >= jobs.size()) return;
          work(j);
        }
      });
    for (auto& t : pool) t.join();
  }
  return rows;
}

inline void write_metrics_csv(const std::vector<MetricsRow>& rows, const std::string& path) {
  std::ofstream out(path);
  out << kMetricsCsvHeader << '\n';
  for (const auto& r : rows) out << metrics_csv_row(r) << '\n';
}

inline void write_metrics_json(const std::vector<MetricsRow>& rows, const std::string& path) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows)
    arr.push_back({{"instance", r.instance_id},
                   {"repetition", r.repetition},
                   {"setting", r.setting},
                   {"eq_queries_to_oracle", r.eq_queries_to_oracle},
                   {"inferred_equivalences", r.inferred_equivalences},
                   {"membership_queries", r.membership_queries},
                   {"cache_hits", r.cache_hits},
                   {"tokens", r.tokens},
                   {"learned_states", r.learned_states},
                   {"correct", r.correct},
                   {"heuristic_unsound", r.heuristic_unsound},
                   {"wall_time_s", r.wall_time_s},
                   {"simulated_cost_s", r.simulated_cost_s}});
  std::ofstream out(path);
  out << arr.dump(2) << '\n';
}

inline std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open metrics file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty metrics file: " + path);
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream is(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(is, field, ',')) fields.push_back(field);
    if (fields.size() != 13) throw std::runtime_error("bad metrics row: " + line);
    MetricsRow r;
    r.instance_id = fields[0];
    r.repetition = std::stoul(fields[1]);
    r.setting = fields[2];
    r.eq_queries_to_oracle = std::stoul(fields[3]);
    r.inferred_equivalences = std::stoul(fields[4]);
    r.membership_queries = std::stoul(fields[5]);
    r.cache_hits = std::stoul(fields[6]);
    r.tokens = std::stoull(fields[7]);
    r.learned_states = std::stoul(fields[8]);
    r.correct = fields[9] == "1";
    r.heuristic_unsound = std::stoul(fields[10]);
    r.wall_time_s = std::stod(fields[11]);
    r.simulated_cost_s = std::stod(fields[12]);
    rows.push_back(std::move(r));
  }
  return rows;
}

// ---- Reporting ------------------------------------------------------------

struct ReportSummary {
  std::size_t instances = 0;
  double mean_reduction = 0.0;    // equivalence queries to oracle, vs baseline
  double median_reduction = 0.0;
  double baseline_mean_eq = 0.0;
  double advised_mean_eq = 0.0;
  double baseline_accuracy = 0.0;
  double advised_accuracy = 0.0;
  double baseline_mean_tokens = 0.0;
  double advised_mean_tokens = 0.0;
  double baseline_mean_wall = 0.0;
  double advised_mean_wall = 0.0;
  std::optional<double> break_even_ms_per_token;  // nullopt: advice never cheaper
};

inline ReportSummary report(const std::vector<MetricsRow>& baseline,
                            const std::vector<MetricsRow>& advised) {
  std::map<std::pair<std::string, std::size_t>, const MetricsRow*> base_index;
  for (const auto& r : baseline) base_index[{r.instance_id, r.repetition}] = &r;
  ReportSummary s;
  std::vector<double> reductions;
  double b_eq = 0, a_eq = 0, b_acc = 0, a_acc = 0, b_tok = 0, a_tok = 0, b_wall = 0, a_wall = 0;
  for (const auto& r : advised) {
    auto it = base_index.find({r.instance_id, r.repetition});
    if (it == base_index.end())
      throw std::runtime_error("metrics files do not share a dataset: " + r.instance_id);
    const MetricsRow& b = *it->second;
    ++s.instances;
    double reduction =
        b.eq_queries_to_oracle == 0
            ? 0.0
            : 1.0 - static_cast<double>(r.eq_queries_to_oracle) / b.eq_queries_to_oracle;
    reductions.push_back(reduction);
    b_eq += b.eq_queries_to_oracle;
    a_eq += r.eq_queries_to_oracle;
    b_acc += b.correct ? 1 : 0;
    a_acc += r.correct ? 1 : 0;
    b_tok += static_cast<double>(b.tokens);
    a_tok += static_cast<double>(r.tokens);
    b_wall += b.wall_time_s;
    a_wall += r.wall_time_s;
  }
  if (s.instances == 0) return s;
  double n = static_cast<double>(s.instances);
  s.mean_reduction = std::accumulate(reductions.begin(), reductions.end(), 0.0) / n;
  std::sort(reductions.begin(), reductions.end());
  s.median_reduction = s.instances % 2 == 1
                           ? reductions[s.instances / 2]
                           : (reductions[s.instances / 2 - 1] + reductions[s.instances / 2]) / 2;
  s.baseline_mean_eq = b_eq / n;
  s.advised_mean_eq = a_eq / n;
  s.baseline_accuracy = b_acc / n;
  s.advised_accuracy = a_acc / n;
  s.baseline_mean_tokens = b_tok / n;
  s.advised_mean_tokens = a_tok / n;
  s.baseline_mean_wall = b_wall / n;
  s.advised_mean_wall = a_wall / n;
  // Smallest per-token membership cost at which mean simulated cost with
  // advice beats the baseline: wall_a + tok_a*c < wall_b + tok_b*c.
  if (s.advised_mean_tokens < s.baseline_mean_tokens) {
    double c = (s.advised_mean_wall - s.baseline_mean_wall) /
               (s.baseline_mean_tokens - s.advised_mean_tokens) * 1e3;
    s.break_even_ms_per_token = std::max(0.0, c);
  }
  return s;
}

inline std::string report_to_string(const ReportSummary& s) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3);
  os << "instances: " << s.instances << '\n'
     << "mean equivalence-query reduction: " << 100 * s.mean_reduction << "%\n"
     << "median equivalence-query reduction: " << 100 * s.median_reduction << "%\n"
     << "mean equivalence queries: " << s.baseline_mean_eq << " -> " << s.advised_mean_eq << '\n'
     << "accuracy: " << 100 * s.baseline_accuracy << "% -> " << 100 * s.advised_accuracy << "%\n"
     << "mean tokens: " << s.baseline_mean_tokens << " -> " << s.advised_mean_tokens << '\n'
     << "mean wall time: " << s.baseline_mean_wall << "s -> " << s.advised_mean_wall << "s\n";
  if (s.break_even_ms_per_token)
    os << "break-even membership cost: " << *s.break_even_ms_per_token << " ms/token\n";
  else
    os << "break-even membership cost: none (advice uses at least as many tokens)\n";
  return os.str();
}

}  // namespace treelearn
