// Command-line front end: dataset generation, one-off learning runs,
// consistency checks, TRS synthesis, and the experiment harness.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "treelearn/advice.hpp"
#include "treelearn/experiment.hpp"
#include "treelearn/synthesis.hpp"

using namespace treelearn;

namespace {

AdviceSpec advice_spec_from_json(const nlohmann::json& j) {
  AdviceSpec spec;
  if (j.contains("family")) spec.family = parse_family(j.at("family"));
  if (j.contains("mem_family")) spec.mem_family = parse_family(j.at("mem_family"));
  if (j.contains("full")) spec.full_path = j.at("full").get<std::string>();
  if (j.contains("positive")) spec.positive_path = j.at("positive").get<std::string>();
  if (j.contains("negative")) spec.negative_path = j.at("negative").get<std::string>();
  if (j.contains("mem")) spec.mem_path = j.at("mem").get<std::string>();
  return spec;
}

SamplerConfig sampler_from_json(const nlohmann::json& j) {
  SamplerConfig s;
  s.sample_count = j.value("sample_count", s.sample_count);
  s.max_tree_size = j.value("max_tree_size", s.max_tree_size);
  s.leaf_probability = j.value("leaf_probability", s.leaf_probability);
  s.seed = j.value("seed", s.seed);
  return s;
}

int cmd_gen(const std::string& family, const std::string& spec_file, const std::string& out_dir,
            std::optional<std::uint64_t> seed) {
  GenSpec spec;
  if (!spec_file.empty()) {
    std::ifstream in(spec_file);
    if (!in) throw std::runtime_error("cannot open spec file: " + spec_file);
    nlohmann::json j;
    in >> j;
    spec = genspec_from_json(j);
  }
  if (seed) spec.seed = *seed;
  Dataset ds = family == "assoc" ? generate_assoc_dataset(spec, out_dir)
                                 : generate_distrib_dataset(spec, out_dir);
  save_manifest(ds, out_dir);
  std::cout << "wrote " << ds.instances.size() << " instances to " << out_dir << " ("
            << ds.generated_attempts << " attempts)\n";
  return 0;
}

int cmd_learn(const std::string& target_file, const AdviceSpec& advice,
              const std::string& check_mode, const std::string& teacher_kind,
              const SamplerConfig& sampler, std::uint64_t seed) {
  Dfta target = load_dfta(target_file).dfta;
  std::unique_ptr<Teacher> teacher;
  if (teacher_kind == "approx") {
    SamplerConfig cfg = sampler;
    cfg.seed = derive_stream(seed, 1);
    teacher = std::make_unique<ApproxTeacher>(target, cfg);
  } else {
    teacher = std::make_unique<ExactTeacher>(target);
  }
  AdviceConfig cfg = advice.instantiate(target.signature());
  cfg.approx_seed = derive_stream(seed, 2);
  if (check_mode == "approx") cfg.check_mode = CheckMode::Approximate;
  if (check_mode == "counting") cfg.check_mode = CheckMode::CountingThenExact;
  AdviceSession session(cfg, *teacher);
  LearnResult result =
      learn(target.signature(), [&](const Term& t) { return session.membership(t); },
            [&](const Dfta& cand) { return session.equivalence(cand); }, 1000,
            session.seed_terms());
  std::cout << dfta_to_string(result.dfta);
  std::cout << "# hypotheses: " << result.stats.hypotheses_submitted
            << ", oracle equivalence queries: " << teacher->counters().equivalence_queries
            << ", inferred: " << session.stats().inferred_equivalences
            << ", oracle membership queries: " << teacher->counters().membership_queries
            << ", cache hits: " << session.stats().cache_hits << '\n';
  std::cout << "# correct: " << (check_equivalence(result.dfta, target).equal() ? "yes" : "no")
            << '\n';
  return 0;
}

int cmd_check(const std::string& dfta_file, const std::string& trs_file, const std::string& mode,
              bool heuristic) {
  Dfta a = minimize(load_dfta(dfta_file).dfta);
  Trs trs = load_trs(trs_file);

  if (heuristic) {
    std::optional<AcceptanceOrder> ord;
    if (mode != "full") ord = acceptance_order(mode == "negative" ? minimize(complement(a)) : a);
    const Dfta& target = mode == "negative" ? minimize(complement(a)) : a;
    for (const auto& rule : trs.rules) {
      if (!rule.lhs.linear() || !rule.rhs.linear()) {
        std::cout << rule.str() << ": heuristic inapplicable (non-linear)\n";
        continue;
      }
      HeuristicVerdict h = heuristic_filter(
          target, rule, mode == "full" ? ConsistencyMode::Full : ConsistencyMode::Positive,
          ord ? &*ord : nullptr);
      const char* name = h == HeuristicVerdict::Consistent ? "consistent"
                         : h == HeuristicVerdict::MaybeConsistent ? "maybe consistent"
                                                                  : "definitely inconsistent";
      std::cout << rule.str() << ": " << name << '\n';
    }
    return 0;
  }

  ConsistencyVerdict v;
  if (mode == "full") v = check_full(a, trs);
  else if (mode == "positive") v = check_positive(a, trs, acceptance_order(a));
  else v = check_negative(a, trs);
  if (v.consistent()) {
    std::cout << "consistent\n";
    return 0;
  }
  const Violation& viol = *v.violation;
  std::cout << "violation: rule " << viol.rule.str() << "\n  assignment:";
  for (std::size_t i = 0; i < viol.variable_order.size(); ++i)
    std::cout << ' ' << viol.variable_order[i] << "=q" << viol.witness[i];
  std::cout << "\n  states: q" << viol.lhs_state << " vs q" << viol.rhs_state << '\n';
  const Dfta& host = mode == "negative" ? minimize(complement(a)) : a;
  auto [s, t] = violation_to_tree_pair(host, viol, mode != "full");
  std::cout << "  tree pair: " << s.str() << "  |  " << t.str() << '\n';
  return 1;
}

int cmd_synth(const std::string& dfta_file, bool ground, bool context_rule) {
  Dfta a = minimize(load_dfta(dfta_file).dfta);
  if (ground) {
    std::cout << trs_to_string(ground_characterization(a));
    return 0;
  }
  if (context_rule) {
    auto rule = context_rule_exists(a);
    if (!rule) {
      std::cout << "none\n";
      return 1;
    }
    std::cout << trs_to_string(Trs{a.signature(), {*rule}});
    return 0;
  }
  std::cerr << "synth: pass --ground or --context-rule\n";
  return 2;
}

int cmd_experiment(const std::string& config_file, const std::string& out_prefix,
                   std::optional<std::uint64_t> seed, std::optional<std::size_t> jobs) {
  std::ifstream in(config_file);
  if (!in) throw std::runtime_error("cannot open config file: " + config_file);
  nlohmann::json j;
  in >> j;
  ExperimentConfig cfg;
  cfg.setting = parse_setting(j.at("setting"));
  cfg.dataset_dir = j.at("dataset");
  if (j.contains("advice")) cfg.advice = advice_spec_from_json(j.at("advice"));
  if (j.contains("sampler")) cfg.sampler = sampler_from_json(j.at("sampler"));
  cfg.master_seed = j.value("master_seed", cfg.master_seed);
  cfg.membership_cost_per_token_ms =
      j.value("membership_cost_per_token_ms", cfg.membership_cost_per_token_ms);
  cfg.repetitions = j.value("repetitions", cfg.repetitions);
  cfg.jobs = j.value("jobs", cfg.jobs);
  cfg.measure_time = j.value("measure_time", cfg.measure_time);
  if (seed) cfg.master_seed = *seed;
  if (jobs) cfg.jobs = *jobs;

  auto rows = run_experiment(cfg);
  std::string prefix = out_prefix.empty() ? "metrics" : out_prefix;
  write_metrics_csv(rows, prefix + ".csv");
  write_metrics_json(rows, prefix + ".json");
  std::cout << "wrote " << rows.size() << " rows to " << prefix << ".csv\n";
  return 0;
}

int cmd_report(const std::string& baseline_file, const std::string& advice_file,
               const std::string& out_file) {
  auto baseline = read_metrics_csv(baseline_file);
  auto advised = read_metrics_csv(advice_file);
  ReportSummary s = report(baseline, advised);
  std::string text = report_to_string(s);
  std::cout << text;
  if (!out_file.empty()) {
    std::ofstream out(out_file);
    out << text;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active DFTA learning with term-rewriting advice"};
  app.require_subcommand(1);

  std::string family = "assoc", spec_file, out_dir = "dataset";
  std::optional<std::uint64_t> seed_opt;
  auto* gen = app.add_subcommand("gen", "generate a dataset");
  gen->add_option("--family", family)->check(CLI::IsMember({"assoc", "distrib"}));
  gen->add_option("--spec", spec_file);
  gen->add_option("--out", out_dir)->required();
  gen->add_option("--seed", seed_opt);

  std::string target_file, advice_full, advice_pos, advice_neg, mem_trs;
  std::string check_mode = "exact", teacher_kind = "exact";
  std::uint64_t learn_seed = 0;
  SamplerConfig sampler;
  auto* learn_cmd = app.add_subcommand("learn", "learn one target automaton");
  learn_cmd->add_option("--target", target_file)->required();
  learn_cmd->add_option("--advice-full", advice_full);
  learn_cmd->add_option("--advice-pos", advice_pos);
  learn_cmd->add_option("--advice-neg", advice_neg);
  learn_cmd->add_option("--mem-trs", mem_trs);
  learn_cmd->add_option("--check-mode", check_mode)
      ->check(CLI::IsMember({"exact", "approx", "counting"}));
  learn_cmd->add_option("--teacher", teacher_kind)->check(CLI::IsMember({"exact", "approx"}));
  learn_cmd->add_option("--samples", sampler.sample_count);
  learn_cmd->add_option("--max-tree-size", sampler.max_tree_size);
  learn_cmd->add_option("--seed", learn_seed);

  std::string check_dfta, check_trs, mode = "full";
  bool heuristic = false;
  auto* check_cmd = app.add_subcommand("check", "check consistency of a DFTA with a TRS");
  check_cmd->add_option("--dfta", check_dfta)->required();
  check_cmd->add_option("--trs", check_trs)->required();
  check_cmd->add_option("--mode", mode)->check(CLI::IsMember({"full", "positive", "negative"}));
  check_cmd->add_flag("--heuristic", heuristic);

  std::string synth_dfta;
  bool synth_ground = false, synth_context = false;
  auto* synth_cmd = app.add_subcommand("synth", "synthesize advice from a DFTA");
  synth_cmd->add_option("--dfta", synth_dfta)->required();
  synth_cmd->add_flag("--ground", synth_ground);
  synth_cmd->add_flag("--context-rule", synth_context);

  std::string exp_config, exp_out;
  std::optional<std::size_t> jobs_opt;
  auto* exp_cmd = app.add_subcommand("experiment", "run an experiment batch");
  exp_cmd->add_option("--config", exp_config)->required();
  exp_cmd->add_option("--out", exp_out);
  exp_cmd->add_option("--seed", seed_opt);
  exp_cmd->add_option("--jobs", jobs_opt);

  std::string rep_baseline, rep_advice, rep_out;
  auto* rep_cmd = app.add_subcommand("report", "aggregate two metrics files");
  rep_cmd->add_option("--baseline", rep_baseline)->required();
  rep_cmd->add_option("--advice", rep_advice)->required();
  rep_cmd->add_option("--out", rep_out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) return cmd_gen(family, spec_file, out_dir, seed_opt);
    if (*learn_cmd) {
      AdviceSpec advice;
      if (!advice_full.empty()) advice.full_path = advice_full;
      if (!advice_pos.empty()) advice.positive_path = advice_pos;
      if (!advice_neg.empty()) advice.negative_path = advice_neg;
      if (!mem_trs.empty()) advice.mem_path = mem_trs;
      return cmd_learn(target_file, advice, check_mode, teacher_kind, sampler, learn_seed);
    }
    if (*check_cmd) return cmd_check(check_dfta, check_trs, mode, heuristic);
    if (*synth_cmd) return cmd_synth(synth_dfta, synth_ground, synth_context);
    if (*exp_cmd) return cmd_experiment(exp_config, exp_out, seed_opt, jobs_opt);
    if (*rep_cmd) return cmd_report(rep_baseline, rep_advice, rep_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
