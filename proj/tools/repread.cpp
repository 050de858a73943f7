// Batch front end: build prompt sets, score dumps, run robustness checks and
// render tables. See README.md for the artifact layout.
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "repread/error.hpp"
#include "repread/pipeline.hpp"

namespace {

using repread::Stage;

struct Options {
  std::string config;
  std::string tokens;
  std::string scenarios;
  std::string test_scenarios;
  std::string facts;
  std::vector<std::string> dumps;
  std::string out = "out";
  std::string layer;
  std::uint64_t seed_split = 0;
  bool eval_all_pairs = false;
  bool no_center = false;
  bool center = false;
  std::string synth_spec;
  std::size_t honesty_train = 512;
  std::size_t honesty_test = 256;
  std::uint64_t honesty_seed = 0;
  std::uint32_t ablation_k = 5;
  std::uint32_t ablation_subsets = 200;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "Probe config JSON")->check(CLI::ExistingFile);
  cmd->add_option("--tokens", o.tokens, "Token-pair list JSON (default: the config's single contrast)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--scenarios", o.scenarios, "Contrastive scenarios (default: shipped set)")->check(CLI::ExistingFile);
  cmd->add_option("--test-scenarios", o.test_scenarios, "Unframed test scenarios (default: shipped set)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--facts", o.facts, "True/false statements CSV; adds the honesty benchmark")->check(CLI::ExistingFile);
  cmd->add_option("--dump", o.dumps, "contrast=path to an ACTD dump (repeatable; several per contrast = several models)");
  cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
  cmd->add_option("--layer", o.layer, "Probe layer: negative index or 'auto'");
  cmd->add_option("--seed-split", o.seed_split, "Override the train/test split seed");
  cmd->add_flag("--eval-all-pairs", o.eval_all_pairs, "Classify on all pairs instead of the held-out split");
  auto* nc = cmd->add_flag("--no-center", o.no_center, "Uncentered difference PCA (the default)");
  cmd->add_flag("--center", o.center, "Subtract the mean difference before PCA")->excludes(nc);
  cmd->add_option("--honesty-train", o.honesty_train, "Honesty train pairs")->capture_default_str();
  cmd->add_option("--honesty-test", o.honesty_test, "Honesty test pairs")->capture_default_str();
  cmd->add_option("--honesty-seed", o.honesty_seed, "Honesty shuffle seed")->capture_default_str();
  cmd->add_option("--ablation-k", o.ablation_k, "Scenarios removed per ablation subset")->capture_default_str();
  cmd->add_option("--ablation-subsets", o.ablation_subsets, "Ablation subsets drawn")->capture_default_str();
}

repread::RunPlan make_plan(const Options& o, const CLI::App& cmd, std::set<Stage> stages, bool synth) {
  repread::RunPlan plan;
  plan.config_path = o.config.empty() ? repread::default_data_dir() / "probe_config.json" : std::filesystem::path(o.config);
  plan.token_pairs_path = o.tokens;
  plan.scenarios_path = o.scenarios;
  plan.test_scenarios_path = o.test_scenarios;
  plan.facts_path = o.facts;
  for (const auto& d : o.dumps) {
    const auto eq = d.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == d.size()) {
      throw repread::Error(repread::ErrorKind::kInvalidArgument, "--dump expects contrast=path, got '" + d + "'");
    }
    plan.dumps[d.substr(0, eq)].emplace_back(d.substr(eq + 1));
  }
  plan.out_dir = o.out;
  plan.stages = std::move(stages);
  if (!o.layer.empty()) plan.layer_override = repread::LayerRequest::parse(o.layer);
  if (cmd.count("--seed-split") > 0) plan.split_seed_override = o.seed_split;
  plan.eval_all_pairs = o.eval_all_pairs;
  plan.centering = o.center ? repread::DifferenceCentering::kMean : repread::DifferenceCentering::kNone;
  plan.honesty_train_pairs = o.honesty_train;
  plan.honesty_test_pairs = o.honesty_test;
  plan.honesty_seed = o.honesty_seed;
  plan.ablation_k = o.ablation_k;
  plan.ablation_subsets = o.ablation_subsets;
  plan.synthesize = synth;
  if (!o.synth_spec.empty()) plan.synthetic_spec_path = o.synth_spec;
  return plan;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reading-vector orientation measurement"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(repread::kToolVersion));

  Options o;
  struct Verb {
    const char* name;
    const char* help;
    std::set<Stage> stages;
    bool synth;
  };
  const std::vector<Verb> verbs = {
      {"build", "Write prompt files for the extractor", {Stage::kBuild}, false},
      {"score", "Extract reading vectors from dumps and score the test scenarios", {Stage::kVectors, Stage::kScores}, false},
      {"robustness", "Cross-contrast matrix, scenario ablation and token robustness", {Stage::kRobustness}, false},
      {"report", "Render tables from existing artifacts", {Stage::kReport}, false},
      {"all", "Every stage in order",
       {Stage::kBuild, Stage::kVectors, Stage::kScores, Stage::kRobustness, Stage::kReport}, false},
      {"synth", "Every stage on synthetic planted-direction dumps",
       {Stage::kBuild, Stage::kVectors, Stage::kScores, Stage::kRobustness, Stage::kReport}, true},
  };
  std::vector<CLI::App*> cmds;
  for (const auto& v : verbs) {
    auto* cmd = app.add_subcommand(v.name, v.help);
    add_common(cmd, o);
    if (v.synth) cmd->add_option("--synth-spec", o.synth_spec, "Synthetic spec JSON overrides")->check(CLI::ExistingFile);
    cmds.push_back(cmd);
  }

  CLI11_PARSE(app, argc, argv);

  for (std::size_t i = 0; i < verbs.size(); ++i) {
    if (!cmds[i]->parsed()) continue;
    try {
      const auto plan = make_plan(o, *cmds[i], verbs[i].stages, verbs[i].synth);
      const auto result = repread::run(plan, std::cerr);
      if (result.status != 0) {
        std::cerr << "error: " << result.message << "\n";
        return result.status;
      }
      std::cerr << "wrote " << plan.out_dir.string() << "\n";
      return 0;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }
  return 1;
}
