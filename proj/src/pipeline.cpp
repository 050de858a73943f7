#include "repread/pipeline.hpp"

#include <algorithm>
#include <functional>

#include "repread/error.hpp"
#include "repread/io.hpp"
#include "repread/report.hpp"
#include "repread/robustness.hpp"
#include "repread/scoring.hpp"
#include "repread/synthetic.hpp"

#ifndef REPREAD_DATA_DIR
#define REPREAD_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace repread {

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::kBuild: return "build";
    case Stage::kVectors: return "vectors";
    case Stage::kScores: return "scores";
    case Stage::kRobustness: return "robustness";
    case Stage::kReport: return "report";
  }
  return "?";
}

fs::path default_data_dir() { return fs::path(REPREAD_DATA_DIR); }

std::vector<PromptRow> prompt_rows(const PromptSet& set) {
  std::vector<PromptRow> rows;
  rows.reserve(2 * set.pairs.size() + set.unframed.size());
  for (const auto& p : set.pairs) {
    rows.push_back({2 * p.pair_id, p.pair_id, Condition::kExperimental, p.experimental_prompt});
    rows.push_back({2 * p.pair_id + 1, p.pair_id, Condition::kReference, p.reference_prompt});
  }
  const auto base = static_cast<std::uint32_t>(2 * set.pairs.size());
  for (std::size_t s = 0; s < set.unframed.size(); ++s) {
    rows.push_back({base + static_cast<std::uint32_t>(s), kUnframedPairId, Condition::kUnframed, set.unframed[s].text});
  }
  return rows;
}

std::map<std::uint32_t, std::string> prompt_hashes(const PromptSet& set) {
  std::map<std::uint32_t, std::string> out;
  for (const auto& r : prompt_rows(set)) out.emplace(r.prompt_id, sha256_hex(r.text));
  return out;
}

std::string to_jsonl(const std::vector<PromptRow>& rows) {
  std::string out;
  for (const auto& r : rows) {
    json j;
    j["prompt_id"] = r.prompt_id;
    j["pair_id"] = r.pair_id;
    j["condition"] = std::string(to_string(r.condition));
    j["text"] = r.text;
    out += j.dump();
    out += '\n';
  }
  return out;
}

namespace {

constexpr std::string_view kHonestyName = "honesty";

ProbeConfig effective_config(const RunPlan& plan) {
  ProbeConfig cfg = load_probe_config(plan.config_path);
  if (plan.layer_override) cfg.layer = *plan.layer_override;
  if (plan.split_seed_override) cfg.split_seed = *plan.split_seed_override;
  return cfg;
}

fs::path data_path(const fs::path& given, const char* fallback) {
  return given.empty() ? default_data_dir() / fallback : given;
}

std::vector<TokenPair> contrasts_of(const RunPlan& plan, const ProbeConfig& cfg) {
  if (plan.token_pairs_path.empty()) {
    return {TokenPair{cfg.contrast_name, cfg.experimental_token, cfg.reference_token, "", "", ""}};
  }
  return load_token_pairs(plan.token_pairs_path);
}

// The honesty benchmark rides through the pipeline as one more contrast whose
// pairs are the train and test statement pairs.
PromptSet honesty_prompt_set(const RunPlan& plan, const std::vector<Scenario>& unframed) {
  const auto statements = load_statements(plan.facts_path);
  const auto hs = build_honesty_set(statements, plan.honesty_train_pairs, plan.honesty_test_pairs, plan.honesty_seed);
  PromptSet set;
  set.contrast = {std::string(kHonestyName), std::string(kHonestToken), std::string(kUntruthfulToken),
                  std::string(kHonestyName), "", ""};
  set.template_id = TemplateId::kStatement;
  for (const auto* part : {&hs.train, &hs.test}) {
    for (const auto& p : *part) {
      set.pairs.push_back({p.pair_id, p.source_statement_id, p.honest_prompt, p.untruthful_prompt});
    }
  }
  for (const auto& p : hs.train) set.split.train_pair_ids.push_back(p.pair_id);
  for (const auto& p : hs.test) set.split.test_pair_ids.push_back(p.pair_id);
  set.split.seed = plan.honesty_seed;
  set.unframed = unframed;
  return set;
}

}  // namespace

std::vector<PromptSet> build_prompt_sets(const RunPlan& plan) {
  const ProbeConfig cfg = effective_config(plan);
  const auto scenarios = load_scenarios(data_path(plan.scenarios_path, "scenarios_contrastive.txt"), SetTag::kContrastive);
  const auto unframed = load_scenarios(data_path(plan.test_scenarios_path, "scenarios_test.txt"), SetTag::kNaturalTest);
  cfg.validate_for(scenarios.size());

  std::vector<PromptSet> sets;
  for (const auto& tp : contrasts_of(plan, cfg)) {
    if (tp.contrast_name == kHonestyName) {
      throw Error(ErrorKind::kInvalidConfig, "contrast name 'honesty' is reserved");
    }
    ProbeConfig c = cfg;
    c.contrast_name = tp.contrast_name;
    c.experimental_token = tp.experimental;
    c.reference_token = tp.reference;
    PromptSet set;
    set.contrast = tp;
    set.template_id = c.template_id;
    set.pairs = build_contrast_set(scenarios, c);
    set.split = split_train_test(set.pairs.size(), c.n_test, c.split_seed);
    set.unframed = unframed;
    sets.push_back(std::move(set));
  }
  if (!plan.facts_path.empty()) sets.push_back(honesty_prompt_set(plan, unframed));
  return sets;
}

namespace {

// One (contrast, dump) combination; several dumps of one contrast are
// distinct models.
struct Unit {
  const PromptSet* set = nullptr;
  fs::path dump_path;
  std::string model_id;
  std::string name;  // <contrast slug>__<model slug>
};

struct Context {
  const RunPlan& plan;
  std::ostream& log;
  ProbeConfig config;
  std::vector<PromptSet> sets;
  std::map<std::string, std::vector<fs::path>> dumps;
  std::map<std::string, std::string> written;  // relative path -> sha256, this run only
  json synthetic_spec;

  fs::path out(const fs::path& rel) const { return plan.out_dir / rel; }

  void write(const fs::path& rel, const std::string& contents) {
    write_text_file(out(rel), contents);
    written[rel.generic_string()] = sha256_hex(contents);
  }
  void write_json(const fs::path& rel, const json& j) { write(rel, j.dump(2) + "\n"); }
};

const PromptSet* find_set(const Context& ctx, const std::string& name) {
  for (const auto& s : ctx.sets) {
    if (s.contrast.contrast_name == name) return &s;
  }
  return nullptr;
}

std::string read_model_id(const fs::path& dump_path) {
  const auto mpath = manifest_path_for(dump_path);
  if (!fs::exists(dump_path)) throw Error(ErrorKind::kMissingInput, "dump not found: " + dump_path.string());
  if (!fs::exists(mpath)) throw Error(ErrorKind::kMissingInput, "manifest not found: " + mpath.string());
  return manifest_from_json(read_json_file(mpath)).model_id;
}

std::vector<Unit> resolve_units(const Context& ctx) {
  for (const auto& [name, _] : ctx.dumps) {
    if (find_set(ctx, name) == nullptr) throw Error(ErrorKind::kInvalidArgument, "dump given for unknown contrast '" + name + "'");
  }
  std::vector<Unit> units;
  std::set<std::string> names;
  for (const auto& set : ctx.sets) {
    auto it = ctx.dumps.find(set.contrast.contrast_name);
    if (it == ctx.dumps.end()) continue;
    for (const auto& path : it->second) {
      Unit u{&set, path, read_model_id(path), ""};
      u.name = slugify(set.contrast.contrast_name) + "__" + slugify(u.model_id);
      if (!names.insert(u.name).second) {
        throw Error(ErrorKind::kInvalidArgument, "two dumps of contrast '" + set.contrast.contrast_name +
                                                     "' share model id '" + u.model_id + "'");
      }
      units.push_back(std::move(u));
    }
  }
  if (units.empty()) throw Error(ErrorKind::kMissingInput, "no activation dumps supplied");
  return units;
}

ActivationDump load_unit_dump(const Unit& u) {
  const auto hashes = prompt_hashes(*u.set);
  return read_dump(u.dump_path, &hashes);
}

fs::path vector_file(const Unit& u) { return fs::path("reading_vectors") / (u.name + ".json"); }
fs::path score_file(const Unit& u) { return fs::path("scores") / (u.name + ".json"); }

json read_artifact(const Context& ctx, const fs::path& rel, const char* producer) {
  const auto path = ctx.out(rel);
  if (!fs::exists(path)) {
    throw Error(ErrorKind::kMissingInput, path.string() + " not found; run the " + producer + " stage first");
  }
  return read_json_file(path);
}

// ---- stages ---------------------------------------------------------------

void stage_build(Context& ctx) {
  json index = json::array();
  for (const auto& set : ctx.sets) {
    const std::string slug = slugify(set.contrast.contrast_name);
    const auto rows = prompt_rows(set);
    const fs::path rel = fs::path("prompts") / (slug + ".jsonl");
    ctx.write(rel, to_jsonl(rows));
    json entry;
    entry["contrast_name"] = set.contrast.contrast_name;
    entry["experimental_token"] = set.contrast.experimental;
    entry["reference_token"] = set.contrast.reference;
    entry["template_id"] = std::string(to_string(set.template_id));
    entry["prompts_file"] = rel.generic_string();
    entry["n_pairs"] = set.pairs.size();
    entry["n_unframed"] = set.unframed.size();
    entry["train_pair_ids"] = set.split.train_pair_ids;
    entry["test_pair_ids"] = set.split.test_pair_ids;
    entry["split_seed"] = set.split.seed;
    index.push_back(std::move(entry));
  }
  ctx.write_json("prompts/index.json", index);
  ctx.log << "build: " << ctx.sets.size() << " prompt sets\n";

  if (!ctx.plan.synthesize) return;
  SyntheticSpec base;
  if (ctx.plan.synthetic_spec_path) base = synthetic_spec_from_json(read_json_file(*ctx.plan.synthetic_spec_path));
  if (!base.direction_seed) base.direction_seed = base.seed;
  for (std::size_t i = 0; i < ctx.sets.size(); ++i) {
    const auto& set = ctx.sets[i];
    SyntheticSpec spec = base;
    spec.seed = base.seed + i;
    spec.n_pairs = static_cast<std::uint32_t>(set.pairs.size());
    spec.n_unframed = static_cast<std::uint32_t>(set.unframed.size());
    if (base.unframed_coeffs.empty()) {
      const double cycle[3] = {-base.delta, 0.0, base.delta};
      spec.unframed_coeffs.clear();
      for (std::uint32_t s = 0; s < spec.n_unframed; ++s) spec.unframed_coeffs.push_back(cycle[s % 3]);
    } else if (base.unframed_coeffs.size() != spec.n_unframed) {
      throw Error(ErrorKind::kInvalidConfig, "synthetic unframed_coeffs must list one value per test scenario (" +
                                                 std::to_string(spec.n_unframed) + ")");
    }
    std::vector<std::string> texts;
    for (const auto& r : prompt_rows(set)) texts.push_back(r.text);
    const fs::path rel = fs::path("dumps") / (slugify(set.contrast.contrast_name) + ".actd");
    write_synthetic_dump(spec, ctx.out(rel), &texts);
    for (const auto& f : std::initializer_list<fs::path> {rel, fs::path(rel.string() + ".manifest.json"), fs::path(rel.string() + ".ground_truth.json")}) {
      ctx.written[f.generic_string()] = sha256_file(ctx.out(f));
    }
    ctx.dumps[set.contrast.contrast_name] = {ctx.out(rel)};
  }
  ctx.synthetic_spec = to_json(base);
  ctx.log << "build: synthetic dumps for " << ctx.sets.size() << " contrasts\n";
}

std::vector<PairedVectors> evaluation_pairs(const Context& ctx, const ActivationDump& dump, const Unit& u, int layer) {
  auto joined = join_pairs(dump, u.set->split, layer);
  if (!ctx.plan.eval_all_pairs) return joined.test;
  auto all = std::move(joined.train);
  all.insert(all.end(), std::make_move_iterator(joined.test.begin()), std::make_move_iterator(joined.test.end()));
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.pair_id < b.pair_id; });
  return all;
}

void stage_vectors(Context& ctx) {
  const auto units = resolve_units(ctx);
  json index = json::array();
  for (const auto& u : units) {
    const auto dump = load_unit_dump(u);
    const int layer = resolve_layer(static_cast<int>(dump.manifest.n_layers_total), ctx.config.layer);
    const auto joined = join_pairs(dump, u.set->split, layer);
    ExtractionOptions opts;
    opts.centering = ctx.plan.centering;
    ExtractionDiagnostics diag;
    ReadingVector v = extract_reading_vector(joined.train, opts, &diag);
    v.layer = layer;
    v.contrast_name = u.set->contrast.contrast_name;
    v.experimental_pole = pole_name(u.set->contrast.experimental);
    v.reference_pole = pole_name(u.set->contrast.reference);
    const auto cls = classify_pairs(v, evaluation_pairs(ctx, dump, u, layer));

    json j;
    j["unit"] = u.name;
    j["model_id"] = u.model_id;
    j["dump_sha256"] = sha256_file(u.dump_path);
    j["vector"] = to_json(v);
    j["classification"] = to_json(cls);
    j["evaluation"] = ctx.plan.eval_all_pairs ? "all_pairs" : "test_pairs";
    j["power_iteration"] = {{"iterations", diag.iterations}, {"converged", diag.converged}, {"eigenvalue", diag.eigenvalue}};
    ctx.write_json(vector_file(u), j);
    index.push_back({{"unit", u.name}, {"contrast_name", v.contrast_name}, {"model_id", u.model_id}, {"layer", layer}});
    ctx.log << "vectors: " << u.name << " layer " << layer << " accuracy " << cls.n_correct << "/" << cls.n_total << "\n";
  }
  ctx.write_json("reading_vectors/index.json", index);
}

ReadingVector load_vector(const Context& ctx, const Unit& u) {
  return reading_vector_from_json(read_artifact(ctx, vector_file(u), "vectors").at("vector"));
}

void stage_scores(Context& ctx) {
  const auto units = resolve_units(ctx);
  json index = json::array();
  std::string csv = "model," + csv_header() + "\n";
  for (const auto& u : units) {
    const ReadingVector v = load_vector(ctx, u);
    const auto dump = load_unit_dump(u);
    const auto unframed = unframed_vectors(dump, v.layer);
    const auto first = static_cast<std::uint32_t>(2 * u.set->pairs.size());
    const auto& scenarios = u.set->unframed;
    const auto summary = score_scenarios(v, unframed, [&](std::uint32_t prompt_id) {
      if (prompt_id < first || prompt_id - first >= scenarios.size()) {
        throw Error(ErrorKind::kInvalidArgument, "unframed record with prompt id " + std::to_string(prompt_id) +
                                                     " outside the scenario range");
      }
      return scenarios[prompt_id - first].id;
    });
    json j;
    j["unit"] = u.name;
    j["model_id"] = u.model_id;
    j["layer"] = v.layer;
    j["summary"] = to_json(summary);
    ctx.write_json(score_file(u), j);

    const auto& tp = u.set->contrast;
    index.push_back({{"unit", u.name},
                     {"contrast_name", tp.contrast_name},
                     {"group", tp.group},
                     {"primitive", tp.primitive},
                     {"compare_to", tp.compare_to},
                     {"experimental", tp.experimental},
                     {"reference", tp.reference},
                     {"model_id", u.model_id},
                     {"layer", v.layer}});
    csv += u.model_id + "," + to_csv_row(summary) + "\n";
    ctx.log << "scores: " << u.name << " " << format_score(summary.mean, summary.se) << " (" << summary.label << ")\n";
  }
  ctx.write_json("scores/index.json", index);
  ctx.write("scores.csv", csv);
}

std::vector<std::string> models_of(const std::vector<Unit>& units) {
  std::vector<std::string> models;
  for (const auto& u : units) {
    if (std::find(models.begin(), models.end(), u.model_id) == models.end()) models.push_back(u.model_id);
  }
  return models;
}

// Contrasts compared in the generalization matrix: the "category" group, or
// failing that every contrast sharing an experimental token with another.
std::vector<const Unit*> matrix_members(const std::vector<Unit>& units, const std::string& model) {
  std::vector<const Unit*> mine;
  for (const auto& u : units) {
    if (u.model_id == model && u.set->contrast.contrast_name != kHonestyName) mine.push_back(&u);
  }
  std::vector<const Unit*> grouped;
  for (const auto* u : mine) {
    if (u->set->contrast.group == "category") grouped.push_back(u);
  }
  if (!grouped.empty()) return grouped;
  std::map<std::string, std::vector<const Unit*>> by_token;
  for (const auto* u : mine) by_token[u->set->contrast.experimental].push_back(u);
  for (const auto* u : mine) {
    if (by_token[u->set->contrast.experimental].size() >= 2) grouped.push_back(u);
  }
  return grouped;
}

ScoreSummary load_summary(const Context& ctx, const Unit& u) {
  return score_summary_from_json(read_artifact(ctx, score_file(u), "scores").at("summary"));
}

void stage_robustness(Context& ctx) {
  const auto units = resolve_units(ctx);
  const auto models = models_of(units);

  std::map<std::string, std::string> matrices_written;
  for (const auto& model : models) {
    const auto members = matrix_members(units, model);
    if (members.empty()) continue;
    std::vector<ReadingVector> vectors;
    std::map<std::string, std::vector<PairedVectors>> tests;
    for (const auto* u : members) {
      vectors.push_back(load_vector(ctx, *u));
      const auto dump = load_unit_dump(*u);
      tests[u->set->contrast.contrast_name] = evaluation_pairs(ctx, dump, *u, vectors.back().layer);
    }
    const auto m = cross_contrast_matrix(vectors, tests);
    const std::string stem = "robustness/cross_contrast__" + slugify(model);
    ctx.write_json(stem + ".json", {{"model_id", model}, {"matrix", to_json(m)}});
    ctx.write(stem + ".csv", to_csv(m));
    ctx.write(stem + ".txt", to_text_table(m));
    ctx.log << "robustness: " << members.size() << "x" << members.size() << " generalization matrix for " << model << "\n";
  }

  std::vector<AblationReport> ablations;
  for (const auto& u : units) {
    const auto s = load_summary(ctx, u);
    if (s.per_scenario_scores.size() <= ctx.plan.ablation_k) {
      ctx.log << "robustness: " << u.name << " has too few scenarios for leave-" << ctx.plan.ablation_k << "-out\n";
      continue;
    }
    auto r = leave_k_out(s.per_scenario_scores, ctx.plan.ablation_k, ctx.plan.ablation_subsets, ctx.config.split_seed);
    r.vector_name = models.size() > 1 ? u.set->contrast.contrast_name + " (" + u.model_id + ")" : u.set->contrast.contrast_name;
    ablations.push_back(std::move(r));
  }
  if (!ablations.empty()) {
    json arr = json::array();
    for (const auto& r : ablations) arr.push_back(to_json(r));
    ctx.write_json("robustness/ablation.json", arr);
    ctx.write("robustness/ablation.csv", to_csv(ablations));
  }

  json token_tables = json::array();
  std::string token_csv;
  for (const auto& model : models) {
    std::map<std::string, std::vector<const Unit*>> alternatives;
    for (const auto& u : units) {
      if (u.model_id == model && !u.set->contrast.compare_to.empty()) alternatives[u.set->contrast.compare_to].push_back(&u);
    }
    for (const auto& [base_name, alts] : alternatives) {
      std::vector<std::pair<std::string, ScoreSummary>> entries;
      auto label = [](const TokenPair& tp) { return pole_name(tp.experimental) + "/" + pole_name(tp.reference); };
      const auto base_it = std::find_if(units.begin(), units.end(), [&](const Unit& u) {
        return u.model_id == model && u.set->contrast.contrast_name == base_name;
      });
      if (base_it != units.end()) entries.emplace_back(label(base_it->set->contrast), load_summary(ctx, *base_it));
      for (const auto* a : alts) entries.emplace_back(label(a->set->contrast), load_summary(ctx, *a));
      if (entries.size() < 2) continue;
      const auto t = token_robustness(entries);
      const std::string key = models.size() > 1 ? base_name + " (" + model + ")" : base_name;
      token_tables.push_back({{"base", key}, {"model_id", model}, {"table", to_json(t)}});
      const std::string body = to_csv(t);
      token_csv += token_csv.empty() ? body : body.substr(body.find('\n') + 1);
    }
  }
  if (!token_tables.empty()) {
    ctx.write_json("robustness/token_robustness.json", token_tables);
    ctx.write("robustness/token_robustness.csv", token_csv);
  }
  ctx.log << "robustness: " << ablations.size() << " ablations, " << token_tables.size() << " token comparisons\n";
}

void stage_report(Context& ctx) {
  ReportInputs in;
  for (const auto& e : read_artifact(ctx, "scores/index.json", "scores")) {
    ScoredContrast c;
    c.contrast_name = e.at("contrast_name").get<std::string>();
    c.group = e.at("group").get<std::string>();
    c.primitive = e.at("primitive").get<std::string>();
    c.experimental = e.at("experimental").get<std::string>();
    c.reference = e.at("reference").get<std::string>();
    c.model_id = e.at("model_id").get<std::string>();
    c.layer = e.at("layer").get<int>();
    const auto unit = e.at("unit").get<std::string>();
    c.summary = score_summary_from_json(read_artifact(ctx, fs::path("scores") / (unit + ".json"), "scores").at("summary"));
    in.scores.push_back(std::move(c));
  }

  // Only robustness results that belong to the current score set are shown.
  std::set<std::string> models;
  for (const auto& c : in.scores) models.insert(c.model_id);
  for (const auto& model : models) {
    const auto path = ctx.out("robustness/cross_contrast__" + slugify(model) + ".json");
    if (fs::exists(path)) {
      in.matrices.emplace_back(model, generalization_matrix_from_json(read_json_file(path).at("matrix")));
    }
  }
  if (fs::exists(ctx.out("robustness/ablation.json"))) {
    for (const auto& r : read_json_file(ctx.out("robustness/ablation.json"))) in.ablations.push_back(ablation_report_from_json(r));
  }
  if (fs::exists(ctx.out("robustness/token_robustness.json"))) {
    for (const auto& t : read_json_file(ctx.out("robustness/token_robustness.json"))) {
      in.token_tables.emplace_back(t.at("base").get<std::string>(), token_robustness_from_json(t.at("table")));
    }
  }

  const auto files = emit_tables(in);
  for (const auto& [name, contents] : files) ctx.write(fs::path("tables") / name, contents);
  ctx.log << "report: " << files.size() << " table files\n";
}

std::string hash_or_empty(const fs::path& p) { return p.empty() ? std::string() : sha256_file(p); }

json run_summary(const Context& ctx) {
  const auto& plan = ctx.plan;
  json j;
  j["tool"] = "repread";
  j["version"] = std::string(kToolVersion);
  json stages = json::array();
  for (auto s : plan.stages) stages.push_back(std::string(to_string(s)));
  j["stages"] = stages;
  j["seeds"] = {{"split", ctx.config.split_seed},
                {"honesty", plan.honesty_seed},
                {"ablation", ctx.config.split_seed}};
  j["options"] = {{"layer", ctx.config.layer.str()},
                  {"n_train", ctx.config.n_train},
                  {"n_test", ctx.config.n_test},
                  {"eval_all_pairs", plan.eval_all_pairs},
                  {"centering", plan.centering == DifferenceCentering::kNone ? "none" : "mean"},
                  {"ablation_k", plan.ablation_k},
                  {"ablation_subsets", plan.ablation_subsets},
                  {"honesty_train_pairs", plan.honesty_train_pairs},
                  {"honesty_test_pairs", plan.honesty_test_pairs}};
  json inputs;
  inputs["config"] = sha256_file(plan.config_path);
  inputs["token_pairs"] = hash_or_empty(plan.token_pairs_path);
  inputs["scenarios"] = sha256_file(data_path(plan.scenarios_path, "scenarios_contrastive.txt"));
  inputs["test_scenarios"] = sha256_file(data_path(plan.test_scenarios_path, "scenarios_test.txt"));
  inputs["facts"] = hash_or_empty(plan.facts_path);
  inputs["synthetic_spec"] = plan.synthetic_spec_path ? sha256_file(*plan.synthetic_spec_path) : std::string();
  json dumps = json::object();
  for (const auto& [name, paths] : ctx.dumps) {
    json arr = json::array();
    for (const auto& p : paths) {
      arr.push_back({{"dump", fs::exists(p) ? sha256_file(p) : ""},
                     {"manifest", fs::exists(manifest_path_for(p)) ? sha256_file(manifest_path_for(p)) : ""}});
    }
    dumps[name] = arr;
  }
  inputs["dumps"] = dumps;
  j["inputs"] = inputs;
  if (!ctx.synthetic_spec.is_null()) j["synthetic"] = ctx.synthetic_spec;
  j["outputs"] = ctx.written;
  return j;
}

}  // namespace

RunResult run(const RunPlan& plan, std::ostream& log) {
  std::string stage = "plan";
  try {
    if (plan.out_dir.empty()) throw Error(ErrorKind::kInvalidArgument, "no output directory");
    if (plan.stages.empty()) throw Error(ErrorKind::kInvalidArgument, "no stages requested");
    if (plan.config_path.empty()) throw Error(ErrorKind::kMissingInput, "no probe config given");
    Context ctx{plan, log, effective_config(plan), build_prompt_sets(plan), plan.dumps, {}, {}};
    if (plan.synthesize && !plan.stages.contains(Stage::kBuild)) {
      throw Error(ErrorKind::kInvalidArgument, "synthetic dumps are produced by the build stage");
    }

    const std::vector<std::pair<Stage, std::function<void(Context&)>>> order = {
        {Stage::kBuild, stage_build},           {Stage::kVectors, stage_vectors}, {Stage::kScores, stage_scores},
        {Stage::kRobustness, stage_robustness}, {Stage::kReport, stage_report}};
    for (const auto& [s, fn] : order) {
      if (!plan.stages.contains(s)) continue;
      stage = std::string(to_string(s));
      fn(ctx);
    }
    stage = "summary";
    write_text_file(plan.out_dir / "run_summary.json", run_summary(ctx).dump(2) + "\n");
    return {0, ""};
  } catch (const std::exception& e) {
    return {1, stage + ": " + e.what()};
  }
}

}  // namespace repread
