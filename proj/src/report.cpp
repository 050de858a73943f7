#include "repread/report.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <sstream>

#include "repread/core.hpp"
#include "repread/dataset.hpp"

namespace repread {

std::string format_score(double mean, double se) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f ± %.3f", mean, se);
  return buf;
}

namespace {

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

std::string tokens_label(const ScoredContrast& c) {
  return pole_name(c.experimental) + " / " + pole_name(c.reference);
}

std::string primitive_label(const ScoredContrast& c) {
  return c.primitive.empty() ? c.contrast_name : capitalize(c.primitive);
}

std::vector<std::string> models_in_order(const std::vector<ScoredContrast>& scores) {
  std::vector<std::string> models;
  for (const auto& s : scores) {
    if (std::find(models.begin(), models.end(), s.model_id) == models.end()) models.push_back(s.model_id);
  }
  return models;
}

bool in_orientation_table(const ScoredContrast& c) { return c.group.empty() || c.group == "category"; }

std::string csv_line(const ScoredContrast& c) {
  char buf[96];
  std::snprintf(buf, sizeof buf, ",%.3f,%.3f,%u,", c.summary.mean, c.summary.se, c.summary.n);
  return c.model_id + ',' + c.contrast_name + ',' + pole_name(c.experimental) + ',' +
         pole_name(c.reference) + buf + c.summary.label + '\n';
}

constexpr std::string_view kCsvHeader = "model,contrast,experimental_pole,reference_pole,mean,se,n,label\n";

struct TableSpec {
  std::string file_stem;
  std::string title;
  std::string first_column;
  std::string second_column;  // empty: two data columns plus label
  bool (*select)(const ScoredContrast&);
};

void emit_score_table(const ReportInputs& in, const TableSpec& spec,
                      std::map<std::string, std::string>& files) {
  const auto models = models_in_order(in.scores);
  std::ostringstream md;
  std::ostringstream csv;
  csv << kCsvHeader;
  bool any = false;
  for (const auto& model : models) {
    std::vector<const ScoredContrast*> rows;
    const ScoredContrast* honesty = nullptr;
    for (const auto& s : in.scores) {
      if (s.model_id != model) continue;
      if (spec.select(s)) rows.push_back(&s);
      if (s.group == "honesty") honesty = &s;
    }
    if (rows.empty()) continue;
    any = true;
    md << "## " << model << " (layer " << rows.front()->layer << ")\n\n";
    if (spec.second_column.empty()) {
      md << "| " << spec.first_column << " | Score (± SE) | Default orientation |\n|---|---|---|\n";
      for (const auto* r : rows) {
        md << "| " << capitalize(pole_name(r->reference)) << " | "
           << format_score(r->summary.mean, r->summary.se) << " | " << r->summary.label << " |\n";
        csv << csv_line(*r);
      }
      if (honesty != nullptr) {
        md << "| Honesty (benchmark) | " << format_score(honesty->summary.mean, honesty->summary.se)
           << " | " << honesty->summary.label << " |\n";
        csv << csv_line(*honesty);
      }
    } else {
      md << "| " << spec.first_column << " | " << spec.second_column << " | Score (± SE) |\n|---|---|---|\n";
      for (const auto* r : rows) {
        md << "| " << primitive_label(*r) << " | " << tokens_label(*r) << " | "
           << format_score(r->summary.mean, r->summary.se) << " |\n";
        csv << csv_line(*r);
      }
    }
    md << "\nStandard errors computed across " << rows.front()->summary.n << " test scenarios.\n\n";
  }
  if (!any) return;
  files[spec.file_stem + ".md"] = "# " + spec.title + "\n\n0.0 = reference pole, 1.0 = experimental pole.\n\n" + md.str();
  files[spec.file_stem + ".csv"] = csv.str();
}

void emit_cross_model(const ReportInputs& in, std::map<std::string, std::string>& files) {
  const auto models = models_in_order(in.scores);
  if (models.size() < 2) return;

  auto find = [&](const std::string& contrast, const std::string& model) -> const ScoredContrast* {
    for (const auto& s : in.scores) {
      if (s.contrast_name == contrast && s.model_id == model) return &s;
    }
    return nullptr;
  };

  std::ostringstream md;
  std::ostringstream csv;
  md << "# Cross-model comparison\n\n|  |";
  csv << "section,row";
  for (const auto& m : models) {
    md << ' ' << m << " |";
    csv << ',' << m;
  }
  md << "\n|---|";
  for (std::size_t i = 0; i < models.size(); ++i) md << "---|";
  md << '\n';
  csv << '\n';

  const std::vector<std::pair<std::string, std::string>> sections = {
      {"category", "Orientation level"}, {"structural", "Structural level"},
      {"baseline", "Baseline level"},    {"honesty", ""}};
  for (const auto& [group, heading] : sections) {
    std::vector<std::string> contrasts;
    for (const auto& s : in.scores) {
      if (s.group == group &&
          std::find(contrasts.begin(), contrasts.end(), s.contrast_name) == contrasts.end()) {
        contrasts.push_back(s.contrast_name);
      }
    }
    if (contrasts.empty()) continue;
    if (!heading.empty()) {
      md << "| **" << heading << "** |";
      for (std::size_t i = 0; i < models.size(); ++i) md << " |";
      md << '\n';
    }
    for (const auto& contrast : contrasts) {
      const ScoredContrast* any = nullptr;
      for (const auto& m : models) {
        if ((any = find(contrast, m)) != nullptr) break;
      }
      const std::string row = group == "honesty" ? "**Honesty**"
                              : group == "category"
                                  ? tokens_label(*any)
                                  : primitive_label(*any) + " (" + tokens_label(*any) + ")";
      md << "| " << row << " |";
      csv << (group.empty() ? "other" : group) << ',' << (group == "honesty" ? "Honesty" : row);
      for (const auto& m : models) {
        const auto* cell = find(contrast, m);
        md << ' ' << (cell ? format_score(cell->summary.mean, cell->summary.se) : "n/a") << " |";
        char buf[32];
        if (cell) {
          std::snprintf(buf, sizeof buf, ",%.3f", cell->summary.mean);
        } else {
          std::snprintf(buf, sizeof buf, ",");
        }
        csv << buf;
      }
      md << '\n';
      csv << '\n';
    }
  }
  files["table4_cross_model.md"] = md.str();
  files["table4_cross_model.csv"] = csv.str();
}

void emit_robustness(const ReportInputs& in, std::map<std::string, std::string>& files) {
  std::ostringstream md;
  md << "# Robustness\n\n";
  if (in.matrices.empty() && in.ablations.empty() && in.token_tables.empty()) {
    md << "Robustness results not available; robustness tables omitted.\n";
    files["robustness.md"] = md.str();
    return;
  }
  for (const auto& [model, m] : in.matrices) {
    md << "## Cross-contrast generalization (" << model << ")\n\n```\n" << to_text_table(m) << "```\n\n";
    files["cross_contrast_" + slugify(model) + ".csv"] = to_csv(m);
  }
  if (!in.ablations.empty()) {
    md << "## Scenario ablation\n\n" << to_markdown(in.ablations) << '\n';
    files["ablation.csv"] = to_csv(in.ablations);
  }
  if (!in.token_tables.empty()) {
    std::string csv;
    for (const auto& [base, t] : in.token_tables) {
      md << "## Token robustness: " << base << "\n\n" << to_markdown(t) << '\n';
      const std::string body = to_csv(t);
      csv += csv.empty() ? body : body.substr(body.find('\n') + 1);
    }
    files["token_robustness.csv"] = csv;
  }
  files["robustness.md"] = md.str();
}

}  // namespace

std::map<std::string, std::string> emit_tables(const ReportInputs& inputs) {
  std::map<std::string, std::string> files;
  emit_score_table(inputs,
                   {"table1_orientation", "Orientation-level scores", "Reference pole", "", in_orientation_table},
                   files);
  emit_score_table(inputs,
                   {"table2_structural", "Structural-level scores", "Primitive", "Contrastive tokens",
                    [](const ScoredContrast& c) { return c.group == "structural"; }},
                   files);
  emit_score_table(inputs,
                   {"table3_baseline", "Shared-baseline scores", "Primitive", "Tokens",
                    [](const ScoredContrast& c) { return c.group == "baseline"; }},
                   files);
  emit_cross_model(inputs, files);
  emit_robustness(inputs, files);
  return files;
}

}  // namespace repread
