#include "semlabels/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>

#include "semlabels/attribution.hpp"
#include "semlabels/clustermetrics.hpp"
#include "semlabels/dataio.hpp"
#include "semlabels/encoding.hpp"
#include "semlabels/error.hpp"
#include "semlabels/hiermetrics.hpp"
#include "semlabels/taxonomy.hpp"
#include "semlabels/tinynet.hpp"

namespace semlabels {
namespace {

using nlohmann::json;

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Human-readable form for progress messages.
std::string Short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void WriteManifest(const std::string& output, const std::string& subcommand, json config,
                   json inputs, json outputs) {
  json manifest;
  manifest["tool"] = "semlabels";
  manifest["version"] = std::string(kToolVersion);
  manifest["subcommand"] = subcommand;
  manifest["config"] = std::move(config);
  manifest["inputs"] = std::move(inputs);
  manifest["outputs"] = std::move(outputs);
  WriteFileAtomic(output + ".manifest.json", manifest.dump(2) + "\n");
}

std::vector<std::string> ReadLines(const std::string& path) {
  std::istringstream in(ReadFile(path));
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

Rankings RankAll(const ModelParams& model, const Dataset& data) {
  Rankings ranked(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    ranked[i] = PredictTopK(model, data.features.row(i), model.num_classes());
  }
  return ranked;
}

void CheckModelMatches(const ModelParams& model, const Dataset& data, const Taxonomy& tax) {
  if (model.num_classes() != tax.num_classes()) {
    throw Error(ErrorCode::kDimMismatch, "model has " + std::to_string(model.num_classes()) +
                                             " outputs, taxonomy has " +
                                             std::to_string(tax.num_classes()) + " classes");
  }
  if (static_cast<int>(data.dim()) != model.input_dim()) {
    throw Error(ErrorCode::kDimMismatch, "data has " + std::to_string(data.dim()) +
                                             " features, model expects " +
                                             std::to_string(model.input_dim()));
  }
  ValidateDataset(data, tax.num_classes());
}

struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  double stddev = 0.0;
};

Summary Summarize(const std::vector<double>& values) {
  Summary s;
  s.n = values.size();
  if (s.n == 0) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

// ---- subcommands --------------------------------------------------------

struct BuildLabelsArgs {
  std::string taxonomy, vectors, classes, out, aux_out;
  double beta = -1.0;
  bool include_root = false;
};

int BuildLabels(const BuildLabelsArgs& a, std::ostream& out, std::ostream& err) {
  EmbeddingMatrix em;
  json inputs;
  if (!a.vectors.empty()) {
    TokenTable table = LoadTokenVectors(a.vectors);
    for (const auto& w : table.warnings) err << "warning: " << w << "\n";
    std::vector<std::string> names;
    if (!a.classes.empty()) {
      names = ReadLines(a.classes);
      inputs["classes"] = a.classes;
    } else if (!a.taxonomy.empty()) {
      names = Taxonomy::Load(a.taxonomy).class_names();
      inputs["taxonomy"] = a.taxonomy;
    } else {
      throw CLI::ValidationError("--vectors needs --classes or --taxonomy for the class names");
    }
    em = BuildWordEmbedding(table, names);
    inputs["vectors"] = a.vectors;
  } else if (!a.taxonomy.empty()) {
    em = BuildHierarchyEmbedding(Taxonomy::Load(a.taxonomy), {a.include_root});
    inputs["taxonomy"] = a.taxonomy;
  } else {
    throw CLI::ValidationError("one of --taxonomy or --vectors is required");
  }
  const double beta = a.beta >= 0.0 ? a.beta
                                    : (em.source == EmbeddingSource::kHierarchy
                                           ? kDefaultHierarchyBeta
                                           : kDefaultWordVectorBeta);
  const AugmentedLabels labels = BuildAugmentedLabels(em, beta);
  for (const auto& [i, j] : labels.duplicate_embeddings) {
    err << "warning: classes '" << em.class_names[i] << "' and '" << em.class_names[j]
        << "' have identical embedding directions\n";
  }
  WriteMatrix(a.out, labels.labels.values);
  json outputs{{"labels", a.out}};
  if (!a.aux_out.empty()) {
    WriteMatrix(a.aux_out, labels.auxiliary.values);
    outputs["auxiliary"] = a.aux_out;
  }
  json config{{"beta", beta},
              {"source", std::string(EmbeddingSourceName(em.source))},
              {"include_root", a.include_root},
              {"embedding_dim", em.rows.cols()},
              {"num_classes", em.rows.rows()}};
  WriteManifest(a.out, "build-labels", config, inputs, outputs);
  out << "wrote " << em.rows.rows() << "x" << em.rows.rows() << " labels (beta " << Short(beta)
      << ", " << EmbeddingSourceName(em.source) << ", D=" << em.rows.cols() << ") to " << a.out
      << "\n";
  return kExitOk;
}

struct GenDataArgs {
  std::string taxonomy, train_out, test_out;
  int dim = 64;
  int per_leaf = 125;
  std::vector<double> level_scales;
  std::uint64_t seed = 0;
};

int GenData(const GenDataArgs& a, std::ostream& out) {
  const Taxonomy tax = Taxonomy::Load(a.taxonomy);
  const DatasetPair pair =
      GenerateHierarchicalDataset(tax, a.dim, a.per_leaf, a.level_scales, a.seed);
  WriteDataset(a.train_out, pair.train);
  WriteDataset(a.test_out, pair.test);
  json config{{"dim", a.dim}, {"per_leaf", a.per_leaf}, {"level_scales", a.level_scales},
              {"seed", a.seed}};
  json inputs{{"taxonomy", a.taxonomy}};
  json outputs{{"train", a.train_out}, {"test", a.test_out}};
  WriteManifest(a.train_out, "gen-data", config, inputs, outputs);
  WriteManifest(a.test_out, "gen-data", config, inputs, outputs);
  out << "wrote " << pair.train.size() << " train and " << pair.test.size() << " test items\n";
  return kExitOk;
}

struct TrainArgs {
  std::string data, labels, out, history_out;
  TrainConfig cfg;
  bool seed_given = false;
};

int TrainCmd(const TrainArgs& a, std::ostream& out) {
  const Dataset data = ReadDataset(a.data);
  AugmentedLabelMatrix targets;
  targets.values = ReadMatrix(a.labels);
  const TrainResult result = Train(data, targets, a.cfg);
  SaveModel(a.out, result.params);
  json outputs{{"model", a.out}};
  if (!a.history_out.empty()) {
    std::string csv = "epoch,loss,train_error\n";
    for (std::size_t e = 0; e < result.history.size(); ++e) {
      csv += std::to_string(e + 1) + "," + Num(result.history[e].mean_loss) + "," +
             Num(result.history[e].train_error) + "\n";
    }
    WriteFileAtomic(a.history_out, csv);
    outputs["history"] = a.history_out;
  }
  json config{{"hidden", a.cfg.hidden_sizes},       {"epochs", a.cfg.epochs},
              {"batch_size", a.cfg.batch_size},     {"learning_rate", a.cfg.learning_rate},
              {"momentum", a.cfg.momentum},         {"seed", a.cfg.seed}};
  WriteManifest(a.out, "train", config, json{{"data", a.data}, {"labels", a.labels}}, outputs);
  const auto& last = result.history.back();
  out << "trained " << a.cfg.epochs << " epochs: loss " << Short(last.mean_loss)
      << ", train error " << Short(last.train_error) << "\n";
  return kExitOk;
}

struct EvalArgs {
  std::string model, data, taxonomy, out;
};

int EvalCmd(const EvalArgs& a, std::ostream& out) {
  const ModelParams model = LoadModel(a.model);
  const Dataset data = ReadDataset(a.data);
  const Taxonomy tax = Taxonomy::Load(a.taxonomy);
  CheckModelMatches(model, data, tax);
  const MetricsReport report = FullReport(RankAll(model, data), data.labels, tax);
  WriteFileAtomic(a.out, ReportToCsv(report));
  WriteManifest(a.out, "eval", json::object(),
                json{{"model", a.model}, {"data", a.data}, {"taxonomy", a.taxonomy}},
                json{{"report", a.out}});
  out << "wrote hierarchical metrics for " << data.size() << " items to " << a.out << "\n";
  return kExitOk;
}

int ClusterEvalCmd(const EvalArgs& a, std::ostream& out) {
  const ModelParams model = LoadModel(a.model);
  const Dataset data = ReadDataset(a.data);
  const Taxonomy tax = Taxonomy::Load(a.taxonomy);
  CheckModelMatches(model, data, tax);
  Matrix features;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto f = ExtractFeatures(model, data.features.row(i));
    if (features.empty()) features = Matrix(data.size(), f.size());
    std::copy(f.begin(), f.end(), features.row(i).begin());
  }
  std::string csv = "level,metric,value\n";
  for (int level = 0; level + 1 < tax.num_levels(); ++level) {
    // Relabel to contiguous ids over the nodes actually present.
    std::map<int, int> remap;
    LabeledPointSet set{features, {}};
    for (int label : data.labels) {
      const int node = tax.ancestor_at_level(label, level);
      remap.try_emplace(node, static_cast<int>(remap.size()));
    }
    for (int label : data.labels) set.labels.push_back(remap[tax.ancestor_at_level(label, level)]);
    const std::string lv = std::to_string(level);
    if (remap.size() < 2 || set.labels.size() <= remap.size()) {
      csv += lv + ",silhouette,NA\n" + lv + ",calinski_harabasz,NA\n" + lv + ",s_dbw,NA\n";
      continue;
    }
    csv += lv + ",silhouette," + Num(Silhouette(set)) + "\n";
    csv += lv + ",calinski_harabasz," + Num(CalinskiHarabasz(set)) + "\n";
    csv += lv + ",s_dbw," + Num(SDbw(set)) + "\n";
  }
  WriteFileAtomic(a.out, csv);
  WriteManifest(a.out, "cluster-eval", json::object(),
                json{{"model", a.model}, {"data", a.data}, {"taxonomy", a.taxonomy}},
                json{{"report", a.out}});
  out << "wrote cluster validity scores to " << a.out << "\n";
  return kExitOk;
}

struct ExplainArgs {
  std::string model, data, out, explainer = "integrated_gradients";
  int item = 0;
  int steps = 32;
};

int ExplainCmd(const ExplainArgs& a, std::ostream& out) {
  const ModelParams model = LoadModel(a.model);
  const Dataset data = ReadDataset(a.data);
  if (a.item < 0 || static_cast<std::size_t>(a.item) >= data.size()) {
    throw Error(ErrorCode::kClassOutOfRange, "item " + std::to_string(a.item) + " not in data");
  }
  const Explainer explainer = ParseExplainer(a.explainer);
  ExplainOptions options;
  options.ig_steps = a.steps;
  const auto maps = ExplainAllClasses(explainer, model, data.features.row(a.item), options);
  Matrix m(maps.size(), data.dim());
  for (std::size_t c = 0; c < maps.size(); ++c) {
    std::copy(maps[c].values.begin(), maps[c].values.end(), m.row(c).begin());
  }
  WriteMatrix(a.out, m);
  WriteManifest(a.out, "explain",
                json{{"item", a.item}, {"explainer", a.explainer}, {"steps", a.steps}},
                json{{"model", a.model}, {"data", a.data}}, json{{"heatmaps", a.out}});
  out << "wrote " << maps.size() << " heatmaps for item " << a.item << " to " << a.out << "\n";
  return kExitOk;
}

struct StudyArgs {
  std::string model, data, taxonomy, out;
  std::vector<std::string> explainers{"saliency", "input_x_gradient", "integrated_gradients"};
  std::vector<std::string> metrics{"mean_absolute_difference", "deletion_curve", "spearman",
                                   "progressive_binarisation"};
  int steps = 32;
  int max_items = 0;
};

int StudyCmd(const StudyArgs& a, std::ostream& out) {
  const ModelParams model = LoadModel(a.model);
  const Dataset data = ReadDataset(a.data);
  const Taxonomy tax = Taxonomy::Load(a.taxonomy);
  CheckModelMatches(model, data, tax);
  StudyConfig cfg;
  cfg.explainers.clear();
  for (const auto& e : a.explainers) cfg.explainers.push_back(ParseExplainer(e));
  cfg.metrics.clear();
  for (const auto& m : a.metrics) cfg.metrics.push_back(ParseHeatmapMetric(m));
  cfg.explain.ig_steps = a.steps;
  cfg.max_items = a.max_items;
  const auto records = DistanceVsLcaStudy(model, data, tax, cfg);
  WriteFileAtomic(a.out, StudyToCsv(records));
  WriteManifest(a.out, "study",
                json{{"explainers", a.explainers},
                     {"metrics", a.metrics},
                     {"steps", a.steps},
                     {"max_items", a.max_items}},
                json{{"model", a.model}, {"data", a.data}, {"taxonomy", a.taxonomy}},
                json{{"records", a.out}});
  out << "wrote " << records.size() << " distance records to " << a.out << "\n";
  return kExitOk;
}

struct ReportArgs {
  std::vector<std::string> runs;  // name=path
  std::string study, out;
};

int ReportCmd(const ReportArgs& a, std::ostream& out) {
  std::string csv;
  json inputs;
  if (!a.study.empty()) {
    // explainer, metric, lca -> values
    std::map<std::tuple<std::string, std::string, int>, std::vector<double>> groups;
    const auto lines = ReadLines(a.study);
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const auto f = SplitCsvLine(lines[i]);
      if (f.size() != 6) {
        throw Error(ErrorCode::kRaggedLine, a.study + " line " + std::to_string(i + 1));
      }
      groups[{f[3], f[4], std::stoi(f[2])}].push_back(std::stod(f[5]));
    }
    csv = "explainer,metric,lca,count,mean,std\n";
    for (const auto& [key, values] : groups) {
      const Summary s = Summarize(values);
      csv += std::get<0>(key) + "," + std::get<1>(key) + "," + std::to_string(std::get<2>(key)) +
             "," + std::to_string(s.n) + "," + Num(s.mean) + "," +
             (s.n > 1 ? Num(s.stddev) : "NA") + "\n";
    }
    inputs["study"] = a.study;
  } else {
    if (a.runs.empty()) throw CLI::ValidationError("report needs --run NAME=PATH or --study");
    // (level, metric) keeps first-seen order; models in first-seen order.
    std::vector<std::pair<std::string, std::string>> rows;
    std::vector<std::string> models;
    std::map<std::tuple<std::string, std::string, std::string>, std::vector<double>> values;
    for (const auto& entry : a.runs) {
      const auto eq = entry.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw CLI::ValidationError("--run expects NAME=PATH, got '" + entry + "'");
      }
      const std::string name = entry.substr(0, eq);
      const std::string path = entry.substr(eq + 1);
      if (std::find(models.begin(), models.end(), name) == models.end()) models.push_back(name);
      const auto lines = ReadLines(path);
      for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto f = SplitCsvLine(lines[i]);
        if (f.size() != 3) {
          throw Error(ErrorCode::kRaggedLine, path + " line " + std::to_string(i + 1));
        }
        const std::pair<std::string, std::string> row{f[0], f[1]};
        if (std::find(rows.begin(), rows.end(), row) == rows.end()) rows.push_back(row);
        auto& bucket = values[{f[0], f[1], name}];
        if (f[2] != "NA") bucket.push_back(std::stod(f[2]));
      }
      inputs[name].push_back(path);
    }
    csv = "level,metric,model,runs,mean,std\n";
    for (const auto& [level, metric] : rows) {
      for (const auto& model : models) {
        const auto it = values.find({level, metric, model});
        if (it == values.end()) continue;
        const Summary s = Summarize(it->second);
        csv += level + "," + metric + "," + model + "," + std::to_string(s.n) + "," +
               (s.n ? Num(s.mean) : "NA") + "," + (s.n > 1 ? Num(s.stddev) : "NA") + "\n";
      }
    }
  }
  WriteFileAtomic(a.out, csv);
  WriteManifest(a.out, "report", json::object(), inputs, json{{"summary", a.out}});
  out << "wrote summary to " << a.out << "\n";
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Semantically-augmented label toolkit", "semlabels"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  BuildLabelsArgs bl;
  auto* build = app.add_subcommand("build-labels", "Build an augmented label matrix");
  build->add_option("--taxonomy", bl.taxonomy, "Taxonomy edge file (child<TAB>parent)");
  build->add_option("--vectors", bl.vectors, "Word vector file (token v1 ... vD)");
  build->add_option("--classes", bl.classes, "Class names, one per line (with --vectors)");
  build->add_option("--beta", bl.beta,
                    "Weight of the one-hot part in [0,1] (default 0.4 taxonomy, 0.7 vectors)")
      ->check(CLI::Range(0.0, 1.0));
  build->add_flag("--include-root", bl.include_root,
                  "Keep the root segment in the taxonomy embedding");
  build->add_option("--out", bl.out, "Label matrix output (.csv or binary)")->required();
  build->add_option("--aux-out", bl.aux_out, "Also write the auxiliary matrix here");

  GenDataArgs gd;
  auto* gen = app.add_subcommand("gen-data", "Generate a hierarchy-respecting dataset");
  gen->add_option("--taxonomy", gd.taxonomy, "Taxonomy edge file")->required();
  gen->add_option("--dim", gd.dim, "Feature dimension")->capture_default_str();
  gen->add_option("--per-leaf", gd.per_leaf, "Samples per class before the 80/20 split")
      ->capture_default_str();
  gen->add_option("--level-scales", gd.level_scales,
                  "Offset scale per non-root level, leaves first (comma separated)")
      ->delimiter(',')
      ->required();
  gen->add_option("--seed", gd.seed, "Random seed")->required();
  gen->add_option("--train-out", gd.train_out, "Train split output")->required();
  gen->add_option("--test-out", gd.test_out, "Test split output")->required();

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Train a classifier on soft targets");
  train->add_option("--data", tr.data, "Training dataset")->required();
  train->add_option("--labels", tr.labels, "Target matrix from build-labels")->required();
  train->add_option("--hidden", tr.cfg.hidden_sizes, "Hidden layer widths (comma separated)")
      ->delimiter(',')
      ->capture_default_str();
  train->add_option("--epochs", tr.cfg.epochs, "Epochs")->capture_default_str();
  train->add_option("--batch-size", tr.cfg.batch_size, "Mini-batch size")->capture_default_str();
  train->add_option("--lr", tr.cfg.learning_rate, "Learning rate")->capture_default_str();
  train->add_option("--momentum", tr.cfg.momentum, "Momentum")->capture_default_str();
  train->add_option("--seed", tr.cfg.seed, "Random seed")->required();
  train->add_option("--out", tr.out, "Model checkpoint output")->required();
  train->add_option("--history-out", tr.history_out, "Per-epoch loss/error CSV");

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Hierarchical error metrics");
  eval->add_option("--model", ev.model, "Model checkpoint")->required();
  eval->add_option("--data", ev.data, "Evaluation dataset")->required();
  eval->add_option("--taxonomy", ev.taxonomy, "Taxonomy edge file")->required();
  eval->add_option("--out", ev.out, "Report CSV (level,metric,value)")->required();

  EvalArgs ce;
  auto* cluster = app.add_subcommand("cluster-eval", "Cluster validity of extracted features");
  cluster->add_option("--model", ce.model, "Model checkpoint")->required();
  cluster->add_option("--data", ce.data, "Evaluation dataset")->required();
  cluster->add_option("--taxonomy", ce.taxonomy, "Taxonomy edge file")->required();
  cluster->add_option("--out", ce.out, "Report CSV (level,metric,value)")->required();

  ExplainArgs ex;
  auto* explain = app.add_subcommand("explain", "Heatmaps of one item for every class");
  explain->add_option("--model", ex.model, "Model checkpoint")->required();
  explain->add_option("--data", ex.data, "Dataset")->required();
  explain->add_option("--item", ex.item, "Item index")->capture_default_str();
  explain->add_option("--explainer", ex.explainer,
                      "saliency | input_x_gradient | integrated_gradients")
      ->capture_default_str();
  explain->add_option("--steps", ex.steps, "Integrated gradients steps")->capture_default_str();
  explain->add_option("--out", ex.out, "C x d heatmap matrix output")->required();

  StudyArgs st;
  auto* study = app.add_subcommand("study", "Heatmap distance versus LCA height");
  study->add_option("--model", st.model, "Model checkpoint")->required();
  study->add_option("--data", st.data, "Dataset")->required();
  study->add_option("--taxonomy", st.taxonomy, "Taxonomy edge file")->required();
  study->add_option("--explainers", st.explainers, "Explainers (comma separated)")
      ->delimiter(',')
      ->capture_default_str();
  study->add_option("--metrics", st.metrics, "Heatmap metrics (comma separated)")
      ->delimiter(',')
      ->capture_default_str();
  study->add_option("--steps", st.steps, "Integrated gradients steps")->capture_default_str();
  study->add_option("--max-items", st.max_items, "Use only the first N items (0 = all)")
      ->capture_default_str();
  study->add_option("--out", st.out, "Records CSV")->required();

  ReportArgs rp;
  auto* report = app.add_subcommand("report", "Summarise per-seed CSVs");
  report->add_option("--run", rp.runs, "NAME=PATH of an eval/cluster-eval CSV (repeatable)");
  report->add_option("--study", rp.study, "Study CSV to aggregate by explainer/metric/lca");
  report->add_option("--out", rp.out, "Summary CSV")->required();

  std::vector<std::string> argv_tail(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(argv_tail.begin(), argv_tail.end());
  try {
    app.parse(argv_tail);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*build) return BuildLabels(bl, out, err);
    if (*gen) return GenData(gd, out);
    if (*train) return TrainCmd(tr, out);
    if (*eval) return EvalCmd(ev, out);
    if (*cluster) return ClusterEvalCmd(ce, out);
    if (*explain) return ExplainCmd(ex, out);
    if (*study) return StudyCmd(st, out);
    if (*report) return ReportCmd(rp, out);
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::kNumericFailure ? kExitNumericFailure : kExitDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  }
  return kExitUsage;
}

}  // namespace semlabels
