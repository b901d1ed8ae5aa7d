// Copyright 2026 The HSC Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "commands.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace hsc::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& why) {
  throw ValidationError("config: " + why);
}

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.contains(key)) config_error("unknown key '" + key + "' in " + where);
  }
}

int level_key(const std::string& key) {
  try {
    std::size_t used = 0;
    const int level = std::stoi(key, &used);
    if (used == key.size()) return level;
  } catch (const std::exception&) {
  }
  config_error("level key '" + key + "' is not an integer");
}

SearchMode parse_mode(const std::string& s) {
  if (s == "flat") return SearchMode::kFlat;
  if (s == "group") return SearchMode::kGroup;
  throw PreconditionError("mode must be 'flat' or 'group', got '" + s + "'");
}

void write_file(const fs::path& path, const std::string& content,
                std::ostream& log) {
  io::write_atomic(path, content);
  log << "wrote " << path.string() << '\n';
}

// ---------------------------------------------------------------------------
// Loading

struct Workspace {
  Taxonomy tax;
  std::vector<EnterpriseRecord> enterprises;
  TruthSets truths;
  std::optional<PreprocessConfig> pre;
};

Workspace load_workspace(const RunConfig& c) {
  if (c.taxonomy.empty()) config_error("'taxonomy' is required");
  if (c.enterprises.empty()) config_error("'enterprises' is required");
  Workspace ws;
  {
    auto in = io::open_input(c.taxonomy);
    ws.tax = parse_taxonomy(in);
  }
  {
    auto in = io::open_input(c.enterprises);
    ws.enterprises = load_enterprises(in);
  }
  check_labels(ws.enterprises, ws.tax);
  ws.truths = truth_sets(ws.enterprises);
  if (!c.stopwords.empty()) {
    auto in = io::open_input(c.stopwords);
    ws.pre = PreprocessConfig{load_stopwords(in)};
  }
  return ws;
}

bool uses_files(const RunConfig& c) { return !c.class_embeddings.empty(); }

PreparedEmbeddings prepare(const RunConfig& c, const Workspace& ws,
                           bool preprocess) {
  if (uses_files(c)) {
    if (c.query_embeddings.empty()) {
      config_error("'embeddings' needs a 'queries' file");
    }
    const auto queries = load_embeddings(c.query_embeddings, "queries");
    PreparedEmbeddings out;
    for (int level : ws.tax.levels()) {
      const auto path = c.class_embeddings.find(level);
      if (path == c.class_embeddings.end()) {
        config_error("no class embeddings for level " + std::to_string(level));
      }
      out.emplace(level,
                  LevelSpace{load_embeddings(path->second, level_namespace(level)),
                             queries});
    }
    return out;
  }
  const PreprocessConfig* pre =
      preprocess && ws.pre ? &*ws.pre : nullptr;
  if (c.encoder.type == "hashing") {
    const HashingEncoder encoder(c.encoder.dim);
    return encode_corpus(
        ws.tax, ws.enterprises,
        [&](std::span<const std::string> t) { return encoder.encode(t); }, pre);
  }
  HttpEmbedClient client(c.encoder.url, c.encoder.batch_size);
  return encode_corpus(
      ws.tax, ws.enterprises,
      [&](std::span<const std::string> t) { return client.encode(t); }, pre);
}

std::map<int, Adapter> load_adapters(const RunConfig& c,
                                     const PreparedEmbeddings& spaces) {
  std::map<int, Adapter> out;
  for (const auto& [level, space] : spaces) {
    fs::path path;
    if (const auto it = c.adapters.find(level); it != c.adapters.end()) {
      path = it->second;
    } else if (!c.adapter_dir.empty()) {
      path = c.adapter_dir / ("adapter_" + level_namespace(level) + ".adp");
      if (!fs::exists(path)) continue;
    } else {
      continue;
    }
    auto adapter = load_adapter(path);
    if (adapter.dim() != space.documents.dim()) {
      throw ValidationError(path.string() + ": adapter dim " +
                            std::to_string(adapter.dim()) + " but level " +
                            std::to_string(level) + " vectors have dim " +
                            std::to_string(space.documents.dim()));
    }
    out.emplace(level, std::move(adapter));
  }
  return out;
}

std::vector<std::string> labelled_ids(const Workspace& ws) {
  std::vector<std::string> ids;
  for (const auto& e : ws.enterprises) {
    if (ws.truths.contains(e.id)) ids.push_back(e.id);
  }
  return ids;
}

SplitAssignment make_split(const RunConfig& c, const Workspace& ws) {
  const auto ids = labelled_ids(ws);
  if (ids.empty()) throw ValidationError("no labelled enterprises to split");
  return split(ids, c.split, derive_seed(c.seed, "split"));
}

std::vector<std::string> all_ids(const Workspace& ws) {
  std::vector<std::string> ids;
  for (const auto& e : ws.enterprises) ids.push_back(e.id);
  return ids;
}

TrainConfig seeded(const RunConfig& c) {
  TrainConfig t = c.train;
  t.seed = c.seed;
  return t;
}

std::string split_csv(const SplitAssignment& s) {
  std::string out = "id,partition\n";
  for (const auto& [id, part] : s.assignment) {
    out += id + ',' + std::string(to_string(part)) + '\n';
  }
  return out;
}

std::string ids_list(const std::vector<int>& levels) {
  std::string out;
  for (int l : levels) out += (out.empty() ? "" : ",") + std::to_string(l);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    config_error(path.string() + ": " + e.what());
  }
  if (!j.is_object()) config_error("top level must be an object");
  check_keys(j, "config",
             {"taxonomy", "enterprises", "intensities", "stopwords",
              "case_table", "stated_mape", "preprocess", "encoder",
              "embeddings", "adapters", "split", "beam", "train", "eval",
              "seed", "out", "mode", "threads", "timing"});

  const fs::path base = path.parent_path();
  auto resolve = [&](const json& v) {
    const fs::path p = v.get<std::string>();
    return p.is_absolute() || base.empty() ? p : base / p;
  };

  RunConfig c;
  try {
    if (j.contains("taxonomy")) c.taxonomy = resolve(j["taxonomy"]);
    if (j.contains("enterprises")) c.enterprises = resolve(j["enterprises"]);
    if (j.contains("intensities")) c.intensities = resolve(j["intensities"]);
    if (j.contains("stopwords")) c.stopwords = resolve(j["stopwords"]);
    if (j.contains("case_table")) c.case_table = resolve(j["case_table"]);
    if (j.contains("stated_mape")) c.stated_mape = j["stated_mape"].get<double>();
    c.preprocess = j.value("preprocess", c.preprocess);

    if (j.contains("encoder")) {
      const auto& e = j["encoder"];
      check_keys(e, "encoder", {"type", "dim", "url", "batch_size"});
      c.encoder.type = e.value("type", c.encoder.type);
      c.encoder.dim = e.value("dim", c.encoder.dim);
      c.encoder.url = e.value("url", c.encoder.url);
      c.encoder.batch_size = e.value("batch_size", c.encoder.batch_size);
      if (c.encoder.type != "hashing" && c.encoder.type != "http") {
        config_error("encoder type must be 'hashing' or 'http'");
      }
      if (c.encoder.type == "http" && c.encoder.url.empty()) {
        config_error("http encoder needs 'url'");
      }
    }
    if (j.contains("embeddings")) {
      const auto& e = j["embeddings"];
      check_keys(e, "embeddings", {"classes", "queries"});
      for (const auto& [key, value] : e.at("classes").items()) {
        c.class_embeddings[level_key(key)] = resolve(value);
      }
      if (e.contains("queries")) c.query_embeddings = resolve(e["queries"]);
    }
    if (j.contains("adapters")) {
      const auto& a = j["adapters"];
      if (a.is_string()) {
        c.adapter_dir = resolve(a);
      } else {
        for (const auto& [key, value] : a.items()) {
          c.adapters[level_key(key)] = resolve(value);
        }
      }
    }
    if (j.contains("split")) {
      const auto& s = j["split"];
      check_keys(s, "split", {"train", "validation", "test"});
      c.split.train = s.value("train", c.split.train);
      c.split.validation = s.value("validation", c.split.validation);
      c.split.test = s.value("test", c.split.test);
    }
    if (j.contains("beam")) {
      const auto& b = j["beam"];
      check_keys(b, "beam", {"k", "final_list_size"});
      c.k = b.value("k", c.k);
      c.final_list_size = b.value("final_list_size", c.final_list_size);
    }
    if (j.contains("train")) {
      const auto& t = j["train"];
      check_keys(t, "train",
                 {"learning_rate", "epochs", "batch_size", "scale", "init_noise"});
      c.train.learning_rate = t.value("learning_rate", c.train.learning_rate);
      c.train.epochs = t.value("epochs", c.train.epochs);
      c.train.batch_size = t.value("batch_size", c.train.batch_size);
      c.train.scale = t.value("scale", c.train.scale);
      c.train.init_noise = t.value("init_noise", c.train.init_noise);
    }
    if (j.contains("eval")) {
      const auto& e = j["eval"];
      check_keys(e, "eval", {"ks"});
      if (e.contains("ks")) c.ks = e["ks"].get<std::vector<std::size_t>>();
    }
    c.seed = j.value("seed", c.seed);
    if (j.contains("out")) c.out = resolve(j["out"]);
    if (j.contains("mode")) c.mode = parse_mode(j["mode"].get<std::string>());
    c.threads = j.value("threads", c.threads);
    c.timing = j.value("timing", c.timing);
  } catch (const json::exception& e) {
    config_error(path.string() + ": " + e.what());
  }
  return c;
}

void apply_overrides(RunConfig& c, const Overrides& o) {
  if (o.seed) c.seed = *o.seed;
  if (o.out) c.out = *o.out;
  if (o.mode) c.mode = parse_mode(*o.mode);
  if (o.k) c.k = *o.k;
  if (o.topn) c.final_list_size = *o.topn;
  if (o.threads) c.threads = *o.threads;
  if (o.no_timing) c.timing = false;
  if (c.k < 1) throw PreconditionError("--k must be >= 1");
  if (c.final_list_size < 1) throw PreconditionError("--topn must be >= 1");
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_validate(const RunConfig& c, std::ostream& log) {
  const auto ws = load_workspace(c);
  log << "taxonomy: " << ws.tax.size() << " codes, levels "
      << ids_list(ws.tax.levels()) << ", " << ws.tax.leaves().size()
      << " leaves\n";
  log << "enterprises: " << ws.enterprises.size() << " records, "
      << ws.truths.size() << " labelled\n";
  if (ws.pre) log << "stopwords: " << ws.pre->stopwords.size() << '\n';
  if (!c.intensities.empty()) {
    auto in = io::open_input(c.intensities);
    log << "intensities: " << load_intensities(in).size() << " rows\n";
  }
  if (!c.case_table.empty()) {
    auto in = io::open_input(c.case_table);
    log << "case table: " << load_case_table(in).size() << " rows\n";
  }
  if (uses_files(c)) {
    const auto spaces = prepare(c, ws, false);
    const auto adapters = load_adapters(c, spaces);
    const auto stores = document_stores(spaces);
    const HierarchicalIndex index(
        ws.tax, stores,
        make_beam_config(spaces, adapters, c.k, c.final_list_size));
    for (const auto& e : ws.enterprises) {
      (void)spaces.begin()->second.queries.at(e.id);
    }
    log << "embeddings: " << stores.size() << " class namespaces, "
        << adapters.size() << " adapters\n";
  } else {
    log << "encoder: " << c.encoder.type
        << (c.encoder.type == "http" ? " " + c.encoder.url : "") << '\n';
  }
  log << "ok\n";
  return 0;
}

int cmd_train(const RunConfig& c, std::ostream& log) {
  const auto ws = load_workspace(c);
  const auto spaces = prepare(c, ws, c.preprocess);
  const auto parts = make_split(c, ws);
  const auto train_ids = parts.ids_in(Partition::kTrain);
  const auto results =
      train_level_adapters(ws.tax, spaces, train_ids, ws.truths, seeded(c));

  std::string history = "level,epoch,loss\n";
  for (const auto& [level, r] : results) {
    for (std::size_t e = 0; e < r.loss_history.size(); ++e) {
      history += std::to_string(level) + ',' + std::to_string(e + 1) + ',' +
                 io::format_double(r.loss_history[e]) + '\n';
    }
    const auto path = c.out / ("adapter_" + level_namespace(level) + ".adp");
    io::write_atomic(path, encode_adapter(r.adapter));
    log << "level " << level << ": loss "
        << io::format_fixed(r.loss_history.front(), 6) << " -> "
        << io::format_fixed(r.loss_history.back(), 6) << " over "
        << r.loss_history.size() << " epochs";
    if (r.dropped_duplicate_docs > 0) {
      log << ", " << r.dropped_duplicate_docs << " duplicate-document pairs dropped";
    }
    log << ", wrote " << path.string() << '\n';
  }
  write_file(c.out / "loss_history.csv", history, log);
  write_file(c.out / "split.csv", split_csv(parts), log);
  return 0;
}

int cmd_classify(const RunConfig& c, std::ostream& log) {
  const auto ws = load_workspace(c);
  const auto spaces = prepare(c, ws, c.preprocess);
  const auto adapters = load_adapters(c, spaces);
  const auto stores = document_stores(spaces);
  const HierarchicalIndex index(
      ws.tax, stores, make_beam_config(spaces, adapters, c.k, c.final_list_size));
  const auto ids = all_ids(ws);
  const auto queries = make_queries(spaces, ids);
  const auto batch = classify_batch(queries, index, c.mode, c.threads);
  write_file(c.out / "results.jsonl", results_jsonl(batch.results), log);
  log << batch.results.size() << " classified, "
      << batch.total_similarity_count << " similarity evaluations\n";
  for (const auto& e : batch.errors) {
    log << "failed " << e.id << ": " << e.message << '\n';
  }
  return batch.errors.empty() ? 0 : 2;
}

int cmd_eval(const RunConfig& c, bool ablation, std::ostream& log) {
  const auto ws = load_workspace(c);
  const auto spaces = prepare(c, ws, c.preprocess);
  const auto adapters = load_adapters(c, spaces);
  const auto stores = document_stores(spaces);
  const auto parts = make_split(c, ws);
  const auto test_ids = parts.ids_in(Partition::kTest);
  if (test_ids.empty()) throw ValidationError("test partition is empty");

  const EvalDataset data{&ws.tax, &stores, make_queries(spaces, test_ids),
                         ws.truths};
  const auto beam = make_beam_config(spaces, adapters, c.k, c.final_list_size);
  const std::vector<EvalRow> main_rows{
      {"flat", std::nullopt, run_eval(data, beam, SearchMode::kFlat)},
      {"group", c.k, run_eval(data, beam, SearchMode::kGroup)}};
  write_file(c.out / "eval.csv", eval_csv(main_rows, c.timing), log);
  write_file(c.out / "k_sweep.csv", eval_csv(k_sweep(data, c.ks, beam), c.timing),
             log);
  for (const auto& r : main_rows) {
    log << r.config << ": Acc@1 " << io::format_fixed(r.outcome.acc_at.at(1), 2)
        << " Acc@10 " << io::format_fixed(r.outcome.acc_at.at(10), 2)
        << " mean sims "
        << io::format_fixed(r.outcome.mean_similarity_count, 1) << '\n';
  }

  if (ablation) {
    AblationInputs in;
    in.taxonomy = &ws.tax;
    in.prepare = [&](bool pre) { return prepare(c, ws, pre); };
    in.can_preprocess = ws.pre.has_value() && !uses_files(c);
    in.train_ids = parts.ids_in(Partition::kTrain);
    in.test_ids = test_ids;
    in.truths = ws.truths;
    in.train = seeded(c);
    in.k = c.k;
    in.final_list_size = c.final_list_size;
    write_file(c.out / "ablation.csv",
               eval_csv(ablation_run(in, AblationStages{}), c.timing), log);
  }
  return 0;
}

int cmd_estimate(const RunConfig& c, const EstimateOptions& o,
                 std::ostream& log) {
  json summary;
  if (!c.enterprises.empty()) {
    if (c.intensities.empty()) config_error("'intensities' is required");
    const auto ws = load_workspace(c);
    auto in = io::open_input(c.intensities);
    const auto table = load_intensities(in);

    std::map<std::string, std::string> codes;
    if (o.codes_from == "labels") {
      for (const auto& e : ws.enterprises) {
        if (!e.naics_codes.empty()) codes[e.id] = e.naics_codes.front();
      }
    } else if (o.codes_from == "classify") {
      const auto spaces = prepare(c, ws, c.preprocess);
      const auto adapters = load_adapters(c, spaces);
      const auto stores = document_stores(spaces);
      const HierarchicalIndex index(
          ws.tax, stores,
          make_beam_config(spaces, adapters, c.k, c.final_list_size));
      const auto ids = all_ids(ws);
      const auto batch = classify_batch(make_queries(spaces, ids), index,
                                        c.mode, c.threads);
      for (const auto& r : batch.results) codes[r.id] = r.best();
      for (const auto& e : batch.errors) {
        log << "failed " << e.id << ": " << e.message << '\n';
      }
    } else {
      throw PreconditionError("--codes must be 'classify' or 'labels'");
    }

    const auto report = build_emission_report(ws.enterprises, codes, table, &ws.tax);
    write_file(c.out / "emission_report.csv", emission_report_csv(report), log);
    log << report.records.size() << " estimated, " << report.fallbacks
        << " via ancestor intensity, " << report.skipped.size() << " skipped\n";
    for (const auto& s : report.skipped) {
      log << "skipped " << s.id << ": " << s.message << '\n';
    }
    if (report.mape) log << "MAPE " << io::format_fixed(*report.mape, 4) << '\n';
    summary["estimated"] = report.records.size();
    summary["fallbacks"] = report.fallbacks;
    summary["skipped"] = report.skipped.size();
    summary["mape"] = report.mape ? json(*report.mape) : json(nullptr);
  }

  fs::path audit_path = c.case_table;
  if (o.audit) audit_path = *o.audit;
  if (!audit_path.empty()) {
    auto in = io::open_input(audit_path);
    const auto rows = load_case_table(in);
    const auto stated = o.stated_mape ? o.stated_mape : c.stated_mape;
    const auto audit = audit_case_table(rows, stated);
    write_file(c.out / "case_audit.csv", case_audit_csv(audit), log);
    log << "case table: mean of printed APE column "
        << io::format_fixed(audit.mean_printed_ape, 4)
        << ", MAPE from printed estimates "
        << io::format_fixed(audit.mape_from_estimates, 4)
        << ", MAPE from revenue x intensity "
        << io::format_fixed(audit.mape_from_products, 4) << '\n';
    if (stated) {
      log << "stated MAPE " << io::format_fixed(*stated, 2)
          << (audit.stated_mape_diverges ? " DIVERGES from" : " matches")
          << " the printed column mean\n";
    }
    json a;
    a["mean_printed_ape"] = audit.mean_printed_ape;
    a["mape_from_estimates"] = audit.mape_from_estimates;
    a["mape_from_products"] = audit.mape_from_products;
    a["stated_mape"] = stated ? json(*stated) : json(nullptr);
    a["stated_mape_diverges"] = audit.stated_mape_diverges;
    summary["case_audit"] = a;
  }
  if (summary.is_null()) config_error("nothing to estimate: no enterprises or case table");
  write_file(c.out / "estimate_summary.json", summary.dump(2) + "\n", log);
  return 0;
}

int cmd_theorem_check(std::size_t k, const fs::path& out, std::ostream& log) {
  const auto report = theory::theorem1_check(theory::standard_grid(), k);
  std::string csv = "b,d,p,H_G,H_D,cost_hier,cost_flat,violation\n";
  double worst = -1e300;
  for (const auto& cell : report.cells) {
    std::string ps;
    for (double p : cell.model.p) {
      ps += (ps.empty() ? "" : ";") + io::format_double(p);
    }
    csv += std::to_string(cell.model.b) + ',' + std::to_string(cell.model.d) +
           ',' + ps + ',' + io::format_double(cell.h_group) + ',' +
           io::format_double(cell.h_flat) + ',' +
           std::to_string(cell.cost_hier) + ',' +
           std::to_string(cell.cost_flat) + ',' +
           (cell.violation ? "1" : "0") + '\n';
    worst = std::max(worst, cell.h_group - cell.h_flat);
  }
  write_file(out / "theory.csv", csv, log);
  log << report.cells.size() << " cells, " << report.violations.size()
      << " violations, max(H_G - H_D) = " << io::format_double(worst) << '\n';
  return 0;
}

}  // namespace hsc::cli
