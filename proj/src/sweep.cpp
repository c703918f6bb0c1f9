#include "sfa/sweep.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "sfa/annoparse.hpp"
#include "sfa/corpus_io.hpp"
#include "sfa/evaluation.hpp"

namespace sfa {

namespace fs = std::filesystem;

namespace {

std::string format_ratio(double r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", r);
  return buf;
}

std::string format_f1(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string row_key(const SweepRow& r) {
  return r.budget.str() + "|" + format_ratio(r.ratio) + "|" +
         to_string(r.variant) + "|" + std::to_string(r.seed);
}

std::vector<SweepRow> load_rows(const std::string& path) {
  std::vector<SweepRow> rows;
  std::ifstream in(path);
  if (!in) return rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad sweep checkpoint: ") + e.what(), line_no);
    }
    SweepRow r;
    r.budget = Money::parse(j.at("budget").get<std::string>());
    r.ratio = j.at("ratio").get<double>();
    r.variant = dataset_variant_from_string(j.at("variant").get<std::string>());
    r.seed = j.at("seed").get<std::uint64_t>();
    r.feasible = j.at("feasible").get<bool>();
    r.trigger_f1 = j.at("trigger_f1").get<double>();
    r.argument_f1 = j.at("argument_f1").get<double>();
    rows.push_back(std::move(r));
  }
  return rows;
}

void append_row(const std::string& path, const SweepRow& r) {
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw IoError("cannot append sweep checkpoint: " + path);
  nlohmann::ordered_json j;
  j["budget"] = r.budget.str();
  j["ratio"] = r.ratio;
  j["variant"] = to_string(r.variant);
  j["seed"] = r.seed;
  j["feasible"] = r.feasible;
  j["trigger_f1"] = r.trigger_f1;
  j["argument_f1"] = r.argument_f1;
  out << j.dump() << '\n';
}

std::vector<DialogueSession> bare_sessions(const std::vector<AnnotatedSession>& v) {
  std::vector<DialogueSession> out;
  out.reserve(v.size());
  for (const auto& a : v) out.push_back(a.session);
  return out;
}

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double stddev_of(const std::vector<double>& v, double mean, bool sample) {
  const std::size_t denom_n = sample ? v.size() - 1 : v.size();
  if (v.size() < 2) return 0.0;
  double s = 0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(denom_n));
}

}  // namespace

void run_trainer(const std::string& command_template, const std::string& train,
                 const std::string& valid, const std::string& test,
                 const std::string& pred, const std::string& pretrain) {
  std::string cmd = command_template;
  auto substitute = [&](const std::string& key, const std::string& value) {
    for (std::size_t pos; (pos = cmd.find(key)) != std::string::npos;)
      cmd.replace(pos, key.size(), value);
  };
  substitute("{train}", train);
  substitute("{valid}", valid);
  substitute("{test}", test);
  substitute("{pred}", pred);
  substitute("{pretrain}", pretrain);

  const std::string stderr_path = pred + ".stderr";
  const std::string full = cmd + " 2> " + stderr_path;
  const int rc = std::system(full.c_str());
  if (rc != 0) {
    std::string captured;
    std::ifstream err(stderr_path);
    if (err) {
      std::ostringstream buf;
      buf << err.rdbuf();
      captured = buf.str();
    }
    throw TrainerFailed("trainer exited with status " + std::to_string(rc) +
                        ": " + cmd + (captured.empty() ? "" : "\n" + captured));
  }
}

SweepResult run_sweep(const Config& config, DatasetVariant arm,
                      const SweepInputs& inputs, const std::string& out_dir,
                      long max_rows) {
  if (config.trainer_command.empty())
    throw Error("run_sweep: no trainer command configured");
  if (inputs.test.empty()) throw Error("run_sweep: empty test set");

  fs::create_directories(out_dir);
  const fs::path work = fs::path(out_dir) / "work";
  fs::create_directories(work);
  const std::string rows_path = (fs::path(out_dir) / "rows.jsonl").string();

  const auto tokenizer = config.make_tokenizer();

  // Feasibility against the pools actually provided.
  PoolSizes actual;
  actual.human_human = static_cast<long>(inputs.hh_pool.sessions.size());
  actual.human_pseudo = static_cast<long>(inputs.pseudo_pool.sessions.size());
  actual.pseudo_pseudo = static_cast<long>(inputs.pseudo_pool.sessions.size());
  const auto& budgets =
      arm == DatasetVariant::HumanPseudo ? config.hp_budgets : config.pp_budgets;
  const auto plans = plan_grid(budgets, config.ratios, arm, config.cost_model, actual);

  std::map<std::string, SweepRow> done;
  for (const auto& r : load_rows(rows_path)) done[row_key(r)] = r;

  const std::string valid_path = (work / "valid.tsv").string();
  const std::string test_path = (work / "test.tsv").string();
  const std::string pretrain_path = (work / "pretrain.tsv").string();
  write_records_tsv(inputs.valid, *tokenizer, valid_path);
  write_records_tsv(inputs.test, *tokenizer, test_path);
  if (config.augmentation_mode)
    write_records_tsv(inputs.pseudo_pool.sessions, *tokenizer, pretrain_path);

  Dataset gold;
  gold.variant = DatasetVariant::Mixed;
  gold.sessions = inputs.test;
  const auto test_sessions = bare_sessions(inputs.test);

  SweepResult result;
  long computed = 0;
  for (const auto& plan : plans) {
    for (const auto seed : config.seeds) {
      SweepRow row;
      row.budget = plan.budget;
      row.ratio = plan.hh_ratio;
      row.variant = arm;
      row.seed = seed;
      row.feasible = plan.feasible;

      const auto it = done.find(row_key(row));
      if (it != done.end()) {
        result.rows.push_back(it->second);
        continue;
      }
      if (max_rows >= 0 && computed >= max_rows) return result;
      ++computed;

      if (plan.feasible) {
        const Dataset mixture =
            assemble_mixture(plan, inputs.hh_pool, inputs.pseudo_pool, seed);
        const std::string train_path = (work / "train.tsv").string();
        const std::string pred_path = (work / "pred.tsv").string();
        write_records_tsv(mixture.sessions, *tokenizer, train_path);
        run_trainer(config.trainer_command, train_path, valid_path, test_path,
                    pred_path, config.augmentation_mode ? pretrain_path : "");

        const auto pred_rows = read_records_tsv(pred_path);
        Dataset pred;
        pred.variant = DatasetVariant::Mixed;
        pred.sessions =
            from_sequence_records(pred_rows, test_sessions, *tokenizer);
        const EvalReport report = evaluate(gold, pred, config.evaluation);
        row.trigger_f1 = report.trigger_weighted_f1;
        row.argument_f1 = report.argument_weighted_f1;
      }
      append_row(rows_path, row);
      result.rows.push_back(row);
    }
  }

  // Aggregate over seeds, grid order.
  std::size_t idx = 0;
  for (const auto& plan : plans) {
    SweepAggregate agg;
    agg.budget = plan.budget;
    agg.ratio = plan.hh_ratio;
    agg.variant = arm;
    agg.feasible = plan.feasible;
    std::vector<double> trig, arg;
    for (std::size_t s = 0; s < config.seeds.size(); ++s, ++idx) {
      const SweepRow& row = result.rows[idx];
      if (!row.feasible) continue;
      trig.push_back(row.trigger_f1);
      arg.push_back(row.argument_f1);
    }
    agg.n_seeds = static_cast<int>(trig.size());
    if (agg.feasible) {
      agg.mean_trigger_f1 = mean_of(trig);
      agg.std_trigger_f1 = stddev_of(trig, agg.mean_trigger_f1, config.sweep_sample_stddev);
      agg.mean_argument_f1 = mean_of(arg);
      agg.std_argument_f1 = stddev_of(arg, agg.mean_argument_f1, config.sweep_sample_stddev);
    }
    result.aggregates.push_back(agg);
  }

  // Optimal-ratio markers per budget, feasible aggregates only.
  for (std::size_t lo = 0; lo < result.aggregates.size();) {
    std::size_t hi = lo;
    while (hi < result.aggregates.size() &&
           result.aggregates[hi].budget == result.aggregates[lo].budget)
      ++hi;
    std::ptrdiff_t best_t = -1, best_a = -1;
    for (std::size_t i = lo; i < hi; ++i) {
      if (!result.aggregates[i].feasible) continue;
      if (best_t < 0 || result.aggregates[i].mean_trigger_f1 >
                            result.aggregates[best_t].mean_trigger_f1)
        best_t = static_cast<std::ptrdiff_t>(i);
      if (best_a < 0 || result.aggregates[i].mean_argument_f1 >
                            result.aggregates[best_a].mean_argument_f1)
        best_a = static_cast<std::ptrdiff_t>(i);
    }
    if (best_t >= 0) result.aggregates[best_t].opt_trigger = true;
    if (best_a >= 0) result.aggregates[best_a].opt_argument = true;
    lo = hi;
  }
  return result;
}

void emit_report(const SweepResult& result, const Config& config,
                 DatasetVariant arm, const std::string& out_dir) {
  if (result.aggregates.empty()) throw Error("emit_report: empty sweep result");
  fs::create_directories(out_dir);

  std::ostringstream csv;
  csv << "budget,ratio,variant,feasible,n_seeds,mean_trigger_f1,std_trigger_f1,"
         "mean_argument_f1,std_argument_f1,opt_trigger,opt_argument\n";
  for (const auto& a : result.aggregates) {
    csv << a.budget.str() << ',' << format_ratio(a.ratio) << ','
        << to_string(a.variant) << ',' << (a.feasible ? "true" : "false") << ','
        << a.n_seeds << ',';
    if (a.feasible) {
      csv << format_f1(a.mean_trigger_f1) << ',' << format_f1(a.std_trigger_f1)
          << ',' << format_f1(a.mean_argument_f1) << ','
          << format_f1(a.std_argument_f1);
    } else {
      csv << ",,,";
    }
    csv << ',' << (a.opt_trigger ? "1" : "0") << ',' << (a.opt_argument ? "1" : "0")
        << '\n';
  }
  {
    std::ofstream out(fs::path(out_dir) / "sweep.csv", std::ios::binary);
    if (!out) throw IoError("cannot write sweep.csv under " + out_dir);
    out << csv.str();
  }

  nlohmann::ordered_json manifest;
  manifest["config_digest"] = config_digest(config);
  manifest["arm"] = to_string(arm);
  manifest["rows"] = result.rows.size();
  manifest["aggregates"] = result.aggregates.size();
  manifest["seeds"] = config.seeds;
  manifest["stddev"] = config.sweep_sample_stddev ? "sample" : "population";
  std::ofstream out(fs::path(out_dir) / "manifest.json", std::ios::binary);
  if (!out) throw IoError("cannot write manifest.json under " + out_dir);
  out << manifest.dump(2) << '\n';
}

}  // namespace sfa
