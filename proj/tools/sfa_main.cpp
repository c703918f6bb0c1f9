// Command-line surface of the toolkit. One thin subcommand per library
// operation; see README for formats and examples.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <json.hpp>

#include "sfa/annoparse.hpp"
#include "sfa/budget.hpp"
#include "sfa/config.hpp"
#include "sfa/corpus_io.hpp"
#include "sfa/evaluation.hpp"
#include "sfa/llm_gateway.hpp"
#include "sfa/stats.hpp"
#include "sfa/sweep.hpp"
#include "sfa/synthesis.hpp"

namespace {

using namespace sfa;

Config load_or_default(const std::string& path) {
  return path.empty() ? default_config() : load_config(path);
}

// Live client unless a replay transcript is given; --record wraps either.
std::unique_ptr<ChatClient> make_client(const Config& config,
                                        const std::string& replay_path,
                                        const std::string& record_path,
                                        std::unique_ptr<ChatClient>& owner) {
  std::unique_ptr<ChatClient> base;
  if (!replay_path.empty())
    base = std::make_unique<ReplayChatClient>(ReplayChatClient::from_file(replay_path));
  else
    base = std::make_unique<HttpChatClient>(config.make_http_config());
  if (record_path.empty()) return base;
  owner = std::move(base);
  return std::make_unique<RecordingChatClient>(*owner, record_path);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
}

DatasetVariant arm_from_string(const std::string& arm) {
  if (arm == "hp") return DatasetVariant::HumanPseudo;
  if (arm == "pp") return DatasetVariant::PseudoPseudo;
  throw Error("--arm must be 'hp' or 'pp'");
}

Dataset load_pool(const std::string& path) {
  Dataset d;
  d.variant = DatasetVariant::Mixed;
  d.sessions = read_corpus(path);
  return d;
}

int run(int argc, char** argv) {
  CLI::App app{"training-data synthesis, mixing, and evaluation for "
               "conversational semantic frame analysis"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "config JSON (defaults apply if omitted)");

  // ------------------------------------------------------------- split
  auto* split = app.add_subcommand("split", "split dialogues into sessions");
  std::string split_in, split_out;
  int split_window = 10;
  split->add_option("--in", split_in, "dialogue JSONL")->required();
  split->add_option("--out", split_out, "session JSONL")->required();
  split->add_option("--window", split_window, "utterances per session");
  split->callback([&] {
    const auto dialogues = read_dialogues(split_in);
    std::vector<DialogueSession> sessions;
    for (const auto& d : dialogues)
      for (auto& s : split_dialogue(d, split_window)) sessions.push_back(std::move(s));
    write_sessions(sessions, split_out);
    std::cout << sessions.size() << " sessions from " << dialogues.size()
              << " dialogues\n";
  });

  // ---------------------------------------------------------- generate
  auto* generate = app.add_subcommand("generate", "self-instruct pseudo-dialogues");
  std::string gen_pool, gen_pseudo_pool, gen_out, gen_replay, gen_record;
  int gen_n = 1;
  std::uint64_t gen_seed = 0;
  bool gen_seed_set = false;
  generate->add_option("--human-pool", gen_pool, "human session JSONL")->required();
  generate->add_option("--pseudo-pool", gen_pseudo_pool,
                       "previously accepted dialogue JSONL to continue from");
  generate->add_option("--out", gen_out, "accepted dialogue JSONL")->required();
  generate->add_option("--n", gen_n, "dialogues to accept")->required();
  generate->add_option("--replay", gen_replay, "replay transcript instead of live calls");
  generate->add_option("--record", gen_record, "record live replies to this transcript");
  generate->add_option("--seed", gen_seed, "override generation.seed")
      ->each([&](const std::string&) { gen_seed_set = true; });
  generate->callback([&] {
    Config config = load_or_default(config_path);
    if (gen_seed_set) config.generation.seed = gen_seed;
    const auto pool = read_sessions(gen_pool);
    std::vector<Dialogue> pseudo_pool;
    if (!gen_pseudo_pool.empty()) pseudo_pool = read_dialogues(gen_pseudo_pool);
    std::unique_ptr<ChatClient> owner;
    auto client = make_client(config, gen_replay, gen_record, owner);
    const auto tokenizer = config.make_tokenizer();
    const auto result = generate_pseudo_dialogues(pool, pseudo_pool, *client,
                                                  config.generation, gen_n, *tokenizer);
    write_dialogues(result.accepted, gen_out);
    const Money cost = usage_cost(result.responses, config.llm_price);
    std::cout << result.accepted.size() << " accepted in " << result.attempts
              << " attempts (" << result.rejected_similar << " too similar, "
              << result.rejected_malformed << " malformed), token cost $"
              << cost.str() << "\n";
  });

  // ------------------------------------------------------------- label
  auto* label = app.add_subcommand("label", "apply three-step pseudo-labels");
  std::string label_sessions_path, label_pool, label_out, label_replay, label_record,
      label_checkpoint, label_failures;
  label->add_option("--sessions", label_sessions_path, "sessions to label")->required();
  label->add_option("--pool", label_pool, "annotated exemplar pool JSONL")->required();
  label->add_option("--out", label_out, "labeled corpus JSONL")->required();
  label->add_option("--replay", label_replay, "replay transcript");
  label->add_option("--record", label_record, "record transcript");
  label->add_option("--checkpoint", label_checkpoint, "resumable checkpoint file");
  label->add_option("--failures", label_failures, "write failures JSON here");
  label->callback([&] {
    const Config config = load_or_default(config_path);
    const auto sessions = read_sessions(label_sessions_path);
    const auto pool = read_corpus(label_pool);
    LabelingConfig lc = config.labeling;
    const auto exemplars = build_exemplar_pool(pool, lc.min_exemplar_entities);
    if (lc.anchor_session_id.empty() && !exemplars.empty()) {
      // default anchor: the exemplar with the most entities
      const auto* best = &exemplars.front();
      for (const auto& a : exemplars)
        if (a.triggers.size() + a.arguments.size() >
            best->triggers.size() + best->arguments.size())
          best = &a;
      lc.anchor_session_id = best->session.id;
    }
    std::unique_ptr<ChatClient> owner;
    auto client = make_client(config, label_replay, label_record, owner);
    const auto tokenizer = config.make_tokenizer();
    const auto result = label_sessions(sessions, exemplars, *client, lc,
                                       config.taxonomy, *tokenizer, label_checkpoint);
    write_corpus(result.annotated, label_out);
    nlohmann::ordered_json failures = nlohmann::ordered_json::array();
    for (const auto& f : result.failures)
      failures.push_back({{"session_id", f.session_id},
                          {"kind", f.error_kind},
                          {"message", f.message},
                          {"attempts", f.attempts}});
    if (!label_failures.empty()) write_text(label_failures, failures.dump(2) + "\n");
    const Money cost = usage_cost(result.responses, config.llm_price);
    std::cout << result.annotated.size() << " labeled, " << result.failures.size()
              << " failed, token cost $" << cost.str() << "\n";
  });

  // --------------------------------------------------------------- mix
  auto* mix = app.add_subcommand("mix", "plan or assemble a budget mixture");
  std::string mix_arm = "pp", mix_hh, mix_pseudo, mix_out;
  double mix_budget = 0.0, mix_ratio = -1.0;
  std::uint64_t mix_seed = 1;
  bool mix_grid = false;
  mix->add_option("--arm", mix_arm, "hp | pp");
  mix->add_option("--budget", mix_budget, "budget in dollars");
  mix->add_option("--ratio", mix_ratio, "Human-Human budget share in [0,1]");
  mix->add_flag("--grid", mix_grid, "emit the full budget x ratio plan grid as CSV");
  mix->add_option("--hh-pool", mix_hh, "assemble: Human-Human corpus JSONL");
  mix->add_option("--pseudo-pool", mix_pseudo, "assemble: pseudo corpus JSONL");
  mix->add_option("--out", mix_out, "assembled corpus JSONL / grid CSV");
  mix->add_option("--seed", mix_seed, "sampling seed");
  mix->callback([&] {
    const Config config = load_or_default(config_path);
    const DatasetVariant arm = arm_from_string(mix_arm);
    if (mix_grid) {
      const auto& budgets =
          arm == DatasetVariant::HumanPseudo ? config.hp_budgets : config.pp_budgets;
      const auto plans =
          plan_grid(budgets, config.ratios, arm, config.cost_model, config.pools);
      const std::string csv = plans_to_csv(plans);
      if (mix_out.empty())
        std::cout << csv;
      else
        write_text(mix_out, csv);
      return;
    }
    if (mix_budget <= 0.0 || mix_ratio < 0.0)
      throw Error("mix needs --budget and --ratio (or --grid)");
    const auto plan = plan_mixture(Money::from_dollars(mix_budget), mix_ratio, arm,
                                   config.cost_model);
    std::cout << plans_to_csv({plan});
    if (!mix_hh.empty() || !mix_pseudo.empty()) {
      if (mix_hh.empty() || mix_pseudo.empty() || mix_out.empty())
        throw Error("assembling needs --hh-pool, --pseudo-pool, and --out");
      const auto mixed =
          assemble_mixture(plan, load_pool(mix_hh), load_pool(mix_pseudo), mix_seed);
      write_corpus(mixed.sessions, mix_out);
      std::cout << "assembled " << mixed.sessions.size() << " sessions -> " << mix_out
                << "\n";
    }
  });

  // ------------------------------------------------------------ export
  auto* exportc = app.add_subcommand("export", "corpus JSONL -> sequence-record TSV");
  std::string export_in, export_out;
  exportc->add_option("--corpus", export_in, "corpus JSONL")->required();
  exportc->add_option("--out", export_out, "records TSV")->required();
  exportc->callback([&] {
    const Config config = load_or_default(config_path);
    const auto sessions = read_corpus(export_in);
    write_records_tsv(sessions, *config.make_tokenizer(), export_out);
    std::cout << sessions.size() << " sessions -> " << export_out << "\n";
  });

  // -------------------------------------------------------------- eval
  auto* eval = app.add_subcommand("eval", "score predictions against gold");
  std::string eval_gold, eval_pred, eval_json, eval_csv;
  eval->add_option("--gold", eval_gold, "gold corpus JSONL")->required();
  eval->add_option("--pred", eval_pred, "prediction corpus JSONL or records TSV")
      ->required();
  eval->add_option("--out", eval_json, "report JSON path");
  eval->add_option("--csv", eval_csv, "per-class CSV path");
  eval->callback([&] {
    const Config config = load_or_default(config_path);
    Dataset gold;
    gold.variant = DatasetVariant::Mixed;
    gold.sessions = read_corpus(eval_gold);

    Dataset pred;
    pred.variant = DatasetVariant::Mixed;
    if (eval_pred.size() > 4 && eval_pred.substr(eval_pred.size() - 4) == ".tsv") {
      std::vector<DialogueSession> bare;
      for (const auto& a : gold.sessions) bare.push_back(a.session);
      pred.sessions = from_sequence_records(read_records_tsv(eval_pred), bare,
                                            *config.make_tokenizer());
    } else {
      pred.sessions = read_corpus(eval_pred);
    }
    const EvalReport report = evaluate(gold, pred, config.evaluation);
    const std::string json = report_to_json(report);
    if (eval_json.empty())
      std::cout << json << "\n";
    else
      write_text(eval_json, json + "\n");
    if (!eval_csv.empty()) write_text(eval_csv, report_to_csv(report));
  });

  // ------------------------------------------------------------- stats
  auto* stats = app.add_subcommand("stats", "length and label statistics");
  std::string stats_in, stats_out;
  stats->add_option("--corpus", stats_in, "corpus JSONL")->required();
  stats->add_option("--out", stats_out, "stats JSON path (stdout if omitted)");
  stats->callback([&] {
    const Config config = load_or_default(config_path);
    const auto sessions = read_corpus(stats_in);
    const auto tokenizer = config.make_tokenizer();
    const auto lengths =
        length_stats(sessions, *tokenizer, config.histogram_bucket_width);
    Dataset d;
    d.variant = DatasetVariant::Mixed;
    d.sessions = sessions;
    const auto labels = label_distribution(d);

    nlohmann::ordered_json j;
    j["sessions"] = sessions.size();
    j["length"] = {{"mean", lengths.mean}, {"stddev", lengths.stddev}};
    auto& hist = j["length"]["histogram"] = nlohmann::ordered_json::array();
    for (const auto& [bucket, count] : lengths.histogram)
      hist.push_back({{"bucket", bucket}, {"count", count}});
    auto dump_dist = [&](const std::map<std::string, LabelStat>& m) {
      nlohmann::ordered_json out;
      for (const auto& [type, st] : m)
        out[type] = {{"count", st.count}, {"density", st.per_session_density}};
      return out;
    };
    j["triggers"] = dump_dist(labels.triggers);
    j["arguments"] = dump_dist(labels.arguments);
    const std::string text = j.dump(2) + "\n";
    if (stats_out.empty())
      std::cout << text;
    else
      write_text(stats_out, text);
  });

  // ------------------------------------------------------------- sweep
  auto* sweep = app.add_subcommand("sweep", "budget x ratio experiment driver");
  std::string sweep_arm = "pp", sweep_hh, sweep_pseudo, sweep_valid, sweep_test,
      sweep_out;
  long sweep_max_rows = -1;
  sweep->add_option("--arm", sweep_arm, "hp | pp");
  sweep->add_option("--hh-pool", sweep_hh, "Human-Human corpus JSONL")->required();
  sweep->add_option("--pseudo-pool", sweep_pseudo, "pseudo corpus JSONL")->required();
  sweep->add_option("--valid", sweep_valid, "validation corpus JSONL")->required();
  sweep->add_option("--test", sweep_test, "test corpus JSONL")->required();
  sweep->add_option("--out", sweep_out, "output directory")->required();
  sweep->add_option("--max-rows", sweep_max_rows,
                    "stop after N new rows (resume later)");
  sweep->callback([&] {
    const Config config = load_or_default(config_path);
    const DatasetVariant arm = arm_from_string(sweep_arm);
    SweepInputs inputs;
    inputs.hh_pool = load_pool(sweep_hh);
    inputs.pseudo_pool = load_pool(sweep_pseudo);
    inputs.valid = read_corpus(sweep_valid);
    inputs.test = read_corpus(sweep_test);
    const auto result = run_sweep(config, arm, inputs, sweep_out, sweep_max_rows);
    emit_report(result, config, arm, sweep_out);
    std::cout << result.rows.size() << " rows, " << result.aggregates.size()
              << " aggregates -> " << sweep_out << "/sweep.csv\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);  // --help and friends
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 64;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const TrainerFailed& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const AuthError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const RateLimited& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const TransportError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
