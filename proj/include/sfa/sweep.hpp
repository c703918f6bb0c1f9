#pragma once

#include <string>
#include <vector>

#include "sfa/budget.hpp"
#include "sfa/config.hpp"
#include "sfa/corpus.hpp"

namespace sfa {

class TrainerFailed : public Error {
 public:
  using Error::Error;
};

struct SweepRow {
  Money budget;
  double ratio = 0.0;
  DatasetVariant variant = DatasetVariant::PseudoPseudo;
  std::uint64_t seed = 0;
  bool feasible = true;
  double trigger_f1 = 0.0;
  double argument_f1 = 0.0;
};

struct SweepAggregate {
  Money budget;
  double ratio = 0.0;
  DatasetVariant variant = DatasetVariant::PseudoPseudo;
  bool feasible = true;
  int n_seeds = 0;
  double mean_trigger_f1 = 0.0;
  double std_trigger_f1 = 0.0;
  double mean_argument_f1 = 0.0;
  double std_argument_f1 = 0.0;
  bool opt_trigger = false;   // best mean trigger F1 for its budget
  bool opt_argument = false;  // best mean argument F1 for its budget
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<SweepAggregate> aggregates;
};

struct SweepInputs {
  Dataset hh_pool;      // annotated Human-Human training pool
  Dataset pseudo_pool;  // annotated pseudo training pool for the chosen arm
  std::vector<AnnotatedSession> valid;
  std::vector<AnnotatedSession> test;
};

// One full experiment arm: for every feasible (budget, ratio) plan and
// seed, assemble the mixture, export training/validation/test records,
// run the external trainer command, read its predictions back, and score
// them against the test gold. Rows land in <out_dir>/rows.jsonl as they
// finish, and a rerun resumes from there. Row order is fixed by the grid,
// never by timing. `max_rows` > -1 stops after that many new rows
// (used to exercise resumption).
SweepResult run_sweep(const Config& config, DatasetVariant arm,
                      const SweepInputs& inputs, const std::string& out_dir,
                      long max_rows = -1);

// sweep.csv (one line per aggregate, optimum markers per budget) plus
// manifest.json carrying the config digest. Byte-identical for identical
// results.
void emit_report(const SweepResult& result, const Config& config,
                 DatasetVariant arm, const std::string& out_dir);

// The trainer contract: reads training/validation/test record TSVs and
// writes a prediction TSV for the test set. Substitutes {train} {valid}
// {test} {pred} (and {pretrain} when present) into the command template.
void run_trainer(const std::string& command_template, const std::string& train,
                 const std::string& valid, const std::string& test,
                 const std::string& pred, const std::string& pretrain = "");

}  // namespace sfa
