#pragma once

#include <map>
#include <string>
#include <vector>

#include "sfa/corpus.hpp"

namespace sfa {

class SessionMismatch : public Error {
 public:
  using Error::Error;
};

class SessionSetMismatch : public Error {
 public:
  using Error::Error;
};

struct MatchPair {
  int gold_entity_id = 0;
  int pred_entity_id = 0;
  double credit = 0.0;  // span Jaccard, in (0, 1]; 1 iff spans identical
};

struct MatchResult {
  std::vector<MatchPair> pairs;
  std::vector<int> unmatched_gold;
  std::vector<int> unmatched_pred;
};

struct EvalOptions {
  // Let an argument attach to any gold trigger on the same ECR chain.
  bool ecr_allowance = true;
  // Require the linked trigger's span match to be exact rather than any
  // positive credit.
  bool strict_trigger_gate = false;
};

// Span- and type-level view shared by triggers and arguments.
struct EntityRef {
  int id = 0;
  Span span;
  std::string type;
};

// Greedy matching in descending character overlap (ties: earlier gold
// span, then earlier pred span). A candidate pair needs identical type and
// positive overlap in the same utterance. Credit is |intersection| /
// |union| of the character ranges.
MatchResult match_entities(const std::vector<EntityRef>& gold,
                           const std::vector<EntityRef>& pred);

struct ClassTally {
  double tp_credit = 0.0;
  long gold = 0;
  long pred = 0;
};

using Tallies = std::map<std::string, ClassTally>;

Tallies score_triggers(const AnnotatedSession& gold, const AnnotatedSession& pred,
                       const MatchResult& trigger_matches);

// Arguments are matched by the same span rule, but a pair only counts when
// the predicted argument's trigger is matched (per options) to the gold
// argument's trigger or, with the ECR allowance, to any gold trigger on
// the same chain. Gated-out pairs leave both sides unmatched.
Tallies score_arguments(const AnnotatedSession& gold, const AnnotatedSession& pred,
                        const MatchResult& trigger_matches,
                        const EvalOptions& options = {});

MatchResult match_triggers(const AnnotatedSession& gold, const AnnotatedSession& pred);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long gold_count = 0;
};

// Per-class scores from accumulated tallies; empty denominators yield 0.
std::map<std::string, ClassMetrics> metrics_from_tallies(const Tallies& tallies);

// Instance-weighted mean F1 over classes with gold_count > 0.
double weighted_f1(const std::map<std::string, ClassMetrics>& per_class);

struct EvalReport {
  std::map<std::string, ClassMetrics> trigger_classes;
  std::map<std::string, ClassMetrics> argument_classes;
  double trigger_weighted_f1 = 0.0;
  double argument_weighted_f1 = 0.0;
};

// Whole-protocol evaluation: per-session matching, class tallies micro-
// aggregated over sessions, weighted F1 for triggers and arguments
// separately. Gold and pred must cover the same session ids.
EvalReport evaluate(const Dataset& gold, const Dataset& pred,
                    const EvalOptions& options = {});

std::string report_to_json(const EvalReport& report);
std::string report_to_csv(const EvalReport& report);

}  // namespace sfa
