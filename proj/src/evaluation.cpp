#include "sfa/evaluation.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <json.hpp>

namespace sfa {

namespace {

long overlap_len(const Span& a, const Span& b) {
  if (a.utterance_index != b.utterance_index) return 0;
  const long lo = std::max(a.start_char, b.start_char);
  const long hi = std::min(a.end_char, b.end_char);
  return std::max<long>(0, hi - lo);
}

double jaccard(const Span& a, const Span& b) {
  const long inter = overlap_len(a, b);
  const long uni = a.length() + b.length() - inter;
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

std::vector<EntityRef> trigger_refs(const AnnotatedSession& s) {
  std::vector<EntityRef> out;
  out.reserve(s.triggers.size());
  for (const auto& t : s.triggers) out.push_back({t.entity_id, t.span, t.trigger_type});
  return out;
}

std::vector<EntityRef> argument_refs(const AnnotatedSession& s) {
  std::vector<EntityRef> out;
  out.reserve(s.arguments.size());
  for (const auto& g : s.arguments)
    out.push_back({g.entity_id, g.span, g.argument_type});
  return out;
}

struct Candidate {
  std::size_t gi, pi;
  long overlap;
};

MatchResult greedy_match(const std::vector<EntityRef>& gold,
                         const std::vector<EntityRef>& pred,
                         const std::vector<char>& pair_allowed) {
  std::vector<Candidate> candidates;
  for (std::size_t gi = 0; gi < gold.size(); ++gi) {
    for (std::size_t pi = 0; pi < pred.size(); ++pi) {
      if (!pair_allowed.empty() && !pair_allowed[gi * pred.size() + pi]) continue;
      if (gold[gi].type != pred[pi].type) continue;
      const long ov = overlap_len(gold[gi].span, pred[pi].span);
      if (ov > 0) candidates.push_back({gi, pi, ov});
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [&](const Candidate& a, const Candidate& b) {
              if (a.overlap != b.overlap) return a.overlap > b.overlap;
              if (gold[a.gi].span != gold[b.gi].span)
                return gold[a.gi].span < gold[b.gi].span;
              return pred[a.pi].span < pred[b.pi].span;
            });

  MatchResult result;
  std::vector<char> gold_taken(gold.size(), 0), pred_taken(pred.size(), 0);
  for (const auto& c : candidates) {
    if (gold_taken[c.gi] || pred_taken[c.pi]) continue;
    gold_taken[c.gi] = pred_taken[c.pi] = 1;
    result.pairs.push_back({gold[c.gi].id, pred[c.pi].id,
                            jaccard(gold[c.gi].span, pred[c.pi].span)});
  }
  for (std::size_t gi = 0; gi < gold.size(); ++gi)
    if (!gold_taken[gi]) result.unmatched_gold.push_back(gold[gi].id);
  for (std::size_t pi = 0; pi < pred.size(); ++pi)
    if (!pred_taken[pi]) result.unmatched_pred.push_back(pred[pi].id);
  return result;
}

void require_same_session(const AnnotatedSession& gold, const AnnotatedSession& pred) {
  if (gold.session.id != pred.session.id)
    throw SessionMismatch("gold session '" + gold.session.id +
                          "' scored against pred session '" + pred.session.id + "'");
}

Tallies tally(const std::vector<EntityRef>& gold, const std::vector<EntityRef>& pred,
              const MatchResult& matches) {
  Tallies out;
  for (const auto& g : gold) ++out[g.type].gold;
  for (const auto& p : pred) ++out[p.type].pred;
  std::map<int, const EntityRef*> gold_by_id;
  for (const auto& g : gold) gold_by_id[g.id] = &g;
  for (const auto& pair : matches.pairs)
    out[gold_by_id.at(pair.gold_entity_id)->type].tp_credit += pair.credit;
  return out;
}

void merge_tallies(Tallies& into, const Tallies& from) {
  for (const auto& [type, t] : from) {
    auto& dst = into[type];
    dst.tp_credit += t.tp_credit;
    dst.gold += t.gold;
    dst.pred += t.pred;
  }
}

}  // namespace

MatchResult match_entities(const std::vector<EntityRef>& gold,
                           const std::vector<EntityRef>& pred) {
  return greedy_match(gold, pred, {});
}

MatchResult match_triggers(const AnnotatedSession& gold, const AnnotatedSession& pred) {
  require_same_session(gold, pred);
  return match_entities(trigger_refs(gold), trigger_refs(pred));
}

Tallies score_triggers(const AnnotatedSession& gold, const AnnotatedSession& pred,
                       const MatchResult& trigger_matches) {
  require_same_session(gold, pred);
  return tally(trigger_refs(gold), trigger_refs(pred), trigger_matches);
}

Tallies score_arguments(const AnnotatedSession& gold, const AnnotatedSession& pred,
                        const MatchResult& trigger_matches,
                        const EvalOptions& options) {
  require_same_session(gold, pred);

  // Which gold trigger each predicted trigger matched, at what credit.
  std::map<int, std::pair<int, double>> pred_trigger_match;
  for (const auto& pair : trigger_matches.pairs)
    pred_trigger_match[pair.pred_entity_id] = {pair.gold_entity_id, pair.credit};

  std::map<int, const TriggerEntity*> gold_triggers;
  for (const auto& t : gold.triggers) gold_triggers[t.entity_id] = &t;

  // Gold triggers acceptable as the head for each gold argument.
  auto allowed_heads = [&](const ArgumentEntity& ga) {
    std::set<int> allowed{ga.trigger_entity_id};
    if (options.ecr_allowance) {
      const auto it = gold_triggers.find(ga.trigger_entity_id);
      if (it != gold_triggers.end() && it->second->ecr_chain_id) {
        for (const auto& t : gold.triggers)
          if (t.ecr_chain_id == it->second->ecr_chain_id) allowed.insert(t.entity_id);
      }
    }
    return allowed;
  };

  const auto gold_refs = argument_refs(gold);
  const auto pred_refs = argument_refs(pred);
  std::vector<char> pair_allowed(gold_refs.size() * pred_refs.size(), 0);
  for (std::size_t gi = 0; gi < gold_refs.size(); ++gi) {
    const auto allowed = allowed_heads(gold.arguments[gi]);
    for (std::size_t pi = 0; pi < pred_refs.size(); ++pi) {
      const auto it = pred_trigger_match.find(pred.arguments[pi].trigger_entity_id);
      if (it == pred_trigger_match.end()) continue;
      const auto& [gold_trigger_id, credit] = it->second;
      if (options.strict_trigger_gate && credit < 1.0) continue;
      if (allowed.count(gold_trigger_id))
        pair_allowed[gi * pred_refs.size() + pi] = 1;
    }
  }

  return tally(gold_refs, pred_refs, greedy_match(gold_refs, pred_refs, pair_allowed));
}

std::map<std::string, ClassMetrics> metrics_from_tallies(const Tallies& tallies) {
  std::map<std::string, ClassMetrics> out;
  for (const auto& [type, t] : tallies) {
    ClassMetrics m;
    m.gold_count = t.gold;
    m.precision = t.pred > 0 ? t.tp_credit / static_cast<double>(t.pred) : 0.0;
    m.recall = t.gold > 0 ? t.tp_credit / static_cast<double>(t.gold) : 0.0;
    m.f1 = (m.precision + m.recall) > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    out[type] = m;
  }
  return out;
}

double weighted_f1(const std::map<std::string, ClassMetrics>& per_class) {
  double weight_sum = 0.0, acc = 0.0;
  for (const auto& [_, m] : per_class) {
    if (m.gold_count == 0) continue;
    weight_sum += static_cast<double>(m.gold_count);
    acc += static_cast<double>(m.gold_count) * m.f1;
  }
  return weight_sum > 0.0 ? acc / weight_sum : 0.0;
}

EvalReport evaluate(const Dataset& gold, const Dataset& pred,
                    const EvalOptions& options) {
  std::map<std::string, const AnnotatedSession*> pred_by_id;
  for (const auto& p : pred.sessions) pred_by_id[p.session.id] = &p;
  if (pred_by_id.size() != pred.sessions.size())
    throw SessionSetMismatch("pred contains duplicate session ids");
  if (pred.sessions.size() != gold.sessions.size())
    throw SessionSetMismatch("gold has " + std::to_string(gold.sessions.size()) +
                             " sessions, pred has " +
                             std::to_string(pred.sessions.size()));
  for (const auto& g : gold.sessions)
    if (!pred_by_id.count(g.session.id))
      throw SessionSetMismatch("pred is missing session '" + g.session.id + "'");

  // Per-session tallies computed in parallel, then reduced in session
  // order so results never depend on the thread count.
  const auto n = static_cast<std::ptrdiff_t>(gold.sessions.size());
  std::vector<std::pair<Tallies, Tallies>> per_session(gold.sessions.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& g = gold.sessions[i];
    const auto& p = *pred_by_id.at(g.session.id);
    const MatchResult tm = match_triggers(g, p);
    per_session[i] = {score_triggers(g, p, tm), score_arguments(g, p, tm, options)};
  }

  Tallies trigger_tallies, argument_tallies;
  for (const auto& [tt, at] : per_session) {
    merge_tallies(trigger_tallies, tt);
    merge_tallies(argument_tallies, at);
  }

  EvalReport report;
  report.trigger_classes = metrics_from_tallies(trigger_tallies);
  report.argument_classes = metrics_from_tallies(argument_tallies);
  report.trigger_weighted_f1 = weighted_f1(report.trigger_classes);
  report.argument_weighted_f1 = weighted_f1(report.argument_classes);
  return report;
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  auto classes = [](const std::map<std::string, ClassMetrics>& per_class) {
    nlohmann::ordered_json out;
    for (const auto& [type, m] : per_class)
      out[type] = {{"precision", m.precision},
                   {"recall", m.recall},
                   {"f1", m.f1},
                   {"gold_count", m.gold_count}};
    return out;
  };
  j["trigger_classes"] = classes(report.trigger_classes);
  j["argument_classes"] = classes(report.argument_classes);
  j["trigger_weighted_f1"] = report.trigger_weighted_f1;
  j["argument_weighted_f1"] = report.argument_weighted_f1;
  return j.dump(2);
}

std::string report_to_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "kind,type,precision,recall,f1,gold_count\n";
  char buf[64];
  auto emit = [&](const char* kind, const std::map<std::string, ClassMetrics>& m) {
    for (const auto& [type, c] : m) {
      std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f", c.precision, c.recall, c.f1);
      out << kind << ',' << type << ',' << buf << ',' << c.gold_count << '\n';
    }
  };
  emit("trigger", report.trigger_classes);
  emit("argument", report.argument_classes);
  return out.str();
}

}  // namespace sfa
