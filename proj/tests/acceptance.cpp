// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each criterion pins its tolerances and runtime bounds in code.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sfa/annoparse.hpp"
#include "sfa/budget.hpp"
#include "sfa/config.hpp"
#include "sfa/corpus_io.hpp"
#include "sfa/evaluation.hpp"
#include "sfa/llm_gateway.hpp"
#include "sfa/similarity.hpp"
#include "sfa/sweep.hpp"
#include "sfa/synthesis.hpp"
#include "testutil.hpp"

using namespace sfa;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

struct Criterion {
  int number;
  std::string description;
  Clock::time_point start = Clock::now();
  bool ok = true;
  std::string detail;

  Criterion(int n, std::string desc) : number(n), description(std::move(desc)) {}

  void require(bool condition, const std::string& what) {
    if (!condition && ok) {
      ok = false;
      detail = what;
    }
  }

  double elapsed() const {
    return std::chrono::duration<double>(Clock::now() - start).count();
  }

  void finish(double time_limit_s = 0.0) {
    const double secs = elapsed();
    if (time_limit_s > 0.0 && secs > time_limit_s && ok) {
      ok = false;
      detail = "runtime " + std::to_string(secs) + "s exceeds " +
               std::to_string(time_limit_s) + "s";
    }
    std::printf("%s  criterion %d: %s (%.2fs)%s\n", ok ? "PASS" : "FAIL", number,
                description.c_str(), secs,
                detail.empty() ? "" : ("  [" + detail + "]").c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
  }
};

// ---------------------------------------------------------------------- 1

void criterion_1_table1() {
  Criterion c(1, "Table-1 reproduction from the default cost model");
  const CostModel m = default_cost_model();

  const auto hh =
      plan_mixture(Money::from_dollars(12800), 1.0, DatasetVariant::HumanPseudo, m);
  c.require(std::llabs(hh.n_hh - 1472) <= 1, "HumanHuman sessions: got " +
                                                 std::to_string(hh.n_hh));
  c.require(std::abs(hh.realized_cost.dollars() - 12800.0) <= 10.0,
            "HumanHuman realized cost " + hh.realized_cost.str());

  const auto hp =
      plan_mixture(Money::from_dollars(12800), 0.0, DatasetVariant::HumanPseudo, m);
  c.require(std::llabs(hp.n_pseudo - 2858) <= 1, "HumanPseudo sessions: got " +
                                                     std::to_string(hp.n_pseudo));
  c.require(std::abs(hp.realized_cost.dollars() - 12800.0) <= 10.0,
            "HumanPseudo realized cost " + hp.realized_cost.str());

  const auto pp =
      plan_mixture(Money::from_dollars(840), 0.0, DatasetVariant::PseudoPseudo, m);
  c.require(std::llabs(pp.n_pseudo - 4293) <= 1, "PseudoPseudo sessions: got " +
                                                     std::to_string(pp.n_pseudo));
  c.require(std::abs(pp.realized_cost.dollars() - 840.0) <= 10.0,
            "PseudoPseudo realized cost " + pp.realized_cost.str());
  c.finish(1.0);
}

// ---------------------------------------------------------------------- 2

// Exhaustive-subsequence LCS, mask tables hoisted out of the pair loop.
struct LcsOracle {
  std::array<std::vector<std::vector<unsigned>>, 13> masks_by_len;

  LcsOracle() {
    for (int n = 0; n <= 12; ++n) {
      masks_by_len[n].assign(n + 1, {});
      for (unsigned mask = 0; mask < (1u << n); ++mask)
        masks_by_len[n][__builtin_popcount(mask)].push_back(mask);
    }
  }

  int lcs(const std::vector<int>& a, const std::vector<int>& b) const {
    const auto& small = a.size() <= b.size() ? a : b;
    const auto& large = a.size() <= b.size() ? b : a;
    const int n = static_cast<int>(small.size());
    for (int len = n; len >= 1; --len) {
      for (const unsigned mask : masks_by_len[n][len]) {
        std::size_t li = 0;
        bool ok = true;
        for (int i = 0; i < n && ok; ++i) {
          if (!(mask & (1u << i))) continue;
          while (li < large.size() && large[li] != small[i]) ++li;
          if (li == large.size())
            ok = false;
          else
            ++li;
        }
        if (ok) return len;
      }
    }
    return 0;
  }
};

void criterion_2_rouge_oracle() {
  Criterion c(2, "ROUGE-L equals the exhaustive-LCS oracle on 300k+ pairs");
  const LcsOracle oracle;
  CharacterTokenizer tok;
  const char kSymbols[3] = {'a', 'b', 'c'};

  // All ordered pairs over every string of length <= 4 (121 strings), plus
  // seeded random pairs covering every length combination up to 12 x 12.
  std::vector<std::string> small_universe = {""};
  for (std::size_t start = 0, len = 1; len <= 4; ++len) {
    const std::size_t end = small_universe.size();
    for (std::size_t i = start; i < end; ++i)
      for (const char s : kSymbols) small_universe.push_back(small_universe[i] + s);
    start = end;
  }

  struct Pair {
    std::string a, b;
  };
  std::vector<Pair> pairs;
  pairs.reserve(302000);
  for (const auto& a : small_universe)
    for (const auto& b : small_universe) pairs.push_back({a, b});

  SplitMix64 rng(20240101);
  for (int la = 0; la <= 12; ++la) {
    for (int lb = 0; lb <= 12; ++lb) {
      for (int k = 0; k < 1700; ++k) {
        Pair p;
        for (int i = 0; i < la; ++i) p.a.push_back(kSymbols[rng.below(3)]);
        for (int i = 0; i < lb; ++i) p.b.push_back(kSymbols[rng.below(3)]);
        pairs.push_back(std::move(p));
      }
    }
  }

  const auto n = static_cast<std::ptrdiff_t>(pairs.size());
  long mismatches = 0;
#pragma omp parallel for schedule(dynamic, 512) reduction(+ : mismatches)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& p = pairs[i];
    std::vector<int> ia(p.a.begin(), p.a.end()), ib(p.b.begin(), p.b.end());
    const int want_lcs = oracle.lcs(ia, ib);

    std::vector<std::string> ta, tb;
    for (char ch : p.a) ta.emplace_back(1, ch);
    for (char ch : p.b) tb.emplace_back(1, ch);
    if (static_cast<int>(lcs_length(ta, tb)) != want_lcs) {
      ++mismatches;
      continue;
    }
    double want_f1 = 0.0;
    if (!p.a.empty() && !p.b.empty() && want_lcs > 0) {
      const double prec = static_cast<double>(want_lcs) / p.a.size();
      const double rec = static_cast<double>(want_lcs) / p.b.size();
      want_f1 = 2.0 * prec * rec / (prec + rec);
    }
    if (std::abs(rouge_l(p.a, p.b, tok).value - want_f1) > 1e-12) ++mismatches;
  }
  c.require(mismatches == 0, std::to_string(mismatches) + " mismatching pairs");
  c.require(pairs.size() >= 280000, "only " + std::to_string(pairs.size()) + " pairs");
  c.finish(60.0);
}

// ---------------------------------------------------------------------- 3

void criterion_3_roundtrips() {
  Criterion c(3, "10,000 random sessions round-trip through both formats");
  const Taxonomy tax = default_taxonomy();
  SplitMix64 rng(777);
  std::vector<AnnotatedSession> sessions;
  sessions.reserve(10000);
  for (int i = 0; i < 10000; ++i)
    sessions.push_back(test::random_session(rng, tax, "a" + std::to_string(i)));

  CharacterTokenizer tok;
  const auto n = static_cast<std::ptrdiff_t>(sessions.size());
  long failures = 0;
#pragma omp parallel for schedule(dynamic, 64) reduction(+ : failures)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& x = sessions[i];
    try {
      if (parse_transcript(render_transcript(x), x.session, tax) != x) {
        ++failures;
        continue;
      }
      const auto rows = to_sequence_records(x, tok);
      const auto back = from_sequence_records(rows, {x.session}, tok);
      if (back.size() != 1 || back[0] != x) ++failures;
    } catch (const std::exception&) {
      ++failures;
    }
  }
  c.require(failures == 0, std::to_string(failures) + " of 10000 failed");
  c.finish(60.0);
}

// ---------------------------------------------------------------------- 4

void criterion_4_rejections() {
  Criterion c(4, "12 malformed transcripts raise exactly the documented errors");
  const auto session = test::make_session(
      "d9#2", {test::utt(Speaker::Expert, "You line up the Gyozas first."),
               test::utt(Speaker::Interviewer, "In a circle along the edge?")});
  const Taxonomy tax = default_taxonomy();

  using K = TranscriptErrorKind;
  const std::vector<std::pair<std::string, K>> fixtures = {
      {"Step 1:\nE: You line up the Gyozas first.\nI: In a circle along the edge?\n"
       "Step 3:\n",
       K::MissingStepHeader},
      {"Step 1:\nE: You <E1>line up the Gyozas first.\n"
       "I: In a circle along the edge?\nStep 2:\nStep 3:\n",
       K::MalformedTag},
      {"Step 1:\nE: You <E1>line up the <E2>Gyozas</E2></E1> first.\n"
       "I: In a circle along the edge?\nStep 2:\nStep 3:\n",
       K::MalformedTag},
      {"Step 1:\nE: You <Ex>line up</Ex> the Gyozas first.\n"
       "I: In a circle along the edge?\nStep 2:\nStep 3:\n",
       K::MalformedTag},
      {"Step 1:\nE: You <E1>line up</E1> the <E1>Gyozas</E1> first.\n"
       "I: In a circle along the edge?\nStep 2:\nE1: PLACE\nStep 3:\n",
       K::DuplicateTagId},
      {"Step 1:\nE: You <E1>line up</E1> the Gyozas last.\n"
       "I: In a circle along the edge?\nStep 2:\nE1: PLACE\nStep 3:\n",
       K::ContextAltered},
      {"Step 1:\nE: You <E1>line up</E1> the Gyozas first.\n"
       "I: In a circle along the edge?\nStep 2:\nE1: COOK\nStep 3:\n",
       K::UnknownType},
      {"Step 1:\nE: You <E1>line up</E1> the <E2>Gyozas</E2> first.\n"
       "I: In a circle along the edge?\nStep 2:\nE1: PLACE\nStep 3:\n"
       "(E2, Widget, E1)\n",
       K::UnknownType},
      {"Step 1:\nE: You <E1>line up</E1> the <E2>Gyozas</E2> first.\n"
       "I: In a circle along the edge?\nStep 2:\nE1: PLACE\nStep 3:\n"
       "(E2, Object, E9)\n",
       K::DanglingReference},
      {"Step 1:\nE: You <E1>line up</E1> the Gyozas first.\n"
       "I: In a circle along the edge?\nStep 2:\nE1: PLACE\nE5: MIX\nStep 3:\n",
       K::DanglingReference},
      {"Step 1:\nE: You <E1>line up</E1> the <E2>Gyozas</E2> first.\n"
       "I: In a circle along the edge?\nStep 2:\nE1: PLACE\nStep 3:\n",
       K::OrphanEntity},
      {"Step 1:\nE: You <E1>line up</E1> the Gyozas first.\n"
       "Step 2:\nE1: PLACE\nStep 3:\n",
       K::UtteranceCountMismatch},
  };

  int index = 0;
  for (const auto& [reply, want] : fixtures) {
    ++index;
    try {
      parse_transcript(reply, session, tax);
      c.require(false, "fixture " + std::to_string(index) + " was accepted");
    } catch (const TranscriptError& e) {
      c.require(e.kind() == want,
                "fixture " + std::to_string(index) + ": got " +
                    to_string(e.kind()) + ", want " + to_string(want));
    }
  }
  c.finish();
}

// ---------------------------------------------------------------------- 5

EvalReport acceptance_oracle_report(const Dataset& gold, const Dataset& pred,
                                    const EvalOptions& options) {
  std::map<std::string, const AnnotatedSession*> pred_by_id;
  for (const auto& p : pred.sessions) pred_by_id[p.session.id] = &p;

  Tallies trig, arg;
  for (const auto& g : gold.sessions) {
    const auto& p = *pred_by_id.at(g.session.id);
    std::vector<EntityRef> gt, pt, ga, pa;
    for (const auto& t : g.triggers) gt.push_back({t.entity_id, t.span, t.trigger_type});
    for (const auto& t : p.triggers) pt.push_back({t.entity_id, t.span, t.trigger_type});
    for (const auto& x : g.arguments) ga.push_back({x.entity_id, x.span, x.argument_type});
    for (const auto& x : p.arguments) pa.push_back({x.entity_id, x.span, x.argument_type});

    const auto tpairs = test::match_oracle(gt, pt);
    std::map<int, std::string> gold_ttype;
    for (const auto& t : g.triggers) {
      gold_ttype[t.entity_id] = t.trigger_type;
      ++trig[t.trigger_type].gold;
    }
    for (const auto& t : p.triggers) ++trig[t.trigger_type].pred;
    for (const auto& pr : tpairs) trig[gold_ttype.at(pr.gold_id)].tp_credit += pr.credit;

    std::map<int, std::pair<int, double>> pred_match;
    for (const auto& pr : tpairs) pred_match[pr.pred_id] = {pr.gold_id, pr.credit};
    std::map<int, const TriggerEntity*> gtrig;
    for (const auto& t : g.triggers) gtrig[t.entity_id] = &t;

    std::set<std::pair<int, int>> allowed;
    for (const auto& gx : g.arguments) {
      std::set<int> heads{gx.trigger_entity_id};
      if (options.ecr_allowance && gtrig.at(gx.trigger_entity_id)->ecr_chain_id)
        for (const auto& t : g.triggers)
          if (t.ecr_chain_id == gtrig.at(gx.trigger_entity_id)->ecr_chain_id)
            heads.insert(t.entity_id);
      for (const auto& px : p.arguments) {
        const auto it = pred_match.find(px.trigger_entity_id);
        if (it == pred_match.end()) continue;
        if (options.strict_trigger_gate && it->second.second < 1.0) continue;
        if (heads.count(it->second.first)) allowed.insert({gx.entity_id, px.entity_id});
      }
    }
    std::map<int, std::string> gold_atype;
    for (const auto& x : g.arguments) {
      gold_atype[x.entity_id] = x.argument_type;
      ++arg[x.argument_type].gold;
    }
    for (const auto& x : p.arguments) ++arg[x.argument_type].pred;
    for (const auto& pr : test::match_oracle(ga, pa, &allowed))
      arg[gold_atype.at(pr.gold_id)].tp_credit += pr.credit;
  }

  EvalReport r;
  r.trigger_classes = metrics_from_tallies(trig);
  r.argument_classes = metrics_from_tallies(arg);
  r.trigger_weighted_f1 = weighted_f1(r.trigger_classes);
  r.argument_weighted_f1 = weighted_f1(r.argument_classes);
  return r;
}

bool reports_match(const EvalReport& a, const EvalReport& b, double tol) {
  if (a.trigger_classes.size() != b.trigger_classes.size()) return false;
  if (a.argument_classes.size() != b.argument_classes.size()) return false;
  auto close = [tol](double x, double y) { return std::abs(x - y) <= tol; };
  for (const auto& [type, m] : a.trigger_classes) {
    const auto it = b.trigger_classes.find(type);
    if (it == b.trigger_classes.end()) return false;
    if (!close(m.precision, it->second.precision) || !close(m.recall, it->second.recall) ||
        !close(m.f1, it->second.f1) || m.gold_count != it->second.gold_count)
      return false;
  }
  for (const auto& [type, m] : a.argument_classes) {
    const auto it = b.argument_classes.find(type);
    if (it == b.argument_classes.end()) return false;
    if (!close(m.precision, it->second.precision) || !close(m.recall, it->second.recall) ||
        !close(m.f1, it->second.f1) || m.gold_count != it->second.gold_count)
      return false;
  }
  return close(a.trigger_weighted_f1, b.trigger_weighted_f1) &&
         close(a.argument_weighted_f1, b.argument_weighted_f1);
}

Dataset micro_fixture_gold() {
  Dataset gold;
  gold.variant = DatasetVariant::Mixed;

  // session m1: one exact-matchable frame, one extra trigger
  AnnotatedSession s1;
  s1.session = test::make_session(
      "m1", {test::utt(Speaker::Expert, "line up the Gyozas then fry them")});
  s1.triggers.push_back({1, {0, 0, 7}, "PLACE", std::nullopt});
  s1.triggers.push_back({2, {0, 23, 26}, "BAKE_FRY", std::nullopt});
  s1.arguments.push_back({3, {0, 12, 18}, "Object", 1});
  gold.sessions.push_back(s1);

  // session m2: an ECR chain across two utterances
  AnnotatedSession s2;
  s2.session = test::make_session(
      "m2", {test::utt(Speaker::Expert, "simmer the stock for an hour"),
             test::utt(Speaker::Interviewer, "keep it simmering gently ok")});
  s2.triggers.push_back({1, {0, 0, 6}, "SIMMER", 7});
  s2.triggers.push_back({2, {1, 8, 17}, "SIMMER", 7});
  s2.arguments.push_back({3, {0, 11, 16}, "Object", 1});
  s2.arguments.push_back({4, {0, 21, 28}, "Time", 1});
  gold.sessions.push_back(s2);

  // session m3: mixing frame with two arguments
  AnnotatedSession s3;
  s3.session = test::make_session(
      "m3", {test::utt(Speaker::Expert, "mix the batter slowly with a whisk")});
  s3.triggers.push_back({1, {0, 0, 3}, "MIX", std::nullopt});
  s3.arguments.push_back({2, {0, 8, 14}, "Object", 1});
  s3.arguments.push_back({3, {0, 15, 21}, "Manner", 1});
  gold.sessions.push_back(s3);
  return gold;
}

Dataset micro_fixture_pred(const Dataset& gold) {
  Dataset pred;
  pred.variant = DatasetVariant::Mixed;

  // m1: partial trigger span, argument linked correctly; extra trigger missed
  AnnotatedSession p1;
  p1.session = gold.sessions[0].session;
  p1.triggers.push_back({1, {0, 0, 4}, "PLACE", std::nullopt});  // partial
  p1.arguments.push_back({2, {0, 12, 18}, "Object", 1});
  pred.sessions.push_back(p1);

  // m2: argument re-attached to the chain-mate trigger; Time argument with
  // a shifted span; one spurious trigger of the wrong type
  AnnotatedSession p2;
  p2.session = gold.sessions[1].session;
  p2.triggers.push_back({1, {0, 0, 6}, "SIMMER", std::nullopt});
  p2.triggers.push_back({2, {1, 8, 17}, "SIMMER", std::nullopt});
  p2.triggers.push_back({3, {0, 17, 20}, "MIX", std::nullopt});  // spurious
  p2.arguments.push_back({4, {0, 11, 16}, "Object", 2});         // chain-mate link
  p2.arguments.push_back({5, {0, 24, 28}, "Time", 1});           // partial span
  pred.sessions.push_back(p2);

  // m3: wrong argument type on one span
  AnnotatedSession p3;
  p3.session = gold.sessions[2].session;
  p3.triggers.push_back({1, {0, 0, 3}, "MIX", std::nullopt});
  p3.arguments.push_back({2, {0, 8, 14}, "Object", 1});
  p3.arguments.push_back({3, {0, 15, 21}, "Instrument", 1});  // gold says Manner
  pred.sessions.push_back(p3);
  return pred;
}

void criterion_5_evaluator_oracle() {
  Criterion c(5, "evaluator equals the brute-force matcher on the micro-fixture");
  const Dataset gold = micro_fixture_gold();
  const Dataset pred = micro_fixture_pred(gold);

  for (const bool ecr : {true, false}) {
    EvalOptions options;
    options.ecr_allowance = ecr;
    const auto got = evaluate(gold, pred, options);
    const auto want = acceptance_oracle_report(gold, pred, options);
    c.require(reports_match(got, want, 1e-9),
              std::string("report mismatch with ecr_allowance=") +
                  (ecr ? "true" : "false"));
  }

  const auto perfect = evaluate(gold, gold);
  c.require(std::abs(perfect.trigger_weighted_f1 - 1.0) < 1e-12 &&
                std::abs(perfect.argument_weighted_f1 - 1.0) < 1e-12,
            "evaluate(g,g) != 1.0");

  Dataset empty;
  empty.variant = DatasetVariant::Mixed;
  for (const auto& g : gold.sessions) {
    AnnotatedSession bare;
    bare.session = g.session;
    empty.sessions.push_back(bare);
  }
  const auto zero = evaluate(gold, empty);
  c.require(zero.trigger_weighted_f1 == 0.0 && zero.argument_weighted_f1 == 0.0,
            "evaluate(g, empty) != 0.0");
  c.finish();
}

// ---------------------------------------------------------------------- 6

void criterion_6_ecr_gate() {
  Criterion c(6, "ECR allowance flips the chain-mate fixture, and only it");
  Dataset gold;
  gold.variant = DatasetVariant::Mixed;
  AnnotatedSession g;
  g.session = test::make_session(
      "ecr", {test::utt(Speaker::Expert, "simmer the stock then keep simmering")});
  g.triggers.push_back({1, {0, 0, 6}, "SIMMER", 7});
  g.triggers.push_back({2, {0, 27, 36}, "SIMMER", 7});
  g.arguments.push_back({3, {0, 11, 16}, "Object", 1});
  gold.sessions.push_back(g);

  Dataset pred;
  pred.variant = DatasetVariant::Mixed;
  AnnotatedSession p;
  p.session = g.session;
  p.triggers.push_back({1, {0, 0, 6}, "SIMMER", std::nullopt});
  p.triggers.push_back({2, {0, 27, 36}, "SIMMER", std::nullopt});
  p.arguments.push_back({3, {0, 11, 16}, "Object", 2});  // attaches to T2's match
  pred.sessions.push_back(p);

  EvalOptions with_gate;
  with_gate.ecr_allowance = true;
  EvalOptions without_gate;
  without_gate.ecr_allowance = false;

  const auto yes = evaluate(gold, pred, with_gate);
  const auto no = evaluate(gold, pred, without_gate);
  c.require(std::abs(yes.argument_weighted_f1 - 1.0) < 1e-12,
            "argument scored " + std::to_string(yes.argument_weighted_f1) +
                " with the allowance");
  c.require(no.argument_weighted_f1 == 0.0,
            "argument scored " + std::to_string(no.argument_weighted_f1) +
                " without the allowance");
  c.require(std::abs(yes.trigger_weighted_f1 - no.trigger_weighted_f1) < 1e-12,
            "trigger scores must not depend on the allowance");
  c.finish();
}

// ---------------------------------------------------------------------- 7

void criterion_7_self_instruct_replay() {
  Criterion c(7, "self-instruct replay: 10 candidates, expected accepted set");
  CharacterTokenizer tok;

  // Human pool over one character register; fresh candidates use disjoint
  // character sets so their char ROUGE-L stays far below the threshold.
  std::vector<DialogueSession> pool;
  const std::vector<std::string> topics = {
      "あんこうの肝は蒸して出します", "だしは昆布と鰹で引きます",
      "天ぷらの衣は冷水で薄く溶きます", "鶏は皮目から弱火で焼きます",
      "うどんは足で踏んで鍛えます",   "米は研いで三十分置きます",
      "胡麻は煎ってから擦ります",     "味噌は最後に溶き入れます"};
  for (std::size_t i = 0; i < topics.size(); ++i)
    pool.push_back(test::make_session(
        "h" + std::to_string(i), {test::utt(Speaker::Expert, topics[i]),
                                  test::utt(Speaker::Interviewer, "なるほど")}));

  const std::vector<std::string> fresh = {
      "E: 1111122222333334444455555\nI: 6789\n",
      "E: aaaaabbbbbcccccdddddeeeee\nI: fghj\n",
      "E: АААААБББББВВВВВГГГГГДДДДД\nI: ЕЖЗИ\n",
      "E: ωωωωωπππππσσσσσφφφφφχχχχχ\nI: ψζξλ\n",
      "E: ∀∀∀∀∀∃∃∃∃∃∈∈∈∈∈∋∋∋∋∋⊂⊂⊂⊂⊂\nI: ⊃∪∩∅\n",
      "E: ①①①①①②②②②②③③③③③④④④④④⑤⑤⑤⑤⑤\nI: ⑥⑦⑧⑨\n"};

  // 10 candidates: 6 fresh (accepted), 4 near-duplicates (rejected).
  const std::string dup_pool = "E: " + topics[0] + "\nI: なるほど\n";
  std::vector<std::string> replies = {fresh[0], dup_pool,  fresh[1], fresh[1],
                                      fresh[2], dup_pool,  fresh[3], fresh[0],
                                      fresh[4], fresh[5]};

  GenerationConfig config;
  config.seed = 99;
  config.accept_threshold = 0.7;

  const auto transcript =
      fs::temp_directory_path() / "sfa_acceptance_selfinstruct.jsonl";
  fs::remove(transcript);
  {
    test::ScriptedClient scripted(replies);
    RecordingChatClient recorder(scripted, transcript.string());
    const auto recorded =
        generate_pseudo_dialogues(pool, {}, recorder, config, 6, tok);
    c.require(recorded.attempts == 10, "expected 10 attempts, got " +
                                           std::to_string(recorded.attempts));
  }

  ReplayChatClient replay = ReplayChatClient::from_file(transcript.string());
  const auto result = generate_pseudo_dialogues(pool, {}, replay, config, 6, tok);

  c.require(result.accepted.size() == 6,
            "accepted " + std::to_string(result.accepted.size()) + " of 6");
  c.require(result.attempts == 10, "replay attempts " + std::to_string(result.attempts));
  c.require(result.rejected_similar == 4,
            "rejected " + std::to_string(result.rejected_similar) + " of 4");
  for (std::size_t i = 0; i < result.accepted.size(); ++i) {
    const auto expected = parse_dialogue_reply(fresh[i]);
    c.require(result.accepted[i].utterances == expected,
              "accepted[" + std::to_string(i) + "] is not fresh candidate " +
                  std::to_string(i));
    c.require(result.accepted[i].id == "pseudo-" + std::to_string(i + 1),
              "unexpected id " + result.accepted[i].id);
  }

  // Every accepted candidate scored below the threshold at acceptance time.
  std::vector<std::string> existing;
  for (const auto& s : pool) existing.push_back(session_text(s));
  for (const auto& d : result.accepted) {
    const auto [score, _] = max_similarity(dialogue_text(d), existing, tok);
    c.require(score.value < config.accept_threshold,
              "accepted candidate at similarity " + std::to_string(score.value));
    existing.push_back(dialogue_text(d));
  }

  // Post-hoc dedup never increases the max pairwise similarity.
  std::vector<DialogueSession> accepted_sessions;
  for (const auto& d : result.accepted)
    accepted_sessions.push_back({d.id, d.id, 0, d.utterances, Provenance::Pseudo});
  std::vector<std::string> texts;
  for (const auto& s : accepted_sessions) texts.push_back(session_text(s));
  const double before = max_offdiagonal(pairwise_similarity(texts, tok));
  for (std::size_t target = accepted_sessions.size(); target >= 1; --target) {
    const auto kept = dedup_to_size(accepted_sessions, target, tok);
    std::vector<std::string> kept_texts;
    for (const auto& s : kept) kept_texts.push_back(session_text(s));
    const double after = max_offdiagonal(pairwise_similarity(kept_texts, tok));
    c.require(after <= before + 1e-15,
              "dedup to " + std::to_string(target) + " raised max similarity");
  }
  fs::remove(transcript);
  c.finish();
}

// ---------------------------------------------------------------------- 8

void criterion_8_end_to_end() {
  Criterion c(8, "deterministic sweep: mock-labeled pool, identity trainer");
  const Taxonomy tax = default_taxonomy();
  CharacterTokenizer tok;

  // Pseudo pool produced through the mock labeling path.
  LabelingConfig lc;
  lc.anchor_session_id = "anchor";
  lc.n_similar_fewshots = 1;
  lc.max_concurrency = 4;

  AnnotatedSession anchor;
  anchor.session =
      test::make_session("anchor", {test::utt(Speaker::Expert, "かき混ぜます")});
  anchor.triggers.push_back({1, {0, 0, 5}, "MIX", std::nullopt});
  AnnotatedSession exemplar;
  exemplar.session =
      test::make_session("ex0", {test::utt(Speaker::Expert, "強火で焼きます")});
  exemplar.triggers.push_back({1, {0, 3, 5}, "BAKE_FRY", std::nullopt});
  const std::vector<AnnotatedSession> exemplar_pool = {anchor, exemplar};

  std::vector<DialogueSession> to_label;
  ReplayChatClient replay;
  for (int i = 0; i < 12; ++i) {
    const std::string noun = "具材" + std::to_string(i);
    to_label.push_back(test::make_session(
        "p" + std::to_string(i), {test::utt(Speaker::Expert, noun + "を混ぜます")}));
    const auto req = build_labeling_prompt(
        to_label.back(), select_label_fewshots(to_label.back(), exemplar_pool, lc, tok),
        tax, lc);
    const std::string reply = "Step 1:\nE: <E1>" + noun +
                              "</E1>を<E2>混ぜます</E2>\nStep 2:\nE2: MIX\n"
                              "Step 3:\n(E1, Object, E2)\n";
    replay.add(request_digest(req), {reply, 20, 10});
  }
  const auto labeled =
      label_sessions(to_label, exemplar_pool, replay, lc, tax, tok);
  c.require(labeled.annotated.size() == 12 && labeled.failures.empty(),
            "mock labeling produced " + std::to_string(labeled.annotated.size()) +
                " sessions, " + std::to_string(labeled.failures.size()) + " failures");

  // Sweep arm over that pool with the identity trainer.
  Config config = default_config();
  config.cost_model.hh_text = Money::parse("0.25");
  config.cost_model.hh_label = Money::parse("0.25");
  config.cost_model.hp_text = Money::parse("0.25");
  config.cost_model.hp_label = Money::parse("0.05");
  config.cost_model.pp_text = Money::parse("0.08");
  config.cost_model.pp_label = Money::parse("0.12");
  config.pp_budgets = {Money::parse("1"), Money::parse("2")};
  config.ratios = {0.0, 0.5, 1.0};
  config.seeds = {1, 2};
  config.trainer_command =
      std::string(STUB_TRAINER_PATH) +
      " --mode identity --train {train} --valid {valid} --test {test} --pred {pred}";

  SweepInputs inputs;
  inputs.hh_pool.variant = DatasetVariant::Mixed;
  SplitMix64 rng(31415);
  for (int i = 0; i < 30; ++i)
    inputs.hh_pool.sessions.push_back(
        test::random_session(rng, tax, "hh" + std::to_string(i)));
  inputs.pseudo_pool.variant = DatasetVariant::Mixed;
  inputs.pseudo_pool.sessions = labeled.annotated;
  for (int i = 0; i < 4; ++i) {
    for (;;) {
      auto t = test::random_session(rng, tax, "t" + std::to_string(i));
      if (!t.triggers.empty() && !t.arguments.empty()) {
        inputs.test.push_back(t);
        break;
      }
    }
  }
  inputs.valid = inputs.test;

  auto run_once = [&](const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("sfa_acceptance_sweep_" + tag);
    std::error_code ec;
    fs::remove_all(dir, ec);
    const auto result =
        run_sweep(config, DatasetVariant::PseudoPseudo, inputs, dir.string());
    emit_report(result, config, DatasetVariant::PseudoPseudo, dir.string());
    std::ifstream in(dir / "sweep.csv", std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::make_pair(result, buf.str());
  };

  const auto [r1, csv1] = run_once("one");
  const auto [r2, csv2] = run_once("two");
  c.require(r1.rows.size() == 12, std::to_string(r1.rows.size()) + " rows");
  for (const auto& row : r1.rows) {
    c.require(row.feasible, "unexpected infeasible row");
    c.require(std::abs(row.trigger_f1 - 1.0) < 1e-12 &&
                  std::abs(row.argument_f1 - 1.0) < 1e-12,
              "identity trainer row not 1.0");
  }
  c.require(!csv1.empty() && csv1 == csv2, "sweep.csv differs between runs");
  c.finish(120.0);
}

// ---------------------------------------------------------------------- 9

void criterion_9_grid_feasibility() {
  Criterion c(9, "PP-arm infeasibility fires exactly when demand exceeds the pool");
  const Config config = default_config();
  const auto plans = plan_grid(config.pp_budgets, config.ratios,
                               DatasetVariant::PseudoPseudo, config.cost_model,
                               config.pools);
  c.require(plans.size() == 55, std::to_string(plans.size()) + " plans");

  bool saw_infeasible = false, saw_feasible = false;
  for (const auto& p : plans) {
    const bool want = p.n_pseudo <= config.pools.pseudo_pseudo &&
                      p.n_hh <= config.pools.human_human;
    c.require(p.feasible == want,
              "plan " + p.budget.str() + "/" + std::to_string(p.hh_ratio) +
                  " flagged " + (p.feasible ? "feasible" : "infeasible"));
    saw_infeasible |= !p.feasible;
    saw_feasible |= p.feasible;
  }
  c.require(saw_infeasible && saw_feasible, "grid should mix both outcomes");

  // The cited example: $1,600 at ratio 0.0 demands 8,177 > 4,293.
  const auto example = plan_mixture(Money::from_dollars(1600), 0.0,
                                    DatasetVariant::PseudoPseudo, config.cost_model);
  c.require(example.n_pseudo == 8177,
            "demand " + std::to_string(example.n_pseudo) + ", want 8177");
  c.require(example.n_pseudo > config.pools.pseudo_pseudo, "example not infeasible");
  c.finish();
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");
  criterion_1_table1();
  criterion_2_rouge_oracle();
  criterion_3_roundtrips();
  criterion_4_rejections();
  criterion_5_evaluator_oracle();
  criterion_6_ecr_gate();
  criterion_7_self_instruct_replay();
  criterion_8_end_to_end();
  criterion_9_grid_feasibility();
  if (g_failures == 0) {
    std::printf("all 9 criteria passed\n");
    return 0;
  }
  std::printf("%d criteria FAILED\n", g_failures);
  return 1;
}
