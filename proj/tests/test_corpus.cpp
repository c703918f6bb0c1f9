#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sfa/corpus.hpp"
#include "sfa/corpus_io.hpp"
#include "sfa/rng.hpp"
#include "sfa/stats.hpp"
#include "testutil.hpp"

using namespace sfa;
namespace fs = std::filesystem;

namespace {

Dialogue make_dialogue(int n_utts) {
  Dialogue d;
  d.id = "d1";
  d.source = Provenance::Human;
  for (int i = 0; i < n_utts; ++i)
    d.utterances.push_back({i % 2 == 0 ? Speaker::Expert : Speaker::Interviewer,
                            "utterance " + std::to_string(i)});
  return d;
}

std::vector<int> session_sizes(const std::vector<DialogueSession>& sessions) {
  std::vector<int> out;
  for (const auto& s : sessions) out.push_back(static_cast<int>(s.utterances.size()));
  return out;
}

}  // namespace

TEST_CASE("split_dialogue windows and merges the remainder") {
  CHECK(session_sizes(split_dialogue(make_dialogue(25), 10)) ==
        std::vector<int>{10, 10, 5});
  CHECK(session_sizes(split_dialogue(make_dialogue(10), 10)) == std::vector<int>{10});
  // remainder 1 < ceil(10/3) = 4 merges into the previous session
  CHECK(session_sizes(split_dialogue(make_dialogue(21), 10)) ==
        std::vector<int>{10, 11});
  CHECK(session_sizes(split_dialogue(make_dialogue(3), 10)) == std::vector<int>{3});

  const auto sessions = split_dialogue(make_dialogue(25), 10);
  CHECK(sessions[0].id == "d1#0");
  CHECK(sessions[2].id == "d1#2");
  CHECK(sessions[1].index_in_dialogue == 1);
  CHECK(sessions[1].parent_dialogue_id == "d1");
}

TEST_CASE("split_dialogue partition property") {
  SplitMix64 rng(7);
  for (int round = 0; round < 200; ++round) {
    const int n = 1 + static_cast<int>(rng.below(40));
    const int window = 2 + static_cast<int>(rng.below(12));
    const Dialogue d = make_dialogue(n);
    const auto sessions = split_dialogue(d, window);
    const int max_merged = window + (window + 2) / 3 - 1;
    std::vector<Utterance> flat;
    for (const auto& s : sessions) {
      CHECK(static_cast<int>(s.utterances.size()) <= max_merged);
      flat.insert(flat.end(), s.utterances.begin(), s.utterances.end());
    }
    CHECK(flat == d.utterances);
    for (std::size_t i = 0; i < sessions.size(); ++i)
      CHECK(sessions[i].index_in_dialogue == static_cast<int>(i));
  }
}

TEST_CASE("split_dialogue errors") {
  Dialogue empty;
  empty.id = "e";
  CHECK_THROWS_AS(split_dialogue(empty, 10), EmptyDialogue);
  CHECK_THROWS_AS(split_dialogue(make_dialogue(5), 1), Error);
}

TEST_CASE("corpus write/read round trip") {
  SplitMix64 rng(13);
  const Taxonomy tax = default_taxonomy();
  std::vector<AnnotatedSession> sessions;
  for (int i = 0; i < 3; ++i)
    sessions.push_back(test::random_session(rng, tax, "s" + std::to_string(i)));
  sessions[1].triggers.front().ecr_chain_id = 7;  // exercise the optional field

  std::stringstream buf;
  write_corpus(sessions, buf);
  const auto back = read_corpus(buf, "<buf>");
  REQUIRE(back.size() == sessions.size());
  for (std::size_t i = 0; i < sessions.size(); ++i) CHECK(back[i] == sessions[i]);
}

TEST_CASE("corpus serialization round trip property") {
  SplitMix64 rng(99);
  const Taxonomy tax = default_taxonomy();
  for (int i = 0; i < 100; ++i) {
    const auto a = test::random_session(rng, tax, "p" + std::to_string(i));
    const auto back = session_from_json_line(to_json_line(a));
    CHECK(back == a);
  }
}

TEST_CASE("read_corpus rejects invariant violations with the session id") {
  // span end beyond the utterance length
  const std::string bad_span =
      R"({"id":"x1","parent_dialogue_id":"x","index_in_dialogue":0,"source":"Human",)"
      R"("label_source":"Human","utterances":[{"speaker":"E","text":"short"}],)"
      R"("triggers":[{"eid":1,"u":0,"start":0,"end":99,"type":"PLACE"}],"arguments":[]})";
  std::stringstream in1(bad_span);
  CHECK_THROWS_WITH_AS(read_corpus(in1, "<t>"),
                       doctest::Contains("span end"), InvariantViolation);

  // overlapping entity spans in one utterance
  const std::string overlap =
      R"({"id":"x2","parent_dialogue_id":"x","index_in_dialogue":0,"source":"Human",)"
      R"("label_source":"Human","utterances":[{"speaker":"E","text":"abcdefgh"}],)"
      R"("triggers":[{"eid":1,"u":0,"start":0,"end":4,"type":"PLACE"},)"
      R"({"eid":2,"u":0,"start":3,"end":6,"type":"MIX"}],"arguments":[]})";
  std::stringstream in2(overlap);
  CHECK_THROWS_WITH_AS(read_corpus(in2, "<t>"), doctest::Contains("overlap"),
                       InvariantViolation);

  // argument linking to a nonexistent trigger
  const std::string dangling =
      R"({"id":"x3","parent_dialogue_id":"x","index_in_dialogue":0,"source":"Human",)"
      R"("label_source":"Human","utterances":[{"speaker":"E","text":"abcdefgh"}],)"
      R"("triggers":[],"arguments":[{"eid":1,"u":0,"start":0,"end":2,"type":"Object",)"
      R"("trigger_eid":9}]})";
  std::stringstream in3(dangling);
  CHECK_THROWS_WITH_AS(read_corpus(in3, "<t>"),
                       doctest::Contains("nonexistent trigger"), InvariantViolation);

  // broken JSON carries the line number
  std::stringstream in4("{not json");
  try {
    read_corpus(in4, "<t>");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
  }
}

TEST_CASE("session and dialogue files reject duplicate ids") {
  namespace fss = std::filesystem;
  const auto dir = fss::temp_directory_path();
  const auto spath = (dir / "sfa_dup_sessions.jsonl").string();
  {
    std::ofstream out(spath, std::ios::binary);
    const char* line =
        R"({"id":"s1","parent_dialogue_id":"d","index_in_dialogue":0,)"
        R"("source":"Human","utterances":[{"speaker":"E","text":"hi"}]})";
    out << line << '\n' << line << '\n';
  }
  CHECK_THROWS_WITH_AS(read_sessions(spath), doctest::Contains("duplicate"),
                       InvariantViolation);
  fss::remove(spath);

  const auto dpath = (dir / "sfa_dup_dialogues.jsonl").string();
  {
    std::ofstream out(dpath, std::ios::binary);
    const char* line =
        R"({"id":"d1","source":"Human","utterances":[{"speaker":"E","text":"hi"}]})";
    out << line << '\n' << line << '\n';
  }
  CHECK_THROWS_WITH_AS(read_dialogues(dpath), doctest::Contains("duplicate"),
                       InvariantViolation);
  fss::remove(dpath);
}

TEST_CASE("dataset variant consistency") {
  SplitMix64 rng(5);
  const Taxonomy tax = default_taxonomy();
  Dataset d;
  d.variant = DatasetVariant::HumanHuman;
  auto a = test::random_session(rng, tax, "v1");
  a.session.source = Provenance::Human;
  a.label_source = Provenance::Human;
  d.sessions.push_back(a);
  CHECK_NOTHROW(validate(d));

  d.sessions[0].label_source = Provenance::Pseudo;
  CHECK_THROWS_AS(validate(d), InvariantViolation);

  d.variant = DatasetVariant::Mixed;  // mixed skips the pair check
  CHECK_NOTHROW(validate(d));
}

TEST_CASE("utterance invariants") {
  CHECK_THROWS_AS(validate(Utterance{Speaker::Expert, ""}), InvariantViolation);
  CHECK_THROWS_AS(validate(Utterance{Speaker::Expert, "a\nb"}), InvariantViolation);
  CHECK_NOTHROW(validate(Utterance{Speaker::Expert, "ok"}));
}

TEST_CASE("length_stats basics") {
  CharacterTokenizer tok;
  std::vector<DialogueSession> sessions;
  sessions.push_back(test::make_session("a#0", {test::utt(Speaker::Expert, "0123456789")}));
  sessions.push_back(test::make_session(
      "b#0", {test::utt(Speaker::Expert, "0123456789"),
              test::utt(Speaker::Interviewer, "0123")}));
  const auto st = length_stats(sessions, tok, 8);
  CHECK(st.mean == doctest::Approx(12.0));
  CHECK(st.stddev == doctest::Approx(2.0));
  // lengths 10 and 14 with bucket width 8 -> buckets 8 and 8? no: 10/8=1, 14/8=1
  REQUIRE(st.histogram.size() == 1);
  CHECK(st.histogram[0] == std::pair<long, long>{8, 2});

  const auto single = length_stats({sessions[0]}, tok, 8);
  CHECK(single.stddev == doctest::Approx(0.0));

  CHECK_THROWS_AS(length_stats(std::vector<DialogueSession>{}, tok), EmptyDataset);
}

TEST_CASE("length_stats agrees with an independent byte-level counter") {
  // Counts scalar values by skipping UTF-8 continuation bytes; shares no
  // code with the tokenizer.
  auto independent_count = [](const std::string& s) {
    long n = 0;
    for (unsigned char c : s)
      if ((c & 0xC0) != 0x80) ++n;
    return n;
  };
  SplitMix64 rng(21);
  const Taxonomy tax = default_taxonomy();
  std::vector<DialogueSession> sessions;
  long total = 0;
  for (int i = 0; i < 20; ++i) {
    auto a = test::random_session(rng, tax, "f" + std::to_string(i));
    for (const auto& u : a.session.utterances) total += independent_count(u.text);
    sessions.push_back(a.session);
  }
  CharacterTokenizer tok;
  const auto st = length_stats(sessions, tok);
  CHECK(st.mean == doctest::Approx(static_cast<double>(total) / sessions.size())
                       .epsilon(1e-12));
}

TEST_CASE("label_distribution counts and densities") {
  SplitMix64 rng(31);
  const Taxonomy tax = default_taxonomy();
  Dataset d;
  d.variant = DatasetVariant::Mixed;

  AnnotatedSession one;
  one.session = test::make_session("l#0", {test::utt(Speaker::Expert, "line up Gyozas")});
  one.label_source = Provenance::Human;
  one.triggers.push_back({1, {0, 0, 7}, "PLACE", std::nullopt});
  one.arguments.push_back({2, {0, 8, 14}, "Object", 1});
  d.sessions.push_back(one);

  const auto dist = label_distribution(d);
  REQUIRE(dist.triggers.size() == 1);
  REQUIRE(dist.arguments.size() == 1);
  CHECK(dist.triggers.at("PLACE").count == 1);
  CHECK(dist.triggers.at("PLACE").per_session_density == doctest::Approx(1.0));
  CHECK(dist.arguments.at("Object").count == 1);
  CHECK(dist.triggers.count("SIMMER") == 0);  // unobserved types never appear

  // Sum over types equals the total entity count, on random data.
  for (int i = 0; i < 10; ++i)
    d.sessions.push_back(test::random_session(rng, tax, "ld" + std::to_string(i)));
  const auto dist2 = label_distribution(d);
  long trig_sum = 0, arg_sum = 0, want_trig = 0, want_arg = 0;
  for (const auto& [_, st] : dist2.triggers) trig_sum += st.count;
  for (const auto& [_, st] : dist2.arguments) arg_sum += st.count;
  for (const auto& a : d.sessions) {
    want_trig += static_cast<long>(a.triggers.size());
    want_arg += static_cast<long>(a.arguments.size());
  }
  CHECK(trig_sum == want_trig);
  CHECK(arg_sum == want_arg);

  CHECK_THROWS_AS(label_distribution(Dataset{}), EmptyDataset);
}

TEST_CASE("label_distribution matches an independent counting pass") {
  // Grep-style counter over the serialized JSONL, independent of the
  // stats implementation.
  SplitMix64 rng(77);
  const Taxonomy tax = default_taxonomy();
  Dataset d;
  d.variant = DatasetVariant::Mixed;
  for (int i = 0; i < 25; ++i)
    d.sessions.push_back(test::random_session(rng, tax, "g" + std::to_string(i)));

  std::stringstream buf;
  write_corpus(d.sessions, buf);
  std::map<std::string, long> counted;
  std::string line;
  while (std::getline(buf, line)) {
    for (const std::string& type : tax.trigger_types) {
      const std::string needle = "\"type\":\"" + type + "\"";
      for (std::size_t pos = 0; (pos = line.find(needle, pos)) != std::string::npos;
           pos += needle.size())
        ++counted[type];
    }
  }
  const auto dist = label_distribution(d);
  for (const auto& type : tax.trigger_types) {
    const long want = counted.count(type) ? counted.at(type) : 0;
    const long got = dist.triggers.count(type) ? dist.triggers.at(type).count : 0;
    CHECK(got == want);
  }
}
