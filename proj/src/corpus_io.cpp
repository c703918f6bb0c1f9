#include "sfa/corpus_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace sfa {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json span_to_json(const Span& sp) {
  return {{"u", sp.utterance_index}, {"start", sp.start_char}, {"end", sp.end_char}};
}

Span span_from_json(const nlohmann::json& j) {
  Span sp;
  sp.utterance_index = j.at("u").get<int>();
  sp.start_char = j.at("start").get<int>();
  sp.end_char = j.at("end").get<int>();
  return sp;
}

ordered_json session_to_json(const AnnotatedSession& a) {
  ordered_json j;
  j["id"] = a.session.id;
  j["parent_dialogue_id"] = a.session.parent_dialogue_id;
  j["index_in_dialogue"] = a.session.index_in_dialogue;
  j["source"] = to_string(a.session.source);
  j["label_source"] = to_string(a.label_source);
  auto& utts = j["utterances"] = ordered_json::array();
  for (const auto& u : a.session.utterances)
    utts.push_back({{"speaker", to_string(u.speaker)}, {"text", u.text}});
  auto& trig = j["triggers"] = ordered_json::array();
  for (const auto& t : a.triggers) {
    ordered_json e{{"eid", t.entity_id}};
    e.update(span_to_json(t.span));
    e["type"] = t.trigger_type;
    if (t.ecr_chain_id) e["ecr"] = *t.ecr_chain_id;
    trig.push_back(std::move(e));
  }
  auto& args = j["arguments"] = ordered_json::array();
  for (const auto& g : a.arguments) {
    ordered_json e{{"eid", g.entity_id}};
    e.update(span_to_json(g.span));
    e["type"] = g.argument_type;
    e["trigger_eid"] = g.trigger_entity_id;
    args.push_back(std::move(e));
  }
  return j;
}

AnnotatedSession session_from_json(const nlohmann::json& j) {
  AnnotatedSession a;
  a.session.id = j.at("id").get<std::string>();
  a.session.parent_dialogue_id = j.at("parent_dialogue_id").get<std::string>();
  a.session.index_in_dialogue = j.at("index_in_dialogue").get<int>();
  a.session.source = provenance_from_string(j.at("source").get<std::string>());
  a.label_source = provenance_from_string(j.at("label_source").get<std::string>());
  for (const auto& u : j.at("utterances")) {
    Utterance utt;
    utt.speaker = speaker_from_string(u.at("speaker").get<std::string>());
    utt.text = u.at("text").get<std::string>();
    a.session.utterances.push_back(std::move(utt));
  }
  for (const auto& e : j.at("triggers")) {
    TriggerEntity t;
    t.entity_id = e.at("eid").get<int>();
    t.span = span_from_json(e);
    t.trigger_type = e.at("type").get<std::string>();
    if (e.contains("ecr")) t.ecr_chain_id = e.at("ecr").get<int>();
    a.triggers.push_back(std::move(t));
  }
  for (const auto& e : j.at("arguments")) {
    ArgumentEntity g;
    g.entity_id = e.at("eid").get<int>();
    g.span = span_from_json(e);
    g.argument_type = e.at("type").get<std::string>();
    g.trigger_entity_id = e.at("trigger_eid").get<int>();
    a.arguments.push_back(std::move(g));
  }
  return a;
}

}  // namespace

std::string to_json_line(const AnnotatedSession& a) {
  return session_to_json(a).dump();
}

AnnotatedSession session_from_json_line(const std::string& line, int line_no) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
  }
  try {
    return session_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad session record: ") + e.what(), line_no);
  }
}

std::vector<AnnotatedSession> read_corpus(std::istream& in, const std::string& origin) {
  std::vector<AnnotatedSession> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    AnnotatedSession a = session_from_json_line(line, line_no);
    try {
      validate(a);
    } catch (const InvariantViolation& e) {
      throw InvariantViolation(origin + " line " + std::to_string(line_no) + ": " +
                               e.what());
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<AnnotatedSession> read_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file: " + path);
  return read_corpus(in, path);
}

void write_corpus(const std::vector<AnnotatedSession>& sessions, std::ostream& out) {
  for (const auto& a : sessions) out << to_json_line(a) << '\n';
}

void write_corpus(const std::vector<AnnotatedSession>& sessions,
                  const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write corpus file: " + path);
  write_corpus(sessions, out);
  if (!out) throw IoError("write failed: " + path);
}

std::vector<Dialogue> read_dialogues(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dialogue file: " + path);
  std::vector<Dialogue> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    Dialogue d;
    try {
      d.id = j.at("id").get<std::string>();
      d.source = provenance_from_string(j.at("source").get<std::string>());
      for (const auto& u : j.at("utterances")) {
        Utterance utt;
        utt.speaker = speaker_from_string(u.at("speaker").get<std::string>());
        utt.text = u.at("text").get<std::string>();
        d.utterances.push_back(std::move(utt));
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad dialogue record: ") + e.what(), line_no);
    }
    validate(d);
    out.push_back(std::move(d));
  }
  std::set<std::string> ids;
  for (const auto& d : out)
    if (!ids.insert(d.id).second)
      throw InvariantViolation(path + ": duplicate dialogue id '" + d.id + "'");
  return out;
}

std::vector<DialogueSession> read_sessions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open session file: " + path);
  std::vector<DialogueSession> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    DialogueSession s;
    try {
      s.id = j.at("id").get<std::string>();
      s.parent_dialogue_id = j.value("parent_dialogue_id", s.id);
      s.index_in_dialogue = j.value("index_in_dialogue", 0);
      s.source = provenance_from_string(j.at("source").get<std::string>());
      for (const auto& u : j.at("utterances")) {
        Utterance utt;
        utt.speaker = speaker_from_string(u.at("speaker").get<std::string>());
        utt.text = u.at("text").get<std::string>();
        s.utterances.push_back(std::move(utt));
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad session record: ") + e.what(), line_no);
    }
    validate(s);
    out.push_back(std::move(s));
  }
  std::set<std::string> ids;
  for (const auto& s : out)
    if (!ids.insert(s.id).second)
      throw InvariantViolation(path + ": duplicate session id '" + s.id + "'");
  return out;
}

void write_sessions(const std::vector<DialogueSession>& sessions,
                    const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write session file: " + path);
  for (const auto& s : sessions) {
    ordered_json j;
    j["id"] = s.id;
    j["parent_dialogue_id"] = s.parent_dialogue_id;
    j["index_in_dialogue"] = s.index_in_dialogue;
    j["source"] = to_string(s.source);
    auto& utts = j["utterances"] = ordered_json::array();
    for (const auto& u : s.utterances)
      utts.push_back({{"speaker", to_string(u.speaker)}, {"text", u.text}});
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

void write_dialogues(const std::vector<Dialogue>& dialogues, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write dialogue file: " + path);
  for (const auto& d : dialogues) {
    ordered_json j;
    j["id"] = d.id;
    j["source"] = to_string(d.source);
    auto& utts = j["utterances"] = ordered_json::array();
    for (const auto& u : d.utterances)
      utts.push_back({{"speaker", to_string(u.speaker)}, {"text", u.text}});
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace sfa
