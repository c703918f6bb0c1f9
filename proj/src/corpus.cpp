#include "sfa/corpus.hpp"

#include <algorithm>
#include <set>

#include "sfa/utf8.hpp"

namespace sfa {

const char* to_string(Speaker s) {
  return s == Speaker::Expert ? "E" : "I";
}

const char* to_string(Provenance p) {
  return p == Provenance::Human ? "Human" : "Pseudo";
}

Speaker speaker_from_string(const std::string& s) {
  if (s == "E") return Speaker::Expert;
  if (s == "I") return Speaker::Interviewer;
  throw ParseError("unknown speaker '" + s + "' (expected \"E\" or \"I\")");
}

Provenance provenance_from_string(const std::string& s) {
  if (s == "Human") return Provenance::Human;
  if (s == "Pseudo") return Provenance::Pseudo;
  throw ParseError("unknown provenance '" + s + "'");
}

const char* to_string(DatasetVariant v) {
  switch (v) {
    case DatasetVariant::HumanHuman: return "HumanHuman";
    case DatasetVariant::HumanPseudo: return "HumanPseudo";
    case DatasetVariant::PseudoPseudo: return "PseudoPseudo";
    case DatasetVariant::Mixed: return "Mixed";
  }
  return "?";
}

DatasetVariant dataset_variant_from_string(const std::string& s) {
  if (s == "HumanHuman") return DatasetVariant::HumanHuman;
  if (s == "HumanPseudo") return DatasetVariant::HumanPseudo;
  if (s == "PseudoPseudo") return DatasetVariant::PseudoPseudo;
  if (s == "Mixed") return DatasetVariant::Mixed;
  throw ParseError("unknown dataset variant '" + s + "'");
}

Taxonomy default_taxonomy() {
  Taxonomy t;
  t.trigger_types = {"PLACE", "BAKE_FRY", "SIMMER", "MIX"};
  t.argument_types = {"Object", "Time", "Temperature", "Manner", "Instrument"};
  t.definitions = {
      {"PLACE", "The predicate of an event where something is put, set, or "
                "lined up at a location."},
      {"BAKE_FRY", "The predicate of an event where something is baked, "
                   "fried, or grilled with heat."},
      {"SIMMER", "The predicate of an event where something is simmered, "
                 "boiled, or stewed in liquid."},
      {"MIX", "The predicate of an event where ingredients are mixed, "
              "stirred, or combined."},
      {"Object", "The thing the event acts upon."},
      {"Time", "When the event happens or how long it takes."},
      {"Temperature", "The heat level at which the event happens."},
      {"Manner", "How the event is carried out."},
      {"Instrument", "The tool or vessel used to carry out the event."},
  };
  return t;
}

void validate(const Utterance& u) {
  if (u.text.empty())
    throw InvariantViolation("utterance text must be non-empty");
  if (u.text.find('\n') != std::string::npos ||
      u.text.find('\r') != std::string::npos)
    throw InvariantViolation("utterance text must not contain newlines");
  if (!utf8::is_valid(u.text))
    throw InvariantViolation("utterance text is not valid UTF-8");
}

void validate(const Dialogue& d) {
  if (d.id.empty()) throw InvariantViolation("dialogue id must be non-empty");
  if (d.utterances.empty())
    throw InvariantViolation("dialogue '" + d.id + "' has no utterances");
  for (const auto& u : d.utterances) validate(u);
}

void validate(const DialogueSession& s) {
  if (s.id.empty()) throw InvariantViolation("session id must be non-empty");
  if (s.index_in_dialogue < 0)
    throw InvariantViolation("session '" + s.id + "': negative index_in_dialogue");
  if (s.utterances.empty())
    throw InvariantViolation("session '" + s.id + "' has no utterances");
  for (const auto& u : s.utterances) validate(u);
}

namespace {

void validate_span(const Span& sp, const DialogueSession& s, int entity_id) {
  const std::string where =
      "session '" + s.id + "', entity " + std::to_string(entity_id);
  if (sp.utterance_index < 0 ||
      sp.utterance_index >= static_cast<int>(s.utterances.size()))
    throw InvariantViolation(where + ": utterance_index out of range");
  if (sp.start_char < 0 || sp.start_char >= sp.end_char)
    throw InvariantViolation(where + ": span must satisfy 0 <= start < end");
  const auto len = utf8::length(s.utterances[sp.utterance_index].text);
  if (static_cast<std::size_t>(sp.end_char) > len)
    throw InvariantViolation(where + ": span end " + std::to_string(sp.end_char) +
                             " exceeds utterance length " + std::to_string(len));
}

bool spans_overlap(const Span& a, const Span& b) {
  return a.utterance_index == b.utterance_index && a.start_char < b.end_char &&
         b.start_char < a.end_char;
}

}  // namespace

void validate(const AnnotatedSession& a) {
  validate(a.session);
  const std::string& sid = a.session.id;

  std::set<int> ids;
  std::vector<std::pair<Span, int>> spans;
  auto check_entity = [&](int eid, const Span& sp) {
    if (eid <= 0)
      throw InvariantViolation("session '" + sid + "': entity id " +
                               std::to_string(eid) + " must be positive");
    if (!ids.insert(eid).second)
      throw InvariantViolation("session '" + sid + "': duplicate entity id " +
                               std::to_string(eid));
    validate_span(sp, a.session, eid);
    spans.emplace_back(sp, eid);
  };

  std::set<int> trigger_ids;
  for (const auto& t : a.triggers) {
    check_entity(t.entity_id, t.span);
    trigger_ids.insert(t.entity_id);
    if (t.trigger_type.empty())
      throw InvariantViolation("session '" + sid + "': empty trigger type");
  }
  for (const auto& g : a.arguments) {
    check_entity(g.entity_id, g.span);
    if (g.argument_type.empty())
      throw InvariantViolation("session '" + sid + "': empty argument type");
    if (!trigger_ids.count(g.trigger_entity_id))
      throw InvariantViolation(
          "session '" + sid + "': argument " + std::to_string(g.entity_id) +
          " links to nonexistent trigger " + std::to_string(g.trigger_entity_id));
  }

  std::sort(spans.begin(), spans.end());
  for (std::size_t i = 1; i < spans.size(); ++i) {
    if (spans_overlap(spans[i - 1].first, spans[i].first))
      throw InvariantViolation("session '" + sid + "': entity spans " +
                               std::to_string(spans[i - 1].second) + " and " +
                               std::to_string(spans[i].second) + " overlap");
  }
}

void validate(const Dataset& d) {
  std::set<std::string> seen;
  for (const auto& a : d.sessions) {
    validate(a);
    if (!seen.insert(a.session.id).second)
      throw InvariantViolation("dataset: duplicate session id '" + a.session.id + "'");
    if (d.variant == DatasetVariant::Mixed) continue;
    const auto want_source = d.variant == DatasetVariant::PseudoPseudo
                                 ? Provenance::Pseudo
                                 : Provenance::Human;
    const auto want_label = d.variant == DatasetVariant::HumanHuman
                                ? Provenance::Human
                                : Provenance::Pseudo;
    if (a.session.source != want_source || a.label_source != want_label)
      throw InvariantViolation("dataset variant " +
                               std::string(to_string(d.variant)) +
                               " inconsistent with session '" + a.session.id +
                               "' (source, label_source)");
  }
}

void validate(const Taxonomy& t) {
  if (t.trigger_types.empty() || t.argument_types.empty())
    throw InvariantViolation("taxonomy: trigger and argument type sets must be non-empty");
  for (const auto& tt : t.trigger_types)
    if (t.argument_types.count(tt))
      throw InvariantViolation("taxonomy: type '" + tt +
                               "' appears as both trigger and argument type");
}

void validate_types(const AnnotatedSession& a, const Taxonomy& taxonomy) {
  for (const auto& t : a.triggers)
    if (!taxonomy.is_trigger(t.trigger_type))
      throw InvariantViolation("session '" + a.session.id + "': trigger type '" +
                               t.trigger_type + "' not in taxonomy");
  for (const auto& g : a.arguments)
    if (!taxonomy.is_argument(g.argument_type))
      throw InvariantViolation("session '" + a.session.id + "': argument type '" +
                               g.argument_type + "' not in taxonomy");
}

std::vector<DialogueSession> split_dialogue(const Dialogue& dialogue, int window) {
  if (dialogue.utterances.empty())
    throw EmptyDialogue("dialogue '" + dialogue.id + "' has no utterances");
  if (window < 2) throw Error("split_dialogue: window must be >= 2");

  const int n = static_cast<int>(dialogue.utterances.size());
  std::vector<int> sizes;
  for (int done = 0; done < n; done += window)
    sizes.push_back(std::min(window, n - done));

  // ceil(window/3): a short tail merges into the previous session.
  const int min_tail = (window + 2) / 3;
  if (sizes.size() > 1 && sizes.back() < min_tail) {
    sizes[sizes.size() - 2] += sizes.back();
    sizes.pop_back();
  }

  std::vector<DialogueSession> out;
  out.reserve(sizes.size());
  int cursor = 0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    DialogueSession s;
    s.id = dialogue.id + "#" + std::to_string(i);
    s.parent_dialogue_id = dialogue.id;
    s.index_in_dialogue = static_cast<int>(i);
    s.source = dialogue.source;
    s.utterances.assign(dialogue.utterances.begin() + cursor,
                        dialogue.utterances.begin() + cursor + sizes[i]);
    cursor += sizes[i];
    out.push_back(std::move(s));
  }
  return out;
}

std::string session_text(const DialogueSession& s) {
  std::string out;
  for (std::size_t i = 0; i < s.utterances.size(); ++i) {
    if (i > 0) out += '\n';
    out += s.utterances[i].text;
  }
  return out;
}

std::string dialogue_text(const Dialogue& d) {
  std::string out;
  for (std::size_t i = 0; i < d.utterances.size(); ++i) {
    if (i > 0) out += '\n';
    out += d.utterances[i].text;
  }
  return out;
}

}  // namespace sfa
