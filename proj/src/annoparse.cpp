#include "sfa/annoparse.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "sfa/unicode_norm.hpp"
#include "sfa/utf8.hpp"

namespace sfa {

const char* to_string(TranscriptErrorKind kind) {
  switch (kind) {
    case TranscriptErrorKind::MissingStepHeader: return "MissingStepHeader";
    case TranscriptErrorKind::MalformedTag: return "MalformedTag";
    case TranscriptErrorKind::DuplicateTagId: return "DuplicateTagId";
    case TranscriptErrorKind::ContextAltered: return "ContextAltered";
    case TranscriptErrorKind::UnknownType: return "UnknownType";
    case TranscriptErrorKind::DanglingReference: return "DanglingReference";
    case TranscriptErrorKind::OrphanEntity: return "OrphanEntity";
    case TranscriptErrorKind::UtteranceCountMismatch: return "UtteranceCountMismatch";
  }
  return "?";
}

namespace {

using Kind = TranscriptErrorKind;

[[noreturn]] void fail(Kind kind, const std::string& msg) {
  throw TranscriptError(kind, msg);
}

std::string rstrip(std::string s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.pop_back();
  return s;
}

std::string strip(std::string s) {
  s = rstrip(std::move(s));
  std::size_t i = 0;
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  return s.substr(i);
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      lines.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty() && cur.back() == '\r') cur.pop_back();
  lines.push_back(std::move(cur));
  return lines;
}

// Whitespace eligible for per-utterance trimming.
bool is_trim_ws(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\f' || c == U'\v' || c == 0x00A0 ||
         c == 0x3000;
}

int parse_tag_id(const std::string& digits, const std::string& context) {
  if (digits.empty() || digits.size() > 9)
    fail(Kind::MalformedTag, "bad entity id in " + context);
  for (char c : digits)
    if (c < '0' || c > '9')
      fail(Kind::MalformedTag, "non-integer entity id in " + context);
  const int id = std::stoi(digits);
  if (id <= 0) fail(Kind::MalformedTag, "entity id must be positive in " + context);
  return id;
}

// One piece of a tagged utterance: either plain text or an entity surface.
struct Segment {
  int entity_id = 0;  // 0 = gap text
  std::vector<char32_t> text;
};

struct TaggedUtterance {
  Speaker speaker = Speaker::Expert;
  std::vector<Segment> segments;
};

// Scans "<Ek>surface</Ek>" tags out of one utterance line (text after the
// speaker prefix). The grammar is flat; "<E"/"</E" are reserved openers.
TaggedUtterance scan_tags(Speaker speaker, const std::string& body,
                          std::set<int>& used_ids) {
  TaggedUtterance out;
  out.speaker = speaker;
  const auto cps = utf8::decode(body);
  Segment gap;
  int open_id = 0;
  Segment entity;

  std::size_t i = 0;
  auto find_gt = [&](std::size_t from) -> std::size_t {
    for (std::size_t k = from; k < cps.size(); ++k)
      if (cps[k] == U'>') return k;
    fail(Kind::MalformedTag, "unterminated tag");
  };
  auto ascii_run = [&](std::size_t from, std::size_t to) {
    std::string s;
    for (std::size_t k = from; k < to; ++k) {
      if (cps[k] > 0x7F) fail(Kind::MalformedTag, "non-ASCII entity id");
      s.push_back(static_cast<char>(cps[k]));
    }
    return s;
  };

  while (i < cps.size()) {
    const bool open_attempt =
        cps[i] == U'<' && i + 1 < cps.size() && cps[i + 1] == U'E';
    const bool close_attempt = cps[i] == U'<' && i + 2 < cps.size() &&
                               cps[i + 1] == U'/' && cps[i + 2] == U'E';
    if (close_attempt) {
      const auto gt = find_gt(i + 3);
      const int id = parse_tag_id(ascii_run(i + 3, gt), "closing tag");
      if (open_id == 0)
        fail(Kind::MalformedTag, "close tag </E" + std::to_string(id) +
                                     "> without an open tag");
      if (id != open_id)
        fail(Kind::MalformedTag, "close tag </E" + std::to_string(id) +
                                     "> does not match open <E" +
                                     std::to_string(open_id) + ">");
      if (entity.text.empty())
        fail(Kind::MalformedTag, "entity E" + std::to_string(id) + " is empty");
      out.segments.push_back(std::move(entity));
      entity = Segment{};
      open_id = 0;
      i = gt + 1;
    } else if (open_attempt) {
      const auto gt = find_gt(i + 2);
      const int id = parse_tag_id(ascii_run(i + 2, gt), "open tag");
      if (open_id != 0)
        fail(Kind::MalformedTag, "nested tag <E" + std::to_string(id) +
                                     "> inside <E" + std::to_string(open_id) + ">");
      if (!used_ids.insert(id).second)
        fail(Kind::DuplicateTagId, "entity id E" + std::to_string(id) +
                                       " tagged more than once");
      if (!gap.text.empty()) {
        out.segments.push_back(std::move(gap));
        gap = Segment{};
      }
      open_id = id;
      entity.entity_id = id;
      i = gt + 1;
    } else {
      (open_id != 0 ? entity : gap).text.push_back(cps[i]);
      ++i;
    }
  }
  if (open_id != 0)
    fail(Kind::MalformedTag, "tag <E" + std::to_string(open_id) + "> never closed");
  if (!gap.text.empty()) out.segments.push_back(std::move(gap));
  return out;
}

// Drops leading/trailing trimmable whitespace, which must lie in gap
// segments; an entity reaching into it means the tagging wrapped line
// padding.
void trim_segments(TaggedUtterance& u) {
  while (!u.segments.empty()) {
    Segment& first = u.segments.front();
    if (first.entity_id != 0) {
      if (is_trim_ws(first.text.front()))
        fail(Kind::ContextAltered, "entity extends into trimmed whitespace");
      break;
    }
    std::size_t k = 0;
    while (k < first.text.size() && is_trim_ws(first.text[k])) ++k;
    first.text.erase(first.text.begin(), first.text.begin() + k);
    if (!first.text.empty()) break;
    u.segments.erase(u.segments.begin());
  }
  while (!u.segments.empty()) {
    Segment& last = u.segments.back();
    if (last.entity_id != 0) {
      if (is_trim_ws(last.text.back()))
        fail(Kind::ContextAltered, "entity extends into trimmed whitespace");
      break;
    }
    while (!last.text.empty() && is_trim_ws(last.text.back())) last.text.pop_back();
    if (!last.text.empty()) break;
    u.segments.pop_back();
  }
}

std::vector<char32_t> concat_segments(const std::vector<Segment>& segs) {
  std::vector<char32_t> out;
  for (const auto& s : segs) out.insert(out.end(), s.text.begin(), s.text.end());
  return out;
}

struct LocatedEntity {
  int entity_id = 0;
  Span span;
  std::string surface;
};

// Aligns a trimmed tagged utterance against the original text and emits
// entity spans in the original's scalar-value offsets. Exact match is the
// fast path; otherwise equality is retried under NFC, which only succeeds
// when the original text is itself NFC so that offsets stay meaningful.
void align_utterance(const TaggedUtterance& u, int utterance_index,
                     const std::string& original_text,
                     std::vector<LocatedEntity>& out) {
  const auto original = utf8::decode(original_text);
  auto emit = [&](const std::vector<Segment>& segs) {
    std::size_t pos = 0;
    for (const auto& s : segs) {
      if (s.entity_id != 0) {
        LocatedEntity e;
        e.entity_id = s.entity_id;
        e.span = {utterance_index, static_cast<int>(pos),
                  static_cast<int>(pos + s.text.size())};
        e.surface = utf8::encode(s.text);
        out.push_back(std::move(e));
      }
      pos += s.text.size();
    }
  };

  if (concat_segments(u.segments) == original) {
    emit(u.segments);
    return;
  }

  std::vector<Segment> normalized = u.segments;
  for (auto& s : normalized) s.text = unicode::nfc(s.text);
  const auto rebuilt = concat_segments(normalized);
  if (rebuilt != unicode::nfc(concat_segments(u.segments)))
    fail(Kind::ContextAltered,
         "a tag boundary splits a combining character sequence in utterance " +
             std::to_string(utterance_index));
  if (rebuilt != unicode::nfc(original))
    fail(Kind::ContextAltered, "utterance " + std::to_string(utterance_index) +
                                   " does not reproduce the original text");
  if (rebuilt != original)
    fail(Kind::ContextAltered,
         "utterance " + std::to_string(utterance_index) +
             " matches only after normalizing the original, so spans cannot "
             "be aligned (original text is not NFC)");
  emit(normalized);
}

}  // namespace

TaggedTranscript split_transcript(const std::string& reply) {
  if (!utf8::is_valid(reply))
    fail(Kind::MalformedTag, "reply is not valid UTF-8");
  const auto lines = split_lines(reply);

  // Locate "Step k:" headers in order; anything before "Step 1:" is
  // ignored preamble.
  std::array<std::size_t, 3> header_at{};
  std::array<bool, 3> found{};
  std::size_t next = 0;
  for (std::size_t i = 0; i < lines.size() && next < 3; ++i) {
    const std::string t = strip(lines[i]);
    if (t == "Step " + std::to_string(next + 1) + ":") {
      header_at[next] = i;
      found[next] = true;
      ++next;
    }
  }
  for (int k = 0; k < 3; ++k)
    if (!found[k])
      fail(Kind::MissingStepHeader,
           "header 'Step " + std::to_string(k + 1) + ":' not found");

  auto block = [&](int k) {
    const std::size_t from = header_at[k] + 1;
    const std::size_t to = k < 2 ? header_at[k + 1] : lines.size();
    return std::vector<std::string>(lines.begin() + from, lines.begin() + to);
  };

  TaggedTranscript t;
  for (const auto& raw : block(0)) {
    const std::string line = rstrip(raw);
    if (strip(line).empty()) continue;
    Speaker sp;
    if (line.rfind("E: ", 0) == 0)
      sp = Speaker::Expert;
    else if (line.rfind("I: ", 0) == 0)
      sp = Speaker::Interviewer;
    else
      fail(Kind::ContextAltered, "utterance line lacks an 'E: ' or 'I: ' "
                                 "speaker prefix: '" + line + "'");
    t.step1_text.emplace_back(sp, line.substr(3));
  }

  for (const auto& raw : block(1)) {
    const std::string line = strip(raw);
    if (line.empty()) continue;
    const auto colon = line.find(':');
    if (line[0] != 'E' || colon == std::string::npos)
      fail(Kind::MalformedTag, "expected 'Ek: TYPE' trigger line, got '" + line + "'");
    const int id = parse_tag_id(line.substr(1, colon - 1), "trigger line");
    const std::string type = strip(line.substr(colon + 1));
    if (type.empty()) fail(Kind::MalformedTag, "empty trigger type on '" + line + "'");
    t.step2_lines.emplace_back(id, type);
  }

  for (const auto& raw : block(2)) {
    const std::string line = strip(raw);
    if (line.empty()) continue;
    if (line.front() != '(' || line.back() != ')')
      fail(Kind::MalformedTag, "expected '(Ea, TYPE, Et)' triplet, got '" + line + "'");
    std::vector<std::string> parts;
    std::string cur;
    for (char c : line.substr(1, line.size() - 2)) {
      if (c == ',') {
        parts.push_back(strip(cur));
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    parts.push_back(strip(cur));
    if (parts.size() != 3)
      fail(Kind::MalformedTag, "triplet must have three fields: '" + line + "'");
    for (int k : {0, 2})
      if (parts[k].empty() || parts[k][0] != 'E')
        fail(Kind::MalformedTag, "triplet field '" + parts[k] +
                                     "' is not an entity reference");
    const int arg_id = parse_tag_id(parts[0].substr(1), "triplet");
    const int trig_id = parse_tag_id(parts[2].substr(1), "triplet");
    if (parts[1].empty()) fail(Kind::MalformedTag, "empty argument type");
    t.step3_lines.emplace_back(arg_id, parts[1], trig_id);
  }
  return t;
}

AnnotatedSession parse_transcript(const std::string& reply,
                                  const DialogueSession& original,
                                  const Taxonomy& taxonomy) {
  const TaggedTranscript t = split_transcript(reply);

  if (t.step1_text.size() != original.utterances.size())
    fail(Kind::UtteranceCountMismatch,
         "reply has " + std::to_string(t.step1_text.size()) +
             " utterances, session '" + original.id + "' has " +
             std::to_string(original.utterances.size()));

  std::set<int> used_ids;
  std::vector<LocatedEntity> entities;
  for (std::size_t i = 0; i < t.step1_text.size(); ++i) {
    const auto& [speaker, body] = t.step1_text[i];
    if (speaker != original.utterances[i].speaker)
      fail(Kind::ContextAltered,
           "speaker of utterance " + std::to_string(i) + " changed");
    TaggedUtterance tagged = scan_tags(speaker, body, used_ids);
    trim_segments(tagged);
    align_utterance(tagged, static_cast<int>(i), original.utterances[i].text,
                    entities);
  }

  std::map<int, const LocatedEntity*> by_id;
  for (const auto& e : entities) by_id[e.entity_id] = &e;

  AnnotatedSession out;
  out.session = original;
  out.label_source = Provenance::Pseudo;

  std::set<int> assigned;  // ids already given a role in step 2 or 3
  for (const auto& [id, type] : t.step2_lines) {
    const auto it = by_id.find(id);
    if (it == by_id.end())
      fail(Kind::DanglingReference,
           "step 2 names E" + std::to_string(id) + " which is not tagged");
    if (!assigned.insert(id).second)
      fail(Kind::DuplicateTagId,
           "entity E" + std::to_string(id) + " assigned a role twice");
    if (!taxonomy.is_trigger(type))
      fail(Kind::UnknownType, "unknown trigger type '" + type + "'");
    out.triggers.push_back({id, it->second->span, type, std::nullopt});
  }

  std::set<int> trigger_ids;
  for (const auto& tr : out.triggers) trigger_ids.insert(tr.entity_id);

  for (const auto& [arg_id, type, trig_id] : t.step3_lines) {
    const auto it = by_id.find(arg_id);
    if (it == by_id.end())
      fail(Kind::DanglingReference,
           "step 3 names E" + std::to_string(arg_id) + " which is not tagged");
    if (!assigned.insert(arg_id).second)
      fail(Kind::DuplicateTagId,
           "entity E" + std::to_string(arg_id) + " assigned a role twice");
    if (!taxonomy.is_argument(type))
      fail(Kind::UnknownType, "unknown argument type '" + type + "'");
    if (!trigger_ids.count(trig_id))
      fail(Kind::DanglingReference, "triplet links E" + std::to_string(arg_id) +
                                        " to E" + std::to_string(trig_id) +
                                        " which is not a step-2 trigger");
    out.arguments.push_back({arg_id, it->second->span, type, trig_id});
  }

  for (const auto& e : entities)
    if (!assigned.count(e.entity_id))
      fail(Kind::OrphanEntity, "entity E" + std::to_string(e.entity_id) +
                                   " is tagged but given no role");

  try {
    validate(out);
  } catch (const InvariantViolation& e) {
    fail(Kind::ContextAltered, std::string("reply produced an invalid "
                                           "annotation: ") + e.what());
  }
  for (const auto& e : entities) {
    if (utf8::slice(original.utterances[e.span.utterance_index].text,
                    e.span.start_char, e.span.end_char) != e.surface)
      fail(Kind::ContextAltered, "span of E" + std::to_string(e.entity_id) +
                                     " does not slice the original text");
  }
  return out;
}

namespace {

struct CanonicalEntity {
  Span span;
  int old_id = 0;
  bool is_trigger = false;
};

}  // namespace

AnnotatedSession canonicalize(const AnnotatedSession& annotated) {
  std::vector<CanonicalEntity> order;
  for (const auto& t : annotated.triggers) order.push_back({t.span, t.entity_id, true});
  for (const auto& g : annotated.arguments)
    order.push_back({g.span, g.entity_id, false});
  std::sort(order.begin(), order.end(),
            [](const CanonicalEntity& a, const CanonicalEntity& b) {
              return a.span < b.span;
            });

  std::map<int, int> renumber;
  for (std::size_t i = 0; i < order.size(); ++i)
    renumber[order[i].old_id] = static_cast<int>(i) + 1;

  AnnotatedSession out;
  out.session = annotated.session;
  out.label_source = annotated.label_source;
  for (const auto& e : order) {
    if (e.is_trigger) {
      const auto& t = *std::find_if(
          annotated.triggers.begin(), annotated.triggers.end(),
          [&](const TriggerEntity& x) { return x.entity_id == e.old_id; });
      out.triggers.push_back({renumber[e.old_id], t.span, t.trigger_type,
                              t.ecr_chain_id});
    } else {
      const auto& g = *std::find_if(
          annotated.arguments.begin(), annotated.arguments.end(),
          [&](const ArgumentEntity& x) { return x.entity_id == e.old_id; });
      out.arguments.push_back({renumber[e.old_id], g.span, g.argument_type,
                               renumber.at(g.trigger_entity_id)});
    }
  }
  return out;
}

std::string render_transcript(const AnnotatedSession& annotated) {
  const AnnotatedSession canon = canonicalize(annotated);

  // Entities per utterance, in span order.
  struct Tagged {
    int id;
    Span span;
  };
  std::vector<std::vector<Tagged>> per_utt(canon.session.utterances.size());
  for (const auto& t : canon.triggers)
    per_utt[t.span.utterance_index].push_back({t.entity_id, t.span});
  for (const auto& g : canon.arguments)
    per_utt[g.span.utterance_index].push_back({g.entity_id, g.span});
  for (auto& v : per_utt)
    std::sort(v.begin(), v.end(),
              [](const Tagged& a, const Tagged& b) { return a.span < b.span; });

  std::string out = "Step 1:\n";
  for (std::size_t i = 0; i < canon.session.utterances.size(); ++i) {
    const auto& u = canon.session.utterances[i];
    out += to_string(u.speaker);
    out += ": ";
    std::size_t pos = 0;
    for (const auto& e : per_utt[i]) {
      out += utf8::slice(u.text, pos, e.span.start_char);
      out += "<E" + std::to_string(e.id) + ">";
      out += utf8::slice(u.text, e.span.start_char, e.span.end_char);
      out += "</E" + std::to_string(e.id) + ">";
      pos = e.span.end_char;
    }
    out += utf8::slice(u.text, pos, utf8::length(u.text));
    out += '\n';
  }
  out += "Step 2:\n";
  for (const auto& t : canon.triggers)
    out += "E" + std::to_string(t.entity_id) + ": " + t.trigger_type + "\n";
  out += "Step 3:\n";
  for (const auto& g : canon.arguments)
    out += "(E" + std::to_string(g.entity_id) + ", " + g.argument_type + ", E" +
           std::to_string(g.trigger_entity_id) + ")\n";
  return out;
}

// ------------------------------------------------------- sequence records

std::vector<SequenceRecordRow> to_sequence_records(const AnnotatedSession& annotated,
                                                   const Tokenizer& tokenizer) {
  struct EntityRef {
    const Span* span;
    int eid;
    std::string bio_type;
    std::optional<int> head;
    std::string relation;
  };
  std::vector<std::vector<EntityRef>> per_utt(annotated.session.utterances.size());
  for (const auto& t : annotated.triggers)
    per_utt[t.span.utterance_index].push_back(
        {&t.span, t.entity_id, t.trigger_type, std::nullopt, ""});
  for (const auto& g : annotated.arguments)
    per_utt[g.span.utterance_index].push_back(
        {&g.span, g.entity_id, g.argument_type, g.trigger_entity_id,
         g.argument_type});

  std::vector<SequenceRecordRow> rows;
  for (std::size_t ui = 0; ui < annotated.session.utterances.size(); ++ui) {
    const auto tokens = tokenizer.tokenize(annotated.session.utterances[ui].text);
    // token index range covered by each entity; boundaries must align
    struct Covered {
      const EntityRef* e;
      std::size_t first, last;
    };
    std::vector<Covered> covered;
    for (const auto& e : per_utt[ui]) {
      std::ptrdiff_t first = -1, last = -1;
      for (std::size_t ti = 0; ti < tokens.size(); ++ti) {
        if (tokens[ti].start == static_cast<std::size_t>(e.span->start_char))
          first = static_cast<std::ptrdiff_t>(ti);
        if (tokens[ti].end == static_cast<std::size_t>(e.span->end_char))
          last = static_cast<std::ptrdiff_t>(ti);
      }
      if (first < 0 || last < 0 || last < first)
        throw MisalignedEntity(
            "session '" + annotated.session.id + "': entity " +
            std::to_string(e.eid) + " boundary falls inside a token");
      covered.push_back({&e, static_cast<std::size_t>(first),
                         static_cast<std::size_t>(last)});
    }

    for (std::size_t ti = 0; ti < tokens.size(); ++ti) {
      SequenceRecordRow row;
      row.session_id = annotated.session.id;
      row.utterance_index = static_cast<int>(ui);
      row.token_index = static_cast<int>(ti);
      row.surface = tokens[ti].surface;
      row.bio_tag = "O";
      for (const auto& c : covered) {
        if (ti < c.first || ti > c.last) continue;
        row.bio_tag = (ti == c.first ? "B-" : "I-") + c.e->bio_type;
        row.entity_id = c.e->eid;
        row.head_entity_id = c.e->head;
        row.relation_label = c.e->relation;
        break;
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

namespace {

struct BioTag {
  char prefix = 'O';
  std::string type;
};

BioTag parse_bio(const std::string& tag, int line_no = 0) {
  if (tag == "O") return {};
  if (tag.size() > 2 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-')
    return {tag[0], tag.substr(2)};
  throw ParseError("bad BIO tag '" + tag + "'", line_no);
}

}  // namespace

std::vector<AnnotatedSession> from_sequence_records(
    const std::vector<SequenceRecordRow>& rows,
    const std::vector<DialogueSession>& sessions, const Tokenizer& tokenizer,
    Provenance label_source) {
  std::map<std::string, const DialogueSession*> by_id;
  for (const auto& s : sessions) by_id[s.id] = &s;

  // Group rows by session, keeping first-appearance order.
  std::vector<std::string> session_order;
  std::map<std::string, std::vector<const SequenceRecordRow*>> grouped;
  for (const auto& r : rows) {
    if (!by_id.count(r.session_id))
      throw UnknownSessionId("sequence records name unknown session '" +
                             r.session_id + "'");
    auto [it, inserted] = grouped.try_emplace(r.session_id);
    if (inserted) session_order.push_back(r.session_id);
    it->second.push_back(&r);
  }

  std::vector<AnnotatedSession> out;
  for (const auto& sid : session_order) {
    const DialogueSession& session = *by_id.at(sid);
    std::vector<std::vector<Token>> tokens;
    tokens.reserve(session.utterances.size());
    for (const auto& u : session.utterances) tokens.push_back(tokenizer.tokenize(u.text));

    struct Run {
      std::string type;
      int utterance = 0;
      int first_tok = 0, last_tok = 0;
      std::optional<int> eid;
      std::optional<int> head;
      std::string relation;
      bool head_set = false;
    };
    std::vector<Run> runs;
    const SequenceRecordRow* prev = nullptr;
    BioTag prev_tag;

    for (const auto* r : grouped.at(sid)) {
      if (r->utterance_index < 0 ||
          r->utterance_index >= static_cast<int>(session.utterances.size()))
        throw ParseError("utterance index " + std::to_string(r->utterance_index) +
                         " out of range for session '" + sid + "'");
      const auto& utt_tokens = tokens[r->utterance_index];
      if (r->token_index < 0 ||
          r->token_index >= static_cast<int>(utt_tokens.size()))
        throw ParseError("token index " + std::to_string(r->token_index) +
                         " out of range in session '" + sid + "'");
      if (utt_tokens[r->token_index].surface != r->surface)
        throw ParseError("surface '" + r->surface + "' does not match token '" +
                         utt_tokens[r->token_index].surface + "' in session '" +
                         sid + "' (tokenizer mismatch?)");

      const BioTag tag = parse_bio(r->bio_tag);
      if (tag.prefix == 'O') {
        prev = r;
        prev_tag = tag;
        continue;
      }
      const bool continues =
          tag.prefix == 'I' && prev != nullptr && prev_tag.prefix != 'O' &&
          prev_tag.type == tag.type && prev->utterance_index == r->utterance_index &&
          prev->token_index + 1 == r->token_index && prev->entity_id == r->entity_id;
      if (continues) {
        Run& run = runs.back();
        run.last_tok = r->token_index;
        if (r->head_entity_id != run.head || r->relation_label != run.relation)
          throw InconsistentLinks("rows of one entity disagree on head/relation "
                                  "in session '" + sid + "'");
      } else {
        // B row, or a stray I opener repaired as B.
        Run run;
        run.type = tag.type;
        run.utterance = r->utterance_index;
        run.first_tok = run.last_tok = r->token_index;
        run.eid = r->entity_id;
        run.head = r->head_entity_id;
        run.relation = r->relation_label;
        runs.push_back(std::move(run));
      }
      prev = r;
      prev_tag = tag;
    }

    // Assign fresh ids to runs that carried none.
    int next_id = 1;
    for (const auto& run : runs)
      if (run.eid) next_id = std::max(next_id, *run.eid + 1);

    AnnotatedSession a;
    a.session = session;
    a.label_source = label_source;
    std::set<int> trigger_ids;
    std::vector<std::pair<Run*, int>> resolved;
    std::vector<Run*> ordered;
    for (auto& run : runs) ordered.push_back(&run);
    for (Run* run : ordered) {
      const int eid = run->eid ? *run->eid : next_id++;
      resolved.emplace_back(run, eid);
      if (!run->head) trigger_ids.insert(eid);
    }
    for (auto& [run, eid] : resolved) {
      const auto& utt_tokens = tokens[run->utterance];
      Span span{run->utterance,
                static_cast<int>(utt_tokens[run->first_tok].start),
                static_cast<int>(utt_tokens[run->last_tok].end)};
      if (!run->head) {
        if (!run->relation.empty())
          throw InconsistentLinks("trigger entity " + std::to_string(eid) +
                                  " carries a relation label in session '" + sid +
                                  "'");
        a.triggers.push_back({eid, span, run->type, std::nullopt});
      } else {
        if (!run->relation.empty() && run->relation != run->type)
          throw InconsistentLinks("relation label '" + run->relation +
                                  "' disagrees with BIO type '" + run->type +
                                  "' in session '" + sid + "'");
        if (!trigger_ids.count(*run->head))
          throw InconsistentLinks("argument head E" + std::to_string(*run->head) +
                                  " is not a trigger in session '" + sid + "'");
        a.arguments.push_back({eid, span, run->type, *run->head});
      }
    }
    validate(a);
    out.push_back(std::move(a));
  }
  return out;
}

// ------------------------------------------------------------------- tsv

namespace {

std::string escape_surface(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '\\')
      out += "\\\\";
    else if (c == '\t')
      out += "\\t";
    else
      out.push_back(c);
  }
  return out;
}

std::string unescape_surface(const std::string& s, int line_no) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out.push_back(s[i]);
      continue;
    }
    if (i + 1 >= s.size()) throw ParseError("dangling escape in surface", line_no);
    ++i;
    if (s[i] == '\\')
      out.push_back('\\');
    else if (s[i] == 't')
      out.push_back('\t');
    else
      throw ParseError("unknown escape in surface", line_no);
  }
  return out;
}

std::string opt_field(const std::optional<int>& v) {
  return v ? std::to_string(*v) : "_";
}

std::optional<int> parse_opt_field(const std::string& s, int line_no) {
  if (s == "_") return std::nullopt;
  try {
    return std::stoi(s);
  } catch (...) {
    throw ParseError("bad id field '" + s + "'", line_no);
  }
}

}  // namespace

void write_records_tsv(const std::vector<AnnotatedSession>& sessions,
                       const Tokenizer& tokenizer, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write records file: " + path);
  out << "# session_id\tutterance_index\ttoken_index\tsurface\tbio_tag\t"
         "entity_id\thead_entity_id\trelation_label\n";
  for (const auto& a : sessions) {
    const auto rows = to_sequence_records(a, tokenizer);
    int prev_utt = -1;
    for (const auto& r : rows) {
      if (prev_utt >= 0 && r.utterance_index != prev_utt) out << '\n';
      prev_utt = r.utterance_index;
      out << r.session_id << '\t' << r.utterance_index << '\t' << r.token_index
          << '\t' << escape_surface(r.surface) << '\t' << r.bio_tag << '\t'
          << opt_field(r.entity_id) << '\t' << opt_field(r.head_entity_id) << '\t'
          << (r.relation_label.empty() ? "_" : r.relation_label) << '\n';
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

std::vector<SequenceRecordRow> read_records_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open records file: " + path);
  std::vector<SequenceRecordRow> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
      if (c == '\t') {
        fields.push_back(std::move(cur));
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    fields.push_back(std::move(cur));
    if (fields.size() != 8)
      throw ParseError("expected 8 tab-separated fields, got " +
                       std::to_string(fields.size()), line_no);
    SequenceRecordRow r;
    r.session_id = fields[0];
    try {
      r.utterance_index = std::stoi(fields[1]);
      r.token_index = std::stoi(fields[2]);
    } catch (...) {
      throw ParseError("bad index field", line_no);
    }
    r.surface = unescape_surface(fields[3], line_no);
    parse_bio(fields[4], line_no);  // validates shape
    r.bio_tag = fields[4];
    r.entity_id = parse_opt_field(fields[5], line_no);
    r.head_entity_id = parse_opt_field(fields[6], line_no);
    r.relation_label = fields[7] == "_" ? "" : fields[7];
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace sfa
