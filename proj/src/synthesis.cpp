#include "sfa/synthesis.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sfa/annoparse.hpp"
#include "sfa/corpus_io.hpp"
#include "sfa/rng.hpp"
#include "sfa/similarity.hpp"

namespace sfa {

namespace {

std::string dialogue_block(const std::vector<Utterance>& utterances) {
  std::string out;
  for (const auto& u : utterances) {
    out += to_string(u.speaker);
    out += ": ";
    out += u.text;
    out += '\n';
  }
  return out;
}

constexpr const char* kGenerationSystemPrompt =
    "You simulate Japanese technical interview dialogues about cooking. An "
    "expert (E) explains how to prepare a dish while an interviewer (I) asks "
    "questions to draw out concrete details such as ingredients, timing, "
    "temperatures, and utensils. Write one utterance per line, each line "
    "starting with \"E: \" or \"I: \". Output only utterance lines.";

constexpr const char* kLabelingTaskIntro =
    "You annotate semantic frames in cooking interview dialogues. A frame is "
    "an event: its trigger is the predicate naming the action, and its "
    "arguments are details of that event, each linked to the trigger.\n"
    "Label a dialogue in three steps.\n"
    "Step 1: repeat every utterance exactly as given, wrapping each entity "
    "(trigger or argument) in tags <Ek>...</Ek>, numbering k from 1 in "
    "reading order. Do not change, add, or drop any other character.\n"
    "Step 2: list every trigger entity as a line \"Ek: TYPE\".\n"
    "Step 3: list every argument as a triplet line \"(Ea, TYPE, Et)\" "
    "linking argument Ea of type TYPE to its trigger Et.\n"
    "Every tagged entity must appear in step 2 or step 3. Use only the "
    "types defined below.";

}  // namespace

ChatRequest build_dialogue_prompt(const std::vector<DialogueSession>& fewshots,
                                  const GenerationConfig& config) {
  const int want = config.n_fewshot_human + config.n_fewshot_pseudo;
  if (static_cast<int>(fewshots.size()) != want)
    throw FewshotCountMismatch("expected " + std::to_string(want) +
                               " few-shot dialogues, got " +
                               std::to_string(fewshots.size()));

  std::string user = "Here are example dialogues.\n\n";
  for (std::size_t i = 0; i < fewshots.size(); ++i) {
    user += "Dialogue " + std::to_string(i + 1) + ":\n";
    user += dialogue_block(fewshots[i].utterances);
    user += '\n';
  }
  user += "Write Dialogue " + std::to_string(fewshots.size() + 1) +
          " in the same format and of similar length, about a different dish "
          "and cooking process than the examples.";

  ChatRequest req;
  req.system_prompt = kGenerationSystemPrompt;
  req.messages.push_back({ChatRole::User, std::move(user)});
  req.temperature = config.temperature;
  req.model_id = config.model_id;
  req.max_output_tokens = config.max_output_tokens;
  return req;
}

std::vector<Utterance> parse_dialogue_reply(const std::string& reply) {
  std::vector<Utterance> out;
  std::string line;
  std::istringstream in(reply);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string trimmed = line;
    while (!trimmed.empty() && (trimmed.back() == ' ' || trimmed.back() == '\t'))
      trimmed.pop_back();
    if (trimmed.empty()) continue;
    Utterance u;
    if (trimmed.rfind("E: ", 0) == 0)
      u.speaker = Speaker::Expert;
    else if (trimmed.rfind("I: ", 0) == 0)
      u.speaker = Speaker::Interviewer;
    else
      throw MalformedDialogueReply("line is not an \"E: \"/\"I: \" utterance: '" +
                                   trimmed + "'");
    u.text = trimmed.substr(3);
    if (u.text.empty())
      throw MalformedDialogueReply("empty utterance in reply");
    out.push_back(std::move(u));
  }
  if (out.empty()) throw MalformedDialogueReply("reply contains no utterances");
  return out;
}

GenerationResult generate_pseudo_dialogues(
    const std::vector<DialogueSession>& human_pool,
    const std::vector<Dialogue>& pseudo_pool, ChatClient& client,
    const GenerationConfig& config, int n_target, const Tokenizer& tokenizer) {
  const int bootstrap_need =
      config.n_fewshot_human +
      std::max<int>(0, config.n_fewshot_pseudo - static_cast<int>(pseudo_pool.size()));
  if (static_cast<int>(human_pool.size()) < bootstrap_need)
    throw Error("generate_pseudo_dialogues: human pool holds " +
                std::to_string(human_pool.size()) + " sessions but the bootstrap "
                "draw needs " + std::to_string(bootstrap_need));
  if (n_target < 1) throw Error("generate_pseudo_dialogues: n_target must be >= 1");

  // Everything already collected, for the similarity filter.
  std::vector<std::string> existing_texts;
  for (const auto& s : human_pool) existing_texts.push_back(session_text(s));
  for (const auto& d : pseudo_pool) existing_texts.push_back(dialogue_text(d));

  std::vector<DialogueSession> pseudo_sessions;
  for (const auto& d : pseudo_pool)
    pseudo_sessions.push_back({d.id, d.id, 0, d.utterances, Provenance::Pseudo});

  SplitMix64 rng(config.seed);
  GenerationResult result;
  const long cap = static_cast<long>(config.attempt_cap_factor) * n_target;

  while (static_cast<int>(result.accepted.size()) < n_target) {
    if (result.attempts >= cap)
      throw AttemptCapExceeded("no " + std::to_string(n_target) +
                               " acceptable dialogues within " + std::to_string(cap) +
                               " attempts (" + std::to_string(result.accepted.size()) +
                               " accepted)");
    ++result.attempts;

    // Pseudo slots that the pool cannot fill yet revert to human few-shots.
    const int pseudo_take =
        std::min<int>(config.n_fewshot_pseudo, static_cast<int>(pseudo_sessions.size()));
    const int human_take = config.n_fewshot_human + config.n_fewshot_pseudo - pseudo_take;

    std::vector<DialogueSession> fewshots;
    for (const auto i : sample_without_replacement(human_pool.size(),
                                                   static_cast<std::size_t>(human_take),
                                                   rng))
      fewshots.push_back(human_pool[i]);
    if (pseudo_take > 0)
      for (const auto i : sample_without_replacement(
               pseudo_sessions.size(), static_cast<std::size_t>(pseudo_take), rng))
        fewshots.push_back(pseudo_sessions[i]);

    const ChatRequest request = build_dialogue_prompt(fewshots, config);
    const ChatResponse response = client.complete(request);
    result.responses.push_back(response);

    std::vector<Utterance> utterances;
    try {
      utterances = parse_dialogue_reply(response.text);
    } catch (const MalformedDialogueReply&) {
      ++result.rejected_malformed;
      continue;
    }

    Dialogue candidate;
    candidate.utterances = std::move(utterances);
    candidate.source = Provenance::Pseudo;
    const std::string text = dialogue_text(candidate);
    const auto [score, _] = max_similarity(text, existing_texts, tokenizer);
    if (score.value >= config.accept_threshold) {
      ++result.rejected_similar;
      continue;
    }

    candidate.id = "pseudo-" + std::to_string(pseudo_sessions.size() + 1);
    existing_texts.push_back(text);
    pseudo_sessions.push_back(
        {candidate.id, candidate.id, 0, candidate.utterances, Provenance::Pseudo});
    result.accepted.push_back(std::move(candidate));
  }
  return result;
}

std::vector<AnnotatedSession> build_exemplar_pool(
    const std::vector<AnnotatedSession>& sessions, int min_entities) {
  std::vector<AnnotatedSession> out;
  for (const auto& a : sessions) {
    const int entities = static_cast<int>(a.triggers.size() + a.arguments.size());
    if (entities >= min_entities) out.push_back(a);
  }
  return out;
}

std::vector<AnnotatedSession> select_label_fewshots(
    const DialogueSession& target, const std::vector<AnnotatedSession>& pool,
    const LabelingConfig& config, const Tokenizer& tokenizer) {
  const AnnotatedSession* anchor = nullptr;
  std::vector<std::pair<std::string, std::string>> ranked_pool;  // (id, text)
  std::map<std::string, const AnnotatedSession*> by_id;
  for (const auto& a : pool) {
    by_id[a.session.id] = &a;
    if (a.session.id == config.anchor_session_id) {
      anchor = &a;
      continue;
    }
    ranked_pool.emplace_back(a.session.id, session_text(a.session));
  }
  if (anchor == nullptr)
    throw AnchorMissing("anchor session '" + config.anchor_session_id +
                        "' not in the exemplar pool");
  if (static_cast<int>(ranked_pool.size()) < config.n_similar_fewshots)
    throw Error("exemplar pool too small: need " +
                std::to_string(config.n_similar_fewshots) + " similar few-shots plus "
                "the anchor");

  const auto ids = top_k_similar(session_text(target), ranked_pool,
                                 static_cast<std::size_t>(config.n_similar_fewshots),
                                 tokenizer);
  std::vector<AnnotatedSession> out;
  for (const auto& id : ids) out.push_back(*by_id.at(id));
  out.push_back(*anchor);
  return out;
}

ChatRequest build_labeling_prompt(const DialogueSession& target,
                                  const std::vector<AnnotatedSession>& fewshots,
                                  const Taxonomy& taxonomy,
                                  const LabelingConfig& config) {
  validate(taxonomy);
  std::string system = kLabelingTaskIntro;
  system += "\n\nTrigger types:\n";
  for (const auto& t : taxonomy.trigger_types) {
    const auto it = taxonomy.definitions.find(t);
    if (it == taxonomy.definitions.end())
      throw MissingTypeDefinition("trigger type '" + t + "' has no definition text");
    system += "- " + t + ": " + it->second + "\n";
  }
  system += "\nArgument types:\n";
  for (const auto& t : taxonomy.argument_types) {
    const auto it = taxonomy.definitions.find(t);
    if (it == taxonomy.definitions.end())
      throw MissingTypeDefinition("argument type '" + t + "' has no definition text");
    system += "- " + t + ": " + it->second + "\n";
  }

  ChatRequest req;
  req.system_prompt = std::move(system);
  for (const auto& demo : fewshots) {
    req.messages.push_back(
        {ChatRole::User,
         "Label the following dialogue.\n\n" + dialogue_block(demo.session.utterances)});
    req.messages.push_back({ChatRole::Assistant, render_transcript(demo)});
  }
  req.messages.push_back(
      {ChatRole::User,
       "Label the following dialogue.\n\n" + dialogue_block(target.utterances)});
  req.temperature = config.temperature;
  req.model_id = config.model_id;
  req.max_output_tokens = config.max_output_tokens;
  return req;
}

namespace {

struct Checkpoint {
  std::vector<AnnotatedSession> annotated;
  std::vector<LabelFailure> failures;
  std::set<std::string> done_ids;
};

Checkpoint load_checkpoint(const std::string& path) {
  Checkpoint cp;
  if (path.empty()) return cp;
  std::ifstream in(path);
  if (!in) return cp;  // no checkpoint yet
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad checkpoint line: ") + e.what(), line_no);
    }
    const std::string type = j.at("type").get<std::string>();
    if (type == "ok") {
      AnnotatedSession a = session_from_json_line(j.at("session").dump(), line_no);
      cp.done_ids.insert(a.session.id);
      cp.annotated.push_back(std::move(a));
    } else if (type == "fail") {
      LabelFailure f;
      f.session_id = j.at("session_id").get<std::string>();
      f.error_kind = j.at("kind").get<std::string>();
      f.message = j.value("message", "");
      f.attempts = j.value("attempts", 0);
      cp.done_ids.insert(f.session_id);
      cp.failures.push_back(std::move(f));
    } else {
      throw ParseError("unknown checkpoint record type '" + type + "'", line_no);
    }
  }
  return cp;
}

void append_checkpoint_ok(const std::string& path, const AnnotatedSession& a) {
  if (path.empty()) return;
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw IoError("cannot append checkpoint: " + path);
  nlohmann::ordered_json j;
  j["type"] = "ok";
  j["session"] = nlohmann::ordered_json::parse(to_json_line(a));
  out << j.dump() << '\n';
}

void append_checkpoint_fail(const std::string& path, const LabelFailure& f) {
  if (path.empty()) return;
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw IoError("cannot append checkpoint: " + path);
  nlohmann::ordered_json j;
  j["type"] = "fail";
  j["session_id"] = f.session_id;
  j["kind"] = f.error_kind;
  j["message"] = f.message;
  j["attempts"] = f.attempts;
  out << j.dump() << '\n';
}

}  // namespace

LabelingResult label_sessions(const std::vector<DialogueSession>& sessions,
                              const std::vector<AnnotatedSession>& pool,
                              ChatClient& client, const LabelingConfig& config,
                              const Taxonomy& taxonomy, const Tokenizer& tokenizer,
                              const std::string& checkpoint_path) {
  Checkpoint cp = load_checkpoint(checkpoint_path);
  LabelingResult result;
  result.annotated = std::move(cp.annotated);
  result.failures = std::move(cp.failures);

  std::vector<const DialogueSession*> todo;
  for (const auto& s : sessions)
    if (!cp.done_ids.count(s.id)) todo.push_back(&s);

  const std::size_t chunk = std::max(1, config.max_concurrency);
  for (std::size_t base = 0; base < todo.size(); base += chunk) {
    const std::size_t n = std::min(chunk, todo.size() - base);
    std::vector<ChatRequest> requests;
    requests.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
      const auto fewshots =
          select_label_fewshots(*todo[base + k], pool, config, tokenizer);
      requests.push_back(
          build_labeling_prompt(*todo[base + k], fewshots, taxonomy, config));
    }
    // Client errors propagate; earlier chunks are already checkpointed.
    std::vector<ChatResponse> responses =
        complete_batch(client, requests, config.max_concurrency);

    for (std::size_t k = 0; k < n; ++k) {
      const DialogueSession& session = *todo[base + k];
      result.responses.push_back(responses[k]);
      int attempts = 1;
      std::string reply = responses[k].text;
      for (;;) {
        try {
          AnnotatedSession a = parse_transcript(reply, session, taxonomy);
          append_checkpoint_ok(checkpoint_path, a);
          result.annotated.push_back(std::move(a));
          break;
        } catch (const TranscriptError& e) {
          if (attempts >= 2) {
            LabelFailure f{session.id, to_string(e.kind()), e.what(), attempts};
            append_checkpoint_fail(checkpoint_path, f);
            result.failures.push_back(std::move(f));
            break;
          }
          ++attempts;
          const ChatResponse retry = client.complete(requests[k]);
          result.responses.push_back(retry);
          reply = retry.text;
        }
      }
    }
  }
  return result;
}

}  // namespace sfa
