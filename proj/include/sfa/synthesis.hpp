#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sfa/corpus.hpp"
#include "sfa/llm_gateway.hpp"
#include "sfa/tokenizer.hpp"

namespace sfa {

class FewshotCountMismatch : public Error {
 public:
  using Error::Error;
};

class AttemptCapExceeded : public Error {
 public:
  using Error::Error;
};

class MalformedDialogueReply : public Error {
 public:
  using Error::Error;
};

class AnchorMissing : public Error {
 public:
  using Error::Error;
};

class MissingTypeDefinition : public Error {
 public:
  using Error::Error;
};

struct GenerationConfig {
  int n_fewshot_human = 6;
  int n_fewshot_pseudo = 2;
  double accept_threshold = 0.7;  // candidates at or above are rejected
  double temperature = 0.7;
  std::uint64_t seed = 1;
  int attempt_cap_factor = 4;  // attempt cap = factor * n_target
  std::string model_id = "gpt-4-0613";
  int max_output_tokens = 2048;
};

struct LabelingConfig {
  int n_similar_fewshots = 2;
  std::string anchor_session_id;
  int min_exemplar_entities = 5;
  std::uint64_t seed = 1;
  double temperature = 0.0;
  std::string model_id = "gpt-4-0613";
  int max_output_tokens = 4096;
  int max_concurrency = 4;
};

// Few-shot dialogues as "Dialogue k:" blocks plus the instruction to write
// one new dialogue on a different cooking topic. Pure function of its
// arguments.
ChatRequest build_dialogue_prompt(const std::vector<DialogueSession>& fewshots,
                                  const GenerationConfig& config);

// "E: ..." / "I: ..." lines -> utterances; anything else aborts the
// candidate with MalformedDialogueReply.
std::vector<Utterance> parse_dialogue_reply(const std::string& reply);

struct GenerationResult {
  std::vector<Dialogue> accepted;          // in acceptance order
  std::vector<ChatResponse> responses;     // every call, for cost accounting
  long attempts = 0;
  long rejected_similar = 0;
  long rejected_malformed = 0;
};

// The self-instruct loop: sample few-shots (pseudo slots fall back to the
// human pool while fewer pseudo-dialogues exist than the slot count), call
// the model, accept a candidate iff its max ROUGE-L against everything
// already collected is below the threshold, and feed accepted dialogues
// back into the pool. Inherently sequential; runs single-threaded.
GenerationResult generate_pseudo_dialogues(
    const std::vector<DialogueSession>& human_pool,
    const std::vector<Dialogue>& pseudo_pool, ChatClient& client,
    const GenerationConfig& config, int n_target, const Tokenizer& tokenizer);

// Keeps sessions with at least `min_entities` entities.
std::vector<AnnotatedSession> build_exemplar_pool(
    const std::vector<AnnotatedSession>& sessions, int min_entities);

// Top n_similar_fewshots pool sessions by ROUGE-L against the target
// (anchor excluded from the ranking), then the anchor last.
std::vector<AnnotatedSession> select_label_fewshots(
    const DialogueSession& target, const std::vector<AnnotatedSession>& pool,
    const LabelingConfig& config, const Tokenizer& tokenizer);

// System prompt with every type definition, few-shot demonstrations in the
// three-step transcript format, and the target as the final user message.
ChatRequest build_labeling_prompt(const DialogueSession& target,
                                  const std::vector<AnnotatedSession>& fewshots,
                                  const Taxonomy& taxonomy,
                                  const LabelingConfig& config);

struct LabelFailure {
  std::string session_id;
  std::string error_kind;  // a TranscriptErrorKind name
  std::string message;
  int attempts = 0;
};

struct LabelingResult {
  std::vector<AnnotatedSession> annotated;
  std::vector<LabelFailure> failures;
  std::vector<ChatResponse> responses;
};

// Labels each session via the three-step prompt, validating replies with
// the transcript parser; one automatic retry per session, then the session
// is recorded as failed and skipped. Requests run through complete_batch
// with the configured concurrency. When `checkpoint_path` is non-empty,
// finished sessions append there and a rerun resumes past them; client
// errors propagate after the checkpoint is flushed.
LabelingResult label_sessions(const std::vector<DialogueSession>& sessions,
                              const std::vector<AnnotatedSession>& pool,
                              ChatClient& client, const LabelingConfig& config,
                              const Taxonomy& taxonomy, const Tokenizer& tokenizer,
                              const std::string& checkpoint_path = "");

}  // namespace sfa
