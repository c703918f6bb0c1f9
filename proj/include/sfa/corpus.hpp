#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sfa/errors.hpp"

namespace sfa {

enum class Speaker { Expert, Interviewer };

// Whether a piece of data (text or labels) came from a human or an LLM.
enum class Provenance { Human, Pseudo };

const char* to_string(Speaker s);          // "E" / "I"
const char* to_string(Provenance p);       // "Human" / "Pseudo"
Speaker speaker_from_string(const std::string& s);
Provenance provenance_from_string(const std::string& s);

struct Utterance {
  Speaker speaker = Speaker::Expert;
  std::string text;  // non-empty, no newline characters

  bool operator==(const Utterance&) const = default;
};

struct Dialogue {
  std::string id;
  std::vector<Utterance> utterances;
  Provenance source = Provenance::Human;

  bool operator==(const Dialogue&) const = default;
};

// A contiguous slice of a dialogue sized to fit model context windows.
// Concatenating a dialogue's sessions in index order reproduces the
// dialogue exactly.
struct DialogueSession {
  std::string id;
  std::string parent_dialogue_id;
  int index_in_dialogue = 0;
  std::vector<Utterance> utterances;
  Provenance source = Provenance::Human;

  bool operator==(const DialogueSession&) const = default;
};

// Character span inside one utterance. Offsets count Unicode scalar
// values; end_char is exclusive.
struct Span {
  int utterance_index = 0;
  int start_char = 0;
  int end_char = 0;

  bool operator==(const Span&) const = default;
  auto operator<=>(const Span&) const = default;
  int length() const { return end_char - start_char; }
};

struct TriggerEntity {
  int entity_id = 0;  // positive, unique within the session
  Span span;
  std::string trigger_type;
  std::optional<int> ecr_chain_id;  // gold-only event coreference chain

  bool operator==(const TriggerEntity&) const = default;
};

struct ArgumentEntity {
  int entity_id = 0;
  Span span;
  std::string argument_type;
  int trigger_entity_id = 0;  // must name a trigger in the same session

  bool operator==(const ArgumentEntity&) const = default;
};

struct AnnotatedSession {
  DialogueSession session;
  std::vector<TriggerEntity> triggers;
  std::vector<ArgumentEntity> arguments;
  Provenance label_source = Provenance::Human;

  bool operator==(const AnnotatedSession&) const = default;
};

enum class DatasetVariant { HumanHuman, HumanPseudo, PseudoPseudo, Mixed };

const char* to_string(DatasetVariant v);
DatasetVariant dataset_variant_from_string(const std::string& s);

// Mixed datasets carry per-session provenance as the authoritative record;
// the variant tag is then purely informational.
struct Dataset {
  DatasetVariant variant = DatasetVariant::HumanHuman;
  std::vector<AnnotatedSession> sessions;
};

struct Taxonomy {
  std::set<std::string> trigger_types;
  std::set<std::string> argument_types;
  // type -> instruction text used in labeling system prompts
  std::map<std::string, std::string> definitions;

  bool is_trigger(const std::string& t) const { return trigger_types.count(t) > 0; }
  bool is_argument(const std::string& t) const { return argument_types.count(t) > 0; }
};

// Types named in the source annotation scheme; extend via config.
Taxonomy default_taxonomy();

class EmptyDialogue : public Error {
 public:
  using Error::Error;
};

class EmptyDataset : public Error {
 public:
  using Error::Error;
};

// Invariant checks. Each throws InvariantViolation naming the failed
// invariant (and session id, where there is one).
void validate(const Utterance& u);
void validate(const Dialogue& d);
void validate(const DialogueSession& s);
void validate(const AnnotatedSession& a);
void validate(const Dataset& d);
void validate(const Taxonomy& t);
// Type-membership check, separate because most call sites have no taxonomy.
void validate_types(const AnnotatedSession& a, const Taxonomy& taxonomy);

// Fixed-window splitting: every session gets at most `window` utterances
// and a trailing remainder shorter than ceil(window/3) merges into the
// previous session. Session ids are "<dialogue.id>#<index>".
std::vector<DialogueSession> split_dialogue(const Dialogue& dialogue, int window);

// Utterance texts joined with '\n'; the text similarity operates on this.
std::string session_text(const DialogueSession& s);
std::string dialogue_text(const Dialogue& d);

}  // namespace sfa
