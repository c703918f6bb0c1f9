#pragma once

#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "sfa/corpus.hpp"
#include "sfa/tokenizer.hpp"

namespace sfa {

// The three-step labeling wire format:
//
//   Step 1:
//   E: You <E1>line up</E1> the <E2>Gyozas</E2> first.
//   I: In a circle?
//   Step 2:
//   E1: PLACE
//   Step 3:
//   (E2, Object, E1)
//
// Step 1 repeats the dialogue with entities wrapped in flat <Ek>...</Ek>
// tags, step 2 names the trigger entities, step 3 links arguments to
// triggers as (argument, type, trigger) triplets.

enum class TranscriptErrorKind {
  MissingStepHeader,
  MalformedTag,
  DuplicateTagId,
  ContextAltered,
  UnknownType,
  DanglingReference,
  OrphanEntity,
  UtteranceCountMismatch,
};

const char* to_string(TranscriptErrorKind kind);

class TranscriptError : public Error {
 public:
  TranscriptError(TranscriptErrorKind kind, const std::string& msg)
      : Error(std::string(to_string(kind)) + ": " + msg), kind_(kind) {}
  TranscriptErrorKind kind() const { return kind_; }

 private:
  TranscriptErrorKind kind_;
};

// The raw three blocks before semantic validation.
struct TaggedTranscript {
  std::vector<std::pair<Speaker, std::string>> step1_text;
  std::vector<std::pair<int, std::string>> step2_lines;         // (id, trigger type)
  std::vector<std::tuple<int, std::string, int>> step3_lines;   // (arg, type, trigger)
};

// Structural split into the three step blocks. Throws MissingStepHeader /
// MalformedTag; everything semantic is left to parse_transcript.
TaggedTranscript split_transcript(const std::string& reply);

// Full parse + validation of an LLM labeling reply against the session it
// was asked to label. Detagging step 1 must reproduce the original
// utterances exactly, up to NFC normalization and per-utterance trimming;
// anything else is ContextAltered. Spans come out in Unicode scalar
// offsets of the original text. The result always satisfies every corpus
// invariant and carries label_source = Pseudo.
AnnotatedSession parse_transcript(const std::string& reply,
                                  const DialogueSession& original,
                                  const Taxonomy& taxonomy);

// Exact inverse of parse_transcript for canonical sessions. Entity ids are
// reassigned in span order (utterance, then start offset), numbering from
// 1. ECR chain ids have no transcript representation and are dropped.
std::string render_transcript(const AnnotatedSession& annotated);

// Span-orders entities and renumbers ids from 1, rewiring argument links.
// parse(render(x), s) == x holds exactly for canonicalized x.
AnnotatedSession canonicalize(const AnnotatedSession& annotated);

class MisalignedEntity : public Error {
 public:
  using Error::Error;
};

class UnknownSessionId : public Error {
 public:
  using Error::Error;
};

class InconsistentLinks : public Error {
 public:
  using Error::Error;
};

// One token row of the sequence-labeling export. Absent ids/labels are
// written as "_" in the TSV form.
struct SequenceRecordRow {
  std::string session_id;
  int utterance_index = 0;
  int token_index = 0;
  std::string surface;
  std::string bio_tag;  // "O", "B-<type>" or "I-<type>"
  std::optional<int> entity_id;
  std::optional<int> head_entity_id;  // arguments: the linked trigger
  std::string relation_label;         // arguments: the argument type

  bool operator==(const SequenceRecordRow&) const = default;
};

// BIO rows, one per token. Every entity boundary must land on a token
// boundary (always true under the character tokenizer).
std::vector<SequenceRecordRow> to_sequence_records(const AnnotatedSession& annotated,
                                                   const Tokenizer& tokenizer);

// Rebuilds annotations from BIO rows; the inverse of to_sequence_records
// on its image. A stray I-tag opening an entity is repaired as B. Rows of
// one entity disagreeing on head or relation raise InconsistentLinks.
std::vector<AnnotatedSession> from_sequence_records(
    const std::vector<SequenceRecordRow>& rows,
    const std::vector<DialogueSession>& sessions, const Tokenizer& tokenizer,
    Provenance label_source = Provenance::Pseudo);

// 8-column TSV, blank line between utterances, '#' starts a comment line.
// Tabs and backslashes inside surfaces are escaped as \t and \\.
void write_records_tsv(const std::vector<AnnotatedSession>& sessions,
                       const Tokenizer& tokenizer, const std::string& path);
std::vector<SequenceRecordRow> read_records_tsv(const std::string& path);

}  // namespace sfa
