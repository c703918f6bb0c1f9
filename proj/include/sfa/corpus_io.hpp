#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sfa/corpus.hpp"

namespace sfa {

// Corpus files are UTF-8 JSON lines, one AnnotatedSession per line; see
// README for the field list. Character offsets count Unicode scalar
// values, not bytes. read_corpus re-checks every invariant; nothing that
// violates them gets past this boundary.
std::vector<AnnotatedSession> read_corpus(const std::string& path);
void write_corpus(const std::vector<AnnotatedSession>& sessions,
                  const std::string& path);

std::vector<AnnotatedSession> read_corpus(std::istream& in,
                                          const std::string& origin = "<stream>");
void write_corpus(const std::vector<AnnotatedSession>& sessions, std::ostream& out);

// Plain dialogues (no annotations) use the same JSONL envelope minus the
// entity fields; the split/generate subcommands speak this format.
std::vector<Dialogue> read_dialogues(const std::string& path);
void write_dialogues(const std::vector<Dialogue>& dialogues, const std::string& path);

// Unannotated sessions (the split output and the labeling input): the
// session fields of the corpus format without labels.
std::vector<DialogueSession> read_sessions(const std::string& path);
void write_sessions(const std::vector<DialogueSession>& sessions,
                    const std::string& path);

std::string to_json_line(const AnnotatedSession& a);
AnnotatedSession session_from_json_line(const std::string& line, int line_no = 0);

}  // namespace sfa
