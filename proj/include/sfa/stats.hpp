#pragma once

#include <map>
#include <string>
#include <vector>

#include "sfa/corpus.hpp"
#include "sfa/tokenizer.hpp"

namespace sfa {

struct LengthStats {
  double mean = 0.0;
  double stddev = 0.0;  // population stddev
  // (bucket start, count) for non-empty fixed-width buckets, ascending.
  std::vector<std::pair<long, long>> histogram;
};

// Session length = total tokens over its utterances.
LengthStats length_stats(const std::vector<DialogueSession>& sessions,
                         const Tokenizer& tokenizer, int bucket_width = 16);
LengthStats length_stats(const std::vector<AnnotatedSession>& sessions,
                         const Tokenizer& tokenizer, int bucket_width = 16);

struct LabelStat {
  long count = 0;
  double per_session_density = 0.0;
};

// Trigger and argument counts reported separately; only observed types
// appear.
struct LabelDistribution {
  std::map<std::string, LabelStat> triggers;
  std::map<std::string, LabelStat> arguments;
};

LabelDistribution label_distribution(const Dataset& dataset);

}  // namespace sfa
