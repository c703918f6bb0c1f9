#include "sfa/stats.hpp"

#include <cmath>
#include <map>

namespace sfa {

namespace {

LengthStats stats_from_lengths(const std::vector<long>& lengths, int bucket_width) {
  if (lengths.empty()) throw EmptyDataset("length_stats: no sessions");
  if (bucket_width < 1) throw Error("length_stats: bucket width must be >= 1");

  LengthStats out;
  double sum = 0;
  for (long n : lengths) sum += static_cast<double>(n);
  out.mean = sum / static_cast<double>(lengths.size());

  double sq = 0;
  for (long n : lengths) {
    const double d = static_cast<double>(n) - out.mean;
    sq += d * d;
  }
  out.stddev = std::sqrt(sq / static_cast<double>(lengths.size()));

  std::map<long, long> buckets;
  for (long n : lengths) ++buckets[(n / bucket_width) * bucket_width];
  out.histogram.assign(buckets.begin(), buckets.end());
  return out;
}

long session_token_count(const DialogueSession& s, const Tokenizer& tokenizer) {
  long n = 0;
  for (const auto& u : s.utterances)
    n += static_cast<long>(tokenizer.tokenize(u.text).size());
  return n;
}

}  // namespace

LengthStats length_stats(const std::vector<DialogueSession>& sessions,
                         const Tokenizer& tokenizer, int bucket_width) {
  std::vector<long> lengths;
  lengths.reserve(sessions.size());
  for (const auto& s : sessions) lengths.push_back(session_token_count(s, tokenizer));
  return stats_from_lengths(lengths, bucket_width);
}

LengthStats length_stats(const std::vector<AnnotatedSession>& sessions,
                         const Tokenizer& tokenizer, int bucket_width) {
  std::vector<long> lengths;
  lengths.reserve(sessions.size());
  for (const auto& a : sessions)
    lengths.push_back(session_token_count(a.session, tokenizer));
  return stats_from_lengths(lengths, bucket_width);
}

LabelDistribution label_distribution(const Dataset& dataset) {
  if (dataset.sessions.empty()) throw EmptyDataset("label_distribution: no sessions");

  LabelDistribution out;
  for (const auto& a : dataset.sessions) {
    for (const auto& t : a.triggers) ++out.triggers[t.trigger_type].count;
    for (const auto& g : a.arguments) ++out.arguments[g.argument_type].count;
  }
  const double n = static_cast<double>(dataset.sessions.size());
  for (auto& [_, st] : out.triggers) st.per_session_density = st.count / n;
  for (auto& [_, st] : out.arguments) st.per_session_density = st.count / n;
  return out;
}

}  // namespace sfa
