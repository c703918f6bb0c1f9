#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sfa/corpus.hpp"
#include "sfa/tokenizer.hpp"

namespace sfa {

class EmptyPool : public Error {
 public:
  using Error::Error;
};

class TargetTooLarge : public Error {
 public:
  using Error::Error;
};

class KTooLarge : public Error {
 public:
  using Error::Error;
};

struct SimilarityScore {
  double value = 0.0;  // always in [0, 1]

  auto operator<=>(const SimilarityScore&) const = default;
};

// Length of a longest common subsequence of two token lists.
std::size_t lcs_length(const std::vector<std::string>& a,
                       const std::vector<std::string>& b);

// ROUGE-L F-measure with beta = 1: P = LCS/|a|, R = LCS/|b|,
// score = 2PR/(P+R); 0 when either side is empty.
SimilarityScore rouge_l(std::string_view a, std::string_view b,
                        const Tokenizer& tokenizer);

// Maximum rouge_l(x, p) over the pool and the first index attaining it.
std::pair<SimilarityScore, std::size_t> max_similarity(
    std::string_view x, const std::vector<std::string>& pool,
    const Tokenizer& tokenizer);

// Greedy max-removal dedup: repeatedly drops the session whose maximum
// similarity to the rest is largest (ties: drop the later-indexed one)
// until `target` remain. Never increases the pool's maximum pairwise
// similarity.
std::vector<DialogueSession> dedup_to_size(const std::vector<DialogueSession>& pool,
                                           std::size_t target,
                                           const Tokenizer& tokenizer);

// Ids of the k pool entries most similar to the target, descending score,
// ties by ascending id.
std::vector<std::string> top_k_similar(
    std::string_view target, const std::vector<std::pair<std::string, std::string>>& pool,
    std::size_t k, const Tokenizer& tokenizer);

// Batch scoring kernels. The default entry points run the inner loop with
// OpenMP; the serial twins compute the same values one pair at a time and
// back the cross-check tests and the benchmark. Results are identical
// bit-for-bit regardless of thread count.
std::vector<double> scores_against_pool(std::string_view x,
                                        const std::vector<std::string>& pool,
                                        const Tokenizer& tokenizer);
std::vector<std::vector<double>> pairwise_similarity(
    const std::vector<std::string>& texts, const Tokenizer& tokenizer);

namespace serial_ref {
std::vector<double> scores_against_pool(std::string_view x,
                                        const std::vector<std::string>& pool,
                                        const Tokenizer& tokenizer);
std::vector<std::vector<double>> pairwise_similarity(
    const std::vector<std::string>& texts, const Tokenizer& tokenizer);
}  // namespace serial_ref

// Largest off-diagonal value of a pairwise matrix; 0 for pools of size < 2.
double max_offdiagonal(const std::vector<std::vector<double>>& matrix);

}  // namespace sfa
