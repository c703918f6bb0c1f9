#include "sfa/similarity.hpp"

#include <algorithm>
#include <unordered_map>

namespace sfa {

namespace {

// Interned token ids; LCS compares ints, not strings.
struct Interner {
  std::unordered_map<std::string, int> ids;

  std::vector<int> intern(const std::vector<std::string>& tokens) {
    std::vector<int> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) {
      auto [it, _] = ids.emplace(t, static_cast<int>(ids.size()));
      out.push_back(it->second);
    }
    return out;
  }
};

std::size_t lcs_ids(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<int> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      if (a[i - 1] == b[j - 1])
        cur[j] = prev[j - 1] + 1;
      else
        cur[j] = std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return static_cast<std::size_t>(prev[b.size()]);
}

double rouge_l_ids(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.empty() || b.empty()) return 0.0;
  const double lcs = static_cast<double>(lcs_ids(a, b));
  const double p = lcs / static_cast<double>(a.size());
  const double r = lcs / static_cast<double>(b.size());
  if (p + r == 0.0) return 0.0;
  return 2.0 * p * r / (p + r);
}

std::vector<std::vector<int>> intern_all(const std::vector<std::string>& texts,
                                         const Tokenizer& tokenizer) {
  Interner interner;
  std::vector<std::vector<int>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(interner.intern(tokenizer.token_strings(t)));
  return out;
}

}  // namespace

std::size_t lcs_length(const std::vector<std::string>& a,
                       const std::vector<std::string>& b) {
  Interner interner;
  return lcs_ids(interner.intern(a), interner.intern(b));
}

SimilarityScore rouge_l(std::string_view a, std::string_view b,
                        const Tokenizer& tokenizer) {
  Interner interner;
  const auto ia = interner.intern(tokenizer.token_strings(a));
  const auto ib = interner.intern(tokenizer.token_strings(b));
  return {rouge_l_ids(ia, ib)};
}

std::vector<double> scores_against_pool(std::string_view x,
                                        const std::vector<std::string>& pool,
                                        const Tokenizer& tokenizer) {
  Interner interner;
  const auto ix = interner.intern(tokenizer.token_strings(x));
  std::vector<std::vector<int>> ipool;
  ipool.reserve(pool.size());
  for (const auto& p : pool) ipool.push_back(interner.intern(tokenizer.token_strings(p)));

  std::vector<double> scores(pool.size());
  const auto n = static_cast<std::ptrdiff_t>(pool.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) scores[i] = rouge_l_ids(ix, ipool[i]);
  return scores;
}

std::vector<std::vector<double>> pairwise_similarity(
    const std::vector<std::string>& texts, const Tokenizer& tokenizer) {
  const auto ids = intern_all(texts, tokenizer);
  const auto n = static_cast<std::ptrdiff_t>(texts.size());
  std::vector<std::vector<double>> m(texts.size(),
                                     std::vector<double>(texts.size(), 0.0));
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    for (std::ptrdiff_t j = i + 1; j < n; ++j) {
      const double s = rouge_l_ids(ids[i], ids[j]);
      m[i][j] = s;
      m[j][i] = s;
    }
  }
  for (std::ptrdiff_t i = 0; i < n; ++i) m[i][i] = texts[i].empty() ? 0.0 : 1.0;
  return m;
}

namespace serial_ref {

std::vector<double> scores_against_pool(std::string_view x,
                                        const std::vector<std::string>& pool,
                                        const Tokenizer& tokenizer) {
  Interner interner;
  const auto ix = interner.intern(tokenizer.token_strings(x));
  std::vector<double> scores;
  scores.reserve(pool.size());
  for (const auto& p : pool)
    scores.push_back(rouge_l_ids(ix, interner.intern(tokenizer.token_strings(p))));
  return scores;
}

std::vector<std::vector<double>> pairwise_similarity(
    const std::vector<std::string>& texts, const Tokenizer& tokenizer) {
  const auto ids = intern_all(texts, tokenizer);
  const auto n = texts.size();
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    m[i][i] = texts[i].empty() ? 0.0 : 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = rouge_l_ids(ids[i], ids[j]);
      m[i][j] = s;
      m[j][i] = s;
    }
  }
  return m;
}

}  // namespace serial_ref

std::pair<SimilarityScore, std::size_t> max_similarity(
    std::string_view x, const std::vector<std::string>& pool,
    const Tokenizer& tokenizer) {
  if (pool.empty()) throw EmptyPool("max_similarity: empty pool");
  const auto scores = scores_against_pool(x, pool, tokenizer);
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return {{scores[best]}, best};
}

double max_offdiagonal(const std::vector<std::vector<double>>& matrix) {
  double best = 0.0;
  for (std::size_t i = 0; i < matrix.size(); ++i)
    for (std::size_t j = i + 1; j < matrix.size(); ++j)
      best = std::max(best, matrix[i][j]);
  return best;
}

std::vector<DialogueSession> dedup_to_size(const std::vector<DialogueSession>& pool,
                                           std::size_t target,
                                           const Tokenizer& tokenizer) {
  if (target > pool.size())
    throw TargetTooLarge("dedup_to_size: target " + std::to_string(target) +
                         " > pool size " + std::to_string(pool.size()));
  if (target == pool.size()) return pool;

  std::vector<std::string> texts;
  texts.reserve(pool.size());
  for (const auto& s : pool) texts.push_back(session_text(s));
  const auto sim = pairwise_similarity(texts, tokenizer);

  std::vector<bool> alive(pool.size(), true);
  std::size_t n_alive = pool.size();
  while (n_alive > target) {
    // Victim: the alive item whose max similarity to the other alive items
    // is largest; >= keeps the later-indexed one on ties.
    std::ptrdiff_t victim = -1;
    double victim_score = -1.0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (!alive[i]) continue;
      double mx = 0.0;
      for (std::size_t j = 0; j < pool.size(); ++j)
        if (alive[j] && j != i) mx = std::max(mx, sim[i][j]);
      if (mx >= victim_score) {
        victim_score = mx;
        victim = static_cast<std::ptrdiff_t>(i);
      }
    }
    alive[victim] = false;
    --n_alive;
  }

  std::vector<DialogueSession> out;
  out.reserve(target);
  for (std::size_t i = 0; i < pool.size(); ++i)
    if (alive[i]) out.push_back(pool[i]);
  return out;
}

std::vector<std::string> top_k_similar(
    std::string_view target, const std::vector<std::pair<std::string, std::string>>& pool,
    std::size_t k, const Tokenizer& tokenizer) {
  if (k > pool.size())
    throw KTooLarge("top_k_similar: k " + std::to_string(k) + " > pool size " +
                    std::to_string(pool.size()));
  std::vector<std::string> texts;
  texts.reserve(pool.size());
  for (const auto& [_, text] : pool) texts.push_back(text);
  const auto scores = scores_against_pool(target, texts, tokenizer);

  std::vector<std::size_t> order(pool.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return pool[a].first < pool[b].first;
  });

  std::vector<std::string> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(pool[order[i]].first);
  return out;
}

}  // namespace sfa
