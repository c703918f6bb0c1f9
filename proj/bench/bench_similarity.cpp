// Times the OpenMP similarity kernels against the serial reference on a
// synthetic session pool and verifies they agree exactly.
//
//   ./sfa_bench [n_texts] [text_len]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sfa/rng.hpp"
#include "sfa/similarity.hpp"
#include "sfa/tokenizer.hpp"

using namespace sfa;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 160;
  const int len = argc > 2 ? std::atoi(argv[2]) : 400;

  const std::vector<std::string> alphabet = {"鍋", "油", "を", "熱", "し", "て",
                                             "餃", "子", "、", " "};
  SplitMix64 rng(7);
  std::vector<std::string> texts;
  texts.reserve(n);
  for (int i = 0; i < n; ++i) {
    std::string t;
    for (int k = 0; k < len; ++k) t += alphabet[rng.below(alphabet.size())];
    texts.push_back(std::move(t));
  }

  CharacterTokenizer tok;
#ifdef _OPENMP
  std::printf("openmp: %d threads\n", omp_get_max_threads());
#else
  std::printf("openmp: disabled at compile time\n");
#endif
  std::printf("pool: %d texts x %d chars (%d LCS pairs)\n", n, len,
              n * (n - 1) / 2);

  const auto t0 = std::chrono::steady_clock::now();
  const auto serial = serial_ref::pairwise_similarity(texts, tok);
  const double serial_s = seconds_since(t0);
  std::printf("serial reference: %8.3f s\n", serial_s);

  const auto t1 = std::chrono::steady_clock::now();
  const auto parallel = pairwise_similarity(texts, tok);
  const double parallel_s = seconds_since(t1);
  std::printf("openmp kernel:    %8.3f s  (%.2fx)\n", parallel_s,
              serial_s / parallel_s);

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (serial[i][j] != parallel[i][j]) {
        std::fprintf(stderr, "MISMATCH at (%d, %d): %.17g vs %.17g\n", i, j,
                     serial[i][j], parallel[i][j]);
        return 1;
      }
  std::printf("results identical: max pairwise similarity %.6f\n",
              max_offdiagonal(serial));
  return 0;
}
