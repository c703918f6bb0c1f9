#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace sfa {

// A token plus its position in the source text. Offsets count Unicode
// scalar values and are end-exclusive.
struct Token {
  std::string surface;
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const Token&) const = default;
};

// Pure function text -> offset-aligned tokens. Implementations must be
// deterministic and thread-safe.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::vector<Token> tokenize(std::string_view text) const = 0;
  virtual std::string name() const = 0;

  std::vector<std::string> token_strings(std::string_view text) const;
};

// One token per Unicode scalar value. The default: robust for Japanese,
// where whitespace carries no word boundaries.
class CharacterTokenizer final : public Tokenizer {
 public:
  std::vector<Token> tokenize(std::string_view text) const override;
  std::string name() const override { return "character"; }
};

// Splits on ASCII whitespace runs; convenient for Latin-script tests.
class WhitespaceTokenizer final : public Tokenizer {
 public:
  std::vector<Token> tokenize(std::string_view text) const override;
  std::string name() const override { return "whitespace"; }
};

// "character" or "whitespace"; throws sfa::Error otherwise.
std::shared_ptr<const Tokenizer> make_tokenizer(const std::string& name);

}  // namespace sfa
