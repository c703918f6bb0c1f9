#include "sfa/tokenizer.hpp"

#include "sfa/errors.hpp"
#include "sfa/utf8.hpp"

namespace sfa {

std::vector<std::string> Tokenizer::token_strings(std::string_view text) const {
  std::vector<std::string> out;
  for (auto& tok : tokenize(text)) out.push_back(std::move(tok.surface));
  return out;
}

std::vector<Token> CharacterTokenizer::tokenize(std::string_view text) const {
  const auto cps = utf8::decode(text);
  std::vector<Token> out;
  out.reserve(cps.size());
  for (std::size_t i = 0; i < cps.size(); ++i) {
    std::string s;
    utf8::append(s, cps[i]);
    out.push_back({std::move(s), i, i + 1});
  }
  return out;
}

std::vector<Token> WhitespaceTokenizer::tokenize(std::string_view text) const {
  const auto cps = utf8::decode(text);
  std::vector<Token> out;
  std::size_t i = 0;
  auto is_ws = [](char32_t c) {
    return c == U' ' || c == U'\t' || c == U'\r' || c == U'\n' || c == U'\f' ||
           c == U'\v';
  };
  while (i < cps.size()) {
    while (i < cps.size() && is_ws(cps[i])) ++i;
    if (i >= cps.size()) break;
    const std::size_t start = i;
    std::string s;
    while (i < cps.size() && !is_ws(cps[i])) utf8::append(s, cps[i++]);
    out.push_back({std::move(s), start, i});
  }
  return out;
}

std::shared_ptr<const Tokenizer> make_tokenizer(const std::string& name) {
  if (name == "character") return std::make_shared<CharacterTokenizer>();
  if (name == "whitespace") return std::make_shared<WhitespaceTokenizer>();
  throw Error("unknown tokenizer: '" + name + "'");
}

}  // namespace sfa
