#pragma once

#include <string>
#include <vector>

#include "sfa/budget.hpp"
#include "sfa/corpus.hpp"
#include "sfa/evaluation.hpp"
#include "sfa/llm_gateway.hpp"
#include "sfa/money.hpp"
#include "sfa/synthesis.hpp"
#include "sfa/tokenizer.hpp"

namespace sfa {

// Whole-toolkit configuration, loaded from one JSON file; every field has
// a working default (see configs/default_config.json and the README key
// reference). Missing keys keep their defaults.
struct Config {
  std::string tokenizer_name = "character";
  std::string rng_name = "splitmix64";

  Taxonomy taxonomy = default_taxonomy();
  CostModel cost_model = default_cost_model();
  PoolSizes pools;

  std::vector<Money> hp_budgets;  // Human-Human + Human-Pseudo arm
  std::vector<Money> pp_budgets;  // Human-Human + Pseudo-Pseudo arm
  std::vector<double> ratios;     // Human-Human budget share grid
  std::vector<std::uint64_t> seeds;

  GenerationConfig generation;
  LabelingConfig labeling;
  EvalOptions evaluation;

  std::string llm_endpoint = "https://api.openai.com/v1/chat/completions";
  std::string llm_api_key_env = "OPENAI_API_KEY";
  RetryPolicy llm_retry;
  int llm_timeout_s = 120;
  TokenPrice llm_price{Money::parse("0.00003"), Money::parse("0.00006")};

  // Trainer command template; placeholders {train} {valid} {test} {pred}
  // (and {pretrain} in augmentation mode) are substituted per run.
  std::string trainer_command;
  bool augmentation_mode = false;

  int histogram_bucket_width = 16;
  bool sweep_sample_stddev = true;  // n-1 denominator

  std::shared_ptr<const Tokenizer> make_tokenizer() const;
  HttpClientConfig make_http_config() const;  // resolves the API key env var
};

Config default_config();
Config load_config(const std::string& path);
Config config_from_json_text(const std::string& text);

// Digest of the effective configuration, recorded in output manifests.
std::string config_digest(const Config& config);

}  // namespace sfa
