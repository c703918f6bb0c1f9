#include "sfa/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace sfa {

namespace {

Money money_from_json(const nlohmann::json& j) {
  if (j.is_string()) return Money::parse(j.get<std::string>());
  if (j.is_number()) return Money::from_dollars(j.get<double>());
  throw ParseError("money values must be numbers or decimal strings");
}

std::vector<Money> money_list(const nlohmann::json& j) {
  std::vector<Money> out;
  for (const auto& v : j) out.push_back(money_from_json(v));
  return out;
}

void load_taxonomy(const nlohmann::json& j, Taxonomy& t) {
  if (j.contains("trigger_types")) {
    t.trigger_types.clear();
    for (const auto& [type, def] : j.at("trigger_types").items()) {
      t.trigger_types.insert(type);
      t.definitions[type] = def.get<std::string>();
    }
  }
  if (j.contains("argument_types")) {
    t.argument_types.clear();
    for (const auto& [type, def] : j.at("argument_types").items()) {
      t.argument_types.insert(type);
      t.definitions[type] = def.get<std::string>();
    }
  }
  validate(t);
}

}  // namespace

Config default_config() {
  Config c;
  for (double b : {800, 1200, 1600, 3200, 6400, 12800})
    c.hp_budgets.push_back(Money::from_dollars(b));
  for (double b : {200, 400, 800, 1200, 1600})
    c.pp_budgets.push_back(Money::from_dollars(b));
  for (int i = 0; i <= 10; ++i) c.ratios.push_back(i / 10.0);
  c.seeds = {1, 2, 3, 4, 5};
  return c;
}

Config config_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid config JSON: ") + e.what());
  }

  Config c = default_config();
  try {
    if (j.contains("tokenizer")) c.tokenizer_name = j["tokenizer"].get<std::string>();
    if (j.contains("rng")) c.rng_name = j["rng"].get<std::string>();
    if (c.rng_name != "splitmix64")
      throw ParseError("unsupported rng '" + c.rng_name + "' (only splitmix64)");
    if (j.contains("taxonomy")) load_taxonomy(j["taxonomy"], c.taxonomy);

    if (j.contains("cost_model")) {
      const auto& m = j["cost_model"];
      if (m.contains("hh_text")) c.cost_model.hh_text = money_from_json(m["hh_text"]);
      if (m.contains("hh_label")) c.cost_model.hh_label = money_from_json(m["hh_label"]);
      if (m.contains("hp_text")) c.cost_model.hp_text = money_from_json(m["hp_text"]);
      if (m.contains("hp_label")) c.cost_model.hp_label = money_from_json(m["hp_label"]);
      if (m.contains("pp_text")) c.cost_model.pp_text = money_from_json(m["pp_text"]);
      if (m.contains("pp_label")) c.cost_model.pp_label = money_from_json(m["pp_label"]);
      validate(c.cost_model);
    }
    if (j.contains("pools")) {
      const auto& p = j["pools"];
      c.pools.human_human = p.value("human_human", c.pools.human_human);
      c.pools.human_pseudo = p.value("human_pseudo", c.pools.human_pseudo);
      c.pools.pseudo_pseudo = p.value("pseudo_pseudo", c.pools.pseudo_pseudo);
    }
    if (j.contains("budgets")) {
      const auto& b = j["budgets"];
      if (b.contains("human_pseudo")) c.hp_budgets = money_list(b["human_pseudo"]);
      if (b.contains("pseudo_pseudo")) c.pp_budgets = money_list(b["pseudo_pseudo"]);
    }
    if (j.contains("ratios")) c.ratios = j["ratios"].get<std::vector<double>>();
    if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();

    if (j.contains("generation")) {
      const auto& g = j["generation"];
      auto& gc = c.generation;
      gc.n_fewshot_human = g.value("n_fewshot_human", gc.n_fewshot_human);
      gc.n_fewshot_pseudo = g.value("n_fewshot_pseudo", gc.n_fewshot_pseudo);
      gc.accept_threshold = g.value("accept_threshold", gc.accept_threshold);
      gc.temperature = g.value("temperature", gc.temperature);
      gc.seed = g.value("seed", gc.seed);
      gc.attempt_cap_factor = g.value("attempt_cap_factor", gc.attempt_cap_factor);
      gc.model_id = g.value("model", gc.model_id);
      gc.max_output_tokens = g.value("max_output_tokens", gc.max_output_tokens);
      if (gc.n_fewshot_human + gc.n_fewshot_pseudo < 1)
        throw ParseError("generation: need at least one few-shot slot");
      if (gc.accept_threshold <= 0.0 || gc.accept_threshold > 1.0)
        throw ParseError("generation: accept_threshold must be in (0, 1]");
    }
    if (j.contains("labeling")) {
      const auto& l = j["labeling"];
      auto& lc = c.labeling;
      lc.n_similar_fewshots = l.value("n_similar_fewshots", lc.n_similar_fewshots);
      lc.anchor_session_id = l.value("anchor_session_id", lc.anchor_session_id);
      lc.min_exemplar_entities =
          l.value("min_exemplar_entities", lc.min_exemplar_entities);
      lc.seed = l.value("seed", lc.seed);
      lc.temperature = l.value("temperature", lc.temperature);
      lc.model_id = l.value("model", lc.model_id);
      lc.max_output_tokens = l.value("max_output_tokens", lc.max_output_tokens);
      lc.max_concurrency = l.value("max_concurrency", lc.max_concurrency);
      if (lc.n_similar_fewshots < 0)
        throw ParseError("labeling: n_similar_fewshots must be >= 0");
    }
    if (j.contains("evaluation")) {
      const auto& e = j["evaluation"];
      c.evaluation.ecr_allowance = e.value("ecr_allowance", c.evaluation.ecr_allowance);
      c.evaluation.strict_trigger_gate =
          e.value("strict_trigger_gate", c.evaluation.strict_trigger_gate);
    }
    if (j.contains("llm")) {
      const auto& l = j["llm"];
      c.llm_endpoint = l.value("endpoint", c.llm_endpoint);
      c.llm_api_key_env = l.value("api_key_env", c.llm_api_key_env);
      c.llm_timeout_s = l.value("timeout_s", c.llm_timeout_s);
      if (l.contains("retry")) {
        const auto& r = l["retry"];
        c.llm_retry.max_retries = r.value("max_retries", c.llm_retry.max_retries);
        c.llm_retry.initial_backoff_ms =
            r.value("initial_backoff_ms", c.llm_retry.initial_backoff_ms);
        c.llm_retry.multiplier = r.value("multiplier", c.llm_retry.multiplier);
      }
      if (l.contains("price")) {
        const auto& p = l["price"];
        if (p.contains("per_prompt_token"))
          c.llm_price.per_prompt_token = money_from_json(p["per_prompt_token"]);
        if (p.contains("per_completion_token"))
          c.llm_price.per_completion_token = money_from_json(p["per_completion_token"]);
      }
    }
    if (j.contains("trainer")) {
      const auto& t = j["trainer"];
      c.trainer_command = t.value("command", c.trainer_command);
      c.augmentation_mode = t.value("augmentation_mode", c.augmentation_mode);
    }
    if (j.contains("stats"))
      c.histogram_bucket_width =
          j["stats"].value("histogram_bucket_width", c.histogram_bucket_width);
    if (j.contains("sweep"))
      c.sweep_sample_stddev = j["sweep"].value("sample_stddev", c.sweep_sample_stddev);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad config value: ") + e.what());
  }

  make_tokenizer(c.tokenizer_name);  // rejects unknown names early
  return c;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_from_json_text(buf.str());
}

std::shared_ptr<const Tokenizer> Config::make_tokenizer() const {
  return sfa::make_tokenizer(tokenizer_name);
}

HttpClientConfig Config::make_http_config() const {
  HttpClientConfig h;
  h.endpoint_url = llm_endpoint;
  h.retry = llm_retry;
  h.timeout_s = llm_timeout_s;
  if (const char* key = std::getenv(llm_api_key_env.c_str())) h.api_key = key;
  return h;
}

std::string config_digest(const Config& config) {
  // Digest over a canonical rendering of the fields that shape outputs.
  std::ostringstream s;
  s << config.tokenizer_name << '|' << config.rng_name << '|';
  for (const auto& t : config.taxonomy.trigger_types) s << t << ',';
  s << '|';
  for (const auto& t : config.taxonomy.argument_types) s << t << ',';
  s << '|' << config.cost_model.hh_text.micros() << ','
    << config.cost_model.hh_label.micros() << ','
    << config.cost_model.hp_text.micros() << ','
    << config.cost_model.hp_label.micros() << ','
    << config.cost_model.pp_text.micros() << ','
    << config.cost_model.pp_label.micros() << '|' << config.pools.human_human
    << ',' << config.pools.human_pseudo << ',' << config.pools.pseudo_pseudo << '|';
  for (const auto& b : config.hp_budgets) s << b.micros() << ',';
  s << '|';
  for (const auto& b : config.pp_budgets) s << b.micros() << ',';
  s << '|';
  char buf[32];
  for (const double r : config.ratios) {
    std::snprintf(buf, sizeof buf, "%.6f,", r);
    s << buf;
  }
  s << '|';
  for (const auto seed : config.seeds) s << seed << ',';
  s << '|' << config.trainer_command << '|' << (config.augmentation_mode ? 1 : 0)
    << '|' << (config.evaluation.ecr_allowance ? 1 : 0) << ','
    << (config.evaluation.strict_trigger_gate ? 1 : 0) << '|'
    << (config.sweep_sample_stddev ? 1 : 0);

  const std::string text = s.str();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace sfa
