#pragma once

#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "minutes/costing.hpp"
#include "minutes/http_provider.hpp"
#include "minutes/prompting.hpp"
#include "minutes/provider.hpp"

namespace minutes::config {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ProviderEntry {
  bool is_mock = false;
  provider::ProviderConfig http;
  provider::MockParams mock;
};

struct Defaults {
  size_t n = 2500;
  int parallelism = 4;
  std::string separator = "\n";
};

struct AppConfig {
  std::map<std::string, ProviderEntry> providers;
  std::vector<costing::PricingTable> pricing;
  std::optional<std::string> prompt_registry_path;
  Defaults defaults;
};

inline costing::PricingTable pricing_from_json(const nlohmann::json& j) {
  costing::PricingTable p;
  p.provider_name = j.at("provider").get<std::string>();
  std::string unit = j.value("unit", "per_1k_tokens");
  if (unit == "per_1k_tokens") p.unit = costing::PriceUnit::PerThousandTokens;
  else if (unit == "per_1k_chars") p.unit = costing::PriceUnit::PerThousandChars;
  else throw ConfigError("unknown pricing unit \"" + unit + "\"");
  p.input_price = j.at("input_price").get<double>();
  p.output_price = j.at("output_price").get<double>();
  if (p.input_price < 0 || p.output_price < 0)
    throw ConfigError("negative price for provider \"" + p.provider_name + "\"");
  return p;
}

inline std::vector<costing::PricingTable> load_pricing(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open pricing file: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed pricing file: " + std::string(e.what()));
  }
  std::vector<costing::PricingTable> out;
  for (const auto& entry : j) out.push_back(pricing_from_json(entry));
  return out;
}

inline ProviderEntry provider_entry_from_json(const std::string& name,
                                              const nlohmann::json& j) {
  ProviderEntry e;
  if (j.value("type", "http") == "mock") {
    e.is_mock = true;
    e.mock.summary_words = j.value("summary_words", size_t{50});
    e.mock.call_latency = provider::Duration(j.value("call_latency", 0.0));
    e.mock.fail_first_attempts = j.value("fail_first_attempts", 0);
    e.mock.max_attempts = j.value("max_attempts", 3);
    return e;
  }
  e.http.name = name;
  e.http.endpoint = j.at("endpoint").get<std::string>();
  e.http.auth_env = j.value("auth_env", "");
  e.http.model = j.value("model", name);
  e.http.max_input_tokens = j.value("max_input_tokens", 4096);
  e.http.request_timeout = provider::Duration(j.value("timeout_s", 30.0));
  if (e.http.request_timeout.count() <= 0)
    throw ConfigError("provider \"" + name + "\": timeout must be > 0");
  if (j.contains("retry")) {
    const auto& r = j["retry"];
    e.http.retry.max_attempts = r.value("max_attempts", 3);
    e.http.retry.backoff_base = provider::Duration(r.value("backoff_base_s", 0.5));
    e.http.retry.backoff_multiplier = r.value("backoff_multiplier", 2.0);
    if (e.http.retry.max_attempts < 1)
      throw ConfigError("provider \"" + name + "\": max_attempts must be >= 1");
  }
  if (j.contains("decoding")) {
    const auto& d = j["decoding"];
    e.http.decoding.temperature = d.value("temperature", 0.0);
    e.http.decoding.max_output_tokens = d.value("max_output_tokens", 512);
    if (e.http.decoding.temperature < 0)
      throw ConfigError("provider \"" + name + "\": temperature must be >= 0");
  }
  return e;
}

inline AppConfig load_app_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed config file: " + std::string(e.what()));
  }
  AppConfig cfg;
  if (j.contains("providers"))
    for (auto& [name, pj] : j["providers"].items())
      cfg.providers[name] = provider_entry_from_json(name, pj);
  if (j.contains("pricing"))
    for (const auto& entry : j["pricing"]) cfg.pricing.push_back(pricing_from_json(entry));
  if (j.contains("pricing_file")) {
    auto more = load_pricing(j["pricing_file"].get<std::string>());
    cfg.pricing.insert(cfg.pricing.end(), more.begin(), more.end());
  }
  if (j.contains("prompt_registry"))
    cfg.prompt_registry_path = j["prompt_registry"].get<std::string>();
  if (j.contains("defaults")) {
    const auto& d = j["defaults"];
    cfg.defaults.n = d.value("n", size_t{2500});
    cfg.defaults.parallelism = d.value("parallelism", 4);
    cfg.defaults.separator = d.value("separator", "\n");
    if (cfg.defaults.n < 1) throw ConfigError("defaults.n must be >= 1");
  }
  return cfg;
}

// The name "mock" resolves to a default deterministic backend even without a
// config entry, so offline runs need no configuration file.
inline std::shared_ptr<provider::Provider> make_provider(const std::string& name,
                                                         const AppConfig& cfg) {
  auto it = cfg.providers.find(name);
  if (it == cfg.providers.end()) {
    if (name == "mock") return std::make_shared<provider::MockProvider>();
    throw ConfigError("unresolved provider \"" + name + "\"");
  }
  if (it->second.is_mock)
    return std::make_shared<provider::MockProvider>(it->second.mock, name);
  return std::make_shared<provider::HttpProvider>(it->second.http);
}

inline std::optional<costing::PricingTable> find_pricing(
    const AppConfig& cfg, const std::string& provider_name) {
  for (const auto& p : cfg.pricing)
    if (p.provider_name == provider_name) return p;
  return std::nullopt;
}

}  // namespace minutes::config
