#include "flew/llm_client.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <istream>
#include <ostream>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace flew {

using nlohmann::json;

namespace {

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return (v && *v) ? std::string(v) : fallback;
}

}  // namespace

LlmClientConfig LlmClientConfig::with_env_overrides() const {
  LlmClientConfig out = *this;
  out.endpoint = env_or("FLEW_LLM_ENDPOINT", endpoint);
  out.model = env_or("FLEW_LLM_MODEL", model);
  out.timeout_ms = std::stoi(env_or("FLEW_LLM_TIMEOUT_MS", std::to_string(timeout_ms)));
  out.retries = std::stoi(env_or("FLEW_LLM_RETRIES", std::to_string(retries)));
  return out;
}

HttpLlmClient::HttpLlmClient(LlmClientConfig config) : config_(std::move(config)) {
  const std::string& url = config_.endpoint;
  const std::string scheme = "http://";
  if (url.rfind(scheme, 0) != 0) {
    throw Error("llm endpoint must be an http:// URL: '" + url + "'");
  }
  const auto slash = url.find('/', scheme.size());
  origin_ = slash == std::string::npos ? url : url.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : url.substr(slash);
  if (config_.timeout_ms <= 0 || config_.retries < 0) {
    throw Error("llm client: timeout must be positive and retries non-negative");
  }
}

std::string HttpLlmClient::complete(const std::string& prompt) {
  const json request{{"model", config_.model},
                     {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
                     {"temperature", 0}};
  const std::string body = request.dump();
  std::string last_error;
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    httplib::Client cli(origin_);
    const auto sec = config_.timeout_ms / 1000;
    const auto usec = (config_.timeout_ms % 1000) * 1000;
    cli.set_connection_timeout(sec, usec);
    cli.set_read_timeout(sec, usec);
    cli.set_write_timeout(sec, usec);
    auto res = cli.Post(path_, body, "application/json");
    if (!res) {
      last_error = "transport failure: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP status " + std::to_string(res->status);
      continue;
    }
    const json reply = json::parse(res->body, nullptr, /*allow_exceptions=*/false);
    if (reply.is_discarded()) throw TransportError("llm reply is not JSON");
    try {
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
      throw TransportError("llm reply lacks choices[0].message.content");
    }
  }
  throw TransportError("llm request to " + config_.endpoint + " failed after " +
                       std::to_string(config_.retries + 1) + " attempt(s): " + last_error);
}

std::string_view to_string(SplitProvenance provenance) {
  return provenance == SplitProvenance::service ? "service" : "fallback";
}

ServiceSplit split_with_service(std::string_view abstract, LlmClient& client, bool fallback) {
  try {
    const std::string reply = client.complete(build_split_prompt(abstract));
    FacetedAbstract split = parse_split_response(reply);
    const SplitReport report = validate_split(abstract, split);
    if (!report.ok()) throw SplitValidationError("split failed validation: " + report.diagnostics.front());
    return {std::move(split), SplitProvenance::service, {}};
  } catch (const Error& e) {
    if (!fallback) throw;
    return {heuristic_split(abstract), SplitProvenance::fallback, e.what()};
  }
}

std::vector<ServiceSplit> split_many(std::span<const std::string> abstracts, LlmClient& client,
                                     bool fallback, std::size_t max_in_flight) {
  std::vector<ServiceSplit> results(abstracts.size());
  std::vector<std::exception_ptr> failures(abstracts.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < abstracts.size(); i = next++) {
      try {
        results[i] = split_with_service(abstracts[i], client, fallback);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(max_in_flight, 1, std::max<std::size_t>(abstracts.size(), 1));
  std::vector<std::jthread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  pool.clear();
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return results;
}

void write_splits_jsonl(std::ostream& out, std::span<const SplitRecord> records) {
  for (const auto& r : records) {
    out << json{{"id", r.id},
                {"background", r.split.split.background},
                {"method", r.split.split.method},
                {"result", r.split.split.result},
                {"provenance", to_string(r.split.provenance)}}
               .dump()
        << '\n';
  }
}

std::vector<SplitRecord> read_splits_jsonl(std::istream& in) {
  std::vector<SplitRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const json obj = json::parse(line);
      const auto provenance = obj.at("provenance").get<std::string>();
      if (provenance != "service" && provenance != "fallback") throw Error("bad provenance");
      out.push_back({obj.at("id").get<std::string>(),
                     {{obj.at("background").get<std::string>(), obj.at("method").get<std::string>(),
                       obj.at("result").get<std::string>()},
                      provenance == "service" ? SplitProvenance::service : SplitProvenance::fallback,
                      {}}});
    } catch (const std::exception& e) {
      throw Error("splits line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

SplitStore to_split_store(std::span<const SplitRecord> records) {
  SplitStore store;
  for (const auto& r : records) store.insert_or_assign(r.id, r.split.split);
  return store;
}

}  // namespace flew
