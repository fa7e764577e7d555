#pragma once

// Single-turn text-in/text-out client for an external splitter service, and
// the split-with-fallback protocol built on it.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flew/text_splitter.hpp"

namespace flew {

class LlmClient {
 public:
  virtual ~LlmClient() = default;
  /// Sends one prompt and returns the model's raw text reply. Implementations
  /// used with split_many must be safe to call concurrently.
  virtual std::string complete(const std::string& prompt) = 0;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

struct LlmClientConfig {
  std::string endpoint;  // e.g. http://localhost:8000/v1/chat/completions
  std::string model = "splitter";
  int timeout_ms = 30000;
  int retries = 2;

  bool configured() const { return !endpoint.empty(); }
  /// Overrides fields from FLEW_LLM_ENDPOINT, FLEW_LLM_MODEL,
  /// FLEW_LLM_TIMEOUT_MS and FLEW_LLM_RETRIES when set.
  LlmClientConfig with_env_overrides() const;
};

/// OpenAI-compatible chat-completions client over plain HTTP. The request is
/// {"model": ..., "messages": [{"role": "user", "content": prompt}],
/// "temperature": 0}; the reply text is choices[0].message.content.
class HttpLlmClient : public LlmClient {
 public:
  explicit HttpLlmClient(LlmClientConfig config);
  std::string complete(const std::string& prompt) override;

 private:
  LlmClientConfig config_;
  std::string origin_;  // scheme://host[:port]
  std::string path_;
};

enum class SplitProvenance { service, fallback };
std::string_view to_string(SplitProvenance provenance);

struct ServiceSplit {
  FacetedAbstract split;
  SplitProvenance provenance = SplitProvenance::service;
  std::string note;  // why the fallback was taken, empty otherwise

  bool operator==(const ServiceSplit&) const = default;
};

/// Raised when a service reply parses but fails intactness/coverage.
class SplitValidationError : public Error {
 public:
  using Error::Error;
};

/// Prompts the service, then parses and validates the reply. On any failure
/// the heuristic split is returned (tagged fallback) if `fallback` is set,
/// otherwise the error propagates.
ServiceSplit split_with_service(std::string_view abstract, LlmClient& client, bool fallback);

/// Same as split_with_service for many abstracts with at most `max_in_flight`
/// concurrent requests. Output is in input order. Without fallback, the
/// first failing input (by position) is rethrown after all requests finish.
std::vector<ServiceSplit> split_many(std::span<const std::string> abstracts, LlmClient& client,
                                     bool fallback, std::size_t max_in_flight);

struct SplitRecord {
  PaperId id;
  ServiceSplit split;
};

/// splits.jsonl: {"id", "background", "method", "result", "provenance"} per line.
void write_splits_jsonl(std::ostream& out, std::span<const SplitRecord> records);
std::vector<SplitRecord> read_splits_jsonl(std::istream& in);
SplitStore to_split_store(std::span<const SplitRecord> records);

}  // namespace flew
