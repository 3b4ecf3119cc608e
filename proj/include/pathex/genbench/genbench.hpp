#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pathex/corpus/corpus.hpp"
#include "pathex/qa/extract.hpp"

namespace pathex::genbench {

// instructions, blank line, context, blank line, request.
struct PromptTemplate {
  std::string instructions;
  std::string request;
  // Maximum context bytes kept; 0 means unlimited.
  std::size_t context_budget = 0;
};

// JSON object {instructions, request, context_budget?}.
PromptTemplate load_template(const std::filesystem::path& path);

// Substitutes the record's context. Over-budget contexts lose their tail;
// truncation and empty contexts are logged as warnings.
std::string render_prompt(const corpus::CorpusRecord& record, const PromptTemplate& tmpl);

struct GenerationParams {
  int max_new_tokens = 64;
  double temperature = 0.0;
  std::uint64_t seed = 0;
};

// Wire message: {"prompt", "max_new_tokens", "temperature", "seed"}.
std::string encode_request(std::string_view prompt, const GenerationParams& params);

struct TransportResult {
  enum class Outcome { kResponse, kConnectFailure, kTimeout };
  Outcome outcome = Outcome::kResponse;
  int status = 0;
  std::string body;
  std::string diagnostic;
};

// Sends one request body and reports what came back.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual TransportResult post(const std::string& body) = 0;
};

// HTTP POST of a JSON body to an endpoint URL such as
// "http://127.0.0.1:8080/generate".
class HttpTransport final : public Transport {
 public:
  HttpTransport(const std::string& endpoint, std::chrono::milliseconds timeout);
  TransportResult post(const std::string& body) override;

 private:
  std::string base_;
  std::string path_;
  std::chrono::milliseconds timeout_;
};

struct RetryPolicy {
  int retry_max = 3;
  std::chrono::milliseconds initial_backoff{200};
  double multiplier = 2.0;
};

// Calls a completion service with retries. Connection failures, timeouts,
// HTTP 429 and 5xx are retried (at most retry_max retries, backoff
// initial * multiplier^k); other statuses fail at once with SERVICE_ERROR.
// Exhausted retries raise SERVICE_UNREACHABLE, TIMEOUT or SERVICE_ERROR
// after the last failure kind.
class GenerationClient {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  GenerationClient(std::unique_ptr<Transport> transport, RetryPolicy policy = {},
                   Sleeper sleeper = nullptr);

  std::string generate(std::string_view prompt, const GenerationParams& params);
  int last_attempts() const { return last_attempts_; }

 private:
  std::unique_ptr<Transport> transport_;
  RetryPolicy policy_;
  Sleeper sleeper_;
  int last_attempts_ = 0;
};

std::string call_generation(const std::string& endpoint, std::string_view prompt,
                            const GenerationParams& params, const RetryPolicy& policy = {},
                            std::chrono::milliseconds timeout = std::chrono::seconds(60));

struct ParsedGeneration {
  std::optional<std::string> broad;
  std::optional<std::string> subtype;
  bool duplicate = false;
};

// Reads "Cancer type:" and "Subtype:" / "Specific cancer type:" lines
// (case-insensitive, first occurrence wins). Without labeled lines the first
// non-empty line becomes the broad answer. Never throws.
ParsedGeneration parse_generation(std::string_view raw);

struct GenerationResult {
  std::string record_id;
  std::string raw_text;
  std::optional<std::string> parsed_broad;
  std::optional<std::string> parsed_subtype;
  bool duplicate_answer_flag = false;
  std::int64_t latency_ms = 0;
  int attempts = 0;
  // Error code name and message when the service call failed.
  std::optional<std::string> error;
};

using ClientFactory = std::function<std::unique_ptr<GenerationClient>()>;

// One result per record, sorted by record_id. At most `max_in_flight`
// requests run at once, each worker with its own client.
std::vector<GenerationResult> run_benchmark(const std::vector<corpus::CorpusRecord>& records,
                                            const PromptTemplate& tmpl,
                                            const GenerationParams& params,
                                            const ClientFactory& make_client,
                                            std::size_t max_in_flight = 4);

// Two predictions per result; answers are localized in the context when
// possible. Absent answers become empty predictions.
std::vector<qa::Prediction> to_predictions(const std::vector<GenerationResult>& results,
                                           const std::vector<corpus::CorpusRecord>& records);

void write_results(const std::filesystem::path& path, const std::vector<GenerationResult>& results);
std::vector<GenerationResult> read_results(const std::filesystem::path& path);

}  // namespace pathex::genbench
