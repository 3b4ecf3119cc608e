#include "pathex/genbench/genbench.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "httplib.h"
#include "pathex/metrics/answer.hpp"
#include "pathex/util/error.hpp"
#include "pathex/util/jsonl.hpp"
#include "pathex/util/log.hpp"
#include "pathex/util/parallel.hpp"
#include "pathex/util/text.hpp"

namespace pathex::genbench {

PromptTemplate load_template(const std::filesystem::path& path) {
  try {
    const Json j = Json::parse(read_text_file(path));
    PromptTemplate t;
    t.instructions = require_field<std::string>(j, "instructions");
    t.request = require_field<std::string>(j, "request");
    t.context_budget = j.value("context_budget", std::size_t{0});
    return t;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kConfigInvalid, "template " + path.string() + ": " + e.what());
  } catch (const std::out_of_range& e) {
    throw Error(ErrorCode::kConfigInvalid, "template " + path.string() + ": " + e.what());
  }
}

std::string render_prompt(const corpus::CorpusRecord& record, const PromptTemplate& tmpl) {
  std::string_view context = record.context;
  if (context.empty()) {
    log::warn("genbench.empty_context", {{"record_id", record.id}});
  }
  if (tmpl.context_budget > 0 && context.size() > tmpl.context_budget) {
    context = text::utf8_truncate(context, tmpl.context_budget);
    log::warn("genbench.context_truncated", {{"record_id", record.id},
                                             {"original_bytes", record.context.size()},
                                             {"kept_bytes", context.size()}});
  }
  std::string out;
  out.reserve(tmpl.instructions.size() + context.size() + tmpl.request.size() + 4);
  out += tmpl.instructions;
  out += "\n\n";
  out += context;
  out += "\n\n";
  out += tmpl.request;
  return out;
}

std::string encode_request(std::string_view prompt, const GenerationParams& params) {
  Json j;
  j["prompt"] = std::string(prompt);
  j["max_new_tokens"] = params.max_new_tokens;
  j["temperature"] = params.temperature;
  j["seed"] = params.seed;
  return j.dump();
}

HttpTransport::HttpTransport(const std::string& endpoint, std::chrono::milliseconds timeout)
    : timeout_(timeout) {
  constexpr std::string_view kScheme = "http://";
  if (endpoint.rfind(kScheme, 0) != 0) {
    throw Error(ErrorCode::kConfigInvalid, "endpoint must start with http://: " + endpoint);
  }
  const auto slash = endpoint.find('/', kScheme.size());
  base_ = endpoint.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : endpoint.substr(slash);
  if (base_.size() == kScheme.size()) {
    throw Error(ErrorCode::kConfigInvalid, "endpoint has no host: " + endpoint);
  }
}

TransportResult HttpTransport::post(const std::string& body) {
  httplib::Client client(base_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  const auto started = std::chrono::steady_clock::now();
  auto res = client.Post(path_, body, "application/json");
  TransportResult out;
  if (res) {
    out.status = res->status;
    out.body = res->body;
    return out;
  }
  const auto err = res.error();
  out.diagnostic = httplib::to_string(err);
  const auto elapsed = std::chrono::steady_clock::now() - started;
  if (err == httplib::Error::ConnectionTimeout ||
      (err == httplib::Error::Read && elapsed >= timeout_)) {
    out.outcome = TransportResult::Outcome::kTimeout;
  } else {
    out.outcome = TransportResult::Outcome::kConnectFailure;
  }
  return out;
}

GenerationClient::GenerationClient(std::unique_ptr<Transport> transport, RetryPolicy policy,
                                   Sleeper sleeper)
    : transport_(std::move(transport)), policy_(policy), sleeper_(std::move(sleeper)) {
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::string GenerationClient::generate(std::string_view prompt, const GenerationParams& params) {
  const std::string body = encode_request(prompt, params);
  const int max_attempts = std::max(0, policy_.retry_max) + 1;
  Error last(ErrorCode::kServiceUnreachable, "no attempt made");
  last_attempts_ = 0;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    if (attempt > 1) {
      const double factor = std::pow(policy_.multiplier, attempt - 2);
      sleeper_(std::chrono::milliseconds(
          static_cast<long long>(static_cast<double>(policy_.initial_backoff.count()) * factor)));
    }
    last_attempts_ = attempt;
    const TransportResult r = transport_->post(body);
    log::info("genbench.attempt", {{"attempt", attempt},
                                   {"status", r.status},
                                   {"outcome", static_cast<int>(r.outcome)}});
    switch (r.outcome) {
      case TransportResult::Outcome::kConnectFailure:
        last = Error(ErrorCode::kServiceUnreachable, r.diagnostic);
        continue;
      case TransportResult::Outcome::kTimeout:
        last = Error(ErrorCode::kTimeout, r.diagnostic);
        continue;
      case TransportResult::Outcome::kResponse:
        break;
    }
    if (r.status == 429 || r.status >= 500) {
      last = Error(ErrorCode::kServiceError, "HTTP " + std::to_string(r.status) + ": " + r.body);
      continue;
    }
    if (r.status < 200 || r.status >= 300) {
      throw Error(ErrorCode::kServiceError, "HTTP " + std::to_string(r.status) + ": " + r.body);
    }
    try {
      const Json j = Json::parse(r.body);
      return j.at("text").get<std::string>();
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kServiceError, std::string("malformed response: ") + e.what());
    }
  }
  throw last;
}

std::string call_generation(const std::string& endpoint, std::string_view prompt,
                            const GenerationParams& params, const RetryPolicy& policy,
                            std::chrono::milliseconds timeout) {
  GenerationClient client(std::make_unique<HttpTransport>(endpoint, timeout), policy);
  return client.generate(prompt, params);
}

namespace {

std::optional<std::string> clean_answer(std::string_view s) {
  const auto t = text::trim_punct(s);
  if (t.empty()) return std::nullopt;
  return std::string(t);
}

// Drops list bullets and markdown emphasis ahead of a label.
std::string_view strip_decoration(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && (line[i] == '-' || line[i] == '*' || line[i] == '#' ||
                             line[i] == '>' || text::is_space(line[i]))) {
    ++i;
  }
  return line.substr(i);
}

}  // namespace

ParsedGeneration parse_generation(std::string_view raw) {
  ParsedGeneration out;
  std::optional<std::string> first_line;
  bool labeled = false;
  std::size_t pos = 0;
  while (pos <= raw.size()) {
    const auto nl = raw.find('\n', pos);
    const auto line = raw.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? raw.size() + 1 : nl + 1;

    const auto body = strip_decoration(text::trim(line));
    if (body.empty()) continue;
    if (!first_line) first_line = clean_answer(body);

    auto value_after = [&](std::string_view prefix) -> std::optional<std::string_view> {
      if (!text::starts_with_icase(body, prefix)) return std::nullopt;
      return body.substr(prefix.size());
    };
    if (auto v = value_after("specific cancer type:")) {
      labeled = true;
      if (!out.subtype) out.subtype = clean_answer(*v);
    } else if (auto v2 = value_after("subtype:")) {
      labeled = true;
      if (!out.subtype) out.subtype = clean_answer(*v2);
    } else if (auto v3 = value_after("cancer type:")) {
      labeled = true;
      if (!out.broad) out.broad = clean_answer(*v3);
    }
  }
  if (!labeled) out.broad = first_line;
  out.duplicate = out.broad && out.subtype &&
                  metrics::normalize_answer(*out.broad) == metrics::normalize_answer(*out.subtype);
  return out;
}

std::vector<GenerationResult> run_benchmark(const std::vector<corpus::CorpusRecord>& records,
                                            const PromptTemplate& tmpl,
                                            const GenerationParams& params,
                                            const ClientFactory& make_client,
                                            std::size_t max_in_flight) {
  const std::size_t workers = std::max<std::size_t>(1, std::min(max_in_flight, records.size()));
  std::vector<std::unique_ptr<GenerationClient>> clients;
  for (std::size_t w = 0; w < workers; ++w) clients.push_back(make_client());

  std::vector<GenerationResult> results(records.size());
  parallel_for(records.size(), workers, [&](std::size_t worker, std::size_t i) {
    const auto& record = records[i];
    GenerationResult r;
    r.record_id = record.id;
    const auto prompt = render_prompt(record, tmpl);
    const auto started = std::chrono::steady_clock::now();
    auto& client = *clients[worker];
    try {
      r.raw_text = client.generate(prompt, params);
      const auto parsed = parse_generation(r.raw_text);
      r.parsed_broad = parsed.broad;
      r.parsed_subtype = parsed.subtype;
      r.duplicate_answer_flag = parsed.duplicate;
    } catch (const Error& e) {
      r.error = e.what();
      log::error("genbench.record_failed", {{"record_id", record.id}, {"error", e.what()}});
    }
    r.attempts = client.last_attempts();
    r.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - started)
                       .count();
    results[i] = std::move(r);
  });
  std::sort(results.begin(), results.end(),
            [](const auto& a, const auto& b) { return a.record_id < b.record_id; });
  return results;
}

std::vector<qa::Prediction> to_predictions(const std::vector<GenerationResult>& results,
                                           const std::vector<corpus::CorpusRecord>& records) {
  std::map<std::string, const corpus::CorpusRecord*> by_id;
  for (const auto& r : records) by_id[r.id] = &r;
  std::vector<qa::Prediction> out;
  for (const auto& res : results) {
    const auto it = by_id.find(res.record_id);
    for (auto kind : {corpus::QuestionKind::kBroad, corpus::QuestionKind::kSubtype}) {
      const auto& answer =
          kind == corpus::QuestionKind::kBroad ? res.parsed_broad : res.parsed_subtype;
      qa::Prediction p;
      p.record_id = res.record_id;
      p.kind = kind;
      p.text = answer.value_or("");
      if (answer && it != by_id.end()) {
        if (auto span = corpus::localize_label(it->second->context, *answer)) {
          p.span = span;
          p.text = it->second->context.substr(span->start, span->length());
        }
      }
      out.push_back(std::move(p));
    }
  }
  return out;
}

void write_results(const std::filesystem::path& path, const std::vector<GenerationResult>& results) {
  std::vector<Json> rows;
  rows.reserve(results.size());
  for (const auto& r : results) {
    Json j;
    j["record_id"] = r.record_id;
    j["raw_text"] = r.raw_text;
    j["parsed_broad"] = r.parsed_broad ? Json(*r.parsed_broad) : Json(nullptr);
    j["parsed_subtype"] = r.parsed_subtype ? Json(*r.parsed_subtype) : Json(nullptr);
    j["duplicate_answer_flag"] = r.duplicate_answer_flag;
    j["latency_ms"] = r.latency_ms;
    j["attempts"] = r.attempts;
    j["error"] = r.error ? Json(*r.error) : Json(nullptr);
    rows.push_back(std::move(j));
  }
  write_jsonl(path, rows);
}

std::vector<GenerationResult> read_results(const std::filesystem::path& path) {
  std::vector<GenerationResult> out;
  read_jsonl(path, [&](std::size_t, const Json& j) {
    GenerationResult r;
    r.record_id = require_field<std::string>(j, "record_id");
    r.raw_text = j.value("raw_text", std::string());
    auto opt = [&](const char* key) -> std::optional<std::string> {
      auto it = j.find(key);
      if (it == j.end() || it->is_null()) return std::nullopt;
      return it->get<std::string>();
    };
    r.parsed_broad = opt("parsed_broad");
    r.parsed_subtype = opt("parsed_subtype");
    r.duplicate_answer_flag = j.value("duplicate_answer_flag", false);
    r.latency_ms = j.value("latency_ms", std::int64_t{0});
    r.attempts = j.value("attempts", 0);
    r.error = opt("error");
    out.push_back(std::move(r));
  });
  return out;
}

}  // namespace pathex::genbench
