#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <chrono>
#include <cstdlib>

#include <json.hpp>

#include "progplan/synthesis.hpp"

namespace progplan {

namespace {

struct SplitUrl {
  std::string base;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw EndpointError("endpoint URL needs a scheme: " + url);
  const auto slash = url.find('/', scheme + 3);
  SplitUrl s;
  s.base = slash == std::string::npos ? url : url.substr(0, slash);
  s.path = slash == std::string::npos ? "" : url.substr(slash);
  while (!s.path.empty() && s.path.back() == '/') s.path.pop_back();
  const std::string suffix = "/chat/completions";
  if (s.path.size() < suffix.size() || s.path.compare(s.path.size() - suffix.size(), suffix.size(), suffix) != 0)
    s.path += suffix;
  return s;
}

}  // namespace

ChatCompletionsClient::ChatCompletionsClient(EndpointConfig config) : config_(std::move(config)) {
  if (config_.api_key.empty())
    if (const char* k = std::getenv("PROGPLAN_API_KEY")) config_.api_key = k;
  if (config_.url.empty()) throw EndpointError("no endpoint URL configured");
  if (config_.model.empty()) throw EndpointError("no model configured");
}

Completion ChatCompletionsClient::complete(const std::string& prompt) {
  const SplitUrl url = split_url(config_.url);
  httplib::Client client(url.base);
  const auto secs = static_cast<time_t>(config_.timeout_s);
  client.set_connection_timeout(secs < 30 ? secs : 30, 0);
  client.set_read_timeout(secs, 0);
  client.set_write_timeout(secs, 0);
  if (!config_.api_key.empty()) client.set_bearer_token_auth(config_.api_key);

  nlohmann::ordered_json body;
  body["model"] = config_.model;
  body["messages"] = nlohmann::ordered_json::array({{{"role", "user"}, {"content", prompt}}});
  if (config_.temperature) body["temperature"] = *config_.temperature;

  const auto start = std::chrono::steady_clock::now();
  auto res = client.Post(url.path, body.dump(), "application/json");
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!res) throw EndpointError("request failed: " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw EndpointError("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
  auto j = nlohmann::json::parse(res->body, nullptr, false);
  if (j.is_discarded()) throw EndpointError("response is not JSON");
  try {
    return Completion{j.at("choices").at(0).at("message").at("content").get<std::string>(), seconds};
  } catch (const nlohmann::json::exception& e) {
    throw EndpointError(std::string("unexpected response shape: ") + e.what());
  }
}

}  // namespace progplan
