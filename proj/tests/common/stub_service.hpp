#pragma once

// In-process completion service for client tests. Each POST is handed to a
// script that decides status, body and delay.

#include <atomic>
#include <chrono>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include "httplib.h"
#include "pathex/util/jsonl.hpp"

namespace stub {

struct Reply {
  int status = 200;
  std::string body;
  std::chrono::milliseconds delay{0};
};

inline Reply text_reply(const std::string& text) {
  return {200, pathex::Json{{"text", text}}.dump(), std::chrono::milliseconds(0)};
}

// (zero-based request index, parsed request) -> reply
using Script = std::function<Reply(int, const pathex::Json&)>;

class Service {
 public:
  explicit Service(Script script) : script_(std::move(script)) {
    server_.Post("/generate", [this](const httplib::Request& req, httplib::Response& res) {
      const int index = count_++;
      pathex::Json parsed;
      try {
        parsed = pathex::Json::parse(req.body);
      } catch (const pathex::Json::exception&) {
        res.status = 400;
        return;
      }
      {
        std::lock_guard<std::mutex> lock(mu_);
        requests_.push_back(parsed);
      }
      const Reply r = script_(index, parsed);
      if (r.delay.count() > 0) std::this_thread::sleep_for(r.delay);
      res.status = r.status;
      res.set_content(r.body, "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~Service() {
    server_.stop();
    thread_.join();
  }
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/generate"; }
  int requests() const { return count_; }
  std::vector<pathex::Json> received() const {
    std::lock_guard<std::mutex> lock(mu_);
    return requests_;
  }

 private:
  Script script_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> count_{0};
  mutable std::mutex mu_;
  std::vector<pathex::Json> requests_;
};

// A port with nothing listening on it: bound once for a number, then closed.
inline int dead_port() {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  ::close(fd);
  return ntohs(addr.sin_port);
}

}  // namespace stub
