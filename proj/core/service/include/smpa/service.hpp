#pragma once

// HTTP API over a Store. Routes live under /api/v1/; GET /healthz is open.
//
// Facilitator endpoints expect "Authorization: Bearer <facilitator key>";
// participant endpoints (/api/v1/me/...) expect the participant's token in
// the same header. Neither credential is accepted in the other's place.
//
// Errors are {"error": {"code", "message", "path"}} with the status given by
// http_status_for().

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "smpa/error.hpp"
#include "smpa/measurement.hpp"
#include "smpa/store.hpp"

namespace smpa {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path data_dir;
  std::filesystem::path bank_path;
  std::string facilitator_key;
  std::optional<std::filesystem::path> static_dir;  // optional web UI bundle
  MeasurementConfig measurement;
  bool access_log = false;
};

int http_status_for(ErrorCode code) noexcept;

class Service {
 public:
  // Loads and validates the bank and opens the store. Throws Error on bad
  // bank, unusable data directory, locked store or empty facilitator key.
  explicit Service(ServiceConfig config);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds the listening socket and returns the bound port.
  int bind();
  // Serves until stop(); call bind() first.
  void run();
  void stop();

  Store& store();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace smpa
