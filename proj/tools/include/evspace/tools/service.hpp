#pragma once

// HTTP/JSON API over the registry, project store and sweeps.
//
//   GET    /api/commands            command menu
//   POST   /api/methods             define a method (not idempotent)
//   DELETE /api/methods/{name}      remove a user method
//   POST   /api/projects            upload a project document
//   GET    /api/projects/{id}       canonical project document
//   POST   /api/evaluate            {method, project_id, bindings}
//   POST   /api/sensitivity         {method, project_id, bindings, vary, deltas}
//   GET    /api/statuses            status vocabulary
//
// Domain failures ride a 200 envelope; 4xx/5xx mean the request itself was
// wrong.

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "evspace/api.hpp"
#include "evspace/method_registry.hpp"
#include "evspace/project_model.hpp"

namespace httplib {
class Server;
}

namespace evspace::tools {

struct ServiceOptions {
  // Loaded at start when present; re-saved after every mutation.
  std::optional<std::filesystem::path> library;
  std::string cors_origin = "*";
  std::optional<std::filesystem::path> static_dir;
  // Projects are written here as <id>.json by snapshot_projects().
  std::optional<std::filesystem::path> snapshot_dir;
};

class Service {
 public:
  explicit Service(ServiceOptions options);

  /// Registers every route on `server`.
  void mount(httplib::Server& server);

  /// Blocks until stop(). Returns false if the address cannot be bound.
  bool listen(const std::string& host, int port);
  /// Binds an ephemeral port and serves on a background thread.
  int start_background(const std::string& host = "127.0.0.1");
  void stop();

  MethodRegistry& registry() { return registry_; }

  std::string add_project(CashFlowTable table);
  std::shared_ptr<const CashFlowTable> project(const std::string& id) const;
  void snapshot_projects() const;

  ~Service();

 private:
  ApiResponse handle_define(const std::string& body);
  ApiResponse handle_remove(const std::string& name);
  ApiResponse handle_create_project(const std::string& body);
  ApiResponse handle_evaluate(const std::string& body) const;
  ApiResponse handle_sensitivity(const std::string& body) const;
  void persist_library() const;

  ServiceOptions options_;
  MethodRegistry registry_;
  std::mutex library_mutex_;
  mutable std::mutex projects_mutex_;
  std::map<std::string, std::shared_ptr<const CashFlowTable>> projects_;
  std::size_t next_project_ = 1;

  std::unique_ptr<httplib::Server> server_;
  struct Worker;
  std::unique_ptr<Worker> worker_;
};

}  // namespace evspace::tools
