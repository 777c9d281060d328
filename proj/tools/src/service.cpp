#include "evspace/tools/service.hpp"

#include <fstream>
#include <thread>

#include "httplib.h"

namespace evspace::tools {

using nlohmann::json;

struct Service::Worker {
  std::thread thread;
};

namespace {

constexpr const char* kJson = "application/json";

void send(httplib::Response& res, const ApiResponse& r) {
  res.status = r.http_status;
  res.set_content(r.body.dump(), kJson);
}

json parse_body(const std::string& body) {
  json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded()) throw Error(Status::SyntaxError, "request body is not valid JSON");
  return doc;
}

}  // namespace

Service::Service(ServiceOptions options)
    : options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  if (options_.library && std::filesystem::exists(*options_.library)) {
    registry_.load_library(*options_.library);
  }
  mount(*server_);
}

Service::~Service() { stop(); }

void Service::persist_library() const {
  if (options_.library) registry_.save_library(*options_.library);
}

std::string Service::add_project(CashFlowTable table) {
  std::lock_guard lock(projects_mutex_);
  std::string id = "p" + std::to_string(next_project_++);
  projects_.emplace(id, std::make_shared<const CashFlowTable>(std::move(table)));
  return id;
}

std::shared_ptr<const CashFlowTable> Service::project(const std::string& id) const {
  std::lock_guard lock(projects_mutex_);
  auto it = projects_.find(id);
  return it == projects_.end() ? nullptr : it->second;
}

void Service::snapshot_projects() const {
  if (!options_.snapshot_dir) return;
  std::filesystem::create_directories(*options_.snapshot_dir);
  std::lock_guard lock(projects_mutex_);
  for (const auto& [id, table] : projects_) {
    std::ofstream out(*options_.snapshot_dir / (id + ".json"), std::ios::binary);
    out << save_table(*table);
  }
}

ApiResponse Service::handle_define(const std::string& body) {
  try {
    // Serialize define + save so the file always matches the registry.
    std::lock_guard lock(library_mutex_);
    ApiResponse r = api_define(registry_, parse_body(body));
    if (r.http_status == 201) persist_library();
    return r;
  } catch (const Error& e) {
    return error_response(e);
  }
}

ApiResponse Service::handle_remove(const std::string& name) {
  try {
    std::lock_guard lock(library_mutex_);
    registry_.remove_method(name);
    persist_library();
    return {200, ok_envelope({{"removed", name}})};
  } catch (const Error& e) {
    return error_response(e);
  }
}

ApiResponse Service::handle_create_project(const std::string& body) {
  try {
    CashFlowTable table = table_from_json(parse_body(body));
    json doc = table_to_json(table);
    std::string id = add_project(std::move(table));
    return {201, ok_envelope({{"id", id}, {"project", std::move(doc)}})};
  } catch (const Error& e) {
    return error_response(e);
  }
}

namespace {

// Resolves the optional project_id of a request. Unknown ids are 404.
std::shared_ptr<const CashFlowTable> request_project(const Service& svc, const json& request) {
  if (!request.is_object() || !request.contains("project_id") || request["project_id"].is_null()) {
    return nullptr;
  }
  if (!request["project_id"].is_string()) {
    throw Error(Status::TypeError, "'project_id' must be text");
  }
  const auto id = request["project_id"].get<std::string>();
  auto table = svc.project(id);
  if (!table) throw Error(Status::UnknownEvent, "no project with id '" + id + "'");
  return table;
}

}  // namespace

ApiResponse Service::handle_evaluate(const std::string& body) const {
  try {
    json request = parse_body(body);
    auto table = request_project(*this, request);
    return api_evaluate(registry_, table.get(), request);
  } catch (const Error& e) {
    return error_response(e);
  }
}

ApiResponse Service::handle_sensitivity(const std::string& body) const {
  try {
    json request = parse_body(body);
    auto table = request_project(*this, request);
    return api_sensitivity(registry_, table.get(), request);
  } catch (const Error& e) {
    return error_response(e);
  }
}

void Service::mount(httplib::Server& server) {
  const std::string origin = options_.cors_origin;
  server.set_default_headers({{"Access-Control-Allow-Origin", origin}});
  server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });

  server.Get("/api/commands", [this](const httplib::Request&, httplib::Response& res) {
    send(res, {200, commands_json(registry_)});
  });
  server.Get("/api/statuses", [](const httplib::Request&, httplib::Response& res) {
    send(res, {200, status_vocabulary()});
  });
  server.Post("/api/methods", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, handle_define(req.body));
  });
  server.Delete(R"(/api/methods/([A-Za-z_][A-Za-z0-9_]*))",
                [this](const httplib::Request& req, httplib::Response& res) {
                  send(res, handle_remove(req.matches[1]));
                });
  server.Post("/api/projects", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, handle_create_project(req.body));
  });
  server.Get(R"(/api/projects/([^/]+))", [this](const httplib::Request& req,
                                                 httplib::Response& res) {
    auto table = project(req.matches[1]);
    if (!table) {
      send(res, error_response(Error(Status::UnknownEvent,
                                     "no project with id '" + std::string(req.matches[1]) + "'")));
      return;
    }
    res.status = 200;
    res.set_content(save_table(*table), kJson);
  });
  server.Post("/api/evaluate", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, handle_evaluate(req.body));
  });
  server.Post("/api/sensitivity", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, handle_sensitivity(req.body));
  });

  server.set_exception_handler([](const httplib::Request&, httplib::Response& res,
                                  std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    send(res, {500, envelope(CalcResult::fail(Status::IoError, what))});
  });

  if (options_.static_dir) server.set_mount_point("/", options_.static_dir->string());
}

bool Service::listen(const std::string& host, int port) { return server_->listen(host, port); }

int Service::start_background(const std::string& host) {
  const int port = server_->bind_to_any_port(host);
  if (port <= 0) return -1;
  worker_ = std::make_unique<Worker>();
  worker_->thread = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port;
}

void Service::stop() {
  if (server_) server_->stop();
  if (worker_ && worker_->thread.joinable()) worker_->thread.join();
  worker_.reset();
}

}  // namespace evspace::tools
