#include "evspace/tools/cli.hpp"

#include <charconv>
#include <cmath>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "evspace/api.hpp"
#include "evspace/tools/service.hpp"

namespace evspace::tools {

using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Format { Text, Machine };

struct Common {
  std::string library;
  std::string format = "text";
  std::string project;

  Format fmt() const { return format == "machine" ? Format::Machine : Format::Text; }
};

std::string default_library() {
  if (const char* env = std::getenv(kLibraryEnvVar); env != nullptr && *env != '\0') return env;
  return kDefaultLibraryFile;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Status::IoError, "cannot read '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

CashFlowTable load_project(const std::string& path) {
  const std::string text = read_file(path);
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) {
    return load_csv(text, std::filesystem::path(path).stem().string());
  }
  return load_table(text);
}

void load_registry(MethodRegistry& registry, const std::string& library) {
  if (std::filesystem::exists(library)) registry.load_library(library);
}

std::optional<double> parse_number(const std::string& text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (text.empty() || ec != std::errc{} || ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

// name=value pairs; numeric values bind numbers, anything else names a field.
json bindings_from_args(const std::vector<std::string>& args) {
  json out = json::object();
  for (const auto& a : args) {
    const auto eq = a.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw UsageError("binding '" + a + "' must look like name=value");
    }
    const std::string name = a.substr(0, eq);
    const std::string value = a.substr(eq + 1);
    if (auto n = parse_number(value)) {
      out[name] = *n;
    } else {
      out[name] = value;
    }
  }
  return out;
}

std::vector<Param> parse_params(const std::string& text) {
  std::vector<Param> params;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw UsageError("parameter '" + item + "' must look like name:number or name:field");
    }
    try {
      params.push_back({item.substr(0, colon), param_kind_from_string(item.substr(colon + 1))});
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  }
  return params;
}

// Prints an envelope-producing response and maps it to an exit code.
int emit(const ApiResponse& r, Format fmt, std::ostream& out, std::ostream& err,
         const std::function<void(const json&)>& text_ok) {
  const json& body = r.body;
  const bool ok = body.value("status", "") == status_name(Status::Ok);
  if (fmt == Format::Machine) {
    out << body.dump() << "\n";
  } else if (ok) {
    text_ok(body);
  } else {
    err << body.value("status", "") << ": " << body.value("detail", "") << "\n";
  }
  return ok ? kExitOk : kExitEvalError;
}

int report(const Error& e, Format fmt, std::ostream& out, std::ostream& err) {
  return emit(error_response(e), fmt, out, err, [](const json&) {});
}

Service* g_running_service = nullptr;

extern "C" void handle_stop_signal(int) {
  if (g_running_service != nullptr) g_running_service->stop();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"evspace: economic evaluation of construction projects", "evspace"};
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  common.library = default_library();
  app.add_option("--library", common.library,
                 std::string("Method library file (default: $") + kLibraryEnvVar + " or " +
                     kDefaultLibraryFile + ")");
  app.add_option("--format", common.format, "Output format")
      ->check(CLI::IsMember({"text", "machine"}));

  std::string method;
  std::vector<std::string> binding_args;

  auto* eval = app.add_subcommand("eval", "Evaluate a method on a project");
  eval->add_option("--project", common.project, "Project file (.json or .csv)");
  eval->add_option("method", method, "Method name")->required();
  eval->add_option("bindings", binding_args, "Parameter bindings name=value");

  std::string def_name, def_params, def_expr, def_desc;
  auto* define = app.add_subcommand("define", "Define a method and save the library");
  define->add_option("--name", def_name, "Command name")->required();
  define->add_option("--params", def_params, "Parameters: name:kind,... (kind: number|field)");
  define->add_option("--expr", def_expr, "Expression source")->required();
  define->add_option("--desc", def_desc, "Description");

  auto* list = app.add_subcommand("list", "List commands");

  std::string remove_name;
  auto* remove = app.add_subcommand("remove", "Remove a user method and save the library");
  remove->add_option("name", remove_name, "Method name")->required();

  std::string vary, deltas_text;
  auto* sense = app.add_subcommand("sense", "Sensitivity sweep of one parameter");
  sense->add_option("--project", common.project, "Project file (.json or .csv)");
  sense->add_option("--vary", vary, "Parameter to vary")->required();
  sense->add_option("--deltas", deltas_text, "Relative deltas lo:hi:steps")->required();
  sense->add_option("method", method, "Method name")->required();
  sense->add_option("bindings", binding_args, "Parameter bindings name=value");

  std::string host = "127.0.0.1";
  int port = 8080;
  std::string static_dir, cors_origin = "*", snapshot_dir;
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port")->check(CLI::Range(0, 65535));
  serve->add_option("--static", static_dir, "Directory of UI assets to serve at /");
  serve->add_option("--cors-origin", cors_origin, "Allowed CORS origin");
  serve->add_option("--snapshot", snapshot_dir, "Write uploaded projects here on shutdown");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  const Format fmt = common.fmt();
  try {
    if (*eval || *sense) {
      json bindings = bindings_from_args(binding_args);
      json request = {{"method", method}, {"bindings", std::move(bindings)}};
      if (*sense) {
        try {
          parse_delta_range(deltas_text);
        } catch (const Error& e) {
          throw UsageError(e.what());
        }
        request["vary"] = vary;
        request["deltas"] = deltas_text;
      }
      MethodRegistry registry;
      std::optional<CashFlowTable> table;
      try {
        load_registry(registry, common.library);
        if (!common.project.empty()) table = load_project(common.project);
      } catch (const Error& e) {
        return report(e, fmt, out, err);
      }
      const CashFlowTable* t = table ? &*table : nullptr;
      if (*eval) {
        return emit(api_evaluate(registry, t, request), fmt, out, err,
                    [&](const json& body) { out << format_display(body["value"]) << "\n"; });
      }
      return emit(api_sensitivity(registry, t, request), fmt, out, err, [&](const json& body) {
        out << "delta,value,status\n";
        for (const auto& row : body["data"]["rows"]) {
          out << format_machine(row["delta"]) << ',';
          if (row.contains("value")) out << format_machine(row["value"]);
          out << ',' << row["status"].get<std::string>() << '\n';
        }
      });
    }

    if (*define) {
      std::vector<Param> params = parse_params(def_params);
      MethodRegistry registry;
      try {
        load_registry(registry, common.library);
        CommandBinding binding = registry.define_method(def_name, std::move(params), def_expr,
                                                        def_desc);
        registry.save_library(common.library);
        return emit({201, ok_envelope(command_to_json(binding))}, fmt, out, err,
                    [&](const json&) { out << "defined " << binding.name() << "\n"; });
      } catch (const Error& e) {
        return report(e, fmt, out, err);
      }
    }

    if (*list) {
      MethodRegistry registry;
      try {
        load_registry(registry, common.library);
      } catch (const Error& e) {
        return report(e, fmt, out, err);
      }
      const json commands = commands_json(registry);
      // Same bare array as GET /api/commands.
      if (fmt == Format::Machine) {
        out << commands.dump() << "\n";
        return kExitOk;
      }
      return emit({200, ok_envelope(commands)}, fmt, out, err,
                  [&](const json& body) {
                    for (const auto& c : body["data"]) {
                      std::string params;
                      for (const auto& p : c["params"]) {
                        if (!params.empty()) params += ", ";
                        params += p["name"].get<std::string>() + ":" + p["kind"].get<std::string>();
                      }
                      out << c["name"].get<std::string>() << "(" << params << ")"
                          << (c["builtin"].get<bool>() ? "  [built-in]" : "") << "  "
                          << c["caption"].get<std::string>() << "\n";
                    }
                  });
    }

    if (*remove) {
      MethodRegistry registry;
      try {
        load_registry(registry, common.library);
        registry.remove_method(remove_name);
        registry.save_library(common.library);
      } catch (const Error& e) {
        return report(e, fmt, out, err);
      }
      return emit({200, ok_envelope({{"removed", remove_name}})}, fmt, out, err,
                  [&](const json&) { out << "removed " << remove_name << "\n"; });
    }

    if (*serve) {
      ServiceOptions options;
      options.library = common.library;
      options.cors_origin = cors_origin;
      if (!static_dir.empty()) options.static_dir = static_dir;
      if (!snapshot_dir.empty()) options.snapshot_dir = snapshot_dir;
      std::unique_ptr<Service> service;
      try {
        service = std::make_unique<Service>(options);
      } catch (const Error& e) {
        return report(e, fmt, out, err);
      }
      g_running_service = service.get();
      std::signal(SIGINT, handle_stop_signal);
      std::signal(SIGTERM, handle_stop_signal);
      err << "evspace: listening on " << host << ":" << port << "\n";
      const bool ok = service->listen(host, port);
      g_running_service = nullptr;
      service->snapshot_projects();
      if (!ok) {
        err << "IoError: cannot listen on " << host << ":" << port << "\n";
        return kExitEvalError;
      }
      return kExitOk;
    }
  } catch (const UsageError& e) {
    const auto chosen = app.get_subcommands();
    err << e.what() << "\n" << (chosen.empty() ? app.help() : chosen.front()->help());
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "IoError: " << e.what() << "\n";
    return kExitEvalError;
  }
  return kExitUsage;
}

}  // namespace evspace::tools
