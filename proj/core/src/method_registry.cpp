#include "evspace/method_registry.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "evspace/financial.hpp"

namespace evspace {

using nlohmann::json;

std::string_view to_string(ParamKind kind) {
  return kind == ParamKind::Number ? "number" : "field";
}

ParamKind param_kind_from_string(std::string_view text) {
  if (text == "number") return ParamKind::Number;
  if (text == "field") return ParamKind::Field;
  throw Error(Status::SyntaxError,
              "parameter kind must be 'number' or 'field', got '" + std::string(text) + "'");
}

const Param* MethodDefinition::param(std::string_view n) const {
  for (const auto& p : params) {
    if (p.name == n) return &p;
  }
  return nullptr;
}

const FunctionTable& standard_functions() {
  static const FunctionTable table = [] {
    FunctionTable t;
    register_financial_functions(t);
    t.add({"field_average", 1, 1, [](std::span<const Value> args) {
             const Series* values = std::get_if<Series>(&args[0]);
             if (values == nullptr) {
               return CalcResult::fail(Status::TypeError, "field_average: argument must be a field");
             }
             CashFlowTable scratch("field_average", values->size());
             scratch.add_field("values", *values);
             return field_average(FieldRef{&scratch, "values"});
           }});
    return t;
  }();
  return table;
}

CalcResult invoke_method(const MethodDefinition& method, const Bindings& bindings) {
  for (const auto& [name, value] : bindings) {
    if (method.param(name) == nullptr) {
      return CalcResult::fail(Status::ArityError,
                              method.name + " has no parameter '" + name + "'");
    }
  }
  Environment env;
  for (const auto& p : method.params) {
    auto it = bindings.find(p.name);
    if (it == bindings.end()) {
      return CalcResult::fail(Status::ArityError,
                              method.name + ": parameter '" + p.name + "' is not bound");
    }
    if (p.kind == ParamKind::Number) {
      const double* v = std::get_if<double>(&it->second);
      if (v == nullptr) {
        return CalcResult::fail(Status::TypeError,
                                method.name + ": parameter '" + p.name + "' expects a number");
      }
      env.emplace(p.name, *v);
    } else {
      const FieldRef* ref = std::get_if<FieldRef>(&it->second);
      if (ref == nullptr) {
        return CalcResult::fail(Status::TypeError,
                                method.name + ": parameter '" + p.name + "' expects a field");
      }
      try {
        auto values = select_field(*ref);
        env.emplace(p.name, Series(values.begin(), values.end()));
      } catch (const Error& e) {
        return e.as_result();
      }
    }
  }
  return eval_suffix(method.compiled, env);
}

namespace {

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error(Status::IoError, "SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

json methods_to_json(const std::vector<MethodSource>& methods) {
  json arr = json::array();
  for (const auto& m : methods) {
    json params = json::array();
    for (const auto& p : m.params) params.push_back({{"name", p.name}, {"kind", to_string(p.kind)}});
    arr.push_back({{"name", m.name},
                   {"params", params},
                   {"source", m.source},
                   {"description", m.description},
                   {"created_at", m.created_at}});
  }
  return arr;
}

std::string checksum_of(const json& methods) { return "sha256:" + sha256_hex(methods.dump()); }

bool valid_identifier(std::string_view s) {
  if (s.empty()) return false;
  const auto start = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
  if (!start(s.front())) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

std::int64_t now_seconds() {
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

struct BuiltinSpec {
  const char* name;
  const char* caption;
  std::vector<Param> params;
  const char* source;
  const char* description;
};

std::vector<BuiltinSpec> builtin_specs() {
  return {
      {"NPV", "Net present value (NPV)",
       {{"ncf", ParamKind::Field}, {"rate", ParamKind::Number}}, "NPV(ncf, rate)",
       "Discounted sum of the net cash flow field at the given rate"},
      {"IRR", "Internal rate of return (IRR)", {{"ncf", ParamKind::Field}}, "IRR(ncf)",
       "Rate at which the net present value of the field is zero"},
      {"IPT", "Investment payback period (IPT)", {{"ncf", ParamKind::Field}}, "IPT(ncf)",
       "Years until the cumulative net cash flow turns non-negative"},
      {"IPR", "Investment profit ratio (IPR)",
       {{"profit", ParamKind::Number}, {"investment", ParamKind::Number}},
       "IPR(profit, investment)", "Annual profit divided by total investment"},
      {"field_average", "Field average", {{"values", ParamKind::Field}}, "field_average(values)",
       "Arithmetic mean of a field: select, count, sum, divide"},
  };
}

}  // namespace

std::string library_document(const LibraryFile& file) {
  json methods = methods_to_json(file.methods);
  json doc;
  doc["format"] = kLibraryFormatTag;
  doc["version"] = file.version;
  doc["checksum"] = checksum_of(methods);
  doc["methods"] = std::move(methods);
  return doc.dump(2) + "\n";
}

LibraryFile parse_library_document(std::string_view text) {
  const auto corrupt = [](const std::string& why) {
    return Error(Status::SyntaxError, "method library: " + why);
  };
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw corrupt("not a JSON object");
  if (!doc.contains("version") || !doc["version"].is_number_integer()) {
    throw corrupt("missing integer 'version'");
  }
  if (doc["version"].get<int>() != kLibraryFormatVersion) {
    throw corrupt("unsupported version " + doc["version"].dump());
  }
  if (doc.contains("format") && doc["format"] != kLibraryFormatTag) {
    throw corrupt("unexpected format tag");
  }
  if (!doc.contains("methods") || !doc["methods"].is_array()) {
    throw corrupt("missing 'methods' array");
  }
  LibraryFile file;
  try {
    for (const auto& m : doc["methods"]) {
      MethodSource src;
      src.name = m.at("name").get<std::string>();
      src.source = m.at("source").get<std::string>();
      src.description = m.value("description", std::string{});
      src.created_at = m.value("created_at", std::int64_t{0});
      for (const auto& p : m.at("params")) {
        src.params.push_back(
            {p.at("name").get<std::string>(), param_kind_from_string(p.at("kind").get<std::string>())});
      }
      file.methods.push_back(std::move(src));
    }
  } catch (const json::exception& e) {
    throw corrupt(e.what());
  }
  file.checksum = checksum_of(methods_to_json(file.methods));
  if (doc.contains("checksum") && doc["checksum"] != file.checksum) {
    throw corrupt("checksum mismatch");
  }
  return file;
}

MethodRegistry::MethodRegistry() {
  auto state = std::make_shared<State>();
  for (auto& spec : builtin_specs()) {
    auto def = std::make_shared<MethodDefinition>();
    def->name = spec.name;
    def->params = spec.params;
    def->source = spec.source;
    def->compiled = compile(def->source, standard_functions());
    def->description = spec.description;
    def->builtin = true;
    state->commands.push_back({std::move(def), spec.caption, true});
  }
  state_ = std::move(state);
}

std::shared_ptr<const MethodRegistry::State> MethodRegistry::snapshot() const {
  std::lock_guard lock(mutex_);
  return state_;
}

CommandBinding MethodRegistry::build(const State& state, MethodSource src) {
  if (!valid_identifier(src.name)) {
    throw Error(Status::SyntaxError, "method name must be an identifier: '" + src.name + "'");
  }
  if (standard_functions().contains(src.name) || find_function_op(src.name) != nullptr) {
    throw Error(Status::DuplicateName, "'" + src.name + "' is a built-in function name");
  }
  for (const auto& c : state.commands) {
    if (c.name() == src.name) {
      throw Error(Status::DuplicateName, "method '" + src.name + "' already exists");
    }
  }
  for (std::size_t i = 0; i < src.params.size(); ++i) {
    if (!valid_identifier(src.params[i].name)) {
      throw Error(Status::SyntaxError,
                  "parameter name must be an identifier: '" + src.params[i].name + "'");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (src.params[j].name == src.params[i].name) {
        throw Error(Status::DuplicateName, "parameter '" + src.params[i].name + "' repeated");
      }
    }
  }
  auto def = std::make_shared<MethodDefinition>();
  def->compiled = compile(src.source, standard_functions());
  for (const auto& var : def->compiled.free_vars) {
    const bool declared = std::any_of(src.params.begin(), src.params.end(),
                                      [&](const Param& p) { return p.name == var; });
    if (!declared) {
      throw Error(Status::UnknownSymbol,
                  "'" + var + "' is neither a parameter of " + src.name + " nor a function");
    }
  }
  def->name = std::move(src.name);
  def->params = std::move(src.params);
  def->source = std::move(src.source);
  def->description = std::move(src.description);
  def->created_at = src.created_at;
  CommandBinding binding{def, def->name, true};
  return binding;
}

CommandBinding MethodRegistry::define_method(std::string name, std::vector<Param> params,
                                             std::string source, std::string description) {
  std::lock_guard lock(mutex_);
  CommandBinding binding = build(*state_, {std::move(name), std::move(params), std::move(source),
                                           std::move(description), now_seconds()});
  auto next = std::make_shared<State>(*state_);
  next->commands.push_back(binding);
  state_ = std::move(next);
  return binding;
}

CalcResult MethodRegistry::invoke(std::string_view name, const Bindings& bindings) const {
  auto method = find(name);
  if (!method) {
    return CalcResult::fail(Status::UnknownEvent, "no method named '" + std::string(name) + "'");
  }
  return invoke_method(*method, bindings);
}

std::vector<CommandBinding> MethodRegistry::list_commands() const {
  return snapshot()->commands;
}

void MethodRegistry::remove_method(std::string_view name) {
  std::lock_guard lock(mutex_);
  const auto& cmds = state_->commands;
  auto it = std::find_if(cmds.begin(), cmds.end(),
                         [&](const CommandBinding& c) { return c.name() == name; });
  if (it == cmds.end()) {
    throw Error(Status::UnknownEvent, "no method named '" + std::string(name) + "'");
  }
  if (it->builtin()) {
    throw Error(Status::BuiltInProtected, "'" + std::string(name) + "' is built in");
  }
  auto next = std::make_shared<State>(*state_);
  next->commands.erase(next->commands.begin() + (it - cmds.begin()));
  state_ = std::move(next);
}

std::shared_ptr<const MethodDefinition> MethodRegistry::find(std::string_view name) const {
  auto state = snapshot();
  for (const auto& c : state->commands) {
    if (c.name() == name) return c.method;
  }
  return nullptr;
}

LibraryFile MethodRegistry::library() const {
  LibraryFile file;
  for (const auto& c : snapshot()->commands) {
    if (c.builtin()) continue;
    const auto& m = *c.method;
    file.methods.push_back({m.name, m.params, m.source, m.description, m.created_at});
  }
  file.checksum = checksum_of(methods_to_json(file.methods));
  return file;
}

LibraryFile MethodRegistry::save_library(const std::filesystem::path& path) const {
  LibraryFile file = library();
  const std::string text = library_document(file);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Status::IoError, "cannot write '" + tmp.string() + "'");
    out << text;
    out.flush();
    if (!out) throw Error(Status::IoError, "write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(Status::IoError, "cannot replace '" + path.string() + "'");
  }
  return file;
}

void MethodRegistry::load_library(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Status::IoError, "cannot read '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  load_library_document(text.str());
}

void MethodRegistry::load_library_document(std::string_view text) {
  LibraryFile file = parse_library_document(text);
  std::lock_guard lock(mutex_);
  auto next = std::make_shared<State>();
  for (const auto& c : state_->commands) {
    if (c.builtin()) next->commands.push_back(c);
  }
  for (auto& m : file.methods) next->commands.push_back(build(*next, std::move(m)));
  state_ = std::move(next);
}

}  // namespace evspace
