#pragma once

// User-described evaluation methods. Each definition becomes a named command
// that can be listed, invoked, removed and persisted as a library file.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "evspace/expr_vm.hpp"
#include "evspace/project_model.hpp"
#include "evspace/status.hpp"

namespace evspace {

enum class ParamKind { Number, Field };

std::string_view to_string(ParamKind kind);
/// Throws SyntaxError for anything but "number" / "field".
ParamKind param_kind_from_string(std::string_view text);

struct Param {
  std::string name;
  ParamKind kind = ParamKind::Number;
  friend bool operator==(const Param&, const Param&) = default;
};

struct MethodDefinition {
  std::string name;
  std::vector<Param> params;
  std::string source;
  SuffixExpression compiled;
  std::string description;
  std::int64_t created_at = 0;  // unix seconds
  bool builtin = false;

  const Param* param(std::string_view n) const;
};

struct CommandBinding {
  std::shared_ptr<const MethodDefinition> method;
  std::string caption;
  bool enabled = true;

  bool builtin() const { return method->builtin; }
  const std::string& name() const { return method->name; }
};

using Binding = std::variant<double, FieldRef>;
using Bindings = std::map<std::string, Binding, std::less<>>;

inline constexpr int kLibraryFormatVersion = 1;
inline constexpr std::string_view kLibraryFormatTag = "evspace-method-library";

/// Source form of one method as persisted.
struct MethodSource {
  std::string name;
  std::vector<Param> params;
  std::string source;
  std::string description;
  std::int64_t created_at = 0;
  friend bool operator==(const MethodSource&, const MethodSource&) = default;
};

struct LibraryFile {
  int version = kLibraryFormatVersion;
  std::vector<MethodSource> methods;
  std::string checksum;  // "sha256:<hex>" over the compact methods array
};

/// Functions available to every method: NPV, IRR, IPT, IPR, field_average.
const FunctionTable& standard_functions();

/// Evaluates a method against explicit bindings. Field bindings resolve
/// through their table. ArityError for missing/extra bindings, TypeError for
/// a kind mismatch, then whatever the expression reports.
CalcResult invoke_method(const MethodDefinition& method, const Bindings& bindings);

/// Canonical library text: sorted keys, two-space indent, trailing newline.
std::string library_document(const LibraryFile& file);
/// Throws SyntaxError for a malformed or corrupt document.
LibraryFile parse_library_document(std::string_view text);

/// Thread-safe registry. Reads run against an immutable snapshot; mutations
/// are serialized and publish a complete new snapshot.
class MethodRegistry {
 public:
  MethodRegistry();

  /// Throws SyntaxError, UnknownSymbol, ArityError, DuplicateName. Nothing is
  /// registered on failure.
  CommandBinding define_method(std::string name, std::vector<Param> params,
                               std::string source, std::string description);

  CalcResult invoke(std::string_view name, const Bindings& bindings) const;

  /// Built-ins first, then user methods in creation order.
  std::vector<CommandBinding> list_commands() const;

  /// Throws UnknownEvent or BuiltInProtected.
  void remove_method(std::string_view name);

  std::shared_ptr<const MethodDefinition> find(std::string_view name) const;

  LibraryFile library() const;
  /// Writes the canonical document via a temporary file and rename.
  /// Throws IoError.
  LibraryFile save_library(const std::filesystem::path& path) const;
  /// Replaces all user methods with the file's, or changes nothing.
  /// Throws IoError, SyntaxError, UnknownSymbol, ArityError, DuplicateName.
  void load_library(const std::filesystem::path& path);
  void load_library_document(std::string_view text);

 private:
  struct State {
    std::vector<CommandBinding> commands;
  };

  std::shared_ptr<const State> snapshot() const;
  static CommandBinding build(const State& state, MethodSource src);

  mutable std::mutex mutex_;
  std::shared_ptr<const State> state_;
};

}  // namespace evspace
