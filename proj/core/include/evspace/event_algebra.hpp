#pragma once

// The event space: basic events bound to handlers, ordinal (non-commutative)
// addition, scalar multiples, expansion to basic events, event-base checks
// and ordered execution.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "evspace/status.hpp"

namespace evspace {

class CashFlowTable;
class EventSpace;

/// State threaded through the basic events of one execution. Handlers read
/// and write only through this object. Never share one between executions.
struct ExecContext {
  const CashFlowTable* table = nullptr;
  std::string field;
  std::map<std::string, double, std::less<>> bindings;
  std::vector<double> selection;
  double accumulator = 0.0;
};

/// Immutable event value. Copies share structure.
class Event {
 public:
  struct Named {
    std::string id;
  };
  struct Seq {
    std::vector<Event> parts;
  };
  struct Scaled {
    unsigned k;
    std::vector<Event> body;  // exactly one element
  };
  using Node = std::variant<Named, Seq, Scaled>;

  std::uint64_t space_id() const { return space_id_; }
  const Node& node() const { return *node_; }

  bool is_named() const { return std::holds_alternative<Named>(*node_); }

 private:
  friend class EventSpace;
  friend Event seq(const Event&, const Event&);
  friend Event scalar_mul(unsigned, const Event&);

  Event(std::uint64_t space, Node node)
      : space_id_(space), node_(std::make_shared<const Node>(std::move(node))) {}

  std::uint64_t space_id_;
  std::shared_ptr<const Node> node_;
};

/// The set of events of one domain. Populate it once, then treat it as
/// read-only; const access is safe from any number of threads.
class EventSpace {
 public:
  using Handler = std::function<CalcResult(ExecContext&)>;

  EventSpace();

  /// Declares a basic event. Throws DuplicateName or SyntaxError (bad id).
  Event add_basic(std::string id, Handler handler);

  /// Declares a composite event whose meaning is `body`. The body may name
  /// events that are declared later. Throws DuplicateName, SyntaxError,
  /// CrossSpace.
  Event define(std::string id, const Event& body);

  /// Reference to a (possibly not yet declared) event of this space.
  Event ref(std::string_view id) const;

  bool contains(std::string_view id) const;
  bool is_basic(std::string_view id) const;
  const Handler* handler(std::string_view id) const;
  const Event* definition(std::string_view id) const;

  // Declaration order.
  const std::vector<std::string>& basic_ids() const { return basic_order_; }
  const std::vector<std::string>& composite_ids() const { return composite_order_; }

  std::uint64_t id() const { return id_; }

 private:
  void check_new_id(const std::string& id) const;

  std::uint64_t id_;
  std::map<std::string, Handler, std::less<>> basics_;
  std::map<std::string, Event, std::less<>> composites_;
  std::vector<std::string> basic_order_;
  std::vector<std::string> composite_order_;
};

struct EventBase {
  std::set<std::string, std::less<>> members;
};

struct BaseReport {
  bool complete = false;
  bool independent = false;
  // Events of the space that cannot be written over the candidate members.
  std::vector<std::string> not_expressible;
  // Candidate members that are expressible by the other members.
  std::vector<std::string> dependent;
};

/// Ordinal sum: expansion of `a` followed by expansion of `b`.
/// Throws CrossSpace when the operands come from different spaces.
Event seq(const Event& a, const Event& b);

/// `k` copies of `e` in sequence. k = 0 is the empty event.
Event scalar_mul(unsigned k, const Event& e);

/// Flat, order-preserving list of basic event ids.
/// Throws UnknownEvent, CyclicDefinition, CrossSpace.
std::vector<std::string> expand(const Event& e, const EventSpace& space);

/// Completeness and (structural) independence of a candidate base.
/// Throws UnknownEvent if a member is not an event of the space.
BaseReport verify_base(const EventBase& candidate, const EventSpace& space);

/// Runs the basic handlers in expansion order. The first non-Ok status wins;
/// otherwise the result is the final accumulator.
CalcResult execute(const Event& e, ExecContext& ctx, const EventSpace& space);

}  // namespace evspace
