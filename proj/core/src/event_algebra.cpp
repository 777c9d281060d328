#include "evspace/event_algebra.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>

namespace evspace {

namespace {

std::atomic<std::uint64_t> next_space_id{1};

bool valid_event_id(std::string_view id) {
  if (id.empty()) return false;
  return std::none_of(id.begin(), id.end(), [](unsigned char c) {
    return std::isspace(c) || std::iscntrl(c);
  });
}

// Expands `e`, treating any name for which `stop(name)` holds as an atom.
// Names that are neither stops nor composites must be basics.
template <class Stop>
void expand_into(const Event& e, const EventSpace& space, const Stop& stop,
                 std::vector<std::string>& visiting,
                 std::vector<std::string>& out) {
  struct Visitor {
    const EventSpace& space;
    const Stop& stop;
    std::vector<std::string>& visiting;
    std::vector<std::string>& out;

    void operator()(const Event::Named& n) const {
      if (stop(n.id)) {
        out.push_back(n.id);
        return;
      }
      if (space.is_basic(n.id)) {
        out.push_back(n.id);
        return;
      }
      const Event* def = space.definition(n.id);
      if (def == nullptr) {
        throw Error(Status::UnknownEvent, "event '" + n.id + "' is not defined");
      }
      if (std::find(visiting.begin(), visiting.end(), n.id) != visiting.end()) {
        std::string path;
        for (const auto& v : visiting) path += v + " -> ";
        throw Error(Status::CyclicDefinition,
                    "cyclic event definition: " + path + n.id);
      }
      visiting.push_back(n.id);
      expand_into(*def, space, stop, visiting, out);
      visiting.pop_back();
    }
    void operator()(const Event::Seq& s) const {
      for (const auto& part : s.parts) expand_into(part, space, stop, visiting, out);
    }
    void operator()(const Event::Scaled& s) const {
      if (s.k == 0) return;
      std::vector<std::string> once;
      expand_into(s.body.front(), space, stop, visiting, once);
      for (unsigned i = 0; i < s.k; ++i) out.insert(out.end(), once.begin(), once.end());
    }
  };
  std::visit(Visitor{space, stop, visiting, out}, e.node());
}

void check_space(const Event& e, const EventSpace& space) {
  if (e.space_id() != space.id()) {
    throw Error(Status::CrossSpace, "event belongs to a different event space");
  }
}

}  // namespace

EventSpace::EventSpace() : id_(next_space_id.fetch_add(1)) {}

void EventSpace::check_new_id(const std::string& id) const {
  if (!valid_event_id(id)) {
    throw Error(Status::SyntaxError,
                "event id must be non-empty and contain no whitespace: '" + id + "'");
  }
  if (contains(id)) {
    throw Error(Status::DuplicateName, "event '" + id + "' already exists");
  }
}

Event EventSpace::add_basic(std::string id, Handler handler) {
  check_new_id(id);
  basic_order_.push_back(id);
  basics_.emplace(id, std::move(handler));
  return Event(id_, Event::Named{std::move(id)});
}

Event EventSpace::define(std::string id, const Event& body) {
  check_new_id(id);
  check_space(body, *this);
  composite_order_.push_back(id);
  composites_.emplace(id, body);
  return Event(id_, Event::Named{std::move(id)});
}

Event EventSpace::ref(std::string_view id) const {
  return Event(id_, Event::Named{std::string(id)});
}

bool EventSpace::contains(std::string_view id) const {
  return basics_.find(id) != basics_.end() || composites_.find(id) != composites_.end();
}

bool EventSpace::is_basic(std::string_view id) const {
  return basics_.find(id) != basics_.end();
}

const EventSpace::Handler* EventSpace::handler(std::string_view id) const {
  auto it = basics_.find(id);
  return it == basics_.end() ? nullptr : &it->second;
}

const Event* EventSpace::definition(std::string_view id) const {
  auto it = composites_.find(id);
  return it == composites_.end() ? nullptr : &it->second;
}

Event seq(const Event& a, const Event& b) {
  if (a.space_id() != b.space_id()) {
    throw Error(Status::CrossSpace, "cannot sequence events from different spaces");
  }
  return Event(a.space_id(), Event::Seq{{a, b}});
}

Event scalar_mul(unsigned k, const Event& e) {
  return Event(e.space_id(), Event::Scaled{k, {e}});
}

std::vector<std::string> expand(const Event& e, const EventSpace& space) {
  check_space(e, space);
  std::vector<std::string> visiting;
  std::vector<std::string> out;
  expand_into(e, space, [](const std::string&) { return false; }, visiting, out);
  return out;
}

BaseReport verify_base(const EventBase& candidate, const EventSpace& space) {
  for (const auto& m : candidate.members) {
    if (!space.contains(m)) {
      throw Error(Status::UnknownEvent, "base member '" + m + "' is not an event of the space");
    }
  }

  const auto over_members = [&](const Event& e, const auto& allowed) {
    std::vector<std::string> visiting;
    std::vector<std::string> atoms;
    expand_into(e, space, [&](const std::string& n) { return allowed(n); }, visiting, atoms);
    return std::all_of(atoms.begin(), atoms.end(),
                       [&](const std::string& a) { return allowed(a); });
  };
  const auto in_candidate = [&](const std::string& n) {
    return candidate.members.count(n) > 0;
  };

  BaseReport report;
  for (const auto& b : space.basic_ids()) {
    if (!in_candidate(b)) report.not_expressible.push_back(b);
  }
  for (const auto& c : space.composite_ids()) {
    if (in_candidate(c)) continue;
    if (!over_members(*space.definition(c), in_candidate)) {
      report.not_expressible.push_back(c);
    }
  }

  for (const auto& m : candidate.members) {
    const Event* def = space.definition(m);
    if (def == nullptr) continue;  // a basic has no expression but itself
    const auto others = [&](const std::string& n) { return n != m && in_candidate(n); };
    if (over_members(*def, others)) report.dependent.push_back(m);
  }

  report.complete = report.not_expressible.empty();
  report.independent = report.dependent.empty();
  return report;
}

CalcResult execute(const Event& e, ExecContext& ctx, const EventSpace& space) {
  std::vector<std::string> order;
  try {
    order = expand(e, space);
  } catch (const Error& err) {
    return err.as_result();
  }
  for (const auto& id : order) {
    CalcResult r = (*space.handler(id))(ctx);
    if (!r.is_ok()) return r;
  }
  return CalcResult::ok(ctx.accumulator);
}

}  // namespace evspace
