#pragma once

#include <random>
#include <string>
#include <vector>

#include "evspace/event_algebra.hpp"

namespace evspace::testing {

/// Independent expansion oracle: plain structural recursion over the node
/// tree, resolving composites through the space.
inline void oracle_expand(const Event& e, const EventSpace& space, std::vector<std::string>& out) {
  const auto& node = e.node();
  if (auto* n = std::get_if<Event::Named>(&node)) {
    if (space.is_basic(n->id)) {
      out.push_back(n->id);
    } else {
      oracle_expand(*space.definition(n->id), space, out);
    }
  } else if (auto* s = std::get_if<Event::Seq>(&node)) {
    for (const auto& p : s->parts) oracle_expand(p, space, out);
  } else {
    const auto& sc = std::get<Event::Scaled>(node);
    for (unsigned i = 0; i < sc.k; ++i) oracle_expand(sc.body.front(), space, out);
  }
}

inline std::vector<std::string> oracle_expand(const Event& e, const EventSpace& space) {
  std::vector<std::string> out;
  oracle_expand(e, space, out);
  return out;
}

/// Space with handlers push (acc += 1) and double (acc *= 2), plus basics
/// a, b and a composite pair = seq(a, b).
struct PushDoubleSpace {
  EventSpace space;
  Event push = space.add_basic("push", [](ExecContext& c) {
    c.accumulator += 1.0;
    return CalcResult::ok(c.accumulator);
  });
  Event twice = space.add_basic("double", [](ExecContext& c) {
    c.accumulator *= 2.0;
    return CalcResult::ok(c.accumulator);
  });
  Event a = space.add_basic("a", [](ExecContext&) { return CalcResult::ok(0.0); });
  Event b = space.add_basic("b", [](ExecContext&) { return CalcResult::ok(0.0); });
  Event pair = space.define("pair", seq(a, b));

  std::vector<Event> atoms() const { return {push, twice, a, b, pair}; }
};

/// Random event of nesting depth <= depth over the given atoms.
inline Event random_event(std::mt19937_64& rng, const std::vector<Event>& atoms, int depth) {
  std::uniform_int_distribution<int> kind(0, depth <= 0 ? 0 : 2);
  switch (kind(rng)) {
    case 0:
      return atoms[std::uniform_int_distribution<std::size_t>(0, atoms.size() - 1)(rng)];
    case 1:
      return seq(random_event(rng, atoms, depth - 1), random_event(rng, atoms, depth - 1));
    default:
      return scalar_mul(std::uniform_int_distribution<unsigned>(0, 3)(rng),
                        random_event(rng, atoms, depth - 1));
  }
}

/// Every event of depth <= 1 over the atoms (atoms, pairs, k in 0..2).
inline std::vector<Event> all_shallow_events(const std::vector<Event>& atoms) {
  std::vector<Event> out(atoms);
  for (const auto& x : atoms) {
    for (const auto& y : atoms) out.push_back(seq(x, y));
    for (unsigned k = 0; k <= 2; ++k) out.push_back(scalar_mul(k, x));
  }
  return out;
}

}  // namespace evspace::testing
