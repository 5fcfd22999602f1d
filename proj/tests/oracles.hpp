#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "sl/mealy.hpp"
#include "sl/tailcore.hpp"

namespace sl::testgen {

inline NameSet maskToSet(std::uint32_t mask, const std::vector<Name>& names) {
  NameSet s;
  for (std::size_t k = 0; k < names.size(); ++k)
    if (mask & (1u << k)) s.insert(names[k]);
  return s;
}

inline std::uint32_t setToMask(const NameSet& s, const std::vector<Name>& names) {
  std::uint32_t m = 0;
  for (std::size_t k = 0; k < names.size(); ++k)
    if (s.count(names[k])) m |= 1u << k;
  return m;
}

// Runs `instants` random instants of a normal program twice, once with the
// set closure and once with the multiset interpreter on its tail image, and
// compares the emitted outputs and the residual identifier sets (ignoring
// terminated nodes on both sides). Returns an empty string on agreement.
inline std::string closureMismatch(const NormalProgram& p, std::mt19937_64& rng, int instants) {
  TailProgram tail = normalToTail(p);
  auto zero = [&](std::size_t k) { return p.nodes[k].kind == NormalNode::Kind::Zero; };
  IdSet q = p.initial;
  std::sort(q.begin(), q.end());
  q.erase(std::unique(q.begin(), q.end()), q.end());
  std::vector<TailPtr> threads;
  for (auto k : p.initial) threads.push_back(tl::call(nodeName(k), {}));
  std::uniform_int_distribution<std::uint32_t> letter(0, (1u << p.inputs.size()) - 1);
  for (int i = 0; i < instants; ++i) {
    NameSet in = maskToSet(letter(rng), p.inputs);
    auto [q2, env] = closure(p, q, in);
    Scheduler sched = Scheduler::deterministic();
    auto r = runInstantTail(tail, threads, in, sched);
    NameSet envOut;
    for (const auto& o : p.outputs)
      if (env.count(o)) envOut.insert(o);
    if (envOut != r.outputs)
      return "instant " + std::to_string(i) + ": outputs " + formatSet(envOut) + " vs " + formatSet(r.outputs);
    IdSet fromSet, fromMulti;
    for (auto k : q2)
      if (!zero(k)) fromSet.push_back(k);
    for (const auto& t : r.residual) {
      if (t->kind == TailKind::Nil) continue;
      if (t->kind != TailKind::Call) return "instant " + std::to_string(i) + ": residual is not a call";
      std::size_t k = std::stoul(t->id.substr(1));
      if (!zero(k)) fromMulti.push_back(k);
    }
    std::sort(fromMulti.begin(), fromMulti.end());
    fromMulti.erase(std::unique(fromMulti.begin(), fromMulti.end()), fromMulti.end());
    if (fromSet != fromMulti) return "instant " + std::to_string(i) + ": residual sets differ";
    q = q2;
    threads = r.residual;
  }
  return {};
}

// Exhaustive comparison of a machine against the tail program it compiles
// to, on every input word of length `len`.
inline bool programMatchesMachine(const TailProgram& prog, const MealyMachine& m, std::size_t len) {
  std::size_t words = 1;
  for (std::size_t i = 0; i < len; ++i) words *= m.letters();
  for (std::size_t w = 0; w < words; ++w) {
    std::vector<std::uint32_t> word;
    std::vector<NameSet> inputs;
    std::size_t c = w;
    for (std::size_t i = 0; i < len; ++i) {
      word.push_back(static_cast<std::uint32_t>(c % m.letters()));
      c /= m.letters();
      inputs.push_back(maskToSet(word.back(), prog.inputs));
    }
    Scheduler sched = Scheduler::deterministic();
    Trace tr = runTraceTail(prog, inputs, sched);
    auto expect = runMealy(m, word);
    for (std::size_t i = 0; i < len; ++i)
      if (setToMask(tr[i].out, prog.outputs) != expect[i]) return false;
  }
  return true;
}

}  // namespace sl::testgen
