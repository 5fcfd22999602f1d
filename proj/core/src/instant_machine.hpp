#pragma once

#include <algorithm>

#include "sl/environment.hpp"
#include "sl/errors.hpp"
#include "sl/instant.hpp"

namespace sl::detail {

// The instant loop shared by the source interpreter and the tail core.
// `Lang` supplies step, suspended, eoi, freeSignals, isNil and nil.
template <class Lang>
BasicInstantResult<typename Lang::Ptr> runInstantWith(const Lang& lang, std::vector<typename Lang::Ptr> threads,
                                                      const std::vector<Name>& inputs,
                                                      const std::vector<Name>& outputs, const NameSet& present,
                                                      Scheduler& sched, std::uint64_t fuel, NameSupply& fresh,
                                                      std::size_t instantIndex) {
  Environment env(fresh.peek());
  for (const auto& n : inputs) env.set(n, false);
  for (const auto& n : outputs) env.set(n, false);
  for (const auto& n : present) {
    if (std::find(inputs.begin(), inputs.end(), n) == inputs.end())
      throw Error("input signal not declared: " + n);
    env.set(n, true);
  }
  NameSet fs;
  for (const auto& t : threads) lang.freeSignals(t, fs);
  for (const auto& n : fs)
    if (!env.defined(n)) env.set(n, false);

  std::uint64_t steps = 0;
  auto apply = [&](std::size_t i, BasicStep<typename Lang::Ptr>&& r) {
    ++steps;
    threads[i] = std::move(r.next);
    for (auto& s : r.spawned) threads.push_back(std::move(s));
  };
  if (sched.kind() == Scheduler::Kind::Deterministic) {
    std::size_t i = 0;
    while (i < threads.size()) {
      if (lang.suspended(threads[i], env)) {
        ++i;
        continue;
      }
      if (steps >= fuel) throw FuelExhausted(steps, instantIndex);
      auto r = lang.step(threads[i], env);
      bool woke = r->emittedNew;
      apply(i, std::move(*r));
      if (woke) i = 0;
    }
  } else {
    std::vector<std::size_t> runnable;
    while (true) {
      runnable.clear();
      for (std::size_t i = 0; i < threads.size(); ++i)
        if (!lang.suspended(threads[i], env)) runnable.push_back(i);
      if (runnable.empty()) break;
      if (steps >= fuel) throw FuelExhausted(steps, instantIndex);
      std::size_t i = runnable[sched.pick(runnable.size())];
      auto r = lang.step(threads[i], env);
      apply(i, std::move(*r));
    }
  }

  BasicInstantResult<typename Lang::Ptr> res;
  res.steps = steps;
  for (const auto& o : outputs)
    if (env.get(o)) res.outputs.insert(o);
  for (const auto& t : threads) {
    auto e = lang.eoi(t, env);
    if (!lang.isNil(e)) res.residual.push_back(std::move(e));
  }
  // Terminated threads are inert; one is kept so the program stays non-empty.
  if (res.residual.empty()) res.residual.push_back(lang.nil());
  fresh = NameSupply(env.freshCounter());
  return res;
}

}  // namespace sl::detail
