#pragma once

#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "sl/environment.hpp"
#include "sl/instant.hpp"
#include "sl/syntax.hpp"

namespace sl {

// ---------------------------------------------------------------------------
// Decomposition into evaluation context and redex

enum class RedexKind { SeqNil, Emit, New, Spawn, Await, WatchNil, Call, Pause };

struct Redex {
  RedexKind kind;
  ThreadPtr node;
};

struct Frame {
  enum Kind { SeqAfter, WatchFrame } kind;
  Name sig;        // WatchFrame
  ThreadPtr rest;  // SeqAfter
};

// Frames from the outermost to the innermost.
struct EvalContext {
  std::vector<Frame> frames;
};

struct Terminated {};

std::variant<Terminated, std::pair<EvalContext, Redex>> decompose(const ThreadPtr& t);
ThreadPtr plug(const EvalContext& c, const ThreadPtr& t);

// ---------------------------------------------------------------------------
// Thread reduction

using StepResult = BasicStep<ThreadPtr>;

// One reduction step; nullopt when the thread is suspended.
std::optional<StepResult> stepThread(const ThreadPtr& t, Environment& env, const SourceProgram& prog);
bool isSuspended(const ThreadPtr& t, const Environment& env);

// End-of-instant transformation; throws NotSuspended on a live thread.
ThreadPtr endOfInstant(const ThreadPtr& t, const Environment& env);
std::vector<ThreadPtr> endOfInstant(const std::vector<ThreadPtr>& p, const Environment& env);

// ---------------------------------------------------------------------------
// Instants and traces

using InstantResult = BasicInstantResult<ThreadPtr>;

// Runs one instant. `fresh` is the run's name reservoir, advanced in place.
InstantResult runInstant(const SourceProgram& prog, const std::vector<ThreadPtr>& threads, const NameSet& inputs,
                         Scheduler& sched, std::uint64_t fuel, NameSupply& fresh, std::size_t instantIndex = 0);
// Same, with a reservoir starting above every generated name in sight.
InstantResult runInstant(const SourceProgram& prog, const std::vector<ThreadPtr>& threads, const NameSet& inputs,
                         Scheduler& sched, std::uint64_t fuel = kDefaultFuel);

// Folds runInstant over the inputs; throws FuelExhausted with the index
// of the diverging instant.
Trace runTrace(const SourceProgram& prog, const std::vector<NameSet>& inputs, Scheduler& sched,
               std::uint64_t fuel = kDefaultFuel);

struct PartialTrace {
  Trace trace;
  bool diverged = false;  // the instant after the last recorded one ran out of fuel
};
PartialTrace runTracePartial(const SourceProgram& prog, const std::vector<NameSet>& inputs, Scheduler& sched,
                             std::uint64_t fuel = kDefaultFuel);

// Incremental runner used by the step mode and by exhaustive explorations.
class Runner {
 public:
  Runner(const SourceProgram& prog, Scheduler sched, std::uint64_t fuel = kDefaultFuel);
  const std::vector<ThreadPtr>& threads() const { return threads_; }
  NameSet instant(const NameSet& inputs);
  std::size_t instantsRun() const { return count_; }
  std::string canonicalResidual() const;

 private:
  const SourceProgram& prog_;
  Scheduler sched_;
  std::uint64_t fuel_;
  NameSupply fresh_;
  std::vector<ThreadPtr> threads_;
  std::size_t count_ = 0;
};

}  // namespace sl
