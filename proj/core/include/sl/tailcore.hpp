#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sl/analysis.hpp"
#include "sl/environment.hpp"
#include "sl/instant.hpp"
#include "sl/syntax.hpp"

namespace sl {

// Tail-recursive threads: no general sequencing, and branching threads only
// in the else position of `present`, resolved at the end of the instant.
enum class TailKind : std::uint8_t { Nil, Emit, New, Spawn, Present, Call };

struct Tail;
struct Branch;
using TailPtr = std::shared_ptr<const Tail>;
using BranchPtr = std::shared_ptr<const Branch>;

struct Tail {
  TailKind kind = TailKind::Nil;
  Name sig;                // Emit, Present: the signal; New: the bound name
  Name id;                 // Call
  std::vector<Name> args;  // Call
  TailPtr a;               // Emit/New: continuation or body; Spawn: spawned; Present: then
  TailPtr b;               // Spawn: continuation
  BranchPtr otherwise;     // Present
};

// Either a leaf thread or `ite s b1 b2`.
struct Branch {
  TailPtr leaf;  // set for leaves
  Name sig;
  BranchPtr then, otherwise;

  bool isLeaf() const { return leaf != nullptr; }
};

namespace tl {
TailPtr nil();
TailPtr emit(Name s, TailPtr next);
TailPtr nu(Name s, TailPtr body);
TailPtr spawn(TailPtr spawned, TailPtr next);
TailPtr present(Name s, TailPtr then, BranchPtr otherwise);
TailPtr call(Name id, std::vector<Name> args);
BranchPtr leaf(TailPtr t);
BranchPtr ite(Name s, BranchPtr then, BranchPtr otherwise);
}  // namespace tl

bool structEqual(const TailPtr& x, const TailPtr& y);
bool structEqual(const BranchPtr& x, const BranchPtr& y);

struct TailDefinition {
  Name id;
  std::vector<Name> params;
  TailPtr body;
};

struct TailProgram {
  std::vector<Name> inputs;
  std::vector<Name> outputs;
  std::map<Name, TailDefinition> defs;
  std::vector<TailPtr> initial;

  NameSet interface() const;
  bool isInterface(const Name& n) const;
};

bool structEqual(const TailProgram& x, const TailProgram& y);

// Text form: (emit! s t) (new s t) (thread! t1 t2) (present s t b)
// (ite s b1 b2) (call A x..) and 0. `(pause b)` is accepted as sugar for the
// prefix pause.
TailProgram parseTail(std::string_view text);
std::string printTail(const TailPtr& t);
std::string printBranch(const BranchPtr& b);
std::string printTailProgram(const TailProgram& p);

NameSet freeSignals(const TailPtr& t);
void collectFreeSignals(const TailPtr& t, NameSet& out);
void collectFreeSignals(const BranchPtr& b, NameSet& out);
std::vector<Name> freeSignalsOrdered(const TailPtr& t);
std::int64_t maxGeneratedIndex(const TailPtr& t);
std::int64_t maxGeneratedIndex(const TailProgram& p);

TailPtr substitute(const TailPtr& t, const std::map<Name, Name>& sub, NameSupply& supply);
BranchPtr substitute(const BranchPtr& b, const std::map<Name, Name>& sub, NameSupply& supply);
TailPtr unfold(const TailProgram& p, const Name& id, const std::vector<Name>& args, NameSupply& supply);

// ---------------------------------------------------------------------------
// Reduction

using TailStep = BasicStep<TailPtr>;

std::optional<TailStep> stepTail(const TailPtr& t, Environment& env, const TailProgram& prog);
bool isSuspendedTail(const TailPtr& t, const Environment& env);
TailPtr evalBranch(const BranchPtr& b, const Environment& env);
TailPtr endOfInstantTail(const TailPtr& t, const Environment& env);
std::vector<TailPtr> endOfInstantTail(const std::vector<TailPtr>& p, const Environment& env);

// pause.b = new g (present g 0 b) with g fresh.
TailPtr pausePrefix(const BranchPtr& b, NameSupply& supply);
// await s.t = A(sig(t) + s) with the new equation A = present s t A added to
// `prog`. The identifier is the first free `%W<k>`.
TailPtr awaitPrefix(const Name& s, const TailPtr& t, TailProgram& prog);

using TailInstantResult = BasicInstantResult<TailPtr>;

TailInstantResult runInstantTail(const TailProgram& prog, const std::vector<TailPtr>& threads, const NameSet& inputs,
                                 Scheduler& sched, std::uint64_t fuel, NameSupply& fresh,
                                 std::size_t instantIndex = 0);
TailInstantResult runInstantTail(const TailProgram& prog, const std::vector<TailPtr>& threads, const NameSet& inputs,
                                 Scheduler& sched, std::uint64_t fuel = kDefaultFuel);
Trace runTraceTail(const TailProgram& prog, const std::vector<NameSet>& inputs, Scheduler& sched,
                   std::uint64_t fuel = kDefaultFuel);

class TailRunner {
 public:
  TailRunner(const TailProgram& prog, Scheduler sched, std::uint64_t fuel = kDefaultFuel);
  NameSet instant(const NameSet& inputs);
  const std::vector<TailPtr>& threads() const { return threads_; }

 private:
  const TailProgram& prog_;
  Scheduler sched_;
  std::uint64_t fuel_;
  NameSupply fresh_;
  std::vector<TailPtr> threads_;
  std::size_t count_ = 0;
};

// ---------------------------------------------------------------------------
// Reactivity for the tail core. Only the then-branch of `present` runs in
// the current instant, and both parts of `thread t1.t2` do; a call
// contributes its identifier, or its body while the unfolding depth lasts.
NameSet tailCallIds(const TailPtr& t);
Verdict checkReactivityTail(const TailProgram& prog, unsigned unfoldDepth = 1);

}  // namespace sl
