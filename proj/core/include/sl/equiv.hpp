#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sl/syntax.hpp"
#include "sl/tailcore.hpp"

namespace sl {

// ---------------------------------------------------------------------------
// Programs in process-calculus notation: environments, threads and programs
// share one syntax, and `emit s.P` is sugar for (emit s) | P.

enum class ProcKind { Nil, Emit, Present, Par, Nu, Call };

struct Proc;
struct ProcBranch;
using ProcPtr = std::shared_ptr<const Proc>;
using ProcBranchPtr = std::shared_ptr<const ProcBranch>;

struct Proc {
  ProcKind kind = ProcKind::Nil;
  Name sig;                   // Emit, Present, Nu (binder)
  ProcPtr a, b;               // Present: a = then; Par: a | b; Nu: a = body
  ProcBranchPtr otherwise;    // Present
  Name id;                    // Call
  std::vector<Name> args;     // Call
};

struct ProcBranch {
  ProcPtr leaf;  // set for a leaf
  Name sig;
  ProcBranchPtr then, otherwise;
  bool isLeaf() const { return leaf != nullptr; }
};

namespace pr {
ProcPtr nil();
ProcPtr emit(Name s);
ProcPtr present(Name s, ProcPtr then, ProcBranchPtr otherwise);
ProcPtr par(ProcPtr a, ProcPtr b);
ProcPtr parAll(const std::vector<ProcPtr>& parts);
ProcPtr nu(Name s, ProcPtr body);
ProcPtr call(Name id, std::vector<Name> args);
ProcBranchPtr leaf(ProcPtr p);
ProcBranchPtr ite(Name s, ProcBranchPtr then, ProcBranchPtr otherwise);
}  // namespace pr

struct ProcDefinition {
  Name id;
  std::vector<Name> params;
  ProcPtr body;
};
using ProcSystem = std::map<Name, ProcDefinition>;

ProcPtr tailToProc(const TailPtr& t);
ProcBranchPtr tailToProc(const BranchPtr& b);
ProcSystem tailDefsToProc(const TailProgram& p);
// Parallel composition of the initial threads.
ProcPtr initialProc(const TailProgram& p);

std::string printProc(const ProcPtr& p);
NameSet freeNames(const ProcPtr& p);

// ---------------------------------------------------------------------------
// Labelled transitions

struct Action {
  enum Kind { Tau, In, Out } kind = Tau;
  Name sig;
  bool operator==(const Action&) const = default;
  bool operator<(const Action& o) const { return kind != o.kind ? kind < o.kind : sig < o.sig; }
};
std::string formatAction(const Action& a);

// All one-step transitions. Private dead names (see canonicalProc) carry no
// visible action.
std::vector<std::pair<Action, ProcPtr>> ltsSteps(const ProcPtr& p, const ProcSystem& sys, NameSupply& fresh);

// Free signals emitted at top level (the barbs of P).
NameSet emittedSet(const ProcPtr& p);
// End of instant; throws NotSuspended when a tau step exists.
ProcPtr eoiProc(const ProcPtr& p, const ProcSystem& sys);

// Normal form used as state identity. It applies strong-bisimulation laws:
// nested parallel compositions are flattened, 0 components dropped, repeated
// emissions merged, binders that are not free dropped, and a `new s` whose
// name is never emitted nor passed to a call is replaced by the inert name
// `%dead`. Binders are then named by nesting level. With `sortPar` the
// components of each composition are ordered as well.
ProcPtr canonicalProc(const ProcPtr& p, bool sortPar = true);

// ---------------------------------------------------------------------------
// Explored transition systems

struct LtsOptions {
  std::size_t stateLimit = 100000;
  bool sortPar = true;
};

// Interned canonical states with lazily computed transitions. `observable`
// is the set of signals an emission context may provide.
class ProcLts {
 public:
  ProcLts(const ProcSystem& sys, NameSet observable, LtsOptions opts = {});

  std::size_t add(const ProcPtr& p);
  std::size_t size() const { return states_.size(); }
  const ProcPtr& state(std::size_t i) const { return states_[i]; }
  const std::string& key(std::size_t i) const { return keys_[i]; }
  const std::vector<Name>& observable() const { return obs_; }

  const std::vector<std::pair<Action, std::size_t>>& steps(std::size_t i);
  std::vector<std::size_t> tauSuccessors(std::size_t i);
  bool suspended(std::size_t i);
  NameSet barbs(std::size_t i);
  // Reflexive-transitive tau closure.
  std::vector<std::size_t> tauClosure(std::size_t i);
  std::size_t eoi(std::size_t i);
  // P | emit s1 | ... for the observable signals selected by `mask`.
  std::size_t withEmits(std::size_t i, std::uint32_t mask);

 private:
  const ProcSystem& sys_;
  std::vector<Name> obs_;
  LtsOptions opts_;
  NameSupply fresh_;
  std::map<std::string, std::size_t> index_;
  std::vector<ProcPtr> states_;
  std::vector<std::string> keys_;
  std::vector<std::optional<std::vector<std::pair<Action, std::size_t>>>> steps_;
  std::map<std::size_t, std::size_t> eoi_;
  std::map<std::pair<std::size_t, std::uint32_t>, std::size_t> emits_;
};

struct Suspension {
  bool now = false;       // no tau step
  bool weak = false;      // a tau path reaches a suspended program
  bool labelled = false;  // a path of arbitrary actions does
};

// Computed by exploring the states reachable from P. The labelled search
// is independent from the tau search.
Suspension suspension(const ProcSystem& sys, const ProcPtr& p, const LtsOptions& opts = {});

// Both predicates on every state reachable from P by labelled transitions
// and emission contexts; returns the first disagreeing state if any.
struct SuspensionSurvey {
  std::size_t states = 0;
  std::optional<std::string> disagreement;
};
SuspensionSurvey surveySuspension(const ProcSystem& sys, const ProcPtr& p, const NameSet& observable,
                                  const LtsOptions& opts = {});

// ---------------------------------------------------------------------------
// Equivalence

enum class EquivMode { Exact, Trace, Bounded };

struct EquivOptions {
  EquivMode mode = EquivMode::Exact;
  std::size_t depth = 8;  // bounded mode
  std::size_t stateLimit = 100000;
  bool sortPar = true;
  // Use the labelled search instead of weak suspension in the barb
  // condition.
  bool labelledSuspension = false;
};

struct EquivResult {
  enum Verdict { Equivalent, Distinguished, Inconclusive } verdict = Equivalent;
  std::vector<std::string> witness;
  std::size_t states = 0;
  std::size_t depth = 0;
};
std::string verdictName(EquivResult::Verdict v);

// `observable` is extended with the free signals of P and Q. Exact mode
// throws NotFiniteState when hasLiveGenerationInRecursion holds for P or Q;
// all modes throw StateLimit beyond the limit.
EquivResult bisimCheck(const ProcSystem& sys, const ProcPtr& p, const ProcPtr& q, const NameSet& observable,
                       const EquivOptions& opts = {});

// Compares two tail programs; identifiers of the second one are renamed
// apart. The observable signals are both interfaces plus all free signals.
EquivResult equivPrograms(const TailProgram& a, const TailProgram& b, const EquivOptions& opts = {});

// True when a definition that can be called from a call cycle reachable
// from P contains a `new` that is not dead. Such a `new` may be
// instantiated without bound; a `new` run a bounded number of times cannot.
bool hasLiveGenerationInRecursion(const ProcSystem& sys, const ProcPtr& p);

// ---------------------------------------------------------------------------
// Confluence

struct ConfluenceReport {
  bool ok = true;
  std::size_t states = 0;
  std::size_t pairs = 0;  // pairs of distinct transitions examined
  std::string violation;
};

// One-step diamonds on the labelled transition system, together with the
// persistence properties of emissions and inputs.
ConfluenceReport confluenceCheck(const ProcSystem& sys, const ProcPtr& p, std::size_t maxDepth = 6,
                                 std::size_t stateLimit = 5000);

// One-step diamonds of the source reduction relation on configurations
// (threads, environment), over every interleaving within each instant and
// every input set for the first `instants` instants.
ConfluenceReport sourceConfluence(const SourceProgram& prog, std::size_t instants = 3,
                                  std::size_t stateLimit = 5000);

}  // namespace sl
