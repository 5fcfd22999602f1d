#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sl/semantics.hpp"
#include "sl/syntax.hpp"

namespace sl {

// Identifiers a thread may call within the current instant, and whether it
// surely pauses (`down`) before finishing the instant.
struct CallResult {
  std::multiset<Name> ids;
  bool down = false;

  bool operator==(const CallResult&) const = default;
};

// Sequential composition: (X,0);(Y,l) = (X+Y,l) and (X,down);_ = (X,down).
CallResult then(const CallResult& a, const CallResult& b);
std::string formatCallResult(const CallResult& r);

CallResult callOf(const ThreadPtr& t);
CallResult callOfContext(const EvalContext& c);

// Call with calls inlined up to `depth` levels; depth 0 is callOf.
CallResult callOfUnfolded(const SourceProgram& prog, const ThreadPtr& t, unsigned depth);

using Edge = std::pair<Name, Name>;

struct Verdict {
  bool accept = true;
  std::vector<Name> cycle;  // closed: first == last when rejecting
  std::vector<Name> order;  // a compatible order when accepting, largest first

  std::string describeCycle() const;  // "A > B > A"
};

std::set<Edge> reactivityConstraints(const SourceProgram& prog, unsigned unfoldDepth = 1);
Verdict checkReactivity(const SourceProgram& prog, unsigned unfoldDepth = 1);

enum class Label { Eps, Kappa };
std::set<std::pair<Name, Label>> boundedCall(const ThreadPtr& t, Label l);

struct BoundedConstraints {
  std::set<Edge> strict;  // A > B, from label kappa
  std::set<Edge> weak;    // A >= B, from label epsilon
};
BoundedConstraints boundedConstraints(const SourceProgram& prog);
Verdict checkBounded(const SourceProgram& prog);

// Shared graph decisions, also used by the tail-core reactivity check.
Verdict acyclicVerdict(const std::set<Name>& nodes, const std::set<Edge>& edges);
Verdict preorderVerdict(const std::set<Name>& nodes, const BoundedConstraints& c);

}  // namespace sl
