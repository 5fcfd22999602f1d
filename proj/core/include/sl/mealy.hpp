#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sl/tailcore.hpp"

namespace sl {

// Deterministic Mealy machine over powerset alphabets. Input letters are
// bitmasks over n signals (bit k is signal k+1), outputs bitmasks over m.
struct MealyMachine {
  unsigned n = 0;
  unsigned m = 0;
  std::vector<std::string> states;
  std::size_t init = 0;
  std::vector<std::vector<std::size_t>> next;   // [state][letter]
  std::vector<std::vector<std::uint32_t>> out;  // [state][letter]

  std::size_t letters() const { return std::size_t{1} << n; }
  // Adds a state with an empty row of transitions to itself.
  std::size_t addState(std::string name);
};

struct MonotonicityViolation {
  std::uint32_t smaller;
  std::uint32_t larger;
  std::size_t state;
  unsigned output;  // 1-based index lost when growing the input
};

// Throws ArityTooLarge when n > 12.
std::optional<MonotonicityViolation> validateMealy(const MealyMachine& m);
std::string describe(const MonotonicityViolation& v, const MealyMachine& m);

// `{1 3}` style set of 1-based indices.
std::string formatMask(std::uint32_t mask);
std::string printMealy(const MealyMachine& m);
MealyMachine parseMealy(std::string_view text);

// One definition per state, q = Output(q).pause.b(q), over inputs i1..in
// and outputs o1..om. Output(q) spawns one guarded emitter per input set X
// and output j in f_O(X, q).
TailProgram mealyToProgram(const MealyMachine& m);
// b(q): the ite cascade over the inputs whose leaves call the successors.
BranchPtr nextStateBranch(const MealyMachine& m, std::size_t q, const std::vector<Name>& inputs);

// ---------------------------------------------------------------------------
// Normal programs: parameter-free equations of the forms
// A = 0 | emit s.B | present s B b | thread B.B', b = A | ite s b b.

struct NormalBranch;
using NormalBranchPtr = std::shared_ptr<const NormalBranch>;
struct NormalBranch {
  bool isLeaf = true;
  std::size_t leaf = 0;
  Name sig;
  NormalBranchPtr then, otherwise;
};

struct NormalNode {
  enum class Kind { Zero, Emit, Present, Thread } kind = Kind::Zero;
  Name sig;
  std::size_t b1 = 0, b2 = 0;
  NormalBranchPtr branch;  // Present
  std::string origin;      // the tail term this node stands for
};

struct NormalProgram {
  std::vector<Name> inputs;
  std::vector<Name> outputs;
  std::vector<NormalNode> nodes;
  std::vector<std::size_t> initial;
};

// Signal never emitted; a `new` whose name is neither emitted nor passed on
// is bound to it.
inline const Name kDeadSignal = "%dead";

// Lazy instantiation of reachable (identifier, arguments) pairs followed by
// the split into normal equations. Throws HasSignalGeneration for a `new`
// whose name may be emitted, Error on a cycle of pure aliases, and
// StateExplosion beyond `nodeLimit` equations.
NormalProgram normalizeTail(const TailProgram& p, std::size_t nodeLimit = 1 << 16);
// Each node becomes a nullary definition `N<k>` so the multiset interpreter
// can run the normal program.
TailProgram normalToTail(const NormalProgram& p);
std::string nodeName(std::size_t k);

using IdSet = std::vector<std::size_t>;  // sorted, duplicate free

// Set saturation followed by the set end of instant.
std::pair<IdSet, NameSet> closure(const NormalProgram& p, const IdSet& q, const NameSet& E);
// The saturated set before the end of instant, for inspection.
std::pair<IdSet, NameSet> saturate(const NormalProgram& p, const IdSet& q, const NameSet& E);

MealyMachine programToMealy(const NormalProgram& p, std::size_t stateLimit = 1 << 16);
MealyMachine programToMealy(const TailProgram& p, std::size_t stateLimit = 1 << 16);

struct MealyEquivResult {
  bool equivalent = true;
  std::vector<std::uint32_t> witness;  // shortest distinguishing input word
};
MealyEquivResult mealyTraceEquiv(const MealyMachine& a, const MealyMachine& b);

// Runs a machine on an input word.
std::vector<std::uint32_t> runMealy(const MealyMachine& m, const std::vector<std::uint32_t>& word);

}  // namespace sl
