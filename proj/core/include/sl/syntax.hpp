#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace sl {

using Name = std::string;
using NameSet = std::set<Name>;

enum class SignalKind { Input, Output, Local, Generated };

// Names starting with '%' are reserved for the toolkit: `%gN` for signals
// created by desugaring or by the allocation rule, `%L` for loop bodies,
// `A$k` for CPS equations.
bool isGeneratedName(std::string_view n);
// Index N of a `%gN` name, or -1.
std::int64_t generatedIndex(std::string_view n);

// Monotone supply of fresh `%gN` names.
class NameSupply {
 public:
  explicit NameSupply(std::uint64_t next = 0) : next_(next) {}
  Name fresh() { return "%g" + std::to_string(next_++); }
  std::uint64_t peek() const { return next_; }
  void reserveAbove(std::int64_t idx) {
    if (idx >= 0 && static_cast<std::uint64_t>(idx) >= next_) next_ = static_cast<std::uint64_t>(idx) + 1;
  }

 private:
  std::uint64_t next_;
};

// ---------------------------------------------------------------------------
// Source threads

enum class TK : std::uint8_t { Nil, Seq, Emit, New, Spawn, Await, Watch, Call, Pause };

struct Thread;
using ThreadPtr = std::shared_ptr<const Thread>;

struct Thread {
  TK kind = TK::Nil;
  Name sig;                // Emit, Await, Watch: the signal; New: the bound name
  Name id;                 // Call
  std::vector<Name> args;  // Call
  ThreadPtr a;             // Seq first; New/Spawn/Watch body
  ThreadPtr b;             // Seq rest
};

namespace th {
ThreadPtr nil();
ThreadPtr pause();
// Right-associating sequential composition: (a;b);c is stored as a;(b;c).
ThreadPtr seq(ThreadPtr a, ThreadPtr b);
ThreadPtr seqAll(const std::vector<ThreadPtr>& parts);
ThreadPtr emit(Name s);
ThreadPtr nu(Name s, ThreadPtr body);
ThreadPtr spawn(ThreadPtr body);
ThreadPtr await(Name s);
ThreadPtr watch(Name s, ThreadPtr body);
ThreadPtr call(Name id, std::vector<Name> args);
}  // namespace th

bool structEqual(const ThreadPtr& x, const ThreadPtr& y);

struct Definition {
  Name id;
  std::vector<Name> params;
  ThreadPtr body;
};

struct SourceProgram {
  std::vector<Name> inputs;
  std::vector<Name> outputs;
  std::map<Name, Definition> defs;
  std::vector<ThreadPtr> initial;

  bool isInput(const Name& n) const;
  bool isOutput(const Name& n) const;
  bool isInterface(const Name& n) const { return isInput(n) || isOutput(n); }
  NameSet interface() const;
  SignalKind kindOf(const Name& n) const;
};

bool structEqual(const SourceProgram& x, const SourceProgram& y);

// ---------------------------------------------------------------------------
// Parsing, desugaring, printing

struct ParseOptions {
  // Expand `pause` through the derived form instead of the primitive.
  bool tablePause = false;
};

SourceProgram parse(std::string_view text, const ParseOptions& opts = {});
// Parses a single thread expression against an existing program context
// (its interface and definitions). New loop definitions are added to `ctx`.
ThreadPtr parseThread(std::string_view text, SourceProgram& ctx, const ParseOptions& opts = {});

// Expansions of the derived instructions. The desugarer owns the supply of
// fresh signal names and registers loop bodies as new definitions.
class Desugarer {
 public:
  Desugarer(NameSupply& names, std::map<Name, Definition>& defs, NameSet iface = {}, bool tablePause = false);

  ThreadPtr loop(const ThreadPtr& body);
  ThreadPtr now(const ThreadPtr& body);
  ThreadPtr derivedPause();
  ThreadPtr present(const Name& s, const ThreadPtr& then, const ThreadPtr& otherwise);
  ThreadPtr par(const ThreadPtr& left, const ThreadPtr& right);
  // Primitive pause, or the derived form when requested.
  ThreadPtr pauseForm();

 private:
  bool isInterface(const Name& n) const;

  NameSupply& names_;
  std::map<Name, Definition>& defs_;
  NameSet iface_;
  bool tablePause_;
};

std::string printThread(const ThreadPtr& t);
std::string printProgram(const SourceProgram& p);

// ---------------------------------------------------------------------------
// Names

NameSet freeSignals(const ThreadPtr& t);
void collectFreeSignals(const ThreadPtr& t, NameSet& out);
// Free signals in first-occurrence pre-order.
std::vector<Name> freeSignalsOrdered(const ThreadPtr& t);
// Largest `%gN` index anywhere in the program (bound or free), or -1.
std::int64_t maxGeneratedIndex(const SourceProgram& p);
std::int64_t maxGeneratedIndex(const ThreadPtr& t);

// Capture-avoiding simultaneous substitution of signal names.
ThreadPtr substitute(const ThreadPtr& t, const std::map<Name, Name>& sub, NameSupply& supply);

// Instantiates the definition of `id` with actual arguments.
ThreadPtr unfold(const SourceProgram& p, const Name& id, const std::vector<Name>& args, NameSupply& supply);

// ---------------------------------------------------------------------------
// Alpha-canonical forms

// Renames every non-interface name: free ones to %g0, %g1, ... in first
// occurrence order, bound ones by nesting depth. Threads are ordered by
// their name-erased skeleton; ties are broken by trying every ordering of
// the tied threads (up to a cap) and keeping the least result.
std::vector<ThreadPtr> canonicalize(const std::vector<ThreadPtr>& threads, const NameSet& iface);

// Canonical string key of a multiset of threads, optionally together with
// the set of signals currently present. Equal keys iff alpha-equivalent
// (below the tie cap).
std::string canonicalKey(const std::vector<ThreadPtr>& threads, const NameSet& iface,
                         const NameSet* present = nullptr);

}  // namespace sl
