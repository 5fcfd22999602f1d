#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "sl/syntax.hpp"

namespace sl {

// Deterministic machines over two counters. Decrementing an empty counter
// blocks the machine forever, which matches the encoding: an empty stack
// never acknowledges a pop.
struct CounterInstr {
  enum Kind { Inc, Dec, TestZero } kind = Inc;
  int counter = 1;  // 1 or 2
  std::string next;      // Inc, Dec
  std::string ifZero;    // TestZero
  std::string ifNonzero; // TestZero
};

struct CounterMachine {
  std::vector<std::string> states;  // declaration order
  std::string init;
  std::string halt;
  std::map<std::string, CounterInstr> instrs;

  // Throws FormatError on dangling targets, a missing instruction or a bad
  // counter index.
  void validate() const;
  // Highest counter index used by an instruction (0 when none).
  int countersUsed() const;
};

// Line format, `#` starts a comment:
//   init q0
//   halt qh
//   state q0: inc c1 -> q1
//   state q1: dec c2 -> q2
//   state q2: ifzero c1 -> q3 else q4
// Without an `init` line the first declared state is initial.
CounterMachine parseCounterMachine(std::string_view text);
std::string printCounterMachine(const CounterMachine& m);

struct CounterRun {
  bool halted = false;
  bool blocked = false;  // a decrement of an empty counter
  std::uint64_t steps = 0;
  std::uint64_t c1 = 0, c2 = 0;
};
// Direct interpreter; stops after `maxSteps` instructions.
CounterRun runCounterMachine(const CounterMachine& m, std::uint64_t maxSteps);

struct EncodeOptions {
  // Adds the outputs `wave_r` and `wave_l`, emitted whenever a stack cell
  // enters the corresponding phase of a pop.
  bool instrument = false;
};

// Source program over the output `haltSignal` that emits it exactly when
// the machine reaches its halt state. Each counter is a stack of S cells
// above a bottom cell Z, talking to its left neighbour through five
// signals (dec, inc, zero, ack, abort).
SourceProgram encodeCounterMachine(const CounterMachine& m, const Name& haltSignal = "halt",
                                   const EncodeOptions& opts = {});
std::string encodeCounterMachineText(const CounterMachine& m, const Name& haltSignal = "halt",
                                     const EncodeOptions& opts = {});

// A pushdown automaton with one stack symbol is a machine on counter 1
// (push = inc, pop = dec, empty test = ifzero). Throws FormatError when
// the description uses counter 2.
SourceProgram encodePushdown(const CounterMachine& a, const Name& haltSignal = "halt",
                             const EncodeOptions& opts = {});

// Instant budget used to decide halting of an encoding from a run of the
// machine of the given length.
inline std::uint64_t instantBudget(std::uint64_t steps) { return 10 * (steps + 1); }

}  // namespace sl
