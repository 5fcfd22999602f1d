#include <random>

#include "doctest.h"
#include "sl/analysis.hpp"
#include "sl/cps.hpp"
#include "sl/encodings.hpp"
#include "sl/errors.hpp"
#include "sl/semantics.hpp"

using namespace sl;

namespace {

// Index of the first instant emitting `sig`, or -1 within `instants`.
long firstEmission(const SourceProgram& p, const Name& sig, std::size_t instants) {
  Runner run(p, Scheduler::deterministic());
  for (std::size_t k = 0; k < instants; ++k)
    if (run.instant({}).count(sig)) return static_cast<long>(k);
  return -1;
}

const char* kHalting =
    "state q0: inc c1 -> q1\n"
    "state q1: inc c1 -> q2\n"
    "state q2: dec c1 -> q3\n"
    "state q3: dec c1 -> q4\n"
    "state q4: ifzero c1 -> h else q4\n"
    "halt h\n";

const char* kLooping =
    "state q: inc c1 -> q\n"
    "halt h\n";

CounterMachine randomMachine(std::mt19937_64& rng, std::size_t instrs) {
  CounterMachine m;
  for (std::size_t k = 0; k < instrs; ++k) m.states.push_back("q" + std::to_string(k));
  m.states.push_back("h");
  m.init = "q0";
  m.halt = "h";
  std::uniform_int_distribution<std::size_t> target(0, instrs);
  std::uniform_int_distribution<int> kind(0, 2), counter(1, 2);
  for (std::size_t k = 0; k < instrs; ++k) {
    CounterInstr ins;
    ins.kind = static_cast<CounterInstr::Kind>(kind(rng));
    ins.counter = counter(rng);
    ins.next = m.states[target(rng)];
    ins.ifZero = m.states[target(rng)];
    ins.ifNonzero = m.states[target(rng)];
    m.instrs[m.states[k]] = ins;
  }
  return m;
}

}  // namespace

TEST_CASE("counter machine text format") {
  auto m = parseCounterMachine(kHalting);
  CHECK(m.init == "q0");
  CHECK(m.halt == "h");
  CHECK(m.states.size() == 6);
  CHECK(m.instrs.at("q4").kind == CounterInstr::TestZero);
  CHECK(parseCounterMachine(printCounterMachine(m)).instrs.size() == 5);
  CHECK(printCounterMachine(parseCounterMachine(printCounterMachine(m))) == printCounterMachine(m));
  CHECK_THROWS_AS(parseCounterMachine("state q: inc c3 -> q\nhalt h\n"), FormatError);
  CHECK_THROWS_AS(parseCounterMachine("state q: inc c1 -> r\n"), FormatError);
  CHECK_THROWS_AS(parseCounterMachine("state q: inc c1 -> r\nhalt h\n"), FormatError);
  CHECK_THROWS_AS(parseCounterMachine("state q: jump\nhalt q\n"), FormatError);
}

TEST_CASE("direct interpreter") {
  auto r = runCounterMachine(parseCounterMachine(kHalting), 100);
  CHECK(r.halted);
  CHECK(r.steps == 5);
  auto l = runCounterMachine(parseCounterMachine(kLooping), 100);
  CHECK_FALSE(l.halted);
  CHECK(l.c1 == 100);
  auto b = runCounterMachine(parseCounterMachine("state q: dec c2 -> h\nhalt h\n"), 100);
  CHECK(b.blocked);
  CHECK_FALSE(b.halted);
}

TEST_CASE("halting machine emits the halt signal") {
  auto m = parseCounterMachine(kHalting);
  auto p = encodeCounterMachine(m, "halt");
  long at = firstEmission(p, "halt", 200);
  CHECK(at >= 0);
  CHECK(at < static_cast<long>(instantBudget(5)));
}

TEST_CASE("looping machine stays silent") {
  auto p = encodeCounterMachine(parseCounterMachine(kLooping), "halt");
  CHECK(firstEmission(p, "halt", 50) == -1);
  CHECK(firstEmission(p, "halt", 200) == -1);
}

TEST_CASE("pushdown schemata") {
  auto pushPop = parseCounterMachine(
      "state a: inc c1 -> b\nstate b: dec c1 -> c\nstate c: ifzero c1 -> h else c\nhalt h\n");
  CHECK(firstEmission(encodePushdown(pushPop), "halt", 100) >= 0);
  auto popEmpty = parseCounterMachine("state a: dec c1 -> h\nhalt h\n");
  CHECK(firstEmission(encodePushdown(popEmpty), "halt", 100) == -1);
  // The zero test on the empty stack is decided in the first instant and
  // its branch is entered in the next one.
  auto zero = parseCounterMachine("state a: ifzero c1 -> h else a\nhalt h\n");
  CHECK(firstEmission(encodePushdown(zero), "halt", 10) == 1);
  auto nonzero = parseCounterMachine("state a: inc c1 -> b\nstate b: ifzero c1 -> b else h\nhalt h\n");
  CHECK(firstEmission(encodePushdown(nonzero), "halt", 20) >= 0);
  CHECK_THROWS_AS(encodePushdown(parseCounterMachine("state a: inc c2 -> h\nhalt h\n")), FormatError);
}

TEST_CASE("decrement wave") {
  // Three pushes, then one pop: the pop travels right through two cells
  // (S_r, then S_l as each forwards it) before the last cell meets Z.
  auto m = parseCounterMachine(
      "state a: inc c1 -> b\nstate b: inc c1 -> c\nstate c: inc c1 -> d\nstate d: dec c1 -> e\n"
      "state e: dec c1 -> f\nstate f: dec c1 -> g\nstate g: ifzero c1 -> h else g\nhalt h\n");
  EncodeOptions opts;
  opts.instrument = true;
  auto p = encodeCounterMachine(m, "halt", opts);
  Runner run(p, Scheduler::deterministic());
  std::vector<std::pair<int, int>> phases;  // (wave_r, wave_l) per instant
  bool halted = false;
  for (int k = 0; k < 80 && !halted; ++k) {
    auto out = run.instant({});
    phases.emplace_back(static_cast<int>(out.count("wave_r")), static_cast<int>(out.count("wave_l")));
    halted = out.count("halt") > 0;
  }
  CHECK(halted);
  int r = 0, l = 0;
  for (auto [a, b] : phases) {
    r += a;
    l += b;
  }
  // Pops on stacks of height 3, 2 and 1 enter S_r 3 + 2 + 1 times and
  // S_l 2 + 1 + 0 times.
  CHECK(r == 6);
  CHECK(l == 3);
  // The first pop enters S_r in three successive cells, each after the
  // previous one has become S_l.
  std::vector<int> firstWaveR;
  for (std::size_t k = 0; k < phases.size() && firstWaveR.size() < 3; ++k)
    if (phases[k].first) firstWaveR.push_back(static_cast<int>(k));
  REQUIRE(firstWaveR.size() == 3);
  CHECK(firstWaveR[0] < firstWaveR[1]);
  CHECK(firstWaveR[1] < firstWaveR[2]);
}

TEST_CASE("encodings pass both analyses") {
  for (const char* text : {kHalting, kLooping}) {
    auto p = encodeCounterMachine(parseCounterMachine(text));
    CHECK(checkReactivity(p).accept);
    CHECK(checkBounded(p).accept);
    auto tail = cpsProgram(p);
    CHECK(checkReactivityTail(tail).accept);
  }
}

TEST_CASE("encodings simulate the interpreter") {
  std::mt19937_64 rng(5);
  int halting = 0, checked = 0;
  for (int rep = 0; rep < 40; ++rep) {
    auto m = randomMachine(rng, 1 + rep % 5);
    auto r = runCounterMachine(m, 20);
    if (!r.halted && !r.blocked && r.steps < 20) continue;
    auto p = encodeCounterMachine(m);
    std::uint64_t budget = instantBudget(r.steps);
    long at = firstEmission(p, "halt", budget);
    CHECK_MESSAGE((at >= 0) == r.halted, printCounterMachine(m));
    halting += r.halted;
    ++checked;
  }
  CHECK(checked >= 30);
  CHECK(halting >= 5);
}
