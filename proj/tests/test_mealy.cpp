#include <random>

#include "doctest.h"
#include "generators.hpp"
#include "oracles.hpp"
#include "sl/cps.hpp"
#include "sl/errors.hpp"
#include "sl/mealy.hpp"

using namespace sl;

namespace {

MealyMachine copyMachine() {
  MealyMachine m;
  m.n = m.m = 1;
  m.addState("q");
  m.out[0][1] = 1;
  return m;
}

MealyMachine silentMachine() {
  MealyMachine m;
  m.n = m.m = 1;
  m.addState("q");
  return m;
}

}  // namespace

TEST_CASE("monotonicity validation") {
  CHECK_FALSE(validateMealy(copyMachine()));
  MealyMachine inv;
  inv.n = inv.m = 1;
  inv.addState("q");
  inv.out[0][0] = 1;
  auto v = validateMealy(inv);
  REQUIRE(v);
  CHECK(v->smaller == 0);
  CHECK(v->larger == 1);
  CHECK(v->state == 0);
  CHECK(v->output == 1);
  MealyMachine none;
  none.m = 2;
  none.addState("a");
  none.addState("b");
  none.out[0][0] = 3;
  none.next[0][0] = 1;
  CHECK_FALSE(validateMealy(none));
  MealyMachine big;
  big.n = 13;
  CHECK_THROWS_AS(validateMealy(big), ArityTooLarge);
}

TEST_CASE("next-state cascade") {
  MealyMachine m;
  m.n = 2;
  for (auto n : {"q", "q1", "q2", "q3"}) m.addState(n);
  m.next[0][3] = 1;  // {1,2}
  m.next[0][1] = 2;  // {1}
  m.next[0][2] = 3;  // {2}
  m.next[0][0] = 1;  // {}
  auto b = nextStateBranch(m, 0, {"s1", "s2"});
  auto expect = tl::ite("s1", tl::ite("s2", tl::leaf(tl::call("q1", {})), tl::leaf(tl::call("q2", {}))),
                        tl::ite("s2", tl::leaf(tl::call("q3", {})), tl::leaf(tl::call("q1", {}))));
  CHECK(structEqual(b, expect));
}

TEST_CASE("copy machine program") {
  auto p = mealyToProgram(copyMachine());
  auto sched = Scheduler::deterministic();
  auto tr = runTraceTail(p, {{"i1"}, {}, {"i1"}}, sched);
  REQUIRE(tr.size() == 3);
  CHECK(tr[0].out == NameSet{"o1"});
  CHECK(tr[1].out.empty());
  CHECK(tr[2].out == NameSet{"o1"});
  MealyMachine always;
  always.n = always.m = 1;
  always.addState("q");
  always.out[0][0] = always.out[0][1] = 1;
  auto pa = mealyToProgram(always);
  auto ta = runTraceTail(pa, {{}, {"i1"}, {}}, sched);
  for (const auto& s : ta) CHECK(s.out == NameSet{"o1"});
}

TEST_CASE("text format") {
  auto m = copyMachine();
  std::string txt = printMealy(m);
  CHECK(txt == "mealy n=1 m=1\nstate q init\ntrans q {} -> q {}\ntrans q {1} -> q {1}\n");
  auto back = parseMealy(txt);
  CHECK(printMealy(back) == txt);
  CHECK_THROWS_AS(parseMealy("mealy n=1 m=1\nstate q init\ntrans q {} -> q {}\n"), FormatError);
  CHECK_THROWS_AS(parseMealy("mealy n=1 m=1\nstate q init\ntrans q {2} -> q {}\n"), FormatError);
  CHECK_THROWS_AS(parseMealy("state q init\n"), FormatError);
}

TEST_CASE("normalization") {
  auto p = parseTail("(output s)(def (A x) (emit! x 0))(run (call A s))");
  auto n = normalizeTail(p);
  REQUIRE(n.nodes.size() == 2);
  CHECK(n.nodes[0].kind == NormalNode::Kind::Emit);
  CHECK(n.nodes[0].sig == "s");
  CHECK(n.nodes[n.nodes[0].b1].kind == NormalNode::Kind::Zero);

  auto gen = parseTail("(output s)(run (new x (thread! (emit! x 0) (present x (emit! s 0) 0))))");
  CHECK_THROWS_AS(normalizeTail(gen), HasSignalGeneration);
  CHECK_THROWS_AS(programToMealy(gen), HasSignalGeneration);
  auto passed = parseTail("(output s)(def (B y) 0)(run (new x (call B x)))");
  CHECK_THROWS_AS(normalizeTail(passed), HasSignalGeneration);
  // A private name that is only tested is never present.
  auto dead = parseTail("(output s)(run (new x (present x (emit! s 0) (emit! s 0))))");
  auto nd = normalizeTail(dead);
  CHECK(nd.nodes[nd.initial[0]].sig == kDeadSignal);

  auto loop = parseTail("(output s)(def (A) (call B))(def (B) (call A))(run (call A))");
  CHECK_THROWS_AS(normalizeTail(loop), Error);
}

TEST_CASE("normal form of the CPS image of the two-definition example") {
  auto src = parse(
      "(input s1 s2)(output s3 s4)"
      "(def (A) (seq (watch s1 (call B)) (emit s4) (call A)))"
      "(def (B) (seq (await s2) (emit s3) pause (call B)))"
      "(run (call A))");
  auto tail = cpsProgram(src);
  auto n = normalizeTail(tail);
  // One node per prefix position reached, plus the terminated thread.
  std::size_t prefixes = 0;
  for (const auto& nd : n.nodes)
    if (nd.kind != NormalNode::Kind::Zero) ++prefixes;
  CHECK(prefixes >= 4);
  auto m = programToMealy(n);
  CHECK_FALSE(validateMealy(m));
  CHECK(testgen::programMatchesMachine(tail, m, 4));
}

TEST_CASE("closure by hand") {
  NormalProgram p;
  p.outputs = {"s"};
  p.nodes.resize(3);
  p.nodes[0].kind = NormalNode::Kind::Emit;
  p.nodes[0].sig = "s";
  p.nodes[0].b1 = 1;
  p.nodes[1].kind = NormalNode::Kind::Zero;
  auto [q, E] = closure(p, {0}, {});
  CHECK(q == IdSet{1});
  CHECK(E == NameSet{"s"});

  p.nodes[2].kind = NormalNode::Kind::Present;
  p.nodes[2].sig = "t";
  p.nodes[2].b1 = 1;
  auto leaf = std::make_shared<NormalBranch>();
  leaf->leaf = 0;
  p.nodes[2].branch = leaf;
  auto [sat, E2] = saturate(p, {2}, {});
  CHECK(sat == IdSet{2});
  CHECK(closure(p, {2}, {}).first == IdSet{0});
}

TEST_CASE("extraction of a one-shot emitter") {
  auto p = parseTail("(input i)(output o)(run (emit! o 0))");
  auto m = programToMealy(p);
  REQUIRE(m.states.size() == 2);
  std::size_t q1 = m.next[m.init][0];
  CHECK(q1 != m.init);
  for (std::uint32_t x = 0; x < 2; ++x) {
    CHECK(m.out[m.init][x] == 1);
    CHECK(m.next[m.init][x] == q1);
    CHECK(m.out[q1][x] == 0);
    CHECK(m.next[q1][x] == q1);
  }
}

TEST_CASE("machine trace equivalence") {
  auto r = mealyTraceEquiv(copyMachine(), copyMachine());
  CHECK(r.equivalent);
  auto d = mealyTraceEquiv(copyMachine(), silentMachine());
  CHECK_FALSE(d.equivalent);
  CHECK(d.witness == std::vector<std::uint32_t>{1});
  // Differs only after an input on the second instant.
  MealyMachine late;
  late.n = late.m = 1;
  late.addState("a");
  late.addState("b");
  late.next[0][1] = 1;
  late.next[1][0] = late.next[1][1] = 1;
  late.out[1][1] = 1;
  auto w = mealyTraceEquiv(late, silentMachine());
  CHECK(w.witness == std::vector<std::uint32_t>{1, 1});
}

TEST_CASE("round trip on random monotone machines") {
  std::mt19937_64 rng(7);
  int count = 0;
  for (unsigned n = 0; n <= 2; ++n)
    for (unsigned m = 0; m <= 2; ++m)
      for (std::size_t q = 1; q <= 3; ++q)
        for (int rep = 0; rep < 3; ++rep) {
          auto mm = testgen::randomMonotoneMealy(rng, n, m, q);
          REQUIRE_FALSE(validateMealy(mm));
          auto prog = mealyToProgram(mm);
          auto back = programToMealy(prog);
          CHECK_FALSE(validateMealy(back));
          CHECK(mealyTraceEquiv(mm, back).equivalent);
          if (n <= 1 || q <= 2) CHECK(testgen::programMatchesMachine(prog, mm, 3));
          ++count;
        }
  CHECK(count >= 30);
}

TEST_CASE("set closure agrees with the multiset interpreter") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    auto p = testgen::randomNormalProgram(rng, 4 + i % 9, {"a", "b"}, {"c", "d", "e"});
    auto msg = testgen::closureMismatch(p, rng, 6);
    CHECK_MESSAGE(msg.empty(), msg);
    CHECK_FALSE(validateMealy(programToMealy(p)));
  }
}
