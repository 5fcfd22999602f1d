#include <random>

#include "doctest.h"
#include "generators.hpp"
#include "sl/analysis.hpp"
#include "sl/errors.hpp"

using namespace sl;

namespace {

const char* kExampleAB =
    "(input s1 s2)(output s3 s4)"
    "(def (A) (seq (watch s1 (call B)) (emit s4) (call A)))"
    "(def (B) (seq (await s2) (emit s3) pause (call B)))"
    "(run (call A))";

}  // namespace

TEST_CASE("Call on the two-definition example") {
  auto p = parse(kExampleAB);
  CHECK(callOf(p.defs.at("A").body) == CallResult{{"A", "B"}, false});
  CHECK(callOf(p.defs.at("B").body) == CallResult{{}, true});
  CHECK(callOf(th::pause()) == CallResult{{}, true});
  CHECK(formatCallResult(callOf(p.defs.at("A").body)) == "({A,B},0)");
}

TEST_CASE("reactivity: unfolding refines the example") {
  auto p = parse(kExampleAB);
  auto v0 = checkReactivity(p, 0);
  CHECK_FALSE(v0.accept);
  CHECK(v0.describeCycle() == "A > A");
  CHECK(callOfUnfolded(p, p.defs.at("A").body, 1) == CallResult{{}, true});
  auto v1 = checkReactivity(p, 1);
  CHECK(v1.accept);
  CHECK(reactivityConstraints(p, 1).empty());
}

TEST_CASE("reactivity: pause guards recursion") {
  auto p = parse("(output)(def (A) (seq pause (call A)))(run (call A))");
  CHECK(checkReactivity(p, 0).accept);
  auto q = parse("(input s)(def (A) (seq (await s) (call A)))(run (call A))");
  CHECK_FALSE(checkReactivity(q, 3).accept);
}

TEST_CASE("reactivity: longer cycles are reported in order") {
  auto p = parse("(def (A) (call B))(def (B) (call C))(def (C) (seq (emit o) (call A)))(output o)(run (call A))");
  auto v = checkReactivity(p, 0);
  REQUIRE_FALSE(v.accept);
  REQUIRE(v.cycle.size() == 4);
  CHECK(v.cycle.front() == v.cycle.back());
  auto q = parse("(def (A) (seq (call B) pause (call A)))(def (B) (emit o))(output o)(run (call A))");
  auto w = checkReactivity(q, 0);
  CHECK(w.accept);
  CHECK(w.order == std::vector<Name>{"A", "B"});
}

TEST_CASE("Call composition is associative") {
  std::vector<CallResult> values;
  for (auto ids : {std::multiset<Name>{"A"}, std::multiset<Name>{"B"}, std::multiset<Name>{}})
    for (bool d : {false, true}) values.push_back({ids, d});
  for (const auto& a : values)
    for (const auto& b : values)
      for (const auto& c : values) CHECK(then(then(a, b), c) == then(a, then(b, c)));
  for (const auto& a : values) {
    CHECK(then(CallResult{}, a) == a);
    if (!a.down) CHECK(then(a, CallResult{}) == a);
  }
}

TEST_CASE("Call of a plugged context composes") {
  std::mt19937_64 rng(11);
  std::vector<Name> sigs{"a", "b"}, ids{"A", "B"};
  CHECK(callOfContext(EvalContext{}) == CallResult{});
  auto t = th::emit("a");
  EvalContext seqCtx{{Frame{Frame::SeqAfter, {}, th::seq(th::pause(), th::call("A", {}))}}};
  CHECK(callOfContext(seqCtx) == CallResult{{}, true});
  int checked = 0;
  for (int i = 0; i < 3000; ++i) {
    auto inner = testgen::randomThread(rng, 3, sigs, ids);
    auto host = testgen::randomThread(rng, 4, sigs, ids);
    auto d = decompose(host);
    if (std::holds_alternative<Terminated>(d)) continue;
    auto& c = std::get<std::pair<EvalContext, Redex>>(d).first;
    CHECK(callOf(plug(c, inner)) == then(callOf(inner), callOfContext(c)));
    ++checked;
  }
  CHECK(checked > 1000);
}

TEST_CASE("bounded Call equations") {
  auto p = parse("(output)(def (A) (seq pause (call A) (call B)))(def (B) 0)(run (call A))");
  CHECK(boundedCall(p.defs.at("A").body, Label::Eps) ==
        std::set<std::pair<Name, Label>>{{"A", Label::Kappa}, {"B", Label::Eps}});
  CHECK(boundedCall(th::nil(), Label::Kappa).empty());
  auto g = parse("(input s)(def (A) (watch s (seq pause (thread (call A)))))(run (call A))");
  CHECK(boundedCall(g.defs.at("A").body, Label::Eps) == std::set<std::pair<Name, Label>>{{"A", Label::Eps}});
}

TEST_CASE("bounded contexts: accepted and rejected definitions") {
  auto bad1 = parse("(output)(def (A) (seq pause (call A) (call B)))(def (B) 0)(run (call A))");
  auto v1 = checkBounded(bad1);
  CHECK_FALSE(v1.accept);
  CHECK(v1.describeCycle() == "A > A");
  auto bad2 = parse("(input s)(def (A) (watch s (seq pause (call A))))(run (call A))");
  CHECK_FALSE(checkBounded(bad2).accept);
  auto good = parse("(input s)(def (A) (watch s (seq pause (thread (call A)))))(run (call A))");
  CHECK(checkBounded(good).accept);
  auto loop = parse("(output o)(run (loop (seq (emit o) pause)))");
  CHECK(checkBounded(loop).accept);
  auto par = parse("(input i)(output o)(run (loop (seq (par (await i) (emit o)) pause)))");
  CHECK(checkBounded(par).accept);
  // A strict edge inside a larger strongly connected component.
  auto mutual = parse("(input s)(def (A) (watch s (call B)))(def (B) (seq pause (call A)))(run (call A))");
  auto vm = checkBounded(mutual);
  REQUIRE_FALSE(vm.accept);
  CHECK(vm.cycle.front() == vm.cycle.back());
  CHECK(vm.cycle.size() == 3);
}

TEST_CASE("reactivity soundness probe on accepted programs") {
  const char* progs[] = {
      kExampleAB,
      "(input i)(output o)(run (loop (present i (seq (emit o) pause) 0)))",
      "(input i j)(output o)(run (loop (seq (par (await i) (await j)) (emit o) pause)))",
      "(input i)(output o p)(def (A) (seq (watch i (seq pause (emit o))) (emit p) pause (call A)))(run (call A))",
  };
  std::mt19937_64 rng(5);
  int accepted = 0;
  for (const char* src : progs) {
    auto p = parse(src);
    // The criterion is only sufficient: present and par expand into an await
    // of a join signal, which hides the pause from Call.
    if (!checkReactivity(p, 1).accept) continue;
    ++accepted;
    std::vector<NameSet> inputs;
    for (int k = 0; k < 100; ++k) {
      NameSet s;
      for (const auto& i : p.inputs)
        if (rng() & 1) s.insert(i);
      inputs.push_back(s);
    }
    auto sched = Scheduler::deterministic();
    CHECK_NOTHROW(runTrace(p, inputs, sched));
  }
  CHECK(accepted >= 2);
}
