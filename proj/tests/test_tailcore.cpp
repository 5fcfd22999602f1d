#include "doctest.h"
#include "sl/errors.hpp"
#include "sl/tailcore.hpp"

using namespace sl;

namespace {

TailProgram bare(std::vector<Name> in, std::vector<Name> out) {
  TailProgram p;
  p.inputs = std::move(in);
  p.outputs = std::move(out);
  p.initial.push_back(tl::nil());
  return p;
}

Environment envWith(std::initializer_list<std::pair<const char*, bool>> xs) {
  Environment e(500);
  for (auto& [k, v] : xs) e.set(k, v);
  return e;
}

}  // namespace

TEST_CASE("tail steps") {
  auto prog = bare({}, {});
  auto env = envWith({{"s", false}, {"s1", false}});
  auto r = stepTail(tl::emit("s", tl::nil()), env, prog);
  REQUIRE(r);
  CHECK(r->next->kind == TailKind::Nil);
  CHECK(env.get("s"));
  auto pres = tl::present("s", tl::emit("s1", tl::nil()), tl::leaf(tl::nil()));
  auto r2 = stepTail(pres, env, prog);
  REQUIRE(r2);
  CHECK(r2->next->kind == TailKind::Emit);
  auto absent = tl::present("s1", tl::nil(), tl::leaf(tl::nil()));
  CHECK_FALSE(stepTail(absent, env, prog));
  auto sp = stepTail(tl::spawn(tl::emit("s", tl::nil()), tl::nil()), env, prog);
  REQUIRE(sp);
  CHECK(sp->spawned.size() == 1);
}

TEST_CASE("tail end of instant resolves branches") {
  auto env = envWith({{"s", false}, {"s1", true}});
  auto t1 = tl::emit("a", tl::nil());
  auto t2 = tl::emit("b", tl::nil());
  auto p = tl::present("s", tl::nil(), tl::ite("s1", tl::leaf(t1), tl::leaf(t2)));
  CHECK(endOfInstantTail(p, env) == t1);
  env.set("s1", false);
  CHECK(endOfInstantTail(p, env) == t2);
  CHECK(endOfInstantTail(tl::present("s", tl::nil(), tl::leaf(t1)), env) == t1);
  CHECK(endOfInstantTail(tl::nil(), env)->kind == TailKind::Nil);
  CHECK_THROWS_AS(endOfInstantTail(t1, env), NotSuspended);
}

TEST_CASE("prefix pause suspends one instant") {
  auto p = bare({}, {"o"});
  NameSupply names;
  p.initial = {pausePrefix(tl::leaf(tl::emit("o", tl::nil())), names)};
  auto sched = Scheduler::deterministic();
  auto t = runTraceTail(p, {{}, {}, {}}, sched);
  CHECK(t[0].out.empty());
  CHECK(t[1].out == NameSet{"o"});
  CHECK(t[2].out.empty());
}

TEST_CASE("prefix await waits for its signal") {
  auto p = bare({"s"}, {"o"});
  p.initial = {awaitPrefix("s", tl::emit("o", tl::nil()), p)};
  CHECK(p.defs.size() == 1);
  auto sched = Scheduler::deterministic();
  auto t = runTraceTail(p, {{}, {}, {"s"}, {"s"}}, sched);
  CHECK(t[0].out.empty());
  CHECK(t[1].out.empty());
  CHECK(t[2].out == NameSet{"o"});
  CHECK(t[3].out.empty());

  auto q = bare({"s"}, {});
  q.initial = {awaitPrefix("s", tl::nil(), q)};
  auto r = runInstantTail(q, q.initial, {"s"}, sched);
  REQUIRE(r.residual.size() == 1);
  CHECK(r.residual[0]->kind == TailKind::Nil);
}

TEST_CASE("tail instants and fuel") {
  auto p = parseTail("(input)(output s3)(run (emit! s3 0))");
  auto sched = Scheduler::deterministic();
  CHECK(runInstantTail(p, p.initial, {}, sched).outputs == NameSet{"s3"});
  auto q = parseTail("(output s)(def (A) (emit! s (call A)))(run (call A))");
  CHECK_THROWS_AS(runInstantTail(q, q.initial, {}, sched, 1000), FuelExhausted);
}

TEST_CASE("tail text round trip") {
  const char* src =
      "(input i)(output o)"
      "(def (A x) (present i (emit! o (call A x)) (ite x (call A x) (pause 0))))"
      "(run (new y (thread! (call A y) (emit! y 0))))";
  auto p = parseTail(src);
  auto q = parseTail(printTailProgram(p));
  CHECK(structEqual(p, q));
  CHECK_THROWS_AS(parseTail("(run (call B))"), UnboundIdentifier);
  CHECK_THROWS_AS(parseTail("(def (A x) 0)(run (call A))"), ArityMismatch);
  CHECK_THROWS_AS(parseTail("(run (emit! z 0))"), UndeclaredSignal);
  CHECK_THROWS_AS(parseTail("(run (present"), SyntaxError);
}

TEST_CASE("tail reactivity adapter") {
  auto guarded = parseTail("(output o)(def (A) (emit! o (pause (call A))))(run (call A))");
  CHECK(checkReactivityTail(guarded, 0).accept);
  auto unguarded = parseTail("(output o)(def (A) (emit! o (call A)))(run (call A))");
  auto v = checkReactivityTail(unguarded, 0);
  CHECK_FALSE(v.accept);
  CHECK(v.describeCycle() == "A > A");
  auto spawnBoth = parseTail("(output o)(def (A) (thread! (call B) 0))(def (B) (call A))(run (call A))");
  CHECK_FALSE(checkReactivityTail(spawnBoth, 0).accept);
  CHECK(tailCallIds(tl::present("s", tl::call("X", {}), tl::leaf(tl::call("Y", {})))) == NameSet{"X"});
}

TEST_CASE("tail schedulers agree") {
  auto p = parseTail(
      "(input i)(output o p)"
      "(def (A) (new x (thread! (present x (emit! o 0) 0) (present i (emit! x (pause (call A))) (call A)))))"
      "(run (call A) (call A) (emit! p 0))");
  std::vector<NameSet> in{{"i"}, {}, {"i"}, {"i"}};
  auto det = Scheduler::deterministic();
  auto ref = runTraceTail(p, in, det);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    auto s = Scheduler::random(seed);
    CHECK(runTraceTail(p, in, s) == ref);
  }
}
