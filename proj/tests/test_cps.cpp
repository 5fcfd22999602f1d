#include <functional>
#include <random>

#include "doctest.h"
#include "generators.hpp"
#include "sl/analysis.hpp"
#include "sl/cps.hpp"
#include "sl/errors.hpp"

using namespace sl;

namespace {

const char* kExampleAB =
    "(input s1 s2)(output s3 s4)"
    "(def (A) (seq (watch s1 (call B)) (emit s4) (call A)))"
    "(def (B) (seq (await s2) (emit s3) pause (call B)))"
    "(run (call A))";

// Every input word of the given length over the declared inputs.
std::vector<std::vector<NameSet>> allWords(const std::vector<Name>& inputs, std::size_t len) {
  auto letters = allSubsets(inputs);
  std::vector<std::vector<NameSet>> out{{}};
  for (std::size_t k = 0; k < len; ++k) {
    std::vector<std::vector<NameSet>> next;
    for (const auto& w : out)
      for (const auto& l : letters) {
        auto x = w;
        x.push_back(l);
        next.push_back(std::move(x));
      }
    out = std::move(next);
  }
  return out;
}

void checkTracesAgree(const SourceProgram& p, std::size_t len, const CpsOptions& opts = {}) {
  auto tp = cpsProgram(p, opts);
  auto sched = Scheduler::deterministic();
  for (const auto& w : allWords(p.inputs, len)) {
    auto a = runTrace(p, w, sched);
    auto b = runTraceTail(tp, w, sched);
    REQUIRE(a == b);
  }
}

}  // namespace

TEST_CASE("cps: leaf clauses") {
  auto p = parse("(input s)(output o)(run 0)");
  CpsTranslator tr(p);
  auto t = tl::emit("o", tl::nil());
  KappaList tau{{"s", tl::nil()}};
  CHECK(tr.thread(th::nil(), t, tau) == t);
  CHECK(printTail(tr.thread(th::emit("o"), tl::nil(), {})) == "(emit! o 0)");
  CHECK(printTail(tr.thread(th::spawn(th::emit("o")), t, {})) == "(thread! (emit! o 0) (emit! o 0))");
  CHECK(printTail(tr.thread(th::watch("s", th::pause()), t, {})) != "");
  auto q = cpsProgram(parse("(output s)(run (seq (emit s) 0))"));
  REQUIRE(q.initial.size() == 1);
  CHECK(printTail(q.initial[0]) == "(emit! s 0)");
}

TEST_CASE("cps: await under an empty stack is a self-recursive present") {
  auto p = parse("(input s)(run (await s))");
  auto tp = cpsProgram(p);
  REQUIRE(tp.defs.size() == 1);
  const auto& [id, d] = *tp.defs.begin();
  CHECK(printTail(tp.initial[0]) == "(call " + id + ")");
  CHECK(printTail(d.body) == "(present s 0 (call " + id + "))");
}

TEST_CASE("cps: optimized pause builds the watch cascade") {
  auto p = parse("(input s1 s2)(output o)(run 0)");
  CpsTranslator tr(p);
  KappaList tau{{"s1", tl::emit("o", tl::nil())}, {"s2", tl::nil()}};
  auto r = tr.thread(th::pause(), tl::call("K", {}), tau);
  CHECK(canonicalTailText(r, p.interface()) ==
        "(new %b0 (present %b0 0 (ite s1 (emit! o 0) (ite s2 0 (call K)))))");
}

TEST_CASE("cps: the two-definition example yields its equations") {
  auto p = parse(kExampleAB);
  CpsTranslator tr(p);
  auto tp = tr.program();
  REQUIRE(tp.defs.size() == 2);
  REQUIRE(tp.initial.size() == 1);
  // Identify the two generated identifiers by their source.
  Name a, b;
  for (const auto& [id, _] : tp.defs) (id.rfind("A$", 0) == 0 ? a : b) = id;
  REQUIRE(!a.empty());
  REQUIRE(!b.empty());
  CHECK(printTail(tp.initial[0]) == "(call " + a + ")");
  std::string t1 = "(emit! s4 (call " + a + "))";
  std::string loop = "(ite s1 " + t1 + " (call " + b + "))";
  CHECK(printTail(tp.defs.at(a).body) == "(call " + b + ")");
  CHECK(canonicalTailText(tp.defs.at(b).body, tp.interface()) ==
        "(present s2 (emit! s3 (new %b0 (present %b0 0 " + loop + "))) " + loop + ")");
  CHECK(tr.index().at(b).find(t1) != std::string::npos);
  checkTracesAgree(p, 6);
}

TEST_CASE("cps: memoization returns the same identifier") {
  auto p = parse(kExampleAB);
  CpsTranslator tr(p);
  auto k = tl::emit("s3", tl::nil());
  KappaList tau{{"s1", tl::nil()}};
  auto c1 = tr.thread(th::call("B", {}), k, tau);
  auto c2 = tr.thread(th::call("B", {}), k, tau);
  CHECK(structEqual(c1, c2));
  CHECK(tr.tableSize() == 1);
  // Alpha-equivalent indices share an entry too.
  auto p2 = parse("(output o)(def (A x) (emit x))(run 0)");
  CpsTranslator tr2(p2);
  auto d1 = tr2.thread(th::call("A", {"%g1"}), tl::emit("%g5", tl::nil()), {});
  auto d2 = tr2.thread(th::call("A", {"%g1"}), tl::emit("%g7", tl::nil()), {});
  CHECK(d1->id == d2->id);
  CHECK(d1->args == std::vector<Name>{"%g1", "%g5"});
  CHECK(d2->args == std::vector<Name>{"%g1", "%g7"});
}

TEST_CASE("cps: unbounded contexts explode the table") {
  auto p = parse("(output)(def (A) (seq pause (call A) (call B)))(def (B) 0)(run (call A))");
  CHECK_FALSE(checkBounded(p).accept);
  CHECK_THROWS_AS(cpsProgram(p, CpsOptions{true, 10000}), IndexExplosion);
  auto q = parse("(input s)(def (A) (watch s (seq pause (thread (call A)))))(run (call A))");
  CHECK(checkBounded(q).accept);
  CHECK(cpsProgram(q).defs.size() < 10);
}

TEST_CASE("cps: context decomposition law") {
  auto p = parse("(input a b)(output o)(def (A) (seq pause (emit a)))(def (B) (emit b))(run 0)");
  CpsTranslator tr(p);
  std::mt19937_64 rng(3);
  std::vector<Name> sigs{"a", "b"}, ids{"A", "B"};
  auto iface = p.interface();
  int checked = 0;
  for (int i = 0; i < 1500; ++i) {
    auto host = testgen::randomThread(rng, 3, sigs, ids);
    auto inner = testgen::randomThread(rng, 3, sigs, ids);
    auto d = decompose(host);
    if (std::holds_alternative<Terminated>(d)) continue;
    const auto& C = std::get<std::pair<EvalContext, Redex>>(d).first;
    auto t = tl::emit("o", tl::nil());
    KappaList tau{{"a", tl::nil()}};
    auto lhs = tr.thread(plug(C, inner), t, tau);
    auto [t2, tau2] = tr.context(C, t, tau);
    auto rhs = tr.thread(inner, t2, tau2);
    CHECK(canonicalTailText(lhs, iface) == canonicalTailText(rhs, iface));
    ++checked;
  }
  CHECK(checked > 500);
  // The four context clauses on their own.
  EvalContext empty;
  auto [e1, k1] = tr.context(empty, tl::nil(), {});
  CHECK(e1->kind == TailKind::Nil);
  CHECK(k1.empty());
  EvalContext wc{{Frame{Frame::SeqAfter, {}, th::emit("o")}, Frame{Frame::WatchFrame, "a", nullptr}}};
  auto [e2, k2] = tr.context(wc, tl::nil(), {});
  CHECK(printTail(e2) == "(emit! o 0)");
  REQUIRE(k2.size() == 1);
  CHECK(k2[0].sig == "a");
  CHECK(k2[0].cont == e2);
}

TEST_CASE("cps: substitution law") {
  auto p = parse("(input i)(output o)(def (A x y) (seq (await x) (emit y)))(run 0)");
  CpsTranslator tr(p);
  std::mt19937_64 rng(9);
  std::vector<Name> sigs{"x", "y", "i"};
  std::vector<Name> noIds;
  auto iface = p.interface();
  for (int i = 0; i < 800; ++i) {
    auto T = testgen::randomThread(rng, 4, sigs, noIds);
    if (rng() % 3 == 0) T = th::seq(th::call("A", {"x", "y"}), T);
    auto t = tl::emit("o", tl::nil());
    KappaList tau{{"i", tl::nil()}};
    NameSupply ns(900);
    std::map<Name, Name> sub{{"x", "u"}, {"y", "v"}};
    auto lhs = substitute(tr.thread(T, t, tau), sub, ns);
    auto rhs = tr.thread(substitute(T, sub, ns), t, tau);
    CHECK(canonicalTailText(lhs, iface) == canonicalTailText(rhs, iface));
  }
}

TEST_CASE("cps: traces agree on assorted programs") {
  const char* progs[] = {
      "(input i)(output o)(run (loop (present i (seq (emit o) pause) 0)))",
      "(input i j)(output o p)(run (loop (seq (par (await i) (await j)) (emit o) pause)) (seq (await j) (emit p)))",
      "(input i)(output o p)(def (A x) (seq (watch i (seq (emit x) pause (emit o))) pause (call A x)))"
      "(run (new z (seq (thread (call A z)) (loop (seq (await z) (emit p) pause)))))",
      "(input i j)(output o)(run (watch i (watch j (seq pause (loop (seq (emit o) pause))))) )",
      "(input i)(output o)(run (seq (watch i (seq pause pause (emit o))) (emit o)))",
  };
  for (const char* src : progs) {
    auto p = parse(src);
    INFO(src);
    checkTracesAgree(p, 5);
    checkTracesAgree(p, 4, CpsOptions{false, 10000});
  }
}
