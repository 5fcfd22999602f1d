#include <benchmark/benchmark.h>

#include <string>

#include "sl/cps.hpp"
#include "sl/encodings.hpp"
#include "sl/equiv.hpp"
#include "sl/mealy.hpp"
#include "sl/semantics.hpp"

using namespace sl;

namespace {

const char* kExample =
    "(input s1 s2)(output s3 s4)"
    "(def (A) (seq (watch s1 (call B)) (emit s4) (call A)))"
    "(def (B) (seq (await s2) (emit s3) pause (call B)))"
    "(run (call A))";

// n independent watchers of one broadcast signal.
std::string broadcast(int n) {
  std::string s = "(input go)(output o)(def (W k) (seq (await k) (emit o) pause (call W k)))(run (new k (seq";
  for (int i = 0; i < n; ++i) s += " (thread (call W k))";
  return s + " (loop (seq (await go) (emit k) pause)))))";
}

void BM_SourceInstants(benchmark::State& st) {
  auto p = parse(broadcast(static_cast<int>(st.range(0))));
  for (auto _ : st) {
    Runner r(p, Scheduler::deterministic());
    for (int k = 0; k < 20; ++k) benchmark::DoNotOptimize(r.instant(k % 2 ? NameSet{"go"} : NameSet{}));
  }
  st.SetItemsProcessed(st.iterations() * 20);
}
BENCHMARK(BM_SourceInstants)->Arg(4)->Arg(16)->Arg(64);

void BM_TailInstants(benchmark::State& st) {
  auto t = cpsProgram(parse(broadcast(static_cast<int>(st.range(0)))));
  for (auto _ : st) {
    TailRunner r(t, Scheduler::deterministic());
    for (int k = 0; k < 20; ++k) benchmark::DoNotOptimize(r.instant(k % 2 ? NameSet{"go"} : NameSet{}));
  }
  st.SetItemsProcessed(st.iterations() * 20);
}
BENCHMARK(BM_TailInstants)->Arg(4)->Arg(16)->Arg(64);

void BM_CpsTranslation(benchmark::State& st) {
  auto p = parse(kExample);
  for (auto _ : st) benchmark::DoNotOptimize(cpsProgram(p));
}
BENCHMARK(BM_CpsTranslation);

void BM_MealyExtraction(benchmark::State& st) {
  auto t = cpsProgram(parse(kExample));
  for (auto _ : st) benchmark::DoNotOptimize(programToMealy(t));
}
BENCHMARK(BM_MealyExtraction);

void BM_ExactBisimulation(benchmark::State& st) {
  auto a = parseTail("(input a b)(output o p)(def (A) (present a (emit! o (pause (call A))) (call A)))"
                     "(def (C) (present b (emit! p (pause (call C))) (call C)))(run (call A) (call C))");
  auto b = parseTail("(input a b)(output o p)(def (A) (present a (emit! o (pause (call A))) (call A)))"
                     "(def (C) (present b (emit! p (pause (call C))) (call C)))(run (thread! (call C) (call A)))");
  for (auto _ : st) benchmark::DoNotOptimize(equivPrograms(a, b));
}
BENCHMARK(BM_ExactBisimulation);

void BM_CounterMachineRun(benchmark::State& st) {
  auto m = parseCounterMachine("state q: inc c1 -> q\nhalt h\n");
  auto p = encodeCounterMachine(m);
  for (auto _ : st) {
    Runner r(p, Scheduler::deterministic());
    for (int k = 0; k < st.range(0); ++k) benchmark::DoNotOptimize(r.instant({}));
  }
}
BENCHMARK(BM_CounterMachineRun)->Arg(50)->Arg(200);

}  // namespace
BENCHMARK_MAIN();
