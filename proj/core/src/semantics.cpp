#include "sl/semantics.hpp"

#include <algorithm>
#include <sstream>

#include "instant_machine.hpp"
#include "sl/errors.hpp"

namespace sl {

// ---------------------------------------------------------------------------
// Environment and shared instant helpers

bool Environment::get(const Name& s) const {
  auto it = map_.find(s);
  if (it == map_.end()) throw UnboundSignal(s);
  return it->second;
}

Name Environment::allocate() {
  Name n = supply_.fresh();
  while (map_.count(n)) n = supply_.fresh();
  map_[n] = false;
  return n;
}

NameSet Environment::presentSignals() const {
  NameSet s;
  for (const auto& [k, v] : map_)
    if (v) s.insert(k);
  return s;
}

std::string formatSet(const NameSet& s) {
  std::string out = "{";
  bool first = true;
  for (const auto& n : s) {
    if (!first) out += ' ';
    out += n;
    first = false;
  }
  return out + "}";
}

std::string formatTraceStep(const TraceStep& s) { return "I=" + formatSet(s.in) + " O=" + formatSet(s.out); }

std::vector<NameSet> parseInputTrace(std::string_view text) {
  std::vector<NameSet> out;
  std::string line;
  std::istringstream in{std::string(text)};
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream words(line);
    NameSet s;
    std::string w;
    while (words >> w) s.insert(w);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<NameSet> allSubsets(const std::vector<Name>& names) {
  std::vector<NameSet> out;
  std::size_t n = names.size();
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    NameSet s;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (std::size_t{1} << i)) s.insert(names[i]);
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Decomposition

std::variant<Terminated, std::pair<EvalContext, Redex>> decompose(const ThreadPtr& t0) {
  if (t0->kind == TK::Nil) return Terminated{};
  EvalContext ctx;
  ThreadPtr t = t0;
  while (true) {
    switch (t->kind) {
      case TK::Seq:
        if (t->a->kind == TK::Nil) return std::pair{ctx, Redex{RedexKind::SeqNil, t}};
        if (t->a->kind == TK::Seq) {
          t = th::seq(t->a, t->b);
          continue;
        }
        ctx.frames.push_back(Frame{Frame::SeqAfter, {}, t->b});
        t = t->a;
        continue;
      case TK::Watch:
        if (t->a->kind == TK::Nil) return std::pair{ctx, Redex{RedexKind::WatchNil, t}};
        ctx.frames.push_back(Frame{Frame::WatchFrame, t->sig, nullptr});
        t = t->a;
        continue;
      case TK::Emit:
        return std::pair{ctx, Redex{RedexKind::Emit, t}};
      case TK::New:
        return std::pair{ctx, Redex{RedexKind::New, t}};
      case TK::Spawn:
        return std::pair{ctx, Redex{RedexKind::Spawn, t}};
      case TK::Await:
        return std::pair{ctx, Redex{RedexKind::Await, t}};
      case TK::Call:
        return std::pair{ctx, Redex{RedexKind::Call, t}};
      case TK::Pause:
        return std::pair{ctx, Redex{RedexKind::Pause, t}};
      case TK::Nil:
        // Only reachable below a frame, which the cases above exclude.
        throw Error("internal: nil under an evaluation frame");
    }
  }
}

ThreadPtr plug(const EvalContext& c, const ThreadPtr& t) {
  ThreadPtr acc = t;
  for (auto it = c.frames.rbegin(); it != c.frames.rend(); ++it) {
    if (it->kind == Frame::SeqAfter)
      acc = th::seq(acc, it->rest);
    else
      acc = th::watch(it->sig, acc);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Thread reduction

std::optional<StepResult> stepThread(const ThreadPtr& t, Environment& env, const SourceProgram& prog) {
  switch (t->kind) {
    case TK::Nil:
    case TK::Pause:
      return std::nullopt;
    case TK::Seq: {
      if (t->a->kind == TK::Nil) return StepResult{t->b, {}, false};
      auto r = stepThread(t->a, env, prog);
      if (!r) return r;
      r->next = th::seq(r->next, t->b);
      return r;
    }
    case TK::Emit: {
      bool was = env.get(t->sig);
      env.set(t->sig, true);
      return StepResult{th::nil(), {}, !was};
    }
    case TK::New: {
      Name fresh = env.allocate();
      return StepResult{substitute(t->a, {{t->sig, fresh}}, env.supply()), {}, false};
    }
    case TK::Spawn:
      return StepResult{th::nil(), {t->a}, false};
    case TK::Await:
      if (!env.get(t->sig)) return std::nullopt;
      return StepResult{th::nil(), {}, false};
    case TK::Watch: {
      if (t->a->kind == TK::Nil) return StepResult{th::nil(), {}, false};
      auto r = stepThread(t->a, env, prog);
      if (!r) return r;
      r->next = th::watch(t->sig, r->next);
      return r;
    }
    case TK::Call:
      return StepResult{unfold(prog, t->id, t->args, env.supply()), {}, false};
  }
  return std::nullopt;
}

bool isSuspended(const ThreadPtr& t, const Environment& env) {
  const Thread* x = t.get();
  while (true) {
    switch (x->kind) {
      case TK::Nil:
      case TK::Pause:
        return true;
      case TK::Await:
        return !env.get(x->sig);
      case TK::Seq:
      case TK::Watch:
        if (x->a->kind == TK::Nil) return false;
        x = x->a.get();
        continue;
      default:
        return false;
    }
  }
}

ThreadPtr endOfInstant(const ThreadPtr& t, const Environment& env) {
  switch (t->kind) {
    case TK::Nil:
    case TK::Pause:
      return th::nil();
    case TK::Await:
      if (env.get(t->sig)) throw NotSuspended();
      return t;
    case TK::Seq:
      if (t->a->kind == TK::Nil) throw NotSuspended();
      return th::seq(endOfInstant(t->a, env), t->b);
    case TK::Watch:
      if (t->a->kind == TK::Nil) throw NotSuspended();
      if (env.get(t->sig)) {
        // The body must still be suspended for the rule to apply.
        endOfInstant(t->a, env);
        return th::nil();
      }
      return th::watch(t->sig, endOfInstant(t->a, env));
    default:
      throw NotSuspended();
  }
}

std::vector<ThreadPtr> endOfInstant(const std::vector<ThreadPtr>& p, const Environment& env) {
  std::vector<ThreadPtr> out;
  out.reserve(p.size());
  for (const auto& t : p) out.push_back(endOfInstant(t, env));
  return out;
}

// ---------------------------------------------------------------------------
// Instants

namespace {

struct SourceLang {
  using Ptr = ThreadPtr;
  const SourceProgram& prog;

  std::optional<StepResult> step(const Ptr& t, Environment& env) const { return stepThread(t, env, prog); }
  bool suspended(const Ptr& t, const Environment& env) const { return isSuspended(t, env); }
  Ptr eoi(const Ptr& t, const Environment& env) const { return endOfInstant(t, env); }
  void freeSignals(const Ptr& t, NameSet& out) const { collectFreeSignals(t, out); }
  bool isNil(const Ptr& t) const { return t->kind == TK::Nil; }
  Ptr nil() const { return th::nil(); }
};

NameSupply supplyFor(const SourceProgram& prog, const std::vector<ThreadPtr>& threads) {
  NameSupply s;
  s.reserveAbove(maxGeneratedIndex(prog));
  for (const auto& t : threads) s.reserveAbove(maxGeneratedIndex(t));
  return s;
}

}  // namespace

InstantResult runInstant(const SourceProgram& prog, const std::vector<ThreadPtr>& threads, const NameSet& inputs,
                         Scheduler& sched, std::uint64_t fuel, NameSupply& fresh, std::size_t instantIndex) {
  return detail::runInstantWith(SourceLang{prog}, threads, prog.inputs, prog.outputs, inputs, sched, fuel, fresh,
                                instantIndex);
}

InstantResult runInstant(const SourceProgram& prog, const std::vector<ThreadPtr>& threads, const NameSet& inputs,
                         Scheduler& sched, std::uint64_t fuel) {
  NameSupply fresh = supplyFor(prog, threads);
  return runInstant(prog, threads, inputs, sched, fuel, fresh, 0);
}

PartialTrace runTracePartial(const SourceProgram& prog, const std::vector<NameSet>& inputs, Scheduler& sched,
                             std::uint64_t fuel) {
  PartialTrace out;
  NameSupply fresh = supplyFor(prog, prog.initial);
  std::vector<ThreadPtr> threads = prog.initial;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    try {
      auto r = runInstant(prog, threads, inputs[k], sched, fuel, fresh, k);
      out.trace.push_back(TraceStep{inputs[k], r.outputs});
      threads = std::move(r.residual);
    } catch (const FuelExhausted&) {
      out.diverged = true;
      break;
    }
  }
  return out;
}

Trace runTrace(const SourceProgram& prog, const std::vector<NameSet>& inputs, Scheduler& sched, std::uint64_t fuel) {
  NameSupply fresh = supplyFor(prog, prog.initial);
  std::vector<ThreadPtr> threads = prog.initial;
  Trace out;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    auto r = runInstant(prog, threads, inputs[k], sched, fuel, fresh, k);
    out.push_back(TraceStep{inputs[k], r.outputs});
    threads = std::move(r.residual);
  }
  return out;
}

Runner::Runner(const SourceProgram& prog, Scheduler sched, std::uint64_t fuel)
    : prog_(prog), sched_(std::move(sched)), fuel_(fuel), fresh_(supplyFor(prog, prog.initial)),
      threads_(prog.initial) {}

NameSet Runner::instant(const NameSet& inputs) {
  auto r = runInstant(prog_, threads_, inputs, sched_, fuel_, fresh_, count_);
  ++count_;
  threads_ = std::move(r.residual);
  return r.outputs;
}

std::string Runner::canonicalResidual() const {
  std::string out;
  for (const auto& t : canonicalize(threads_, prog_.interface())) {
    if (!out.empty()) out += ' ';
    out += printThread(t);
  }
  return out;
}

}  // namespace sl
