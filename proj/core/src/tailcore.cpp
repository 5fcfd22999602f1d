#include "sl/tailcore.hpp"

#include <algorithm>
#include <functional>

#include "instant_machine.hpp"
#include "sl/errors.hpp"
#include "sl/sexpr.hpp"

namespace sl {

namespace tl {

namespace {
TailPtr make(Tail t) { return std::make_shared<const Tail>(std::move(t)); }
}  // namespace

TailPtr nil() {
  static const TailPtr n = make(Tail{});
  return n;
}
TailPtr emit(Name s, TailPtr next) { return make(Tail{TailKind::Emit, std::move(s), {}, {}, std::move(next), nullptr, nullptr}); }
TailPtr nu(Name s, TailPtr body) { return make(Tail{TailKind::New, std::move(s), {}, {}, std::move(body), nullptr, nullptr}); }
TailPtr spawn(TailPtr spawned, TailPtr next) {
  return make(Tail{TailKind::Spawn, {}, {}, {}, std::move(spawned), std::move(next), nullptr});
}
TailPtr present(Name s, TailPtr then, BranchPtr otherwise) {
  return make(Tail{TailKind::Present, std::move(s), {}, {}, std::move(then), nullptr, std::move(otherwise)});
}
TailPtr call(Name id, std::vector<Name> args) {
  return make(Tail{TailKind::Call, {}, std::move(id), std::move(args), nullptr, nullptr, nullptr});
}
BranchPtr leaf(TailPtr t) { return std::make_shared<const Branch>(Branch{std::move(t), {}, nullptr, nullptr}); }
BranchPtr ite(Name s, BranchPtr then, BranchPtr otherwise) {
  return std::make_shared<const Branch>(Branch{nullptr, std::move(s), std::move(then), std::move(otherwise)});
}

}  // namespace tl

bool structEqual(const TailPtr& x, const TailPtr& y) {
  if (x == y) return true;
  if (!x || !y || x->kind != y->kind || x->sig != y->sig || x->id != y->id || x->args != y->args) return false;
  return structEqual(x->a, y->a) && structEqual(x->b, y->b) && structEqual(x->otherwise, y->otherwise);
}

bool structEqual(const BranchPtr& x, const BranchPtr& y) {
  if (x == y) return true;
  if (!x || !y || x->isLeaf() != y->isLeaf()) return false;
  if (x->isLeaf()) return structEqual(x->leaf, y->leaf);
  return x->sig == y->sig && structEqual(x->then, y->then) && structEqual(x->otherwise, y->otherwise);
}

NameSet TailProgram::interface() const {
  NameSet s(inputs.begin(), inputs.end());
  s.insert(outputs.begin(), outputs.end());
  return s;
}

bool TailProgram::isInterface(const Name& n) const {
  return std::find(inputs.begin(), inputs.end(), n) != inputs.end() ||
         std::find(outputs.begin(), outputs.end(), n) != outputs.end();
}

bool structEqual(const TailProgram& x, const TailProgram& y) {
  if (x.inputs != y.inputs || x.outputs != y.outputs || x.defs.size() != y.defs.size() ||
      x.initial.size() != y.initial.size())
    return false;
  for (const auto& [id, d] : x.defs) {
    auto it = y.defs.find(id);
    if (it == y.defs.end() || it->second.params != d.params || !structEqual(it->second.body, d.body)) return false;
  }
  for (std::size_t i = 0; i < x.initial.size(); ++i)
    if (!structEqual(x.initial[i], y.initial[i])) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Names

void collectFreeSignals(const BranchPtr& b, NameSet& out) {
  if (b->isLeaf()) return collectFreeSignals(b->leaf, out);
  out.insert(b->sig);
  collectFreeSignals(b->then, out);
  collectFreeSignals(b->otherwise, out);
}

void collectFreeSignals(const TailPtr& t, NameSet& out) {
  switch (t->kind) {
    case TailKind::Nil:
      return;
    case TailKind::Emit:
      out.insert(t->sig);
      collectFreeSignals(t->a, out);
      return;
    case TailKind::New: {
      NameSet inner;
      collectFreeSignals(t->a, inner);
      inner.erase(t->sig);
      out.insert(inner.begin(), inner.end());
      return;
    }
    case TailKind::Spawn:
      collectFreeSignals(t->a, out);
      collectFreeSignals(t->b, out);
      return;
    case TailKind::Present:
      out.insert(t->sig);
      collectFreeSignals(t->a, out);
      collectFreeSignals(t->otherwise, out);
      return;
    case TailKind::Call:
      out.insert(t->args.begin(), t->args.end());
      return;
  }
}

NameSet freeSignals(const TailPtr& t) {
  NameSet s;
  collectFreeSignals(t, s);
  return s;
}

std::vector<Name> freeSignalsOrdered(const TailPtr& t) {
  std::vector<Name> out, bound;
  auto see = [&](const Name& n) {
    if (std::find(bound.begin(), bound.end(), n) != bound.end()) return;
    if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
  };
  std::function<void(const TailPtr&)> go;
  std::function<void(const BranchPtr&)> goB = [&](const BranchPtr& b) {
    if (b->isLeaf()) return go(b->leaf);
    see(b->sig);
    goB(b->then);
    goB(b->otherwise);
  };
  go = [&](const TailPtr& x) {
    switch (x->kind) {
      case TailKind::Nil:
        return;
      case TailKind::Emit:
        see(x->sig);
        return go(x->a);
      case TailKind::New:
        bound.push_back(x->sig);
        go(x->a);
        bound.pop_back();
        return;
      case TailKind::Spawn:
        go(x->a);
        return go(x->b);
      case TailKind::Present:
        see(x->sig);
        go(x->a);
        return goB(x->otherwise);
      case TailKind::Call:
        for (const auto& n : x->args) see(n);
        return;
    }
  };
  go(t);
  return out;
}

namespace {

std::int64_t maxGen(const BranchPtr& b);

std::int64_t maxGen(const TailPtr& t) {
  if (!t) return -1;
  std::int64_t m = generatedIndex(t->sig);
  for (const auto& n : t->args) m = std::max(m, generatedIndex(n));
  m = std::max({m, maxGen(t->a), maxGen(t->b)});
  if (t->otherwise) m = std::max(m, maxGen(t->otherwise));
  return m;
}

std::int64_t maxGen(const BranchPtr& b) {
  if (b->isLeaf()) return maxGen(b->leaf);
  return std::max({generatedIndex(b->sig), maxGen(b->then), maxGen(b->otherwise)});
}

Name lookup(const std::map<Name, Name>& sub, const Name& n) {
  auto it = sub.find(n);
  return it == sub.end() ? n : it->second;
}

}  // namespace

std::int64_t maxGeneratedIndex(const TailPtr& t) { return maxGen(t); }

std::int64_t maxGeneratedIndex(const TailProgram& p) {
  std::int64_t m = -1;
  for (const auto& n : p.inputs) m = std::max(m, generatedIndex(n));
  for (const auto& n : p.outputs) m = std::max(m, generatedIndex(n));
  for (const auto& [id, d] : p.defs) {
    for (const auto& n : d.params) m = std::max(m, generatedIndex(n));
    m = std::max(m, maxGen(d.body));
  }
  for (const auto& t : p.initial) m = std::max(m, maxGen(t));
  return m;
}

BranchPtr substitute(const BranchPtr& b, const std::map<Name, Name>& sub, NameSupply& supply) {
  if (sub.empty()) return b;
  if (b->isLeaf()) return tl::leaf(substitute(b->leaf, sub, supply));
  return tl::ite(lookup(sub, b->sig), substitute(b->then, sub, supply), substitute(b->otherwise, sub, supply));
}

TailPtr substitute(const TailPtr& t, const std::map<Name, Name>& sub, NameSupply& supply) {
  if (sub.empty()) return t;
  switch (t->kind) {
    case TailKind::Nil:
      return t;
    case TailKind::Emit:
      return tl::emit(lookup(sub, t->sig), substitute(t->a, sub, supply));
    case TailKind::Spawn:
      return tl::spawn(substitute(t->a, sub, supply), substitute(t->b, sub, supply));
    case TailKind::Present:
      return tl::present(lookup(sub, t->sig), substitute(t->a, sub, supply), substitute(t->otherwise, sub, supply));
    case TailKind::Call: {
      std::vector<Name> args;
      for (const auto& n : t->args) args.push_back(lookup(sub, n));
      return tl::call(t->id, std::move(args));
    }
    case TailKind::New: {
      std::map<Name, Name> inner = sub;
      inner.erase(t->sig);
      bool clash = std::any_of(inner.begin(), inner.end(), [&](const auto& kv) { return kv.second == t->sig; });
      if (clash) {
        Name nb = supply.fresh();
        inner[t->sig] = nb;
        return tl::nu(nb, substitute(t->a, inner, supply));
      }
      return tl::nu(t->sig, substitute(t->a, inner, supply));
    }
  }
  return t;
}

TailPtr unfold(const TailProgram& p, const Name& id, const std::vector<Name>& args, NameSupply& supply) {
  auto it = p.defs.find(id);
  if (it == p.defs.end()) throw UnboundIdentifier(id);
  const TailDefinition& d = it->second;
  if (d.params.size() != args.size()) throw ArityMismatch(id, d.params.size(), args.size());
  std::map<Name, Name> sub;
  for (std::size_t i = 0; i < args.size(); ++i)
    if (d.params[i] != args[i]) sub[d.params[i]] = args[i];
  return substitute(d.body, sub, supply);
}

// ---------------------------------------------------------------------------
// Printing

namespace {

void printInto(const TailPtr& t, std::string& out);

void printInto(const BranchPtr& b, std::string& out) {
  if (b->isLeaf()) return printInto(b->leaf, out);
  out += "(ite " + b->sig + ' ';
  printInto(b->then, out);
  out += ' ';
  printInto(b->otherwise, out);
  out += ')';
}

void printInto(const TailPtr& t, std::string& out) {
  switch (t->kind) {
    case TailKind::Nil:
      out += '0';
      return;
    case TailKind::Emit:
      out += "(emit! " + t->sig + ' ';
      printInto(t->a, out);
      out += ')';
      return;
    case TailKind::New:
      out += "(new " + t->sig + ' ';
      printInto(t->a, out);
      out += ')';
      return;
    case TailKind::Spawn:
      out += "(thread! ";
      printInto(t->a, out);
      out += ' ';
      printInto(t->b, out);
      out += ')';
      return;
    case TailKind::Present:
      out += "(present " + t->sig + ' ';
      printInto(t->a, out);
      out += ' ';
      printInto(t->otherwise, out);
      out += ')';
      return;
    case TailKind::Call:
      out += "(call " + t->id;
      for (const auto& n : t->args) out += ' ' + n;
      out += ')';
      return;
  }
}

}  // namespace

std::string printTail(const TailPtr& t) {
  std::string s;
  printInto(t, s);
  return s;
}

std::string printBranch(const BranchPtr& b) {
  std::string s;
  printInto(b, s);
  return s;
}

std::string printTailProgram(const TailProgram& p) {
  if (p.initial.empty()) throw Error("cannot print a program without threads");
  std::string out = "(input";
  for (const auto& n : p.inputs) out += ' ' + n;
  out += ")\n(output";
  for (const auto& n : p.outputs) out += ' ' + n;
  out += ")\n";
  for (const auto& [id, d] : p.defs) {
    out += "(def (" + id;
    for (const auto& n : d.params) out += ' ' + n;
    out += ") " + printTail(d.body) + ")\n";
  }
  for (const auto& t : p.initial) out += "(run " + printTail(t) + ")\n";
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

const NameSet& tailKeywords() {
  static const NameSet k{"emit!", "new", "thread!", "present", "ite", "call", "pause", "0"};
  return k;
}

class TailParser {
 public:
  TailParser(const NameSet& iface, NameSupply& supply) : iface_(iface), supply_(supply) {}

  std::map<Name, std::size_t> arities;

  TailPtr tail(const SExpr& e, std::vector<Name>& scope) {
    if (e.atom) {
      if (e.text == "0") return tl::nil();
      throw SyntaxError(e.line, e.col, "expected a tail thread, got '" + e.text + "'");
    }
    std::string_view h = e.head();
    const auto& it = e.items;
    auto arity = [&](std::size_t n) {
      if (it.size() != n + 1)
        throw SyntaxError(e.line, e.col, "'" + std::string(h) + "' expects " + std::to_string(n) + " operands");
    };
    if (h == "emit!") {
      arity(2);
      Name s = signal(it[1], scope);
      return tl::emit(s, tail(it[2], scope));
    }
    if (h == "new") {
      arity(2);
      Name s = binder(it[1]);
      scope.push_back(s);
      TailPtr body = tail(it[2], scope);
      scope.pop_back();
      return tl::nu(s, body);
    }
    if (h == "thread!") {
      arity(2);
      TailPtr a = tail(it[1], scope);
      return tl::spawn(a, tail(it[2], scope));
    }
    if (h == "present") {
      arity(3);
      Name s = signal(it[1], scope);
      TailPtr a = tail(it[2], scope);
      return tl::present(s, a, branch(it[3], scope));
    }
    if (h == "pause") {
      arity(1);
      return pausePrefix(branch(it[1], scope), supply_);
    }
    if (h == "call") {
      if (it.size() < 2 || !it[1].atom) throw SyntaxError(e.line, e.col, "'call' expects an identifier");
      const Name& id = it[1].text;
      std::vector<Name> args;
      for (std::size_t i = 2; i < it.size(); ++i) args.push_back(signal(it[i], scope));
      auto d = arities.find(id);
      if (d == arities.end()) throw UnboundIdentifier(id);
      if (d->second != args.size()) throw ArityMismatch(id, d->second, args.size());
      return tl::call(id, std::move(args));
    }
    throw SyntaxError(e.line, e.col, "unknown keyword '" + std::string(h) + "'");
  }

  BranchPtr branch(const SExpr& e, std::vector<Name>& scope) {
    if (e.isList() && e.head() == "ite") {
      if (e.items.size() != 4) throw SyntaxError(e.line, e.col, "'ite' expects 3 operands");
      Name s = signal(e.items[1], scope);
      BranchPtr a = branch(e.items[2], scope);
      return tl::ite(s, a, branch(e.items[3], scope));
    }
    return tl::leaf(tail(e, scope));
  }

 private:
  const NameSet& iface_;
  NameSupply& supply_;

  Name binder(const SExpr& e) {
    if (!e.atom || tailKeywords().count(e.text)) throw SyntaxError(e.line, e.col, "expected a signal name");
    return e.text;
  }

  Name signal(const SExpr& e, const std::vector<Name>& scope) {
    Name n = binder(e);
    if (std::find(scope.begin(), scope.end(), n) != scope.end() || iface_.count(n) || isGeneratedName(n)) return n;
    throw UndeclaredSignal(n);
  }
};

std::vector<Name> names(const SExpr& e, std::size_t from) {
  std::vector<Name> out;
  for (std::size_t i = from; i < e.items.size(); ++i) {
    if (!e.items[i].atom) throw SyntaxError(e.items[i].line, e.items[i].col, "expected a name");
    out.push_back(e.items[i].text);
  }
  return out;
}

std::int64_t maxGeneratedInSExpr(const SExpr& e) {
  if (e.atom) return generatedIndex(e.text);
  std::int64_t m = -1;
  for (const auto& x : e.items) m = std::max(m, maxGeneratedInSExpr(x));
  return m;
}

}  // namespace

TailProgram parseTail(std::string_view text) {
  auto forms = readSExprs(text);
  TailProgram p;
  NameSupply supply;
  std::vector<const SExpr*> defs, runs;
  for (const auto& f : forms) {
    supply.reserveAbove(maxGeneratedInSExpr(f));
    auto h = f.head();
    if (h == "input")
      for (auto& n : names(f, 1)) p.inputs.push_back(n);
    else if (h == "output")
      for (auto& n : names(f, 1)) p.outputs.push_back(n);
    else if (h == "def")
      defs.push_back(&f);
    else if (h == "run")
      runs.push_back(&f);
    else
      throw SyntaxError(f.line, f.col, "expected input, output, def or run");
  }
  NameSet iface = p.interface();
  TailParser parser(iface, supply);
  for (const SExpr* f : defs) {
    if (f->items.size() != 3 || f->items[1].atom || f->items[1].items.empty() || !f->items[1].items[0].atom)
      throw SyntaxError(f->line, f->col, "expected (def (A x...) t)");
    const Name& id = f->items[1].items[0].text;
    if (parser.arities.count(id)) throw SyntaxError(f->line, f->col, "duplicate definition of " + id);
    parser.arities[id] = f->items[1].items.size() - 1;
  }
  for (const SExpr* f : defs) {
    const Name& id = f->items[1].items[0].text;
    auto params = names(f->items[1], 1);
    std::vector<Name> scope = params;
    p.defs[id] = TailDefinition{id, params, parser.tail(f->items[2], scope)};
  }
  for (const SExpr* f : runs) {
    if (f->items.size() < 2) throw SyntaxError(f->line, f->col, "'run' expects at least one thread");
    for (std::size_t i = 1; i < f->items.size(); ++i) {
      std::vector<Name> scope;
      p.initial.push_back(parser.tail(f->items[i], scope));
    }
  }
  if (p.initial.empty()) throw SyntaxError(1, 1, "program has no (run ...) thread");
  return p;
}

// ---------------------------------------------------------------------------
// Reduction

std::optional<TailStep> stepTail(const TailPtr& t, Environment& env, const TailProgram& prog) {
  switch (t->kind) {
    case TailKind::Nil:
      return std::nullopt;
    case TailKind::Emit: {
      bool was = env.get(t->sig);
      env.set(t->sig, true);
      return TailStep{t->a, {}, !was};
    }
    case TailKind::New: {
      Name fresh = env.allocate();
      return TailStep{substitute(t->a, {{t->sig, fresh}}, env.supply()), {}, false};
    }
    case TailKind::Call:
      return TailStep{unfold(prog, t->id, t->args, env.supply()), {}, false};
    case TailKind::Present:
      if (!env.get(t->sig)) return std::nullopt;
      return TailStep{t->a, {}, false};
    case TailKind::Spawn:
      return TailStep{t->b, {t->a}, false};
  }
  return std::nullopt;
}

bool isSuspendedTail(const TailPtr& t, const Environment& env) {
  return t->kind == TailKind::Nil || (t->kind == TailKind::Present && !env.get(t->sig));
}

TailPtr evalBranch(const BranchPtr& b, const Environment& env) {
  const Branch* x = b.get();
  while (!x->isLeaf()) x = env.get(x->sig) ? x->then.get() : x->otherwise.get();
  return x->leaf;
}

TailPtr endOfInstantTail(const TailPtr& t, const Environment& env) {
  if (t->kind == TailKind::Nil) return t;
  if (t->kind == TailKind::Present && !env.get(t->sig)) return evalBranch(t->otherwise, env);
  throw NotSuspended();
}

std::vector<TailPtr> endOfInstantTail(const std::vector<TailPtr>& p, const Environment& env) {
  std::vector<TailPtr> out;
  for (const auto& t : p) out.push_back(endOfInstantTail(t, env));
  return out;
}

TailPtr pausePrefix(const BranchPtr& b, NameSupply& supply) {
  Name g = supply.fresh();
  return tl::nu(g, tl::present(g, tl::nil(), b));
}

TailPtr awaitPrefix(const Name& s, const TailPtr& t, TailProgram& prog) {
  std::vector<Name> params = freeSignalsOrdered(t);
  if (std::find(params.begin(), params.end(), s) == params.end()) params.insert(params.begin(), s);
  Name id;
  for (std::size_t k = 0;; ++k) {
    id = "%W" + std::to_string(k);
    if (!prog.defs.count(id)) break;
  }
  TailPtr self = tl::call(id, params);
  prog.defs[id] = TailDefinition{id, params, tl::present(s, t, tl::leaf(self))};
  return self;
}

namespace {

struct TailLang {
  using Ptr = TailPtr;
  const TailProgram& prog;

  std::optional<TailStep> step(const Ptr& t, Environment& env) const { return stepTail(t, env, prog); }
  bool suspended(const Ptr& t, const Environment& env) const { return isSuspendedTail(t, env); }
  Ptr eoi(const Ptr& t, const Environment& env) const { return endOfInstantTail(t, env); }
  void freeSignals(const Ptr& t, NameSet& out) const { collectFreeSignals(t, out); }
  bool isNil(const Ptr& t) const { return t->kind == TailKind::Nil; }
  Ptr nil() const { return tl::nil(); }
};

NameSupply supplyFor(const TailProgram& prog, const std::vector<TailPtr>& threads) {
  NameSupply s;
  s.reserveAbove(maxGeneratedIndex(prog));
  for (const auto& t : threads) s.reserveAbove(maxGeneratedIndex(t));
  return s;
}

}  // namespace

TailInstantResult runInstantTail(const TailProgram& prog, const std::vector<TailPtr>& threads, const NameSet& inputs,
                                 Scheduler& sched, std::uint64_t fuel, NameSupply& fresh, std::size_t instantIndex) {
  return detail::runInstantWith(TailLang{prog}, threads, prog.inputs, prog.outputs, inputs, sched, fuel, fresh,
                                instantIndex);
}

TailInstantResult runInstantTail(const TailProgram& prog, const std::vector<TailPtr>& threads, const NameSet& inputs,
                                 Scheduler& sched, std::uint64_t fuel) {
  NameSupply fresh = supplyFor(prog, threads);
  return runInstantTail(prog, threads, inputs, sched, fuel, fresh, 0);
}

Trace runTraceTail(const TailProgram& prog, const std::vector<NameSet>& inputs, Scheduler& sched, std::uint64_t fuel) {
  TailRunner r(prog, sched, fuel);
  Trace out;
  for (const auto& i : inputs) out.push_back(TraceStep{i, r.instant(i)});
  return out;
}

TailRunner::TailRunner(const TailProgram& prog, Scheduler sched, std::uint64_t fuel)
    : prog_(prog), sched_(std::move(sched)), fuel_(fuel), fresh_(supplyFor(prog, prog.initial)),
      threads_(prog.initial) {}

NameSet TailRunner::instant(const NameSet& inputs) {
  auto r = runInstantTail(prog_, threads_, inputs, sched_, fuel_, fresh_, count_);
  ++count_;
  threads_ = std::move(r.residual);
  return r.outputs;
}

// ---------------------------------------------------------------------------
// Reactivity

namespace {

template <class OnCall>
void tailCalls(const TailPtr& t, NameSet& out, OnCall&& onCall) {
  switch (t->kind) {
    case TailKind::Nil:
      return;
    case TailKind::Emit:
    case TailKind::New:
    case TailKind::Present:
      return tailCalls(t->a, out, onCall);
    case TailKind::Spawn:
      tailCalls(t->a, out, onCall);
      return tailCalls(t->b, out, onCall);
    case TailKind::Call:
      return onCall(t, out);
  }
}

}  // namespace

NameSet tailCallIds(const TailPtr& t) {
  NameSet out;
  tailCalls(t, out, [](const TailPtr& c, NameSet& o) { o.insert(c->id); });
  return out;
}

Verdict checkReactivityTail(const TailProgram& prog, unsigned unfoldDepth) {
  std::map<std::pair<Name, unsigned>, NameSet> memo;
  std::function<NameSet(const TailPtr&, unsigned)> of = [&](const TailPtr& t, unsigned depth) {
    NameSet out;
    tailCalls(t, out, [&](const TailPtr& c, NameSet& o) {
      if (depth == 0) {
        o.insert(c->id);
        return;
      }
      auto key = std::pair{c->id, depth};
      auto it = memo.find(key);
      if (it == memo.end()) it = memo.emplace(key, of(prog.defs.at(c->id).body, depth - 1)).first;
      o.insert(it->second.begin(), it->second.end());
    });
    return out;
  };
  std::set<Name> nodes;
  std::set<Edge> edges;
  for (const auto& [id, d] : prog.defs) {
    nodes.insert(id);
    for (const auto& b : of(d.body, unfoldDepth)) edges.insert({id, b});
  }
  return acyclicVerdict(nodes, edges);
}

}  // namespace sl
