#include "sl/syntax.hpp"

#include <algorithm>
#include <functional>

#include "sl/errors.hpp"
#include "sl/sexpr.hpp"

namespace sl {

bool isGeneratedName(std::string_view n) { return generatedIndex(n) >= 0; }

std::int64_t generatedIndex(std::string_view n) {
  if (n.size() < 3 || n[0] != '%' || n[1] != 'g') return -1;
  std::int64_t v = 0;
  for (std::size_t i = 2; i < n.size(); ++i) {
    if (n[i] < '0' || n[i] > '9') return -1;
    v = v * 10 + (n[i] - '0');
  }
  return v;
}

// ---------------------------------------------------------------------------
// Constructors

namespace th {

namespace {
ThreadPtr make(Thread t) { return std::make_shared<const Thread>(std::move(t)); }
}  // namespace

ThreadPtr nil() {
  static const ThreadPtr n = make(Thread{});
  return n;
}

ThreadPtr pause() {
  static const ThreadPtr p = make(Thread{TK::Pause, {}, {}, {}, nullptr, nullptr});
  return p;
}

ThreadPtr seq(ThreadPtr a, ThreadPtr b) {
  if (a->kind == TK::Seq) return seq(a->a, seq(a->b, std::move(b)));
  return make(Thread{TK::Seq, {}, {}, {}, std::move(a), std::move(b)});
}

ThreadPtr seqAll(const std::vector<ThreadPtr>& parts) {
  if (parts.empty()) return nil();
  ThreadPtr acc = parts.back();
  for (auto it = parts.rbegin() + 1; it != parts.rend(); ++it) acc = seq(*it, acc);
  return acc;
}

ThreadPtr emit(Name s) { return make(Thread{TK::Emit, std::move(s), {}, {}, nullptr, nullptr}); }
ThreadPtr nu(Name s, ThreadPtr body) { return make(Thread{TK::New, std::move(s), {}, {}, std::move(body), nullptr}); }
ThreadPtr spawn(ThreadPtr body) { return make(Thread{TK::Spawn, {}, {}, {}, std::move(body), nullptr}); }
ThreadPtr await(Name s) { return make(Thread{TK::Await, std::move(s), {}, {}, nullptr, nullptr}); }
ThreadPtr watch(Name s, ThreadPtr body) {
  return make(Thread{TK::Watch, std::move(s), {}, {}, std::move(body), nullptr});
}
ThreadPtr call(Name id, std::vector<Name> args) {
  return make(Thread{TK::Call, {}, std::move(id), std::move(args), nullptr, nullptr});
}

}  // namespace th

bool structEqual(const ThreadPtr& x, const ThreadPtr& y) {
  if (x == y) return true;
  if (!x || !y || x->kind != y->kind || x->sig != y->sig || x->id != y->id || x->args != y->args) return false;
  if (static_cast<bool>(x->a) != static_cast<bool>(y->a) || static_cast<bool>(x->b) != static_cast<bool>(y->b))
    return false;
  return (!x->a || structEqual(x->a, y->a)) && (!x->b || structEqual(x->b, y->b));
}

bool SourceProgram::isInput(const Name& n) const {
  return std::find(inputs.begin(), inputs.end(), n) != inputs.end();
}
bool SourceProgram::isOutput(const Name& n) const {
  return std::find(outputs.begin(), outputs.end(), n) != outputs.end();
}
NameSet SourceProgram::interface() const {
  NameSet s(inputs.begin(), inputs.end());
  s.insert(outputs.begin(), outputs.end());
  return s;
}
SignalKind SourceProgram::kindOf(const Name& n) const {
  if (isInput(n)) return SignalKind::Input;
  if (isOutput(n)) return SignalKind::Output;
  if (isGeneratedName(n)) return SignalKind::Generated;
  return SignalKind::Local;
}

bool structEqual(const SourceProgram& x, const SourceProgram& y) {
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
// Free names and substitution

void collectFreeSignals(const ThreadPtr& t, NameSet& out) {
  switch (t->kind) {
    case TK::Nil:
    case TK::Pause:
      return;
    case TK::Emit:
    case TK::Await:
      out.insert(t->sig);
      return;
    case TK::Watch:
      out.insert(t->sig);
      collectFreeSignals(t->a, out);
      return;
    case TK::Call:
      out.insert(t->args.begin(), t->args.end());
      return;
    case TK::Spawn:
      collectFreeSignals(t->a, out);
      return;
    case TK::Seq:
      collectFreeSignals(t->a, out);
      collectFreeSignals(t->b, out);
      return;
    case TK::New: {
      NameSet inner;
      collectFreeSignals(t->a, inner);
      inner.erase(t->sig);
      out.insert(inner.begin(), inner.end());
      return;
    }
  }
}

NameSet freeSignals(const ThreadPtr& t) {
  NameSet s;
  collectFreeSignals(t, s);
  return s;
}

std::vector<Name> freeSignalsOrdered(const ThreadPtr& t) {
  std::vector<Name> out;
  std::vector<Name> bound;
  std::function<void(const ThreadPtr&)> go = [&](const ThreadPtr& x) {
    auto see = [&](const Name& n) {
      if (std::find(bound.begin(), bound.end(), n) != bound.end()) return;
      if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
    };
    switch (x->kind) {
      case TK::Nil:
      case TK::Pause:
        return;
      case TK::Emit:
      case TK::Await:
        see(x->sig);
        return;
      case TK::Watch:
        see(x->sig);
        go(x->a);
        return;
      case TK::Call:
        for (const auto& n : x->args) see(n);
        return;
      case TK::Spawn:
        go(x->a);
        return;
      case TK::Seq:
        go(x->a);
        go(x->b);
        return;
      case TK::New:
        bound.push_back(x->sig);
        go(x->a);
        bound.pop_back();
        return;
    }
  };
  go(t);
  return out;
}

std::int64_t maxGeneratedIndex(const ThreadPtr& t) {
  std::int64_t m = generatedIndex(t->sig);
  for (const auto& n : t->args) m = std::max(m, generatedIndex(n));
  if (t->a) m = std::max(m, maxGeneratedIndex(t->a));
  if (t->b) m = std::max(m, maxGeneratedIndex(t->b));
  return m;
}

std::int64_t maxGeneratedIndex(const SourceProgram& p) {
  std::int64_t m = -1;
  for (const auto& n : p.inputs) m = std::max(m, generatedIndex(n));
  for (const auto& n : p.outputs) m = std::max(m, generatedIndex(n));
  for (const auto& [id, d] : p.defs) {
    for (const auto& n : d.params) m = std::max(m, generatedIndex(n));
    m = std::max(m, maxGeneratedIndex(d.body));
  }
  for (const auto& t : p.initial) m = std::max(m, maxGeneratedIndex(t));
  return m;
}

namespace {

Name lookup(const std::map<Name, Name>& sub, const Name& n) {
  auto it = sub.find(n);
  return it == sub.end() ? n : it->second;
}

}  // namespace

ThreadPtr substitute(const ThreadPtr& t, const std::map<Name, Name>& sub, NameSupply& supply) {
  if (sub.empty()) return t;
  switch (t->kind) {
    case TK::Nil:
    case TK::Pause:
      return t;
    case TK::Emit: {
      auto it = sub.find(t->sig);
      return it == sub.end() ? t : th::emit(it->second);
    }
    case TK::Await: {
      auto it = sub.find(t->sig);
      return it == sub.end() ? t : th::await(it->second);
    }
    case TK::Watch:
      return th::watch(lookup(sub, t->sig), substitute(t->a, sub, supply));
    case TK::Call: {
      std::vector<Name> args;
      args.reserve(t->args.size());
      for (const auto& n : t->args) args.push_back(lookup(sub, n));
      return th::call(t->id, std::move(args));
    }
    case TK::Spawn:
      return th::spawn(substitute(t->a, sub, supply));
    case TK::Seq:
      return th::seq(substitute(t->a, sub, supply), substitute(t->b, sub, supply));
    case TK::New: {
      std::map<Name, Name> inner = sub;
      inner.erase(t->sig);
      bool clash = false;
      for (const auto& [k, v] : inner)
        if (v == t->sig) clash = true;
      if (clash) {
        Name nb = supply.fresh();
        inner[t->sig] = nb;
        return th::nu(nb, substitute(t->a, inner, supply));
      }
      return th::nu(t->sig, substitute(t->a, inner, supply));
    }
  }
  return t;
}

ThreadPtr unfold(const SourceProgram& p, const Name& id, const std::vector<Name>& args, NameSupply& supply) {
  auto it = p.defs.find(id);
  if (it == p.defs.end()) throw UnboundIdentifier(id);
  const Definition& d = it->second;
  if (d.params.size() != args.size()) throw ArityMismatch(id, d.params.size(), args.size());
  std::map<Name, Name> sub;
  for (std::size_t i = 0; i < args.size(); ++i)
    if (d.params[i] != args[i]) sub[d.params[i]] = args[i];
  return substitute(d.body, sub, supply);
}

// ---------------------------------------------------------------------------
// Derived instructions

ThreadPtr Desugarer::loop(const ThreadPtr& body) {
  std::vector<Name> params;
  for (const auto& n : freeSignalsOrdered(body))
    if (!isInterface(n)) params.push_back(n);
  Name id;
  for (std::size_t k = defs_.size();; ++k) {
    id = "%L" + std::to_string(k);
    if (!defs_.count(id)) break;
  }
  ThreadPtr self = th::call(id, params);
  defs_[id] = Definition{id, params, th::seq(body, self)};
  return self;
}

ThreadPtr Desugarer::now(const ThreadPtr& body) {
  Name s = names_.fresh();
  return th::nu(s, th::seq(th::emit(s), th::watch(s, body)));
}

ThreadPtr Desugarer::derivedPause() {
  Name s = names_.fresh();
  return th::nu(s, now(th::await(s)));
}

ThreadPtr Desugarer::pauseForm() { return tablePause_ ? derivedPause() : th::pause(); }

ThreadPtr Desugarer::present(const Name& s, const ThreadPtr& then, const ThreadPtr& otherwise) {
  Name done = names_.fresh();
  ThreadPtr positive = now(th::seq(th::await(s), th::spawn(th::seq(then, th::emit(done)))));
  ThreadPtr negative = th::watch(s, th::seq(pauseForm(), th::spawn(th::seq(otherwise, th::emit(done)))));
  return th::nu(done, th::seqAll({th::spawn(positive), th::spawn(negative), th::await(done)}));
}

ThreadPtr Desugarer::par(const ThreadPtr& left, const ThreadPtr& right) {
  Name s1 = names_.fresh(), s2 = names_.fresh(), k1 = names_.fresh(), k2 = names_.fresh();
  ThreadPtr b1 = th::watch(k1, th::seq(left, loop(th::seq(th::emit(s1), pauseForm()))));
  ThreadPtr b2 = th::watch(k2, th::seq(right, loop(th::seq(th::emit(s2), pauseForm()))));
  ThreadPtr body = th::seqAll({th::spawn(b1), th::spawn(b2), th::await(s1), th::emit(k1), th::await(s2), th::emit(k2)});
  return th::nu(s1, th::nu(s2, th::nu(k1, th::nu(k2, body))));
}

// ---------------------------------------------------------------------------
// Parser

namespace {

const NameSet& keywords() {
  static const NameSet k{"seq", "emit", "new", "thread", "await", "watch", "call",
                         "pause", "loop", "now", "present", "par", "0"};
  return k;
}

class Parser {
 public:
  Parser(SourceProgram& prog, NameSupply& supply, const ParseOptions& opts, const NameSet& iface)
      : prog_(prog), iface_(iface), des_(supply, prog.defs, iface_, opts.tablePause) {}

  ThreadPtr thread(const SExpr& e, std::vector<Name>& scope) {
    if (e.atom) {
      if (e.text == "0") return th::nil();
      if (e.text == "pause") return des_.pauseForm();
      throw SyntaxError(e.line, e.col, "expected a thread, got '" + e.text + "'");
    }
    std::string_view h = e.head();
    if (h.empty()) throw SyntaxError(e.line, e.col, "expected a keyword");
    const auto& it = e.items;
    auto arity = [&](std::size_t n) {
      if (it.size() != n + 1)
        throw SyntaxError(e.line, e.col, "'" + std::string(h) + "' expects " + std::to_string(n) + " operands");
    };
    if (h == "seq") {
      std::vector<ThreadPtr> parts;
      for (std::size_t i = 1; i < it.size(); ++i) parts.push_back(thread(it[i], scope));
      return th::seqAll(parts);
    }
    if (h == "emit") {
      arity(1);
      return th::emit(signal(it[1], scope));
    }
    if (h == "await") {
      arity(1);
      return th::await(signal(it[1], scope));
    }
    if (h == "watch") {
      arity(2);
      Name s = signal(it[1], scope);
      return th::watch(s, thread(it[2], scope));
    }
    if (h == "thread") {
      arity(1);
      return th::spawn(thread(it[1], scope));
    }
    if (h == "pause") {
      arity(0);
      return des_.pauseForm();
    }
    if (h == "new") {
      if (it.size() < 3) throw SyntaxError(e.line, e.col, "'new' expects names and a body");
      std::vector<Name> names;
      for (std::size_t i = 1; i + 1 < it.size(); ++i) names.push_back(binder(it[i]));
      for (const auto& n : names) scope.push_back(n);
      ThreadPtr body = thread(it.back(), scope);
      for (std::size_t i = 0; i < names.size(); ++i) scope.pop_back();
      for (auto r = names.rbegin(); r != names.rend(); ++r) body = th::nu(*r, body);
      return body;
    }
    if (h == "call") {
      if (it.size() < 2 || !it[1].atom) throw SyntaxError(e.line, e.col, "'call' expects an identifier");
      const Name& id = it[1].text;
      std::vector<Name> args;
      for (std::size_t i = 2; i < it.size(); ++i) args.push_back(signal(it[i], scope));
      auto d = arities_.find(id);
      if (d == arities_.end()) {
        auto g = prog_.defs.find(id);
        if (g == prog_.defs.end()) throw UnboundIdentifier(id);
        if (g->second.params.size() != args.size()) throw ArityMismatch(id, g->second.params.size(), args.size());
      } else if (d->second != args.size()) {
        throw ArityMismatch(id, d->second, args.size());
      }
      return th::call(id, std::move(args));
    }
    if (h == "loop") {
      arity(1);
      return des_.loop(thread(it[1], scope));
    }
    if (h == "now") {
      arity(1);
      return des_.now(thread(it[1], scope));
    }
    if (h == "present") {
      arity(3);
      Name s = signal(it[1], scope);
      ThreadPtr a = thread(it[2], scope);
      ThreadPtr b = thread(it[3], scope);
      return des_.present(s, a, b);
    }
    if (h == "par") {
      arity(2);
      ThreadPtr a = thread(it[1], scope);
      ThreadPtr b = thread(it[2], scope);
      return des_.par(a, b);
    }
    throw SyntaxError(e.line, e.col, "unknown keyword '" + std::string(h) + "'");
  }

  void declareArity(const Name& id, std::size_t n) { arities_[id] = n; }

 private:
  SourceProgram& prog_;
  NameSet iface_;
  Desugarer des_;
  std::map<Name, std::size_t> arities_;

  Name binder(const SExpr& e) {
    if (!e.atom || keywords().count(e.text)) throw SyntaxError(e.line, e.col, "expected a signal name");
    return e.text;
  }

  Name signal(const SExpr& e, const std::vector<Name>& scope) {
    Name n = binder(e);
    if (std::find(scope.begin(), scope.end(), n) != scope.end()) return n;
    if (iface_.count(n) || isGeneratedName(n)) return n;
    throw UndeclaredSignal(n);
  }
};

std::vector<Name> atomList(const SExpr& e, std::size_t from) {
  std::vector<Name> out;
  for (std::size_t i = from; i < e.items.size(); ++i) {
    const SExpr& x = e.items[i];
    if (!x.atom || keywords().count(x.text)) throw SyntaxError(x.line, x.col, "expected a name");
    out.push_back(x.text);
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

Desugarer::Desugarer(NameSupply& names, std::map<Name, Definition>& defs, NameSet iface, bool tablePause)
    : names_(names), defs_(defs), iface_(std::move(iface)), tablePause_(tablePause) {}

bool Desugarer::isInterface(const Name& n) const { return iface_.count(n) != 0; }

SourceProgram parse(std::string_view text, const ParseOptions& opts) {
  std::vector<SExpr> forms = readSExprs(text);
  SourceProgram prog;
  NameSupply supply;
  std::vector<const SExpr*> defForms, runForms;
  for (const auto& f : forms) {
    supply.reserveAbove(maxGeneratedInSExpr(f));
    std::string_view h = f.head();
    if (h == "input") {
      for (auto& n : atomList(f, 1)) prog.inputs.push_back(n);
    } else if (h == "output") {
      for (auto& n : atomList(f, 1)) prog.outputs.push_back(n);
    } else if (h == "def") {
      defForms.push_back(&f);
    } else if (h == "run") {
      runForms.push_back(&f);
    } else {
      throw SyntaxError(f.line, f.col, "expected input, output, def or run");
    }
  }
  Parser parser(prog, supply, opts, prog.interface());
  struct Header {
    Name id;
    std::vector<Name> params;
    const SExpr* body;
  };
  std::vector<Header> headers;
  for (const SExpr* f : defForms) {
    if (f->items.size() != 3 || f->items[1].atom || f->items[1].items.empty() || !f->items[1].items[0].atom)
      throw SyntaxError(f->line, f->col, "expected (def (A x...) T)");
    Header h{f->items[1].items[0].text, atomList(f->items[1], 1), &f->items[2]};
    for (const auto& hh : headers)
      if (hh.id == h.id) throw SyntaxError(f->line, f->col, "duplicate definition of " + h.id);
    parser.declareArity(h.id, h.params.size());
    headers.push_back(std::move(h));
  }
  for (const auto& h : headers) {
    std::vector<Name> scope = h.params;
    ThreadPtr body = parser.thread(*h.body, scope);
    prog.defs[h.id] = Definition{h.id, h.params, body};
  }
  for (const SExpr* f : runForms) {
    if (f->items.size() < 2) throw SyntaxError(f->line, f->col, "'run' expects at least one thread");
    for (std::size_t i = 1; i < f->items.size(); ++i) {
      std::vector<Name> scope;
      prog.initial.push_back(parser.thread(f->items[i], scope));
    }
  }
  if (prog.initial.empty()) throw SyntaxError(1, 1, "program has no (run ...) thread");
  return prog;
}

ThreadPtr parseThread(std::string_view text, SourceProgram& ctx, const ParseOptions& opts) {
  std::vector<SExpr> forms = readSExprs(text);
  if (forms.size() != 1) throw SyntaxError(1, 1, "expected exactly one thread expression");
  NameSupply supply;
  supply.reserveAbove(std::max(maxGeneratedIndex(ctx), maxGeneratedInSExpr(forms[0])));
  Parser parser(ctx, supply, opts, ctx.interface());
  std::vector<Name> scope;
  return parser.thread(forms[0], scope);
}

// ---------------------------------------------------------------------------
// Printer

namespace {

void printInto(const Thread& t, std::string& out) {
  switch (t.kind) {
    case TK::Nil:
      out += '0';
      return;
    case TK::Pause:
      out += "pause";
      return;
    case TK::Emit:
      out += "(emit " + t.sig + ")";
      return;
    case TK::Await:
      out += "(await " + t.sig + ")";
      return;
    case TK::Watch:
      out += "(watch " + t.sig + " ";
      printInto(*t.a, out);
      out += ')';
      return;
    case TK::New:
      out += "(new " + t.sig + " ";
      printInto(*t.a, out);
      out += ')';
      return;
    case TK::Spawn:
      out += "(thread ";
      printInto(*t.a, out);
      out += ')';
      return;
    case TK::Call:
      out += "(call " + t.id;
      for (const auto& n : t.args) out += " " + n;
      out += ')';
      return;
    case TK::Seq: {
      out += "(seq";
      const Thread* cur = &t;
      while (cur->kind == TK::Seq) {
        out += ' ';
        printInto(*cur->a, out);
        cur = cur->b.get();
      }
      out += ' ';
      printInto(*cur, out);
      out += ')';
      return;
    }
  }
}

}  // namespace

std::string printThread(const ThreadPtr& t) {
  std::string s;
  printInto(*t, s);
  return s;
}

std::string printProgram(const SourceProgram& p) {
  if (p.initial.empty()) throw Error("cannot print a program without initial threads");
  std::string out = "(input";
  for (const auto& n : p.inputs) out += " " + n;
  out += ")\n(output";
  for (const auto& n : p.outputs) out += " " + n;
  out += ")\n";
  for (const auto& [id, d] : p.defs) {
    out += "(def (" + id;
    for (const auto& x : d.params) out += " " + x;
    out += ") " + printThread(d.body) + ")\n";
  }
  for (const auto& t : p.initial) out += "(run " + printThread(t) + ")\n";
  return out;
}

}  // namespace sl
