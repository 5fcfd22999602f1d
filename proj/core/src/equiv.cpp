#include "sl/equiv.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <limits>
#include <set>
#include <unordered_map>

#include "sl/errors.hpp"
#include "sl/mealy.hpp"
#include "sl/semantics.hpp"

namespace sl {

// ---------------------------------------------------------------------------
// Construction and printing

namespace pr {

ProcPtr nil() {
  static const ProcPtr z = std::make_shared<Proc>();
  return z;
}

ProcPtr emit(Name s) {
  auto p = std::make_shared<Proc>();
  p->kind = ProcKind::Emit;
  p->sig = std::move(s);
  return p;
}

ProcPtr present(Name s, ProcPtr then, ProcBranchPtr otherwise) {
  auto p = std::make_shared<Proc>();
  p->kind = ProcKind::Present;
  p->sig = std::move(s);
  p->a = std::move(then);
  p->otherwise = std::move(otherwise);
  return p;
}

ProcPtr par(ProcPtr a, ProcPtr b) {
  auto p = std::make_shared<Proc>();
  p->kind = ProcKind::Par;
  p->a = std::move(a);
  p->b = std::move(b);
  return p;
}

ProcPtr parAll(const std::vector<ProcPtr>& parts) {
  if (parts.empty()) return nil();
  ProcPtr acc = parts.back();
  for (auto it = parts.rbegin() + 1; it != parts.rend(); ++it) acc = par(*it, acc);
  return acc;
}

ProcPtr nu(Name s, ProcPtr body) {
  auto p = std::make_shared<Proc>();
  p->kind = ProcKind::Nu;
  p->sig = std::move(s);
  p->a = std::move(body);
  return p;
}

ProcPtr call(Name id, std::vector<Name> args) {
  auto p = std::make_shared<Proc>();
  p->kind = ProcKind::Call;
  p->id = std::move(id);
  p->args = std::move(args);
  return p;
}

ProcBranchPtr leaf(ProcPtr p) {
  auto b = std::make_shared<ProcBranch>();
  b->leaf = std::move(p);
  return b;
}

ProcBranchPtr ite(Name s, ProcBranchPtr then, ProcBranchPtr otherwise) {
  auto b = std::make_shared<ProcBranch>();
  b->sig = std::move(s);
  b->then = std::move(then);
  b->otherwise = std::move(otherwise);
  return b;
}

}  // namespace pr

ProcBranchPtr tailToProc(const BranchPtr& b) {
  if (b->isLeaf()) return pr::leaf(tailToProc(b->leaf));
  return pr::ite(b->sig, tailToProc(b->then), tailToProc(b->otherwise));
}

ProcPtr tailToProc(const TailPtr& t) {
  switch (t->kind) {
    case TailKind::Nil:
      return pr::nil();
    case TailKind::Emit:
      return pr::par(pr::emit(t->sig), tailToProc(t->a));
    case TailKind::New:
      return pr::nu(t->sig, tailToProc(t->a));
    case TailKind::Spawn:
      return pr::par(tailToProc(t->a), tailToProc(t->b));
    case TailKind::Present:
      return pr::present(t->sig, tailToProc(t->a), tailToProc(t->otherwise));
    case TailKind::Call:
      return pr::call(t->id, t->args);
  }
  return pr::nil();
}

ProcSystem tailDefsToProc(const TailProgram& p) {
  ProcSystem sys;
  for (const auto& [id, d] : p.defs) sys[id] = ProcDefinition{id, d.params, tailToProc(d.body)};
  return sys;
}

ProcPtr initialProc(const TailProgram& p) {
  std::vector<ProcPtr> parts;
  for (const auto& t : p.initial) parts.push_back(tailToProc(t));
  return pr::parAll(parts);
}

namespace {

void collectPar(const ProcPtr& p, std::vector<ProcPtr>& out) {
  if (p->kind == ProcKind::Par) {
    collectPar(p->a, out);
    collectPar(p->b, out);
  } else {
    out.push_back(p);
  }
}

void printBranch(const ProcBranchPtr& b, std::string& out);

void print(const ProcPtr& p, std::string& out) {
  switch (p->kind) {
    case ProcKind::Nil:
      out += '0';
      return;
    case ProcKind::Emit:
      out += "(emit " + p->sig + ')';
      return;
    case ProcKind::Present:
      out += "(present " + p->sig + ' ';
      print(p->a, out);
      out += ' ';
      printBranch(p->otherwise, out);
      out += ')';
      return;
    case ProcKind::Par: {
      std::vector<ProcPtr> parts;
      collectPar(p, parts);
      out += "(par";
      for (const auto& c : parts) {
        out += ' ';
        print(c, out);
      }
      out += ')';
      return;
    }
    case ProcKind::Nu:
      out += "(new " + p->sig + ' ';
      print(p->a, out);
      out += ')';
      return;
    case ProcKind::Call:
      out += "(call " + p->id;
      for (const auto& a : p->args) out += ' ' + a;
      out += ')';
      return;
  }
}

void printBranch(const ProcBranchPtr& b, std::string& out) {
  if (b->isLeaf()) {
    print(b->leaf, out);
    return;
  }
  out += "(ite " + b->sig + ' ';
  printBranch(b->then, out);
  out += ' ';
  printBranch(b->otherwise, out);
  out += ')';
}

void freeIn(const ProcPtr& p, NameSet& bound, NameSet& out);

void freeInBranch(const ProcBranchPtr& b, NameSet& bound, NameSet& out) {
  if (b->isLeaf()) {
    freeIn(b->leaf, bound, out);
    return;
  }
  if (!bound.count(b->sig)) out.insert(b->sig);
  freeInBranch(b->then, bound, out);
  freeInBranch(b->otherwise, bound, out);
}

void freeIn(const ProcPtr& p, NameSet& bound, NameSet& out) {
  auto use = [&](const Name& n) {
    if (!bound.count(n)) out.insert(n);
  };
  switch (p->kind) {
    case ProcKind::Nil:
      return;
    case ProcKind::Emit:
      use(p->sig);
      return;
    case ProcKind::Present:
      use(p->sig);
      freeIn(p->a, bound, out);
      freeInBranch(p->otherwise, bound, out);
      return;
    case ProcKind::Par:
      freeIn(p->a, bound, out);
      freeIn(p->b, bound, out);
      return;
    case ProcKind::Nu: {
      bool had = bound.count(p->sig) != 0;
      bound.insert(p->sig);
      freeIn(p->a, bound, out);
      if (!had) bound.erase(p->sig);
      return;
    }
    case ProcKind::Call:
      for (const auto& a : p->args) use(a);
      return;
  }
}

}  // namespace

std::string printProc(const ProcPtr& p) {
  std::string out;
  print(p, out);
  return out;
}

NameSet freeNames(const ProcPtr& p) {
  NameSet bound, out;
  freeIn(p, bound, out);
  return out;
}

std::string formatAction(const Action& a) {
  switch (a.kind) {
    case Action::Tau:
      return "tau";
    case Action::In:
      return a.sig;
    case Action::Out:
      return "out " + a.sig;
  }
  return {};
}

// ---------------------------------------------------------------------------
// Substitution, unfolding, normal form

namespace {

class Fresh {
 public:
  Name next() { return "%n" + std::to_string(k_++); }

 private:
  std::uint64_t k_ = 0;
};

Name lookup(const std::map<Name, Name>& m, const Name& n) {
  auto it = m.find(n);
  return it == m.end() ? n : it->second;
}

ProcPtr subst(const ProcPtr& p, const std::map<Name, Name>& m, Fresh& fresh);

ProcBranchPtr substBranch(const ProcBranchPtr& b, const std::map<Name, Name>& m, Fresh& fresh) {
  if (b->isLeaf()) return pr::leaf(subst(b->leaf, m, fresh));
  return pr::ite(lookup(m, b->sig), substBranch(b->then, m, fresh), substBranch(b->otherwise, m, fresh));
}

ProcPtr subst(const ProcPtr& p, const std::map<Name, Name>& m, Fresh& fresh) {
  if (m.empty()) return p;
  switch (p->kind) {
    case ProcKind::Nil:
      return p;
    case ProcKind::Emit:
      return pr::emit(lookup(m, p->sig));
    case ProcKind::Present:
      return pr::present(lookup(m, p->sig), subst(p->a, m, fresh), substBranch(p->otherwise, m, fresh));
    case ProcKind::Par:
      return pr::par(subst(p->a, m, fresh), subst(p->b, m, fresh));
    case ProcKind::Nu: {
      std::map<Name, Name> inner = m;
      inner.erase(p->sig);
      bool capture = false;
      for (const auto& [k, v] : inner)
        if (v == p->sig) capture = true;
      if (!capture) return pr::nu(p->sig, subst(p->a, inner, fresh));
      Name g = fresh.next();
      inner[p->sig] = g;
      return pr::nu(g, subst(p->a, inner, fresh));
    }
    case ProcKind::Call: {
      std::vector<Name> args;
      for (const auto& a : p->args) args.push_back(lookup(m, a));
      return pr::call(p->id, std::move(args));
    }
  }
  return p;
}

ProcPtr unfoldCall(const ProcPtr& c, const ProcSystem& sys, Fresh& fresh) {
  auto it = sys.find(c->id);
  if (it == sys.end()) throw UnboundIdentifier(c->id);
  const auto& d = it->second;
  if (d.params.size() != c->args.size()) throw ArityMismatch(c->id, d.params.size(), c->args.size());
  std::map<Name, Name> m;
  for (std::size_t i = 0; i < d.params.size(); ++i)
    if (d.params[i] != c->args[i]) m[d.params[i]] = c->args[i];
  return subst(d.body, m, fresh);
}

bool mayEmit(const ProcPtr& p, const Name& g);

bool mayEmitBranch(const ProcBranchPtr& b, const Name& g) {
  if (b->isLeaf()) return mayEmit(b->leaf, g);
  return mayEmitBranch(b->then, g) || mayEmitBranch(b->otherwise, g);
}

bool mayEmit(const ProcPtr& p, const Name& g) {
  switch (p->kind) {
    case ProcKind::Nil:
      return false;
    case ProcKind::Emit:
      return p->sig == g;
    case ProcKind::Present:
      return mayEmit(p->a, g) || mayEmitBranch(p->otherwise, g);
    case ProcKind::Par:
      return mayEmit(p->a, g) || mayEmit(p->b, g);
    case ProcKind::Nu:
      return p->sig != g && mayEmit(p->a, g);
    case ProcKind::Call:
      return std::find(p->args.begin(), p->args.end(), g) != p->args.end();
  }
  return false;
}

ProcPtr simplify(const ProcPtr& p);

ProcBranchPtr simplifyBranch(const ProcBranchPtr& b) {
  if (b->isLeaf()) return pr::leaf(simplify(b->leaf));
  return pr::ite(b->sig, simplifyBranch(b->then), simplifyBranch(b->otherwise));
}

// Structural laws: flattening, unit, idempotent emissions, dead binders.
ProcPtr simplify(const ProcPtr& p) {
  switch (p->kind) {
    case ProcKind::Nil:
    case ProcKind::Emit:
    case ProcKind::Call:
      return p;
    case ProcKind::Present:
      return pr::present(p->sig, simplify(p->a), simplifyBranch(p->otherwise));
    case ProcKind::Par: {
      std::vector<ProcPtr> raw, parts;
      collectPar(p, raw);
      std::vector<ProcPtr> flat;
      for (const auto& c : raw) collectPar(simplify(c), flat);
      NameSet emitted;
      for (const auto& c : flat) {
        if (c->kind == ProcKind::Nil) continue;
        if (c->kind == ProcKind::Emit && !emitted.insert(c->sig).second) continue;
        parts.push_back(c);
      }
      return pr::parAll(parts);
    }
    case ProcKind::Nu: {
      ProcPtr body = simplify(p->a);
      if (!freeNames(body).count(p->sig)) return body;
      if (!mayEmit(body, p->sig)) {
        Fresh unused;
        return subst(body, {{p->sig, kDeadSignal}}, unused);
      }
      return pr::nu(p->sig, body);
    }
  }
  return p;
}

ProcPtr levels(const ProcPtr& p, std::size_t depth, const std::map<Name, Name>& m, bool sortPar);

ProcBranchPtr levelsBranch(const ProcBranchPtr& b, std::size_t depth, const std::map<Name, Name>& m, bool sortPar) {
  if (b->isLeaf()) return pr::leaf(levels(b->leaf, depth, m, sortPar));
  return pr::ite(lookup(m, b->sig), levelsBranch(b->then, depth, m, sortPar),
                 levelsBranch(b->otherwise, depth, m, sortPar));
}

// Binders named by nesting level, compositions optionally sorted.
ProcPtr levels(const ProcPtr& p, std::size_t depth, const std::map<Name, Name>& m, bool sortPar) {
  switch (p->kind) {
    case ProcKind::Nil:
      return p;
    case ProcKind::Emit:
      return pr::emit(lookup(m, p->sig));
    case ProcKind::Present:
      return pr::present(lookup(m, p->sig), levels(p->a, depth, m, sortPar),
                         levelsBranch(p->otherwise, depth, m, sortPar));
    case ProcKind::Par: {
      std::vector<ProcPtr> parts;
      collectPar(p, parts);
      std::vector<std::pair<std::string, ProcPtr>> keyed;
      for (const auto& c : parts) {
        ProcPtr r = levels(c, depth, m, sortPar);
        keyed.emplace_back(printProc(r), r);
      }
      if (sortPar)
        std::stable_sort(keyed.begin(), keyed.end(),
                         [](const auto& x, const auto& y) { return x.first < y.first; });
      std::vector<ProcPtr> out;
      for (auto& [k, r] : keyed) out.push_back(r);
      return pr::parAll(out);
    }
    case ProcKind::Nu: {
      Name b = "%b" + std::to_string(depth);
      std::map<Name, Name> inner = m;
      inner[p->sig] = b;
      return pr::nu(b, levels(p->a, depth + 1, inner, sortPar));
    }
    case ProcKind::Call: {
      std::vector<Name> args;
      for (const auto& a : p->args) args.push_back(lookup(m, a));
      return pr::call(p->id, std::move(args));
    }
  }
  return p;
}

void steps(const ProcPtr& p, const ProcSystem& sys, Fresh& fresh, std::vector<std::pair<Action, ProcPtr>>& out) {
  switch (p->kind) {
    case ProcKind::Nil:
      return;
    case ProcKind::Emit:
      if (p->sig != kDeadSignal) out.push_back({Action{Action::Out, p->sig}, p});
      return;
    case ProcKind::Present:
      if (p->sig != kDeadSignal) out.push_back({Action{Action::In, p->sig}, pr::par(p->a, pr::emit(p->sig))});
      return;
    case ProcKind::Par: {
      std::vector<std::pair<Action, ProcPtr>> la, lb;
      steps(p->a, sys, fresh, la);
      steps(p->b, sys, fresh, lb);
      NameSet outA, outB;
      for (const auto& [a, q] : la)
        if (a.kind == Action::Out) outA.insert(a.sig);
      for (const auto& [a, q] : lb)
        if (a.kind == Action::Out) outB.insert(a.sig);
      for (const auto& [a, q] : la) {
        out.push_back({a, pr::par(q, p->b)});
        if (a.kind == Action::In && outB.count(a.sig)) out.push_back({Action{}, pr::par(q, p->b)});
      }
      for (const auto& [a, q] : lb) {
        out.push_back({a, pr::par(p->a, q)});
        if (a.kind == Action::In && outA.count(a.sig)) out.push_back({Action{}, pr::par(p->a, q)});
      }
      return;
    }
    case ProcKind::Nu: {
      std::vector<std::pair<Action, ProcPtr>> inner;
      steps(p->a, sys, fresh, inner);
      for (auto& [a, q] : inner)
        if (a.kind == Action::Tau || a.sig != p->sig) out.push_back({a, pr::nu(p->sig, q)});
      return;
    }
    case ProcKind::Call:
      out.push_back({Action{}, unfoldCall(p, sys, fresh)});
      return;
  }
}

bool hasTau(const ProcPtr& p, const ProcSystem& sys) {
  Fresh fresh;
  std::vector<std::pair<Action, ProcPtr>> out;
  steps(p, sys, fresh, out);
  for (const auto& [a, q] : out)
    if (a.kind == Action::Tau) return true;
  return false;
}

ProcPtr select(const ProcBranchPtr& b, const NameSet& s) {
  const ProcBranch* cur = b.get();
  while (!cur->isLeaf()) cur = s.count(cur->sig) ? cur->then.get() : cur->otherwise.get();
  return cur->leaf;
}

ProcPtr eoiRec(const ProcPtr& p, const NameSet& s) {
  switch (p->kind) {
    case ProcKind::Nil:
    case ProcKind::Emit:
      return pr::nil();
    case ProcKind::Present:
      return select(p->otherwise, s);
    case ProcKind::Par:
      return pr::par(eoiRec(p->a, s), eoiRec(p->b, s));
    case ProcKind::Nu: {
      NameSet inner = s;
      inner.erase(p->sig);
      if (emittedSet(p->a).count(p->sig)) inner.insert(p->sig);
      return pr::nu(p->sig, eoiRec(p->a, inner));
    }
    case ProcKind::Call:
      throw NotSuspended();
  }
  return p;
}

}  // namespace

std::vector<std::pair<Action, ProcPtr>> ltsSteps(const ProcPtr& p, const ProcSystem& sys, NameSupply&) {
  Fresh fresh;
  std::vector<std::pair<Action, ProcPtr>> out;
  steps(p, sys, fresh, out);
  return out;
}

NameSet emittedSet(const ProcPtr& p) {
  switch (p->kind) {
    case ProcKind::Emit:
      return {p->sig};
    case ProcKind::Par: {
      NameSet a = emittedSet(p->a);
      NameSet b = emittedSet(p->b);
      a.insert(b.begin(), b.end());
      return a;
    }
    case ProcKind::Nu: {
      NameSet a = emittedSet(p->a);
      a.erase(p->sig);
      return a;
    }
    default:
      return {};
  }
}

ProcPtr eoiProc(const ProcPtr& p, const ProcSystem& sys) {
  if (hasTau(p, sys)) throw NotSuspended();
  return eoiRec(p, emittedSet(p));
}

ProcPtr canonicalProc(const ProcPtr& p, bool sortPar) { return levels(simplify(p), 0, {}, sortPar); }

// ---------------------------------------------------------------------------
// Explored systems

ProcLts::ProcLts(const ProcSystem& sys, NameSet observable, LtsOptions opts) : sys_(sys), opts_(opts) {
  observable.erase(kDeadSignal);
  obs_.assign(observable.begin(), observable.end());
}

std::size_t ProcLts::add(const ProcPtr& p) {
  ProcPtr c = canonicalProc(p, opts_.sortPar);
  std::string k = printProc(c);
  auto it = index_.find(k);
  if (it != index_.end()) return it->second;
  if (states_.size() >= opts_.stateLimit) throw StateLimit(opts_.stateLimit);
  std::size_t i = states_.size();
  index_.emplace(k, i);
  states_.push_back(c);
  keys_.push_back(std::move(k));
  steps_.emplace_back();
  return i;
}

const std::vector<std::pair<Action, std::size_t>>& ProcLts::steps(std::size_t i) {
  if (!steps_[i]) {
    Fresh fresh;
    std::vector<std::pair<Action, ProcPtr>> raw;
    sl::steps(states_[i], sys_, fresh, raw);
    std::set<std::pair<Action, std::size_t>> seen;
    std::vector<std::pair<Action, std::size_t>> out;
    for (const auto& [a, q] : raw) {
      std::size_t j = add(q);
      if (seen.insert({a, j}).second) out.push_back({a, j});
    }
    steps_[i] = std::move(out);
  }
  return *steps_[i];
}

std::vector<std::size_t> ProcLts::tauSuccessors(std::size_t i) {
  std::vector<std::size_t> out;
  for (const auto& [a, j] : steps(i))
    if (a.kind == Action::Tau) out.push_back(j);
  return out;
}

bool ProcLts::suspended(std::size_t i) {
  for (const auto& [a, j] : steps(i))
    if (a.kind == Action::Tau) return false;
  return true;
}

NameSet ProcLts::barbs(std::size_t i) {
  NameSet out;
  for (const auto& [a, j] : steps(i))
    if (a.kind == Action::Out) out.insert(a.sig);
  return out;
}

std::vector<std::size_t> ProcLts::tauClosure(std::size_t i) {
  std::vector<std::size_t> order{i};
  std::set<std::size_t> seen{i};
  for (std::size_t k = 0; k < order.size(); ++k)
    for (auto j : tauSuccessors(order[k]))
      if (seen.insert(j).second) order.push_back(j);
  return order;
}

std::size_t ProcLts::eoi(std::size_t i) {
  auto it = eoi_.find(i);
  if (it != eoi_.end()) return it->second;
  std::size_t j = add(eoiProc(states_[i], sys_));
  eoi_[i] = j;
  return j;
}

std::size_t ProcLts::withEmits(std::size_t i, std::uint32_t mask) {
  if (mask == 0) return i;
  auto it = emits_.find({i, mask});
  if (it != emits_.end()) return it->second;
  std::vector<ProcPtr> parts{states_[i]};
  for (std::size_t k = 0; k < obs_.size(); ++k)
    if (mask & (1u << k)) parts.push_back(pr::emit(obs_[k]));
  std::size_t j = add(pr::parAll(parts));
  emits_[{i, mask}] = j;
  return j;
}

namespace {

constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

// Breadth-first closure under transitions, emission contexts and end of
// instant. States at distance `depth` are left unexpanded.
std::vector<char> explore(ProcLts& lts, const std::vector<std::size_t>& roots, bool contexts, std::size_t depth) {
  std::vector<std::size_t> dist(lts.size(), kUnbounded);
  std::deque<std::size_t> queue;
  auto reach = [&](std::size_t j, std::size_t d) {
    if (j >= dist.size()) dist.resize(lts.size(), kUnbounded);
    if (dist[j] == kUnbounded) {
      dist[j] = d;
      queue.push_back(j);
    }
  };
  for (auto r : roots) reach(r, 0);
  std::vector<char> expanded;
  while (!queue.empty()) {
    std::size_t i = queue.front();
    queue.pop_front();
    if (dist[i] >= depth) continue;
    if (expanded.size() < lts.size()) expanded.resize(lts.size(), 0);
    expanded[i] = 1;
    std::size_t d = dist[i] + 1;
    for (const auto& [a, j] : lts.steps(i)) reach(j, d);
    if (contexts) {
      std::uint32_t masks = 1u << lts.observable().size();
      for (std::uint32_t m = 1; m < masks; ++m) reach(lts.withEmits(i, m), d);
    }
    if (lts.suspended(i)) reach(lts.eoi(i), d);
  }
  expanded.resize(lts.size(), 0);
  return expanded;
}

// Reverse reachability of suspended states, over tau edges only or over
// every labelled edge.
std::vector<char> canSuspend(ProcLts& lts, const std::vector<char>& expanded, bool labelled) {
  std::size_t n = expanded.size();
  std::vector<std::vector<std::size_t>> rev(n);
  std::vector<char> ok(n, 0);
  std::vector<std::size_t> work;
  for (std::size_t i = 0; i < n; ++i) {
    if (!expanded[i]) continue;
    if (lts.suspended(i)) {
      ok[i] = 1;
      work.push_back(i);
    }
    for (const auto& [a, j] : lts.steps(i))
      if ((labelled || a.kind == Action::Tau) && j < n) rev[j].push_back(i);
  }
  while (!work.empty()) {
    std::size_t j = work.back();
    work.pop_back();
    for (auto i : rev[j])
      if (!ok[i]) {
        ok[i] = 1;
        work.push_back(i);
      }
  }
  return ok;
}

}  // namespace

Suspension suspension(const ProcSystem& sys, const ProcPtr& p, const LtsOptions& opts) {
  ProcLts lts(sys, {}, opts);
  std::size_t root = lts.add(p);
  Suspension s;
  s.now = lts.suspended(root);
  for (auto j : lts.tauClosure(root))
    if (lts.suspended(j)) s.weak = true;
  std::vector<std::size_t> order{root};
  std::set<std::size_t> seen{root};
  for (std::size_t k = 0; k < order.size() && !s.labelled; ++k) {
    if (lts.suspended(order[k])) s.labelled = true;
    for (const auto& [a, j] : lts.steps(order[k]))
      if (seen.insert(j).second) order.push_back(j);
  }
  return s;
}

SuspensionSurvey surveySuspension(const ProcSystem& sys, const ProcPtr& p, const NameSet& observable,
                                  const LtsOptions& opts) {
  NameSet obs = observable;
  NameSet fn = freeNames(p);
  obs.insert(fn.begin(), fn.end());
  ProcLts lts(sys, obs, opts);
  std::size_t root = lts.add(p);
  auto expanded = explore(lts, {root}, true, kUnbounded);
  auto weak = canSuspend(lts, expanded, false);
  auto lab = canSuspend(lts, expanded, true);
  SuspensionSurvey out;
  out.states = expanded.size();
  for (std::size_t i = 0; i < expanded.size(); ++i)
    if (weak[i] != lab[i]) {
      out.disagreement = lts.key(i);
      break;
    }
  return out;
}

// ---------------------------------------------------------------------------
// Bisimulation

std::string verdictName(EquivResult::Verdict v) {
  switch (v) {
    case EquivResult::Equivalent:
      return "equivalent";
    case EquivResult::Distinguished:
      return "distinguished";
    case EquivResult::Inconclusive:
      return "inconclusive";
  }
  return {};
}

namespace {

void callsIn(const ProcPtr& p, std::vector<Name>& out) {
  switch (p->kind) {
    case ProcKind::Call:
      out.push_back(p->id);
      return;
    case ProcKind::Present: {
      callsIn(p->a, out);
      std::vector<const ProcBranch*> st{p->otherwise.get()};
      while (!st.empty()) {
        auto b = st.back();
        st.pop_back();
        if (b->isLeaf())
          callsIn(b->leaf, out);
        else {
          st.push_back(b->then.get());
          st.push_back(b->otherwise.get());
        }
      }
      return;
    }
    case ProcKind::Par:
      callsIn(p->a, out);
      callsIn(p->b, out);
      return;
    case ProcKind::Nu:
      callsIn(p->a, out);
      return;
    default:
      return;
  }
}

bool liveNu(const ProcPtr& p) {
  switch (p->kind) {
    case ProcKind::Present: {
      if (liveNu(p->a)) return true;
      std::vector<const ProcBranch*> st{p->otherwise.get()};
      while (!st.empty()) {
        auto b = st.back();
        st.pop_back();
        if (b->isLeaf()) {
          if (liveNu(b->leaf)) return true;
        } else {
          st.push_back(b->then.get());
          st.push_back(b->otherwise.get());
        }
      }
      return false;
    }
    case ProcKind::Par:
      return liveNu(p->a) || liveNu(p->b);
    case ProcKind::Nu:
      return mayEmit(p->a, p->sig) || liveNu(p->a);
    default:
      return false;
  }
}

}  // namespace

bool hasLiveGenerationInRecursion(const ProcSystem& sys, const ProcPtr& p) {
  std::map<Name, std::vector<Name>> edges;
  std::vector<Name> reach;
  callsIn(p, reach);
  std::set<Name> seen(reach.begin(), reach.end());
  for (std::size_t k = 0; k < reach.size(); ++k) {
    auto it = sys.find(reach[k]);
    if (it == sys.end()) throw UnboundIdentifier(reach[k]);
    auto& e = edges[reach[k]];
    callsIn(it->second.body, e);
    for (const auto& c : e)
      if (seen.insert(c).second) reach.push_back(c);
  }
  // Definitions on a cycle, then everything they can call: only these can
  // be instantiated unboundedly often.
  std::map<Name, std::set<Name>> closure;
  for (const auto& id : reach) {
    std::vector<Name> stack(edges[id].begin(), edges[id].end());
    auto& out = closure[id];
    while (!stack.empty()) {
      Name n = stack.back();
      stack.pop_back();
      if (!out.insert(n).second) continue;
      for (const auto& c : edges[n]) stack.push_back(c);
    }
  }
  std::set<Name> repeated;
  for (const auto& id : reach)
    if (closure[id].count(id)) repeated.insert(closure[id].begin(), closure[id].end());
  for (const auto& id : repeated)
    if (liveNu(sys.at(id).body)) return true;
  return false;
}

namespace {

std::string maskText(std::uint32_t mask, const std::vector<Name>& names) {
  NameSet s;
  for (std::size_t k = 0; k < names.size(); ++k)
    if (mask & (1u << k)) s.insert(names[k]);
  return formatSet(s);
}

// Greatest fixed point of the labelled bisimulation conditions over the
// pairs reachable from (P, Q). Unexpanded states are wildcards that match
// every requirement, so a removed pair is always a genuine distinction.
class Refinement {
 public:
  Refinement(ProcLts& lts, std::vector<char> expanded, bool labelledSusp)
      : lts_(lts), expanded_(std::move(expanded)) {
    std::size_t n = expanded_.size();
    weak_ = canSuspend(lts_, expanded_, labelledSusp);
    clos_.resize(n);
    // A wildcard may suspend.
    for (std::size_t i = 0; i < n; ++i)
      if (!expanded_[i]) weak_[i] = 1;
    propagateWildSuspension();
  }

  // Rounds of simultaneous removal: a pair removed in round k is told apart
  // by k nested challenges, so witnesses follow decreasing rounds.
  bool run(std::size_t p, std::size_t q) {
    discover(p, q);
    std::vector<std::uint64_t> live;
    for (const auto& [k, info] : pairs_) live.push_back(k);
    for (std::size_t round = 1;; ++round) {
      limit_ = round;
      std::vector<std::uint64_t> removed, kept;
      for (auto k : live) {
        std::size_t a = static_cast<std::size_t>(k >> 32), b = static_cast<std::size_t>(k & 0xffffffffu);
        if (challenge(a, b) || challenge(b, a))
          removed.push_back(k);
        else
          kept.push_back(k);
      }
      if (removed.empty()) break;
      for (auto k : removed) pairs_.at(k).round = round;
      live.swap(kept);
    }
    limit_ = std::numeric_limits<std::size_t>::max();
    return rel(p, q);
  }

  bool wildcards() const {
    for (char e : expanded_)
      if (!e) return true;
    return false;
  }

  std::size_t pairCount() const { return pairs_.size(); }

  std::vector<std::string> witness(std::size_t p, std::size_t q) {
    std::vector<std::string> out;
    std::size_t left = p, right = q;
    while (true) {
      limit_ = pairs_.at(keyOf(left, right)).round;
      bool fromLeft = true;
      std::optional<Reason> r = challenge(left, right);
      if (!r) {
        r = challenge(right, left);
        fromLeft = false;
      }
      if (!r) break;
      std::string text = r->text;
      auto pos = text.find("{side}");
      if (pos != std::string::npos) text.replace(pos, 6, fromLeft ? "left" : "right");
      pos = text.find("{other}");
      if (pos != std::string::npos) text.replace(pos, 7, fromLeft ? "right" : "left");
      if (!text.empty()) out.push_back(text);
      if (r->terminal) break;
      left = fromLeft ? r->nextChallenger : r->nextResponder;
      right = fromLeft ? r->nextResponder : r->nextChallenger;
    }
    limit_ = std::numeric_limits<std::size_t>::max();
    return out;
  }

 private:
  struct Reason {
    std::size_t challenger = 0, responder = 0;
    std::string text;
    bool terminal = true;
    std::size_t nextChallenger = 0, nextResponder = 0;
  };
  struct PairInfo {
    std::size_t round = 0;  // 0 while related
  };

  ProcLts& lts_;
  std::vector<char> expanded_;
  std::vector<char> weak_;
  std::vector<std::optional<std::vector<std::size_t>>> clos_;
  std::unordered_map<std::uint64_t, PairInfo> pairs_;
  std::size_t limit_ = std::numeric_limits<std::size_t>::max();

  static std::uint64_t keyOf(std::size_t a, std::size_t b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | b;
  }
  bool wild(std::size_t i) const { return !expanded_[i]; }

  void propagateWildSuspension() {
    // Predecessors (by tau) of a wildcard may reach a suspended state.
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t i = 0; i < expanded_.size(); ++i) {
        if (!expanded_[i] || weak_[i]) continue;
        for (auto j : lts_.tauSuccessors(i))
          if (weak_[j]) {
            weak_[i] = 1;
            changed = true;
            break;
          }
      }
    }
  }

  const std::vector<std::size_t>& closure(std::size_t i) {
    if (!clos_[i]) {
      std::vector<std::size_t> order{i};
      std::set<std::size_t> seen{i};
      for (std::size_t k = 0; k < order.size(); ++k) {
        if (wild(order[k])) continue;
        for (auto j : lts_.tauSuccessors(order[k]))
          if (seen.insert(j).second) order.push_back(j);
      }
      clos_[i] = std::move(order);
    }
    return *clos_[i];
  }

  bool suspendedOrWild(std::size_t i) { return wild(i) || lts_.suspended(i); }
  std::size_t eoiOrSelf(std::size_t i) { return wild(i) ? i : lts_.eoi(i); }

  bool rel(std::size_t a, std::size_t b) {
    if (wild(a) || wild(b) || a == b) return true;
    auto it = pairs_.find(keyOf(a, b));
    return it == pairs_.end() || it->second.round == 0 || it->second.round >= limit_;
  }

  std::uint32_t bitOf(const Name& s) const {
    const auto& obs = lts_.observable();
    auto it = std::find(obs.begin(), obs.end(), s);
    return it == obs.end() ? 0 : 1u << (it - obs.begin());
  }

  std::vector<std::size_t> weakInput(std::size_t y, const Name& s, bool& wildSeen) {
    std::vector<std::size_t> out;
    for (auto y1 : closure(y)) {
      if (wild(y1)) {
        wildSeen = true;
        continue;
      }
      for (const auto& [a, y2] : lts_.steps(y1))
        if (a.kind == Action::In && a.sig == s)
          for (auto y3 : closure(y2)) out.push_back(y3);
    }
    return out;
  }

  // Every pair the conditions of (x, y) may consult, with x challenging.
  void dependencies(std::size_t x, std::size_t y, std::vector<std::pair<std::size_t, std::size_t>>& out) {
    if (wild(x) || wild(y)) return;
    for (auto x1 : lts_.tauSuccessors(x))
      for (auto y1 : closure(y)) out.push_back({x1, y1});
    std::uint32_t masks = 1u << lts_.observable().size();
    for (std::uint32_t m = 0; m < masks; ++m) {
      std::size_t xs = lts_.withEmits(x, m);
      if (wild(xs) || !lts_.suspended(xs)) continue;
      for (auto y1 : closure(lts_.withEmits(y, m)))
        if (suspendedOrWild(y1)) {
          out.push_back({xs, y1});
          out.push_back({lts_.eoi(xs), eoiOrSelf(y1)});
        }
    }
    for (auto y1 : closure(y)) out.push_back({x, y1});
    for (const auto& [a, x1] : lts_.steps(x)) {
      if (a.kind != Action::In) continue;
      bool w = false;
      for (auto y1 : weakInput(y, a.sig, w)) out.push_back({x1, y1});
      if (std::uint32_t bit = bitOf(a.sig))
        for (auto y1 : closure(y))
          if (!wild(y1)) out.push_back({x1, lts_.withEmits(y1, bit)});
    }
  }

  void discover(std::size_t p, std::size_t q) {
    std::deque<std::pair<std::size_t, std::size_t>> queue{{p, q}};
    if (p != q) pairs_[keyOf(p, q)];
    std::vector<std::pair<std::size_t, std::size_t>> deps;
    while (!queue.empty()) {
      auto [a, b] = queue.front();
      queue.pop_front();
      deps.clear();
      dependencies(a, b, deps);
      dependencies(b, a, deps);
      for (auto [c, d] : deps) {
        if (c == d || wild(c) || wild(d)) continue;
        if (pairs_.try_emplace(keyOf(c, d)).second) queue.push_back({c, d});
      }
    }
  }

  std::optional<Reason> challenge(std::size_t x, std::size_t y) {
    if (wild(x) || wild(y)) return std::nullopt;
    Reason r;
    r.challenger = x;
    r.responder = y;
    // B1
    for (auto x1 : lts_.tauSuccessors(x)) {
      bool ok = false;
      for (auto y1 : closure(y))
        if (rel(x1, y1)) {
          ok = true;
          break;
        }
      if (!ok) {
        r.text = "";
        r.terminal = false;
        r.nextChallenger = x1;
        r.nextResponder = y;
        return r;
      }
    }
    // L1, with the empty context as B2
    std::uint32_t masks = 1u << lts_.observable().size();
    for (std::uint32_t m = 0; m < masks; ++m) {
      std::size_t xs = lts_.withEmits(x, m);
      if (wild(xs) || !lts_.suspended(xs)) continue;
      std::size_t ex = lts_.eoi(xs);
      std::vector<std::size_t> cands;
      for (auto y1 : closure(lts_.withEmits(y, m)))
        if (suspendedOrWild(y1)) cands.push_back(y1);
      bool ok = false;
      for (auto y1 : cands)
        if (rel(xs, y1) && rel(ex, eoiOrSelf(y1))) {
          ok = true;
          break;
        }
      if (ok) continue;
      std::string ctx = m ? "emit " + maskText(m, lts_.observable()) + ": " : "";
      if (cands.empty()) {
        r.text = ctx + "{side} suspends, {other} does not";
        r.terminal = true;
        return r;
      }
      r.terminal = false;
      if (!rel(xs, cands[0])) {
        r.text = m ? "emit " + maskText(m, lts_.observable()) : "";
        r.nextChallenger = xs;
        r.nextResponder = cands[0];
      } else {
        r.text = ctx + "end of instant";
        r.nextChallenger = ex;
        r.nextResponder = eoiOrSelf(cands[0]);
      }
      return r;
    }
    // B3
    NameSet barbs = lts_.barbs(x);
    if (!barbs.empty() && weak_[x]) {
      for (const auto& s : barbs) {
        std::size_t withBarb = 0;
        bool any = false, ok = false;
        for (auto y1 : closure(y)) {
          if (!wild(y1) && !lts_.barbs(y1).count(s)) continue;
          if (!any) withBarb = y1;
          any = true;
          if (rel(x, y1)) {
            ok = true;
            break;
          }
        }
        if (ok) continue;
        if (!any) {
          r.text = "{side} emits " + s + ", {other} does not";
          r.terminal = true;
        } else {
          r.text = "";
          r.terminal = false;
          r.nextChallenger = x;
          r.nextResponder = withBarb;
        }
        return r;
      }
    }
    // L2
    for (const auto& [a, x1] : lts_.steps(x)) {
      if (a.kind != Action::In) continue;
      bool w = false;
      auto ins = weakInput(y, a.sig, w);
      if (w) continue;
      bool ok = false;
      for (auto y1 : ins)
        if (rel(x1, y1)) {
          ok = true;
          break;
        }
      std::uint32_t bit = bitOf(a.sig);
      std::size_t alt = 0;
      bool haveAlt = false;
      if (!ok && bit)
        for (auto y1 : closure(y)) {
          std::size_t z = wild(y1) ? y1 : lts_.withEmits(y1, bit);
          if (!haveAlt) alt = z;
          haveAlt = true;
          if (rel(x1, z)) {
            ok = true;
            break;
          }
        }
      if (ok) continue;
      r.text = "input " + a.sig + " on {side}";
      r.terminal = false;
      r.nextChallenger = x1;
      r.nextResponder = ins.empty() ? alt : ins.front();
      if (ins.empty() && !haveAlt) {
        r.terminal = true;
        r.text = "{side} reads " + a.sig + ", {other} cannot match";
      }
      return r;
    }
    return std::nullopt;
  }
};

// The I/O behaviour of a state as a Mealy machine over the observable
// signals; the extra output bit marks an instant that never suspends.
MealyMachine ioMachine(ProcLts& lts, std::size_t root) {
  const auto& obs = lts.observable();
  if (obs.size() > 12) throw ArityTooLarge(static_cast<int>(obs.size()));
  MealyMachine m;
  m.n = static_cast<unsigned>(obs.size());
  m.m = m.n + 1;
  std::uint32_t diverge = 1u << m.n;
  std::map<std::size_t, std::size_t> index;
  std::deque<std::size_t> todo;
  auto stateOf = [&](std::size_t s) {
    auto it = index.find(s);
    if (it != index.end()) return it->second;
    std::size_t q = m.addState("q" + std::to_string(index.size()));
    index.emplace(s, q);
    todo.push_back(s);
    return q;
  };
  m.init = stateOf(root);
  std::optional<std::size_t> sink;
  while (!todo.empty()) {
    std::size_t s = todo.front();
    todo.pop_front();
    std::size_t q = index.at(s);
    for (std::uint32_t x = 0; x < m.letters(); ++x) {
      std::size_t start = lts.withEmits(s, x);
      std::optional<std::size_t> end;
      for (auto j : lts.tauClosure(start))
        if (lts.suspended(j)) {
          end = j;
          break;
        }
      if (!end) {
        if (!sink) {
          sink = m.addState("diverged");
          for (std::uint32_t y = 0; y < m.letters(); ++y) {
            m.next[*sink][y] = *sink;
            m.out[*sink][y] = diverge;
          }
        }
        m.next[q][x] = *sink;
        m.out[q][x] = diverge;
        continue;
      }
      std::uint32_t o = 0;
      NameSet barbs = lts.barbs(*end);
      for (std::size_t k = 0; k < obs.size(); ++k)
        if (barbs.count(obs[k])) o |= 1u << k;
      m.out[q][x] = o;
      m.next[q][x] = stateOf(lts.eoi(*end));
    }
  }
  return m;
}

std::string outputText(std::uint32_t o, const std::vector<Name>& obs) {
  if (o & (1u << obs.size())) return "diverges";
  return maskText(o, obs);
}

}  // namespace

EquivResult bisimCheck(const ProcSystem& sys, const ProcPtr& p, const ProcPtr& q, const NameSet& observable,
                       const EquivOptions& opts) {
  NameSet obs = observable;
  for (const auto& n : freeNames(p)) obs.insert(n);
  for (const auto& n : freeNames(q)) obs.insert(n);
  obs.erase(kDeadSignal);
  if (obs.size() > 12) throw ArityTooLarge(static_cast<int>(obs.size()));
  if (opts.mode == EquivMode::Exact && (hasLiveGenerationInRecursion(sys, p) || hasLiveGenerationInRecursion(sys, q)))
    throw NotFiniteState();
  ProcLts lts(sys, obs, LtsOptions{opts.stateLimit, opts.sortPar});
  std::size_t a = lts.add(p), b = lts.add(q);
  EquivResult res;

  if (opts.mode == EquivMode::Trace) {
    MealyMachine ma = ioMachine(lts, a), mb = ioMachine(lts, b);
    res.states = lts.size();
    auto r = mealyTraceEquiv(ma, mb);
    if (r.equivalent) return res;
    res.verdict = EquivResult::Distinguished;
    auto oa = runMealy(ma, r.witness), ob = runMealy(mb, r.witness);
    for (std::size_t i = 0; i < r.witness.size(); ++i)
      res.witness.push_back("instant " + std::to_string(i + 1) + ": inputs " + maskText(r.witness[i], lts.observable()) +
                            " -> left " + outputText(oa[i], lts.observable()) + ", right " +
                            outputText(ob[i], lts.observable()));
    return res;
  }

  std::size_t depth = opts.mode == EquivMode::Bounded ? opts.depth : kUnbounded;
  auto expanded = explore(lts, {a, b}, true, depth);
  Refinement ref(lts, expanded, opts.labelledSuspension);
  bool related = ref.run(a, b);
  res.states = expanded.size();
  res.depth = depth == kUnbounded ? 0 : depth;
  if (!related) {
    res.verdict = EquivResult::Distinguished;
    res.witness = ref.witness(a, b);
  } else if (ref.wildcards()) {
    res.verdict = EquivResult::Inconclusive;
  }
  return res;
}

namespace {

ProcPtr renameIds(const ProcPtr& p, const std::string& prefix);

ProcBranchPtr renameIdsBranch(const ProcBranchPtr& b, const std::string& prefix) {
  if (b->isLeaf()) return pr::leaf(renameIds(b->leaf, prefix));
  return pr::ite(b->sig, renameIdsBranch(b->then, prefix), renameIdsBranch(b->otherwise, prefix));
}

ProcPtr renameIds(const ProcPtr& p, const std::string& prefix) {
  switch (p->kind) {
    case ProcKind::Present:
      return pr::present(p->sig, renameIds(p->a, prefix), renameIdsBranch(p->otherwise, prefix));
    case ProcKind::Par:
      return pr::par(renameIds(p->a, prefix), renameIds(p->b, prefix));
    case ProcKind::Nu:
      return pr::nu(p->sig, renameIds(p->a, prefix));
    case ProcKind::Call:
      return pr::call(prefix + p->id, p->args);
    default:
      return p;
  }
}

}  // namespace

EquivResult equivPrograms(const TailProgram& a, const TailProgram& b, const EquivOptions& opts) {
  ProcSystem sys;
  for (const auto& [id, d] : tailDefsToProc(a)) sys["l:" + id] = ProcDefinition{"l:" + id, d.params, renameIds(d.body, "l:")};
  for (const auto& [id, d] : tailDefsToProc(b)) sys["r:" + id] = ProcDefinition{"r:" + id, d.params, renameIds(d.body, "r:")};
  NameSet obs = a.interface();
  NameSet ib = b.interface();
  obs.insert(ib.begin(), ib.end());
  return bisimCheck(sys, renameIds(initialProc(a), "l:"), renameIds(initialProc(b), "r:"), obs, opts);
}

// ---------------------------------------------------------------------------
// Confluence

ConfluenceReport confluenceCheck(const ProcSystem& sys, const ProcPtr& p, std::size_t maxDepth,
                                 std::size_t stateLimit) {
  ProcLts lts(sys, freeNames(p), LtsOptions{stateLimit, true});
  ConfluenceReport rep;
  std::size_t root = lts.add(p);
  std::vector<std::size_t> dist{0};
  std::deque<std::size_t> queue{root};
  std::map<std::size_t, std::size_t> depthOf{{root, 0}};
  auto fail = [&](std::size_t i, const std::string& why) {
    rep.ok = false;
    rep.violation = why + " at " + lts.key(i);
  };
  while (!queue.empty() && rep.ok) {
    std::size_t i = queue.front();
    queue.pop_front();
    ++rep.states;
    auto st = lts.steps(i);
    NameSet barbs = lts.barbs(i);
    for (const auto& [a, j] : st) {
      if (a.kind == Action::Out && j != i) return fail(i, "emission is not a self-loop"), rep;
      NameSet after = lts.barbs(j);
      for (const auto& s : barbs)
        if (!after.count(s)) return fail(i, "barb " + s + " lost by " + formatAction(a)), rep;
      if (a.kind == Action::In && !after.count(a.sig)) return fail(i, "input " + a.sig + " without barb"), rep;
      std::size_t d = depthOf[i] + 1;
      if (d <= maxDepth && depthOf.emplace(j, d).second) queue.push_back(j);
    }
    for (std::size_t u = 0; u < st.size(); ++u)
      for (std::size_t v = u + 1; v < st.size(); ++v) {
        auto [a1, p1] = st[u];
        auto [a2, p2] = st[v];
        if (p1 == p2) continue;
        ++rep.pairs;
        auto s1 = lts.steps(p1);
        auto s2 = lts.steps(p2);
        bool joined = false;
        for (const auto& [b1, q1] : s1) {
          if (!(b1 == a2)) continue;
          for (const auto& [b2, q2] : s2)
            if (b2 == a1 && q1 == q2) joined = true;
          if (joined) break;
        }
        if (!joined)
          return fail(i, "no diamond for " + formatAction(a1) + " / " + formatAction(a2)), rep;
      }
  }
  return rep;
}

namespace {

struct Config {
  std::vector<ThreadPtr> threads;
  Environment env;
  std::size_t instant = 0;
};

std::string configKey(const Config& c, const NameSet& iface) {
  NameSet present = c.env.presentSignals();
  return std::to_string(c.instant) + "|" + canonicalKey(c.threads, iface, &present);
}

Config startInstant(const SourceProgram& prog, std::vector<ThreadPtr> threads, const NameSet& in,
                    std::uint64_t fresh, std::size_t instant) {
  Config c{std::move(threads), Environment(fresh), instant};
  for (const auto& n : prog.inputs) c.env.set(n, in.count(n) != 0);
  for (const auto& n : prog.outputs) c.env.set(n, false);
  NameSet fs;
  for (const auto& t : c.threads) collectFreeSignals(t, fs);
  for (const auto& n : fs)
    if (!c.env.defined(n)) c.env.set(n, false);
  return c;
}

std::optional<Config> stepAt(const Config& c, std::size_t i, const SourceProgram& prog) {
  Config n = c;
  auto r = stepThread(n.threads[i], n.env, prog);
  if (!r) return std::nullopt;
  n.threads[i] = r->next;
  for (auto& s : r->spawned) n.threads.push_back(s);
  return n;
}

}  // namespace

ConfluenceReport sourceConfluence(const SourceProgram& prog, std::size_t instants, std::size_t stateLimit) {
  ConfluenceReport rep;
  NameSet iface = prog.interface();
  auto inputs = allSubsets(prog.inputs);
  std::deque<Config> queue;
  std::set<std::string> seen;
  std::uint64_t fresh = static_cast<std::uint64_t>(maxGeneratedIndex(prog) + 1);
  auto push = [&](Config c) {
    std::string k = configKey(c, iface);
    if (!seen.insert(k).second) return;
    if (seen.size() > stateLimit) throw StateLimit(stateLimit);
    queue.push_back(std::move(c));
  };
  for (const auto& in : inputs) push(startInstant(prog, prog.initial, in, fresh, 0));
  while (!queue.empty()) {
    Config c = std::move(queue.front());
    queue.pop_front();
    ++rep.states;
    std::vector<std::pair<std::size_t, Config>> succ;
    for (std::size_t i = 0; i < c.threads.size(); ++i)
      if (auto n = stepAt(c, i, prog)) succ.emplace_back(i, std::move(*n));
    if (succ.empty()) {
      if (c.instant + 1 >= instants) continue;
      std::vector<ThreadPtr> rest;
      for (auto& t : endOfInstant(c.threads, c.env))
        if (t->kind != TK::Nil) rest.push_back(t);
      for (const auto& in : inputs) push(startInstant(prog, rest, in, c.env.freshCounter(), c.instant + 1));
      continue;
    }
    for (std::size_t u = 0; u < succ.size(); ++u)
      for (std::size_t v = u + 1; v < succ.size(); ++v) {
        const auto& [i, c1] = succ[u];
        const auto& [j, c2] = succ[v];
        if (configKey(c1, iface) == configKey(c2, iface)) continue;
        ++rep.pairs;
        auto c12 = stepAt(c1, j, prog);
        auto c21 = stepAt(c2, i, prog);
        if (!c12 || !c21 || configKey(*c12, iface) != configKey(*c21, iface)) {
          rep.ok = false;
          rep.violation = "threads " + std::to_string(i) + " and " + std::to_string(j) + " do not commute at " +
                          configKey(c, iface);
          return rep;
        }
      }
    for (auto& [i, n] : succ) push(std::move(n));
  }
  return rep;
}

}  // namespace sl
