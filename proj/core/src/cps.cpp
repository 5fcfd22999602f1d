#include "sl/cps.hpp"

#include "canon_util.hpp"
#include "sl/errors.hpp"

namespace sl {

namespace {

TailPtr renameTail(const TailPtr& t, detail::Renamer& r);

BranchPtr renameBranch(const BranchPtr& b, detail::Renamer& r) {
  if (b->isLeaf()) return tl::leaf(renameTail(b->leaf, r));
  Name s = r.use(b->sig);
  BranchPtr x = renameBranch(b->then, r);
  return tl::ite(s, x, renameBranch(b->otherwise, r));
}

TailPtr renameTail(const TailPtr& t, detail::Renamer& r) {
  switch (t->kind) {
    case TailKind::Nil:
      return t;
    case TailKind::Emit: {
      Name s = r.use(t->sig);
      return tl::emit(s, renameTail(t->a, r));
    }
    case TailKind::New: {
      Name b = r.bind(t->sig);
      TailPtr body = renameTail(t->a, r);
      r.unbind();
      return tl::nu(b, body);
    }
    case TailKind::Spawn: {
      TailPtr a = renameTail(t->a, r);
      return tl::spawn(a, renameTail(t->b, r));
    }
    case TailKind::Present: {
      Name s = r.use(t->sig);
      TailPtr a = renameTail(t->a, r);
      return tl::present(s, a, renameBranch(t->otherwise, r));
    }
    case TailKind::Call: {
      std::vector<Name> args;
      for (const auto& n : t->args) args.push_back(r.use(n));
      return tl::call(t->id, std::move(args));
    }
  }
  return t;
}

// Canonical image of an optional leading signal and (t, tau), with the
// original free names listed in the order of their %p index.
struct Canon {
  std::string key;
  Name sig;
  TailPtr t;
  KappaList tau;
  std::vector<Name> actuals;
  std::vector<Name> formals;
};

Canon canonical(const Name* lead, const TailPtr& t, const KappaList& tau, const NameSet& iface) {
  detail::Renamer r(iface, false, "%p");
  Canon c;
  if (lead) {
    c.sig = r.use(*lead);
    c.key += c.sig + " ; ";
  }
  c.t = renameTail(t, r);
  c.key += printTail(c.t);
  for (const auto& [s, k] : tau) {
    r.resetScope();
    Name cs = r.use(s);
    TailPtr ck = renameTail(k, r);
    c.key += " ; (" + cs + ' ' + printTail(ck) + ')';
    c.tau.push_back({cs, ck});
  }
  c.actuals.resize(r.freeMap().size());
  c.formals.resize(r.freeMap().size());
  for (const auto& [orig, canon] : r.freeMap()) {
    auto i = std::stoul(canon.substr(2));
    c.actuals[i] = orig;
    c.formals[i] = canon;
  }
  return c;
}

// Pause as in the derived table: new s (new s' (emit s'; watch s' (await s))).
ThreadPtr derivedPause(NameSupply& names) {
  Name s = names.fresh(), k = names.fresh();
  return th::nu(s, th::nu(k, th::seq(th::emit(k), th::watch(k, th::await(s)))));
}

}  // namespace

std::string canonicalTailText(const TailPtr& t, const NameSet& iface) {
  detail::Renamer r(iface, false, "%p");
  return printTail(renameTail(t, r));
}

BranchPtr kappaCascade(const KappaList& tau, const BranchPtr& last) {
  BranchPtr acc = last;
  for (auto it = tau.rbegin(); it != tau.rend(); ++it) acc = tl::ite(it->sig, tl::leaf(it->cont), acc);
  return acc;
}

CpsTranslator::CpsTranslator(const SourceProgram& src, CpsOptions opts)
    : src_(src), opts_(opts), iface_(src.interface()) {
  names_.reserveAbove(maxGeneratedIndex(src));
}

Name CpsTranslator::register_(const std::string& key, const Name& base) {
  if (keys_.size() >= opts_.indexLimit) throw IndexExplosion(opts_.indexLimit);
  Name id = base + "$" + std::to_string(counter_++);
  keys_.emplace(key, id);
  return id;
}

TailPtr CpsTranslator::callIndexed(const ThreadPtr& call, const TailPtr& t, const KappaList& tau) {
  auto def = src_.defs.find(call->id);
  if (def == src_.defs.end()) throw UnboundIdentifier(call->id);
  Canon c = canonical(nullptr, t, tau, iface_);
  std::string key = call->id + " ; " + c.key;
  auto it = keys_.find(key);
  Name id;
  if (it != keys_.end()) {
    id = it->second;
  } else {
    id = register_(key, call->id);
    std::vector<Name> params = def->second.params;
    params.insert(params.end(), c.formals.begin(), c.formals.end());
    pending_.push_back(Pending{id, call->id, params, c.t, c.tau});
    indexText_[id] = "(" + key + ")";
  }
  std::vector<Name> args = call->args;
  args.insert(args.end(), c.actuals.begin(), c.actuals.end());
  return tl::call(id, std::move(args));
}

TailPtr CpsTranslator::awaitEquation(const Name& s, const TailPtr& t, const KappaList& tau) {
  Canon c = canonical(&s, t, tau, iface_);
  std::string key = "await ; " + c.key;
  auto it = keys_.find(key);
  Name id;
  if (it != keys_.end()) {
    id = it->second;
  } else {
    id = register_(key, "%W");
    TailPtr self = tl::call(id, c.formals);
    defs_[id] = TailDefinition{id, c.formals, tl::present(c.sig, c.t, kappaCascade(c.tau, tl::leaf(self)))};
    indexText_[id] = "(" + key + ")";
  }
  return tl::call(id, c.actuals);
}

TailPtr CpsTranslator::go(const ThreadPtr& T, const TailPtr& t, const KappaList& tau, const TailPtr& head) {
  switch (T->kind) {
    case TK::Nil:
      return t;
    case TK::Seq:
      return go(T->a, go(T->b, t, tau, nullptr), tau, head);
    case TK::Emit:
      return tl::emit(T->sig, t);
    case TK::New: {
      // Renaming the binder apart keeps it away from sig(t, tau).
      Name g = names_.fresh();
      ThreadPtr body = substitute(T->a, {{T->sig, g}}, names_);
      return tl::nu(g, go(body, t, tau, nullptr));
    }
    case TK::Spawn:
      return tl::spawn(go(T->a, tl::nil(), {}, nullptr), t);
    case TK::Watch: {
      KappaList inner = tau;
      inner.push_back({T->sig, t});
      return go(T->a, t, inner, head);
    }
    case TK::Await:
      // At the head of an equation body the equation itself is the
      // recursive `A = present s t b`.
      if (head) return tl::present(T->sig, t, kappaCascade(tau, tl::leaf(head)));
      return awaitEquation(T->sig, t, tau);
    case TK::Pause:
      if (opts_.optimizedPause) {
        Name g = names_.fresh();
        return tl::nu(g, tl::present(g, tl::nil(), kappaCascade(tau, tl::leaf(t))));
      }
      return go(derivedPause(names_), t, tau, nullptr);
    case TK::Call:
      return callIndexed(T, t, tau);
  }
  return t;
}

TailPtr CpsTranslator::thread(const ThreadPtr& T, const TailPtr& t, const KappaList& tau) {
  return go(T, t, tau, nullptr);
}

std::pair<TailPtr, KappaList> CpsTranslator::context(const EvalContext& C, const TailPtr& t, const KappaList& tau) {
  TailPtr cur = t;
  KappaList k = tau;
  for (const auto& f : C.frames) {
    if (f.kind == Frame::SeqAfter)
      cur = go(f.rest, cur, k, nullptr);
    else
      k.push_back({f.sig, cur});
  }
  return {cur, k};
}

void CpsTranslator::drain() {
  while (!pending_.empty()) {
    Pending p = std::move(pending_.front());
    pending_.pop_front();
    const Definition& d = src_.defs.at(p.source);
    TailPtr self = tl::call(p.id, p.params);
    defs_[p.id] = TailDefinition{p.id, p.params, go(d.body, p.t, p.tau, self)};
  }
}

TailProgram CpsTranslator::program() {
  TailProgram out;
  out.inputs = src_.inputs;
  out.outputs = src_.outputs;
  for (const auto& T : src_.initial) out.initial.push_back(go(T, tl::nil(), {}, nullptr));
  drain();
  out.defs = defs_;
  return out;
}

TailProgram cpsProgram(const SourceProgram& src, const CpsOptions& opts) {
  CpsTranslator tr(src, opts);
  return tr.program();
}

std::string printCpsResult(const TailProgram& p, const std::map<Name, std::string>& index) {
  std::string out = printTailProgram(p);
  for (const auto& [id, text] : index) out += "; #index " + id + " " + text + "\n";
  return out;
}

}  // namespace sl
