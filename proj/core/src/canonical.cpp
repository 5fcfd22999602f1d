#include <algorithm>
#include <map>

#include "canon_util.hpp"
#include "sl/syntax.hpp"

namespace sl {

namespace {

ThreadPtr renameThread(const ThreadPtr& t, detail::Renamer& r) {
  switch (t->kind) {
    case TK::Nil:
    case TK::Pause:
      return t;
    case TK::Emit:
      return th::emit(r.use(t->sig));
    case TK::Await:
      return th::await(r.use(t->sig));
    case TK::Watch: {
      Name s = r.use(t->sig);
      return th::watch(s, renameThread(t->a, r));
    }
    case TK::Call: {
      std::vector<Name> args;
      for (const auto& n : t->args) args.push_back(r.use(n));
      return th::call(t->id, std::move(args));
    }
    case TK::Spawn:
      return th::spawn(renameThread(t->a, r));
    case TK::Seq: {
      ThreadPtr a = renameThread(t->a, r);
      return th::seq(a, renameThread(t->b, r));
    }
    case TK::New: {
      Name b = r.bind(t->sig);
      ThreadPtr body = renameThread(t->a, r);
      r.unbind();
      return th::nu(b, body);
    }
  }
  return t;
}

// Free private names met in more than one thread, plus every name whose
// presence is part of the key. The others can be named inside their own
// thread, which keeps such threads out of the search over orderings.
NameSet sharedNames(const std::vector<ThreadPtr>& threads, const NameSet& iface, const NameSet* present) {
  std::map<Name, int> count;
  for (const auto& t : threads)
    for (const auto& n : freeSignals(t))
      if (!iface.count(n)) ++count[n];
  NameSet shared;
  for (const auto& [n, c] : count)
    if (c > 1 || (present && present->count(n))) shared.insert(n);
  return shared;
}

bool hasShared(const ThreadPtr& t, const NameSet& shared) {
  for (const auto& n : freeSignals(t))
    if (shared.count(n)) return true;
  return false;
}

struct Rendered {
  std::vector<ThreadPtr> threads;
  std::string key;
};

// Key of the threads taken in `order`. With `withThreads`, also the renamed
// threads in key order; their local names get a per-thread prefix so that
// distinct threads never share one.
Rendered render(const std::vector<ThreadPtr>& threads, const std::vector<std::size_t>& order, const NameSet& iface,
                const NameSet& shared, const NameSet* present, bool withThreads = false) {
  detail::Renamer r(iface, false);
  r.setLocal(&shared, "%u");
  Rendered out;
  std::vector<std::pair<std::string, std::size_t>> items;
  for (std::size_t i : order) {
    r.resetScope();
    items.emplace_back(printThread(renameThread(threads[i], r)), i);
  }
  std::stable_sort(items.begin(), items.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  for (const auto& [s, i] : items) {
    out.key += s;
    out.key += '\n';
  }
  if (present) {
    std::vector<std::string> on;
    for (const auto& n : *present)
      if (iface.count(n) || r.hasRenamedFree(n)) on.push_back(r.use(n));
    std::sort(on.begin(), on.end());
    out.key += '|';
    for (const auto& n : on) out.key += n + ' ';
  }
  if (withThreads) {
    std::map<std::size_t, std::size_t> position;
    for (std::size_t k = 0; k < items.size(); ++k) position[items[k].second] = k;
    detail::Renamer again(iface, false);
    out.threads.resize(threads.size());
    for (std::size_t i : order) {
      again.setLocal(&shared, "%u" + std::to_string(position[i]) + "_");
      again.resetScope();
      out.threads[position[i]] = renameThread(threads[i], again);
    }
  }
  return out;
}

std::vector<std::size_t> bestOrder(const std::vector<ThreadPtr>& threads, const NameSet& iface, const NameSet& shared,
                                   const NameSet* present, std::string* key) {
  std::vector<std::string> skeletons;
  std::vector<bool> movable;
  for (const auto& t : threads) {
    detail::Renamer erase(iface, true);
    skeletons.push_back(printThread(renameThread(t, erase)));
    movable.push_back(hasShared(t, shared));
  }
  std::vector<std::size_t> order;
  std::string k = detail::minimiseOverTies(
      skeletons, movable, [&](const std::vector<std::size_t>& o) { return render(threads, o, iface, shared, present).key; },
      &order);
  if (key) *key = std::move(k);
  return order;
}

}  // namespace

std::vector<ThreadPtr> canonicalize(const std::vector<ThreadPtr>& threads, const NameSet& iface) {
  NameSet shared = sharedNames(threads, iface, nullptr);
  auto order = bestOrder(threads, iface, shared, nullptr, nullptr);
  return render(threads, order, iface, shared, nullptr, true).threads;
}

std::string canonicalKey(const std::vector<ThreadPtr>& threads, const NameSet& iface, const NameSet* present) {
  std::string key;
  bestOrder(threads, iface, sharedNames(threads, iface, present), present, &key);
  return key;
}

}  // namespace sl
