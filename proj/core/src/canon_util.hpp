#pragma once

#include <map>
#include <string>
#include <vector>

#include "sl/syntax.hpp"

namespace sl::detail {

// Naming policy used while printing a term in canonical form. Interface
// names are kept. Free non-interface names receive %g0, %g1, ... in the
// order they are first met; bound names are named after their binding
// depth (%b0 for the outermost binder of the current term). The free-name
// prefix is configurable. With `erase`
// set, every non-interface name prints as `_` which yields the skeleton
// used to order threads.
class Renamer {
 public:
  Renamer(const NameSet& iface, bool erase, std::string freePrefix = "%g")
      : iface_(iface), erase_(erase), prefix_(std::move(freePrefix)) {}

  // Free names outside `shared` are numbered per thread with `localPrefix`
  // instead of globally; resetScope restarts that numbering.
  void setLocal(const NameSet* shared, std::string localPrefix) {
    shared_ = shared;
    localPrefix_ = std::move(localPrefix);
  }

  std::string use(const Name& n) {
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
      if (it->first == n) return erase_ ? std::string("_") : it->second;
    if (iface_.count(n)) return n;
    if (erase_) return "_";
    if (shared_ && !shared_->count(n)) {
      auto [it, fresh] = local_.try_emplace(n, "");
      if (fresh) it->second = localPrefix_ + std::to_string(local_.size() - 1);
      return it->second;
    }
    auto [it, fresh] = free_.try_emplace(n, "");
    if (fresh) it->second = prefix_ + std::to_string(free_.size() - 1);
    return it->second;
  }

  std::string bind(const Name& n) {
    std::string c = erase_ ? std::string("_") : "%b" + std::to_string(scope_.size());
    scope_.emplace_back(n, c);
    return c;
  }
  void unbind() { scope_.pop_back(); }

  // Fresh per-thread binder depth.
  void resetScope() {
    scope_.clear();
    local_.clear();
  }

  const std::map<Name, std::string>& freeMap() const { return free_; }
  bool hasRenamedFree(const Name& n) const { return free_.count(n) != 0; }

 private:
  const NameSet& iface_;
  bool erase_;
  std::string prefix_;
  std::map<Name, std::string> free_;
  const NameSet* shared_ = nullptr;
  std::string localPrefix_;
  std::map<Name, std::string> local_;
  std::vector<std::pair<Name, std::string>> scope_;
};

// Generic minimisation over orderings of tied items. `skeletons[i]` orders
// the items; items with `movable[i]` false have an order-independent
// rendering. `render(order)` returns the canonical key for a full order.
template <class Render>
std::string minimiseOverTies(const std::vector<std::string>& skeletons, const std::vector<bool>& movable,
                             Render render, std::vector<std::size_t>* bestOrder = nullptr);

}  // namespace sl::detail

#include <algorithm>
#include <numeric>

namespace sl::detail {

template <class Render>
std::string minimiseOverTies(const std::vector<std::string>& skeletons, const std::vector<bool>& movable,
                             Render render, std::vector<std::size_t>* bestOrder) {
  std::vector<std::size_t> order(skeletons.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (skeletons[x] != skeletons[y]) return skeletons[x] < skeletons[y];
    return movable[x] < movable[y];
  });
  // Tie groups: maximal runs of equal skeletons among movable items.
  std::vector<std::pair<std::size_t, std::size_t>> groups;
  double perms = 1;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && skeletons[order[j]] == skeletons[order[i]]) ++j;
    std::size_t k = i;
    while (k < j && !movable[order[k]]) ++k;
    if (j - k > 1) {
      groups.emplace_back(k, j);
      for (std::size_t f = 2; f <= j - k; ++f) perms *= static_cast<double>(f);
    }
    i = j;
  }
  constexpr double kCap = 40320;
  if (groups.empty() || perms > kCap) {
    std::string key = render(order);
    if (bestOrder) *bestOrder = order;
    return key;
  }
  for (auto& g : groups) std::sort(order.begin() + g.first, order.begin() + g.second);
  std::string best;
  bool first = true;
  // Odometer over the permutations of every group.
  while (true) {
    std::string key = render(order);
    if (first || key < best) {
      best = std::move(key);
      if (bestOrder) *bestOrder = order;
      first = false;
    }
    std::size_t g = 0;
    for (; g < groups.size(); ++g) {
      auto b = order.begin() + groups[g].first;
      auto e = order.begin() + groups[g].second;
      if (std::next_permutation(b, e)) break;
    }
    if (g == groups.size()) break;
  }
  return best;
}

}  // namespace sl::detail
