#pragma once

#include <cstdint>
#include <unordered_map>

#include "sl/syntax.hpp"

namespace sl {

// Partial map from signal names to presence, plus the fresh-name reservoir.
// Names produced by allocate() are never in the domain beforehand.
class Environment {
 public:
  explicit Environment(std::uint64_t freshStart = 0) : supply_(freshStart) {}

  bool defined(const Name& s) const { return map_.count(s) != 0; }
  // Throws UnboundSignal outside the domain.
  bool get(const Name& s) const;
  void set(const Name& s, bool v) { map_[s] = v; }
  Name allocate();

  NameSupply& supply() { return supply_; }
  std::uint64_t freshCounter() const { return supply_.peek(); }
  const std::unordered_map<Name, bool>& map() const { return map_; }
  NameSet presentSignals() const;

 private:
  std::unordered_map<Name, bool> map_;
  NameSupply supply_;
};

}  // namespace sl
