#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "sl/syntax.hpp"

namespace sl {

constexpr std::uint64_t kDefaultFuel = 1'000'000;

// Thread scheduling policy for one run. The random policy draws uniformly
// among runnable threads from a seeded generator.
class Scheduler {
 public:
  enum class Kind { Deterministic, Random };
  static Scheduler deterministic() { return Scheduler(Kind::Deterministic, 0); }
  static Scheduler random(std::uint64_t seed) { return Scheduler(Kind::Random, seed); }

  Kind kind() const { return kind_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

 private:
  Scheduler(Kind k, std::uint64_t seed) : kind_(k), seed_(seed), rng_(seed) {}
  Kind kind_;
  std::uint64_t seed_;
  std::mt19937_64 rng_;
};

template <class P>
struct BasicStep {
  P next;
  std::vector<P> spawned;
  bool emittedNew = false;  // an absent signal became present
};

template <class P>
struct BasicInstantResult {
  NameSet outputs;
  std::vector<P> residual;
  std::uint64_t steps = 0;
};

struct TraceStep {
  NameSet in;
  NameSet out;
  bool operator==(const TraceStep&) const = default;
};
using Trace = std::vector<TraceStep>;

std::string formatSet(const NameSet& s);
std::string formatTraceStep(const TraceStep& s);
// One input set per line, names separated by spaces; a blank line is the
// empty set.
std::vector<NameSet> parseInputTrace(std::string_view text);

// All subsets of `names` (at most 2^|names|), in binary counting order.
std::vector<NameSet> allSubsets(const std::vector<Name>& names);

}  // namespace sl
