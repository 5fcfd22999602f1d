#pragma once

#include <deque>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sl/semantics.hpp"
#include "sl/tailcore.hpp"

namespace sl {

// Stack of watch signals with their continuations; the leftmost present
// signal wins at the end of the instant.
struct KappaEntry {
  Name sig;
  TailPtr cont;
};
using KappaList = std::vector<KappaEntry>;

struct CpsOptions {
  // pause.(ite s1 t1 (... (ite sn tn t))) instead of translating the derived
  // pause through the general clauses.
  bool optimizedPause = true;
  std::size_t indexLimit = 10000;
};

// Translation with a private equation table. Calls A(s) under (t, tau)
// become A$k(s, s') where k indexes the alpha-canonical form of (t, tau)
// and s' lists its free non-interface signals. Equation bodies are
// translated lazily from a worklist by drain().
class CpsTranslator {
 public:
  explicit CpsTranslator(const SourceProgram& src, CpsOptions opts = {});

  TailPtr thread(const ThreadPtr& T, const TailPtr& t, const KappaList& tau);
  std::pair<TailPtr, KappaList> context(const EvalContext& C, const TailPtr& t, const KappaList& tau);

  // Translates every pending equation body; throws IndexExplosion once the
  // table grows beyond the limit.
  void drain();
  // Translates the initial threads under (0, empty) and drains the table.
  TailProgram program();

  const std::map<Name, TailDefinition>& definitions() const { return defs_; }
  // Generated identifier -> printed index "(A; t; (s,t)...)".
  const std::map<Name, std::string>& index() const { return indexText_; }
  std::size_t tableSize() const { return keys_.size(); }

 private:
  struct Pending {
    Name id;
    Name source;
    std::vector<Name> params;
    TailPtr t;
    KappaList tau;
  };

  TailPtr go(const ThreadPtr& T, const TailPtr& t, const KappaList& tau, const TailPtr& head);
  TailPtr callIndexed(const ThreadPtr& call, const TailPtr& t, const KappaList& tau);
  TailPtr awaitEquation(const Name& s, const TailPtr& t, const KappaList& tau);
  Name register_(const std::string& key, const Name& base);

  const SourceProgram& src_;
  CpsOptions opts_;
  NameSet iface_;
  NameSupply names_;
  std::map<std::string, Name> keys_;
  std::map<Name, TailDefinition> defs_;
  std::map<Name, std::string> indexText_;
  std::deque<Pending> pending_;
  std::size_t counter_ = 0;
};

TailProgram cpsProgram(const SourceProgram& src, const CpsOptions& opts = {});

// The ite cascade over tau ending in `last`.
BranchPtr kappaCascade(const KappaList& tau, const BranchPtr& last);

// Tail program text followed by one `; #index` comment line per equation.
std::string printCpsResult(const TailProgram& p, const std::map<Name, std::string>& index);

// Alpha-canonical text of a tail thread: free non-interface names become
// %p0, %p1, ... in first-occurrence order, bound names %b<depth>.
std::string canonicalTailText(const TailPtr& t, const NameSet& iface);

}  // namespace sl
