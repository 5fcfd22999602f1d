#include "sl/mealy.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <sstream>
#include <unordered_map>

#include "sl/errors.hpp"

namespace sl {

std::size_t MealyMachine::addState(std::string name) {
  std::size_t q = states.size();
  states.push_back(std::move(name));
  next.emplace_back(letters(), q);
  out.emplace_back(letters(), 0);
  return q;
}

std::optional<MonotonicityViolation> validateMealy(const MealyMachine& m) {
  if (m.n > 12) throw ArityTooLarge(static_cast<int>(m.n));
  // Monotone on every covering pair X < X+{k} is monotone on all X <= Y.
  for (std::size_t q = 0; q < m.states.size(); ++q)
    for (std::uint32_t x = 0; x < m.letters(); ++x)
      for (unsigned k = 0; k < m.n; ++k) {
        std::uint32_t y = x | (1u << k);
        if (y == x) continue;
        std::uint32_t lost = m.out[q][x] & ~m.out[q][y];
        if (lost) {
          unsigned j = 0;
          while (!(lost & (1u << j))) ++j;
          return MonotonicityViolation{x, y, q, j + 1};
        }
      }
  return std::nullopt;
}

std::string formatMask(std::uint32_t mask) {
  std::string s = "{";
  bool first = true;
  for (unsigned k = 0; k < 32; ++k)
    if (mask & (1u << k)) {
      if (!first) s += ' ';
      s += std::to_string(k + 1);
      first = false;
    }
  return s + "}";
}

std::string describe(const MonotonicityViolation& v, const MealyMachine& m) {
  return "output " + std::to_string(v.output) + " is produced on " + formatMask(v.smaller) + " but not on " +
         formatMask(v.larger) + " in state " + m.states[v.state];
}

std::string printMealy(const MealyMachine& m) {
  std::string out = "mealy n=" + std::to_string(m.n) + " m=" + std::to_string(m.m) + "\n";
  for (std::size_t q = 0; q < m.states.size(); ++q)
    out += "state " + m.states[q] + (q == m.init ? " init\n" : "\n");
  for (std::size_t q = 0; q < m.states.size(); ++q)
    for (std::uint32_t x = 0; x < m.letters(); ++x)
      out += "trans " + m.states[q] + " " + formatMask(x) + " -> " + m.states[m.next[q][x]] + " " +
             formatMask(m.out[q][x]) + "\n";
  return out;
}

namespace {

// Reads `{a b c}` from the token stream into a mask of 1-based indices.
std::uint32_t readMask(std::istringstream& in, unsigned width, int line) {
  std::string tok;
  if (!(in >> tok) || tok != "{") throw FormatError("line " + std::to_string(line) + ": expected '{'");
  std::uint32_t mask = 0;
  while (in >> tok && tok != "}") {
    unsigned long k = 0;
    try {
      k = std::stoul(tok);
    } catch (const std::exception&) {
      throw FormatError("line " + std::to_string(line) + ": bad index '" + tok + "'");
    }
    if (k < 1 || k > width) throw FormatError("line " + std::to_string(line) + ": index out of range");
    mask |= 1u << (k - 1);
  }
  if (tok != "}") throw FormatError("line " + std::to_string(line) + ": expected '}'");
  return mask;
}

}  // namespace

MealyMachine parseMealy(std::string_view text) {
  MealyMachine m;
  std::map<std::string, std::size_t> byName;
  std::vector<std::vector<bool>> seen;
  bool header = false, hasInit = false;
  std::istringstream lines{std::string(text)};
  std::string raw;
  int lineNo = 0;
  while (std::getline(lines, raw)) {
    ++lineNo;
    if (auto c = raw.find('#'); c != std::string::npos) raw.erase(c);
    std::string spaced;
    for (char ch : raw) {
      if (ch == '{' || ch == '}') {
        spaced += ' ';
        spaced += ch;
        spaced += ' ';
      } else {
        spaced += ch;
      }
    }
    std::istringstream in(spaced);
    std::string kw;
    if (!(in >> kw)) continue;
    auto fail = [&](const std::string& why) { throw FormatError("line " + std::to_string(lineNo) + ": " + why); };
    if (kw == "mealy") {
      std::string a, b;
      in >> a >> b;
      if (a.rfind("n=", 0) != 0 || b.rfind("m=", 0) != 0) fail("expected 'mealy n=<n> m=<m>'");
      m.n = static_cast<unsigned>(std::stoul(a.substr(2)));
      m.m = static_cast<unsigned>(std::stoul(b.substr(2)));
      if (m.n > 12) throw ArityTooLarge(static_cast<int>(m.n));
      if (m.m > 32) fail("output arity above 32");
      header = true;
    } else if (kw == "state") {
      if (!header) fail("missing header");
      std::string name, flag;
      if (!(in >> name)) fail("state name expected");
      if (byName.count(name)) fail("duplicate state " + name);
      std::size_t q = m.addState(name);
      byName[name] = q;
      seen.emplace_back(m.letters(), false);
      if (in >> flag) {
        if (flag != "init") fail("unexpected '" + flag + "'");
        if (hasInit) fail("two initial states");
        m.init = q;
        hasInit = true;
      }
    } else if (kw == "trans") {
      std::string from, arrow, to;
      if (!(in >> from)) fail("state expected");
      auto f = byName.find(from);
      if (f == byName.end()) fail("unknown state " + from);
      std::uint32_t x = readMask(in, m.n, lineNo);
      if (!(in >> arrow) || arrow != "->") fail("expected '->'");
      if (!(in >> to)) fail("state expected");
      auto t = byName.find(to);
      if (t == byName.end()) fail("unknown state " + to);
      std::uint32_t o = readMask(in, m.m, lineNo);
      if (seen[f->second][x]) fail("duplicate transition");
      seen[f->second][x] = true;
      m.next[f->second][x] = t->second;
      m.out[f->second][x] = o;
    } else {
      fail("unknown keyword '" + kw + "'");
    }
  }
  if (!header) throw FormatError("missing 'mealy' header");
  if (m.states.empty()) throw FormatError("machine without states");
  if (!hasInit) throw FormatError("no initial state");
  for (std::size_t q = 0; q < m.states.size(); ++q)
    for (std::uint32_t x = 0; x < m.letters(); ++x)
      if (!seen[q][x]) throw FormatError("missing transition from " + m.states[q] + " on " + formatMask(x));
  return m;
}

// ---------------------------------------------------------------------------
// Machine to program

namespace {

std::vector<Name> indexedNames(const std::string& prefix, unsigned k) {
  std::vector<Name> v;
  for (unsigned i = 1; i <= k; ++i) v.push_back(prefix + std::to_string(i));
  return v;
}

BranchPtr cascade(const MealyMachine& m, std::size_t q, const std::vector<Name>& inputs, unsigned k,
                  std::uint32_t letter) {
  if (k == m.n) return tl::leaf(tl::call(m.states[m.next[q][letter]], {}));
  return tl::ite(inputs[k], cascade(m, q, inputs, k + 1, letter | (1u << k)), cascade(m, q, inputs, k + 1, letter));
}

}  // namespace

BranchPtr nextStateBranch(const MealyMachine& m, std::size_t q, const std::vector<Name>& inputs) {
  return cascade(m, q, inputs, 0, 0);
}

TailProgram mealyToProgram(const MealyMachine& m) {
  TailProgram p;
  p.inputs = indexedNames("i", m.n);
  p.outputs = indexedNames("o", m.m);
  for (std::size_t q = 0; q < m.states.size(); ++q) {
    NameSupply names;
    TailPtr body = pausePrefix(nextStateBranch(m, q, p.inputs), names);
    // Spawned in reverse so that the emitters appear in increasing order.
    for (std::uint32_t x = static_cast<std::uint32_t>(m.letters()); x-- > 0;)
      for (unsigned j = m.m; j-- > 0;) {
        if (!(m.out[q][x] & (1u << j))) continue;
        TailPtr guarded = tl::emit(p.outputs[j], tl::nil());
        for (unsigned k = m.n; k-- > 0;)
          if (x & (1u << k)) guarded = tl::present(p.inputs[k], guarded, tl::leaf(tl::nil()));
        body = tl::spawn(guarded, body);
      }
    p.defs[m.states[q]] = TailDefinition{m.states[q], {}, body};
  }
  p.initial.push_back(tl::call(m.states[m.init], {}));
  return p;
}

// ---------------------------------------------------------------------------
// Normalization

namespace {

bool mayEmit(const TailPtr& t, const Name& g) {
  switch (t->kind) {
    case TailKind::Nil:
      return false;
    case TailKind::Emit:
      return t->sig == g || mayEmit(t->a, g);
    case TailKind::New:
      return t->sig != g && mayEmit(t->a, g);
    case TailKind::Spawn:
      return mayEmit(t->a, g) || mayEmit(t->b, g);
    case TailKind::Present: {
      if (mayEmit(t->a, g)) return true;
      std::vector<const Branch*> stack{t->otherwise.get()};
      while (!stack.empty()) {
        const Branch* b = stack.back();
        stack.pop_back();
        if (b->isLeaf()) {
          if (mayEmit(b->leaf, g)) return true;
        } else {
          stack.push_back(b->then.get());
          stack.push_back(b->otherwise.get());
        }
      }
      return false;
    }
    case TailKind::Call:
      return std::find(t->args.begin(), t->args.end(), g) != t->args.end();
  }
  return false;
}

class Normalizer {
 public:
  Normalizer(const TailProgram& p, std::size_t limit) : src_(p), limit_(limit) {
    names_.reserveAbove(maxGeneratedIndex(p));
  }

  NormalProgram run() {
    out_.inputs = src_.inputs;
    out_.outputs = src_.outputs;
    for (const auto& t : src_.initial) out_.initial.push_back(resolve(t));
    while (!queue_.empty()) {
      auto [id, t] = queue_.front();
      queue_.pop_front();
      fill(id, t);
    }
    return std::move(out_);
  }

 private:
  const TailProgram& src_;
  std::size_t limit_;
  NameSupply names_;
  NormalProgram out_;
  std::unordered_map<std::string, std::size_t> byKey_;
  std::deque<std::pair<std::size_t, TailPtr>> queue_;

  // Follows calls and dead `new`s down to a prefix; returns its node.
  std::size_t resolve(TailPtr t) {
    std::vector<std::string> aliases;
    while (t->kind == TailKind::Call || t->kind == TailKind::New) {
      std::string key = printTail(t);
      if (auto it = byKey_.find(key); it != byKey_.end()) {
        for (const auto& a : aliases) byKey_[a] = it->second;
        return it->second;
      }
      if (std::find(aliases.begin(), aliases.end(), key) != aliases.end())
        throw Error("definitions form a cycle of plain calls through " + key);
      aliases.push_back(key);
      if (t->kind == TailKind::Call) {
        t = unfold(src_, t->id, t->args, names_);
      } else {
        // A private name that nobody can emit behaves as a signal that is
        // never present.
        if (mayEmit(t->a, t->sig)) throw HasSignalGeneration();
        t = substitute(t->a, {{t->sig, kDeadSignal}}, names_);
      }
    }
    std::string key = printTail(t);
    std::size_t id;
    if (auto it = byKey_.find(key); it != byKey_.end()) {
      id = it->second;
    } else {
      if (out_.nodes.size() >= limit_) throw StateExplosion(limit_);
      id = out_.nodes.size();
      out_.nodes.push_back(NormalNode{});
      out_.nodes.back().origin = key;
      byKey_.emplace(key, id);
      queue_.emplace_back(id, t);
    }
    for (const auto& a : aliases) byKey_[a] = id;
    return id;
  }

  NormalBranchPtr branch(const BranchPtr& b) {
    auto nb = std::make_shared<NormalBranch>();
    if (b->isLeaf()) {
      nb->leaf = resolve(b->leaf);
    } else {
      nb->isLeaf = false;
      nb->sig = b->sig;
      nb->then = branch(b->then);
      nb->otherwise = branch(b->otherwise);
    }
    return nb;
  }

  void fill(std::size_t id, const TailPtr& t) {
    NormalNode n;
    n.origin = out_.nodes[id].origin;
    switch (t->kind) {
      case TailKind::Nil:
        n.kind = NormalNode::Kind::Zero;
        break;
      case TailKind::Emit:
        n.kind = NormalNode::Kind::Emit;
        n.sig = t->sig;
        n.b1 = resolve(t->a);
        break;
      case TailKind::Present:
        n.kind = NormalNode::Kind::Present;
        n.sig = t->sig;
        n.b1 = resolve(t->a);
        n.branch = branch(t->otherwise);
        break;
      case TailKind::Spawn:
        n.kind = NormalNode::Kind::Thread;
        n.b1 = resolve(t->a);
        n.b2 = resolve(t->b);
        break;
      default:
        throw Error("internal: unresolved term in normalization");
    }
    out_.nodes[id] = std::move(n);
  }
};

}  // namespace

NormalProgram normalizeTail(const TailProgram& p, std::size_t nodeLimit) { return Normalizer(p, nodeLimit).run(); }

std::string nodeName(std::size_t k) { return "N" + std::to_string(k); }

TailProgram normalToTail(const NormalProgram& p) {
  TailProgram t;
  t.inputs = p.inputs;
  t.outputs = p.outputs;
  auto ref = [](std::size_t k) { return tl::call(nodeName(k), {}); };
  std::function<BranchPtr(const NormalBranchPtr&)> br = [&](const NormalBranchPtr& b) -> BranchPtr {
    if (b->isLeaf) return tl::leaf(ref(b->leaf));
    return tl::ite(b->sig, br(b->then), br(b->otherwise));
  };
  for (std::size_t k = 0; k < p.nodes.size(); ++k) {
    const auto& n = p.nodes[k];
    TailPtr body;
    switch (n.kind) {
      case NormalNode::Kind::Zero:
        body = tl::nil();
        break;
      case NormalNode::Kind::Emit:
        body = tl::emit(n.sig, ref(n.b1));
        break;
      case NormalNode::Kind::Present:
        body = tl::present(n.sig, ref(n.b1), br(n.branch));
        break;
      case NormalNode::Kind::Thread:
        body = tl::spawn(ref(n.b1), ref(n.b2));
        break;
    }
    t.defs[nodeName(k)] = TailDefinition{nodeName(k), {}, body};
  }
  for (auto k : p.initial) t.initial.push_back(ref(k));
  return t;
}

// ---------------------------------------------------------------------------
// Closure

std::pair<IdSet, NameSet> saturate(const NormalProgram& p, const IdSet& q, const NameSet& E) {
  std::vector<char> in(p.nodes.size(), 0);
  std::vector<std::size_t> work;
  NameSet env = E;
  std::unordered_map<Name, std::vector<std::size_t>> waiting;
  auto add = [&](std::size_t a) {
    if (!in[a]) {
      in[a] = 1;
      work.push_back(a);
    }
  };
  for (auto a : q) add(a);
  while (!work.empty()) {
    std::size_t a = work.back();
    work.pop_back();
    const NormalNode& n = p.nodes[a];
    switch (n.kind) {
      case NormalNode::Kind::Zero:
        break;
      case NormalNode::Kind::Emit:
        add(n.b1);
        if (env.insert(n.sig).second)
          if (auto it = waiting.find(n.sig); it != waiting.end())
            for (auto w : it->second) add(p.nodes[w].b1);
        break;
      case NormalNode::Kind::Present:
        if (env.count(n.sig))
          add(n.b1);
        else
          waiting[n.sig].push_back(a);
        break;
      case NormalNode::Kind::Thread:
        add(n.b1);
        add(n.b2);
        break;
    }
  }
  IdSet out;
  for (std::size_t a = 0; a < in.size(); ++a)
    if (in[a]) out.push_back(a);
  return {out, env};
}

std::pair<IdSet, NameSet> closure(const NormalProgram& p, const IdSet& q, const NameSet& E) {
  auto [sat, env] = saturate(p, q, E);
  IdSet next;
  for (auto a : sat) {
    const NormalNode& n = p.nodes[a];
    if (n.kind == NormalNode::Kind::Zero) {
      next.push_back(a);
    } else if (n.kind == NormalNode::Kind::Present && !env.count(n.sig)) {
      const NormalBranch* b = n.branch.get();
      while (!b->isLeaf) b = env.count(b->sig) ? b->then.get() : b->otherwise.get();
      next.push_back(b->leaf);
    }
  }
  std::sort(next.begin(), next.end());
  next.erase(std::unique(next.begin(), next.end()), next.end());
  return {next, env};
}

MealyMachine programToMealy(const NormalProgram& p, std::size_t stateLimit) {
  if (p.inputs.size() > 12) throw ArityTooLarge(static_cast<int>(p.inputs.size()));
  MealyMachine m;
  m.n = static_cast<unsigned>(p.inputs.size());
  m.m = static_cast<unsigned>(p.outputs.size());
  std::map<IdSet, std::size_t> index;
  std::deque<IdSet> todo;
  auto stateOf = [&](const IdSet& q) {
    auto it = index.find(q);
    if (it != index.end()) return it->second;
    if (index.size() >= stateLimit) throw StateExplosion(stateLimit);
    std::size_t s = m.addState("q" + std::to_string(index.size()));
    index.emplace(q, s);
    todo.push_back(q);
    return s;
  };
  IdSet q0 = p.initial;
  std::sort(q0.begin(), q0.end());
  q0.erase(std::unique(q0.begin(), q0.end()), q0.end());
  m.init = stateOf(q0);
  while (!todo.empty()) {
    IdSet q = todo.front();
    todo.pop_front();
    std::size_t s = index.at(q);
    for (std::uint32_t x = 0; x < m.letters(); ++x) {
      NameSet E;
      for (unsigned k = 0; k < m.n; ++k)
        if (x & (1u << k)) E.insert(p.inputs[k]);
      auto [q2, env] = closure(p, q, E);
      std::uint32_t o = 0;
      for (unsigned j = 0; j < m.m; ++j)
        if (env.count(p.outputs[j])) o |= 1u << j;
      std::size_t t = stateOf(q2);
      m.next[s][x] = t;
      m.out[s][x] = o;
    }
  }
  return m;
}

MealyMachine programToMealy(const TailProgram& p, std::size_t stateLimit) {
  return programToMealy(normalizeTail(p, stateLimit), stateLimit);
}

MealyEquivResult mealyTraceEquiv(const MealyMachine& a, const MealyMachine& b) {
  if (a.n != b.n || a.m != b.m) throw Error("machines have different arities");
  using Pair = std::pair<std::size_t, std::size_t>;
  std::map<Pair, std::pair<Pair, std::uint32_t>> parent;
  std::deque<Pair> queue;
  Pair start{a.init, b.init};
  parent[start] = {start, 0};
  queue.push_back(start);
  while (!queue.empty()) {
    Pair cur = queue.front();
    queue.pop_front();
    for (std::uint32_t x = 0; x < a.letters(); ++x) {
      if (a.out[cur.first][x] != b.out[cur.second][x]) {
        MealyEquivResult r{false, {x}};
        for (Pair p = cur; p != start; p = parent.at(p).first) r.witness.push_back(parent.at(p).second);
        std::reverse(r.witness.begin(), r.witness.end());
        return r;
      }
      Pair nx{a.next[cur.first][x], b.next[cur.second][x]};
      if (parent.emplace(nx, std::pair{cur, x}).second) queue.push_back(nx);
    }
  }
  return {};
}

std::vector<std::uint32_t> runMealy(const MealyMachine& m, const std::vector<std::uint32_t>& word) {
  std::vector<std::uint32_t> out;
  std::size_t q = m.init;
  for (auto x : word) {
    out.push_back(m.out[q][x]);
    q = m.next[q][x];
  }
  return out;
}

}  // namespace sl
