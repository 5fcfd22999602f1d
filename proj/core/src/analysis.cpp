#include "sl/analysis.hpp"

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/strong_components.hpp>
#include <boost/graph/topological_sort.hpp>
#include <deque>
#include <iterator>

namespace sl {

CallResult then(const CallResult& a, const CallResult& b) {
  if (a.down) return a;
  CallResult r = b;
  r.ids.insert(a.ids.begin(), a.ids.end());
  return r;
}

std::string formatCallResult(const CallResult& r) {
  std::string s = "({";
  bool first = true;
  for (const auto& id : r.ids) {
    if (!first) s += ',';
    s += id;
    first = false;
  }
  s += "},";
  s += r.down ? "down" : "0";
  return s + ")";
}

namespace {

// `inline_` gives the contribution of a call node, either the identifier
// itself or its inlined body.
template <class Inline>
CallResult callWith(const ThreadPtr& t, Inline&& inline_) {
  switch (t->kind) {
    case TK::Nil:
    case TK::Emit:
    case TK::Await:
      return {};
    case TK::Pause:
      return CallResult{{}, true};
    case TK::New:
    case TK::Watch:
      return callWith(t->a, inline_);
    case TK::Spawn: {
      CallResult r = callWith(t->a, inline_);
      r.down = false;
      return r;
    }
    case TK::Seq:
      return then(callWith(t->a, inline_), callWith(t->b, inline_));
    case TK::Call:
      return inline_(t);
  }
  return {};
}

}  // namespace

CallResult callOf(const ThreadPtr& t) {
  return callWith(t, [](const ThreadPtr& c) { return CallResult{{c->id}, false}; });
}

CallResult callOfContext(const EvalContext& c) {
  CallResult acc;
  for (auto it = c.frames.rbegin(); it != c.frames.rend(); ++it)
    if (it->kind == Frame::SeqAfter) acc = then(acc, callOf(it->rest));
  return acc;
}

namespace {

struct Unfolder {
  const SourceProgram& prog;
  std::map<std::pair<Name, unsigned>, CallResult> memo;

  CallResult of(const ThreadPtr& t, unsigned depth) {
    return callWith(t, [&](const ThreadPtr& c) -> CallResult {
      if (depth == 0) return CallResult{{c->id}, false};
      auto key = std::pair{c->id, depth};
      if (auto it = memo.find(key); it != memo.end()) return it->second;
      // Signal arguments play no role in Call, so the body is used as is.
      CallResult r = of(prog.defs.at(c->id).body, depth - 1);
      memo.emplace(key, r);
      return r;
    });
  }
};

}  // namespace

CallResult callOfUnfolded(const SourceProgram& prog, const ThreadPtr& t, unsigned depth) {
  Unfolder u{prog, {}};
  return u.of(t, depth);
}

std::string Verdict::describeCycle() const {
  std::string s;
  for (const auto& n : cycle) {
    if (!s.empty()) s += " > ";
    s += n;
  }
  return s;
}

std::set<Edge> reactivityConstraints(const SourceProgram& prog, unsigned unfoldDepth) {
  Unfolder u{prog, {}};
  std::set<Edge> edges;
  for (const auto& [id, def] : prog.defs)
    for (const auto& b : u.of(def.body, unfoldDepth).ids) edges.insert({id, b});
  return edges;
}

namespace {

using Graph = boost::adjacency_list<boost::vecS, boost::vecS, boost::directedS>;

struct Indexed {
  std::vector<Name> names;
  std::map<Name, std::size_t> index;
  Graph g;

  Indexed(const std::set<Name>& nodes, const std::set<Edge>& edges) {
    auto add = [&](const Name& n) {
      if (index.emplace(n, names.size()).second) names.push_back(n);
    };
    for (const auto& n : nodes) add(n);
    for (const auto& [a, b] : edges) {
      add(a);
      add(b);
    }
    g = Graph(names.size());
    for (const auto& [a, b] : edges) boost::add_edge(index[a], index[b], g);
  }
};

// Shortest path from `from` to `to` inside the graph, by breadth-first search.
std::vector<std::size_t> path(const Graph& g, std::size_t from, std::size_t to) {
  std::vector<long> parent(boost::num_vertices(g), -1);
  std::deque<std::size_t> queue{from};
  parent[from] = static_cast<long>(from);
  while (!queue.empty()) {
    auto v = queue.front();
    queue.pop_front();
    if (v == to) break;
    for (auto [e, end] = boost::out_edges(v, g); e != end; ++e) {
      auto w = boost::target(*e, g);
      if (parent[w] < 0) {
        parent[w] = static_cast<long>(v);
        queue.push_back(w);
      }
    }
  }
  std::vector<std::size_t> out{to};
  while (out.back() != from) out.push_back(static_cast<std::size_t>(parent[out.back()]));
  return {out.rbegin(), out.rend()};
}

}  // namespace

Verdict acyclicVerdict(const std::set<Name>& nodes, const std::set<Edge>& edges) {
  return preorderVerdict(nodes, BoundedConstraints{edges, {}});
}

Verdict preorderVerdict(const std::set<Name>& nodes, const BoundedConstraints& c) {
  std::set<Edge> all = c.strict;
  all.insert(c.weak.begin(), c.weak.end());
  Indexed ix(nodes, all);
  std::vector<int> comp(ix.names.size());
  int ncomp = ix.names.empty() ? 0 : boost::strong_components(ix.g, comp.data());

  Verdict v;
  for (const auto& [a, b] : c.strict) {
    auto ia = ix.index.at(a), ib = ix.index.at(b);
    if (comp[ia] != comp[ib]) continue;
    v.accept = false;
    v.cycle.push_back(a);
    if (ia != ib)
      for (auto n : path(ix.g, ib, ia)) v.cycle.push_back(ix.names[n]);
    else
      v.cycle.push_back(a);
    return v;
  }
  // Order the components of the condensation; names inside one component
  // are equivalent under the pre-order.
  Graph dag(static_cast<std::size_t>(ncomp));
  for (const auto& [a, b] : all) {
    int ca = comp[ix.index.at(a)], cb = comp[ix.index.at(b)];
    if (ca != cb) boost::add_edge(static_cast<std::size_t>(ca), static_cast<std::size_t>(cb), dag);
  }
  std::vector<std::size_t> rev;
  boost::topological_sort(dag, std::back_inserter(rev));
  for (auto it = rev.rbegin(); it != rev.rend(); ++it)
    for (std::size_t n = 0; n < ix.names.size(); ++n)
      if (static_cast<std::size_t>(comp[n]) == *it) v.order.push_back(ix.names[n]);
  return v;
}

Verdict checkReactivity(const SourceProgram& prog, unsigned unfoldDepth) {
  std::set<Name> nodes;
  for (const auto& [id, _] : prog.defs) nodes.insert(id);
  return acyclicVerdict(nodes, reactivityConstraints(prog, unfoldDepth));
}

std::set<std::pair<Name, Label>> boundedCall(const ThreadPtr& t, Label l) {
  switch (t->kind) {
    case TK::Nil:
    case TK::Emit:
    case TK::Await:
    case TK::Pause:
      return {};
    case TK::Call:
      return {{t->id, l}};
    case TK::New:
      return boundedCall(t->a, l);
    case TK::Watch:
      return boundedCall(t->a, Label::Kappa);
    case TK::Spawn:
      return boundedCall(t->a, Label::Eps);
    case TK::Seq: {
      auto r = boundedCall(t->a, Label::Kappa);
      r.merge(boundedCall(t->b, l));
      return r;
    }
  }
  return {};
}

BoundedConstraints boundedConstraints(const SourceProgram& prog) {
  BoundedConstraints c;
  for (const auto& [id, def] : prog.defs)
    for (const auto& [b, l] : boundedCall(def.body, Label::Eps)) (l == Label::Kappa ? c.strict : c.weak).insert({id, b});
  return c;
}

Verdict checkBounded(const SourceProgram& prog) {
  std::set<Name> nodes;
  for (const auto& [id, _] : prog.defs) nodes.insert(id);
  return preorderVerdict(nodes, boundedConstraints(prog));
}

}  // namespace sl
