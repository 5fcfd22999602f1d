#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "sl/mealy.hpp"
#include "sl/syntax.hpp"

namespace sl::testgen {

// Random source threads over fixed signal and identifier pools. Calls take
// no arguments, so generated identifiers must be nullary definitions.
inline ThreadPtr randomThread(std::mt19937_64& rng, int depth, const std::vector<Name>& sigs,
                              const std::vector<Name>& ids) {
  auto pick = [&](const std::vector<Name>& v) { return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)]; };
  int leafKinds = ids.empty() ? 4 : 5;
  int kinds = depth <= 0 ? leafKinds : leafKinds + 4;
  int k = std::uniform_int_distribution<int>(0, kinds - 1)(rng);
  if (k >= leafKinds) k = 5 + (k - leafKinds);
  switch (k) {
    case 0: return th::nil();
    case 1: return th::pause();
    case 2: return th::emit(pick(sigs));
    case 3: return th::await(pick(sigs));
    case 4: return th::call(pick(ids), {});
    case 5: return th::seq(randomThread(rng, depth - 1, sigs, ids), randomThread(rng, depth - 1, sigs, ids));
    case 6: return th::watch(pick(sigs), randomThread(rng, depth - 1, sigs, ids));
    case 7: return th::spawn(randomThread(rng, depth - 1, sigs, ids));
    default: return th::nu(pick(sigs), randomThread(rng, depth - 1, sigs, ids));
  }
}

// Random machine whose output table is monotone by construction: each
// letter's output contains the outputs of every letter one bit below it.
inline MealyMachine randomMonotoneMealy(std::mt19937_64& rng, unsigned n, unsigned m, std::size_t states) {
  MealyMachine mm;
  mm.n = n;
  mm.m = m;
  for (std::size_t q = 0; q < states; ++q) mm.addState("q" + std::to_string(q));
  std::uniform_int_distribution<std::size_t> st(0, states - 1);
  std::uniform_int_distribution<std::uint32_t> bits(0, (1u << m) - 1);
  std::bernoulli_distribution extra(0.3);
  for (std::size_t q = 0; q < states; ++q)
    for (std::uint32_t x = 0; x < mm.letters(); ++x) {
      mm.next[q][x] = st(rng);
      std::uint32_t o = extra(rng) ? bits(rng) : 0;
      for (unsigned k = 0; k < n; ++k)
        if (x & (1u << k)) o |= mm.out[q][x & ~(1u << k)];
      mm.out[q][x] = o;
    }
  mm.init = st(rng);
  return mm;
}

// Random normal program. Within an instant control only moves to larger
// node indices, so every instant terminates; branch leaves may point
// anywhere. Presence tests range over inputs and outputs, emissions over
// outputs.
inline NormalProgram randomNormalProgram(std::mt19937_64& rng, std::size_t size, const std::vector<Name>& inputs,
                                         const std::vector<Name>& outputs) {
  NormalProgram p;
  p.inputs = inputs;
  p.outputs = outputs;
  std::vector<Name> all = inputs;
  all.insert(all.end(), outputs.begin(), outputs.end());
  auto pick = [&](const std::vector<Name>& v) { return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)]; };
  auto any = [&] { return std::uniform_int_distribution<std::size_t>(0, size - 1)(rng); };
  std::function<NormalBranchPtr(int)> branch = [&](int depth) {
    auto b = std::make_shared<NormalBranch>();
    if (depth <= 0 || std::bernoulli_distribution(0.6)(rng)) {
      b->leaf = any();
    } else {
      b->isLeaf = false;
      b->sig = pick(all);
      b->then = branch(depth - 1);
      b->otherwise = branch(depth - 1);
    }
    return NormalBranchPtr(b);
  };
  p.nodes.resize(size);
  for (std::size_t k = 0; k < size; ++k) {
    NormalNode& nd = p.nodes[k];
    std::size_t last = size - 1;
    int kind = k == last ? 0 : std::uniform_int_distribution<int>(0, 3)(rng);
    auto later = [&] { return std::uniform_int_distribution<std::size_t>(k + 1, last)(rng); };
    switch (kind) {
      case 0:
        nd.kind = NormalNode::Kind::Zero;
        break;
      case 1:
        nd.kind = NormalNode::Kind::Emit;
        nd.sig = pick(outputs);
        nd.b1 = later();
        break;
      case 2:
        nd.kind = NormalNode::Kind::Present;
        nd.sig = pick(all);
        nd.b1 = later();
        nd.branch = branch(2);
        break;
      default:
        nd.kind = NormalNode::Kind::Thread;
        nd.b1 = later();
        nd.b2 = later();
        break;
    }
  }
  std::size_t inits = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
  for (std::size_t i = 0; i < inits; ++i) p.initial.push_back(any());
  return p;
}

}  // namespace sl::testgen
