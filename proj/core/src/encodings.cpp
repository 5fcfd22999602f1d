#include "sl/encodings.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "sl/errors.hpp"

namespace sl {

namespace {

std::vector<std::string> words(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

int counterIndex(const std::string& w, std::size_t lineNo) {
  if (w == "c1") return 1;
  if (w == "c2") return 2;
  throw FormatError("line " + std::to_string(lineNo) + ": expected c1 or c2, got '" + w + "'");
}

std::string counterName(int c) { return "c" + std::to_string(c); }

}  // namespace

void CounterMachine::validate() const {
  std::set<std::string> known(states.begin(), states.end());
  if (!known.count(init)) throw FormatError("initial state '" + init + "' is not declared");
  if (!known.count(halt)) throw FormatError("halt state '" + halt + "' is not declared");
  auto target = [&](const std::string& from, const std::string& to) {
    if (!known.count(to)) throw FormatError("state '" + from + "' jumps to undeclared '" + to + "'");
  };
  for (const auto& q : states) {
    auto it = instrs.find(q);
    if (q == halt) {
      if (it != instrs.end()) throw FormatError("halt state '" + q + "' has an instruction");
      continue;
    }
    if (it == instrs.end()) throw FormatError("state '" + q + "' has no instruction");
    const auto& ins = it->second;
    if (ins.counter != 1 && ins.counter != 2) throw FormatError("state '" + q + "' uses a counter other than c1, c2");
    if (ins.kind == CounterInstr::TestZero) {
      target(q, ins.ifZero);
      target(q, ins.ifNonzero);
    } else {
      target(q, ins.next);
    }
  }
}

int CounterMachine::countersUsed() const {
  int c = 0;
  for (const auto& [q, ins] : instrs) c = std::max(c, ins.counter);
  return c;
}

CounterMachine parseCounterMachine(std::string_view text) {
  CounterMachine m;
  std::set<std::string> declared;
  auto declare = [&](const std::string& q) {
    if (declared.insert(q).second) m.states.push_back(q);
  };
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    // "q:" and "q :" are both accepted.
    std::string spaced;
    for (char ch : line) {
      if (ch == ':') spaced += " : ";
      else spaced += ch;
    }
    auto w = words(spaced);
    if (w.empty()) continue;
    auto bad = [&](const std::string& why) {
      return FormatError("line " + std::to_string(lineNo) + ": " + why);
    };
    if (w[0] == "init" || w[0] == "halt") {
      if (w.size() != 2) throw bad("expected '" + w[0] + " <state>'");
      (w[0] == "init" ? m.init : m.halt) = w[1];
      declare(w[1]);
      continue;
    }
    if (w[0] != "state" || w.size() < 3 || w[2] != ":") throw bad("expected 'state <name>: <instruction>'");
    const std::string& q = w[1];
    if (m.instrs.count(q)) throw bad("second instruction for state '" + q + "'");
    declare(q);
    CounterInstr ins;
    if (w.size() == 7 && (w[3] == "inc" || w[3] == "dec") && w[5] == "->") {
      ins.kind = w[3] == "inc" ? CounterInstr::Inc : CounterInstr::Dec;
      ins.counter = counterIndex(w[4], lineNo);
      ins.next = w[6];
      declare(ins.next);
    } else if (w.size() == 9 && w[3] == "ifzero" && w[5] == "->" && w[7] == "else") {
      ins.kind = CounterInstr::TestZero;
      ins.counter = counterIndex(w[4], lineNo);
      ins.ifZero = w[6];
      ins.ifNonzero = w[8];
      declare(ins.ifZero);
      declare(ins.ifNonzero);
    } else {
      throw bad("unrecognised instruction");
    }
    m.instrs[q] = ins;
  }
  if (m.states.empty()) throw FormatError("empty counter machine");
  if (m.init.empty()) m.init = m.states.front();
  if (m.halt.empty()) throw FormatError("missing 'halt <state>' line");
  m.validate();
  return m;
}

std::string printCounterMachine(const CounterMachine& m) {
  std::ostringstream out;
  out << "init " << m.init << "\nhalt " << m.halt << "\n";
  for (const auto& q : m.states) {
    auto it = m.instrs.find(q);
    if (it == m.instrs.end()) continue;
    const auto& ins = it->second;
    out << "state " << q << ": ";
    switch (ins.kind) {
      case CounterInstr::Inc: out << "inc " << counterName(ins.counter) << " -> " << ins.next; break;
      case CounterInstr::Dec: out << "dec " << counterName(ins.counter) << " -> " << ins.next; break;
      case CounterInstr::TestZero:
        out << "ifzero " << counterName(ins.counter) << " -> " << ins.ifZero << " else " << ins.ifNonzero;
        break;
    }
    out << "\n";
  }
  return out.str();
}

CounterRun runCounterMachine(const CounterMachine& m, std::uint64_t maxSteps) {
  CounterRun r;
  std::string q = m.init;
  while (r.steps < maxSteps) {
    if (q == m.halt) {
      r.halted = true;
      return r;
    }
    const auto& ins = m.instrs.at(q);
    std::uint64_t& c = ins.counter == 1 ? r.c1 : r.c2;
    switch (ins.kind) {
      case CounterInstr::Inc:
        ++c;
        q = ins.next;
        break;
      case CounterInstr::Dec:
        if (c == 0) {
          r.blocked = true;
          return r;
        }
        --c;
        q = ins.next;
        break;
      case CounterInstr::TestZero: q = c == 0 ? ins.ifZero : ins.ifNonzero; break;
    }
    ++r.steps;
  }
  r.halted = q == m.halt;
  return r;
}

// ---------------------------------------------------------------------------
// Encoding
//
// A stack cell sees its left neighbour through a vector (d i z a b) of
// signals: pop request, push request, zero, acknowledgement and abort. The
// control speaks to the top cell of each stack; the bottom cell Z emits
// zero in every instant it is alive.
//
// Tests whose branches never return are written as
//   (thread (now (await s) (thread T1)))  (watch s pause (thread T2))
// rather than with `present`, which would leave one blocked thread behind
// per test. Both forms have the same traces.

namespace {

const char* kVec = "d i z a b";
const char* kVecR = "d2 i2 z2 a2 b2";

std::string test(const std::string& s, const std::string& then, const std::string& otherwise) {
  return "(seq (thread (now (seq (await " + s + ") (thread " + then + ")))) (watch " + s + " (seq pause (thread " +
         otherwise + "))))";
}

std::string fresh(const std::string& vec, const std::string& body) {
  std::string out = body;
  auto names = words(vec);
  for (auto it = names.rbegin(); it != names.rend(); ++it) out = "(new " + *it + " " + out + ")";
  return out;
}

std::string cellDefs(const EncodeOptions& opts) {
  std::string v = kVec, r = kVecR;
  std::ostringstream out;
  // Bottom of the stack. A push turns it into S above a new bottom.
  out << "(def (Z " << v << ") (watch b (seq (emit z) "
      << test("i",
              "(seq (emit a) pause " +
                  fresh("d3 i3 z3 a3 b3", "(seq (thread (call S " + v +
                                              " d3 i3 z3 a3 b3)) (thread (call Z d3 i3 z3 a3 b3)))") +
                  ")",
              "(call Z " + v + ")")
      << ")))\n";
  // A full cell waits for either request.
  out << "(def (S " << v << " " << r << ") (seq"
      << " (thread (watch d (seq (await i) pause (thread (call Sp " << v << " " << r << ")))))"
      << " (thread (watch i (seq (await d) pause (thread (call Sr " << v << " " << r << ")))))))\n";
  out << "(def (Sp " << v << " " << r << ") "
      << fresh("d3 i3 z3 a3 b3",
               "(seq (emit a) (thread (call S " + v + " d3 i3 z3 a3 b3)) (call S d3 i3 z3 a3 b3 " + r + "))")
      << ")\n";
  // Pop: a cell above the bottom kills it and becomes the bottom; otherwise
  // it forwards the pop and waits for the answer.
  std::string markR = opts.instrument ? "(emit wave_r) " : "";
  std::string markL = opts.instrument ? "(emit wave_l) " : "";
  out << "(def (Sr " << v << " " << r << ") (seq " << markR
      << test("z2", "(seq (emit b2) pause (emit a) (call Z " + v + "))",
              "(seq (emit d2) (call Sl " + v + " " + r + "))")
      << "))\n";
  out << "(def (Sl " << v << " " << r << ") (seq " << markL << "(await a2) pause (emit a) (call S " << v << " " << r
      << ")))\n";
  return out.str();
}

std::string vecOf(int c) {
  std::string k = std::to_string(c);
  return "d" + k + " i" + k + " z" + k + " a" + k + " b" + k;
}

std::string encodeText(const CounterMachine& m, const Name& haltSignal, const EncodeOptions& opts, int stacks) {
  m.validate();
  std::string params;
  for (int c = 1; c <= stacks; ++c) params += (c > 1 ? " " : "") + vecOf(c);
  auto ctl = [&](const std::string& q) { return "(call Q_" + q + " " + params + ")"; };
  auto sig = [](const char* what, int c) { return std::string(what) + std::to_string(c); };

  std::ostringstream out;
  out << "(output " << haltSignal << (opts.instrument ? " wave_r wave_l" : "") << ")\n";
  out << cellDefs(opts);
  for (const auto& q : m.states) {
    out << "(def (Q_" << q << " " << params << ") ";
    if (q == m.halt) {
      out << "(emit " << haltSignal << "))\n";
      continue;
    }
    const auto& ins = m.instrs.at(q);
    switch (ins.kind) {
      case CounterInstr::Inc:
      case CounterInstr::Dec:
        out << "(seq (emit " << sig(ins.kind == CounterInstr::Inc ? "i" : "d", ins.counter) << ") (await "
            << sig("a", ins.counter) << ") pause " << ctl(ins.next) << ")";
        break;
      case CounterInstr::TestZero:
        out << test(sig("z", ins.counter), "(seq pause " + ctl(ins.ifZero) + ")", ctl(ins.ifNonzero));
        break;
    }
    out << ")\n";
  }
  std::string init = "(thread " + ctl(m.init) + ")";
  for (int c = 1; c <= stacks; ++c) init += " (thread (call Z " + vecOf(c) + "))";
  std::string allVecs;
  for (int c = 1; c <= stacks; ++c) allVecs += (c > 1 ? " " : "") + vecOf(c);
  out << "(run " << fresh(allVecs, "(seq " + init + ")") << ")\n";
  return out.str();
}

}  // namespace

std::string encodeCounterMachineText(const CounterMachine& m, const Name& haltSignal, const EncodeOptions& opts) {
  return encodeText(m, haltSignal, opts, 2);
}

SourceProgram encodeCounterMachine(const CounterMachine& m, const Name& haltSignal, const EncodeOptions& opts) {
  return parse(encodeCounterMachineText(m, haltSignal, opts));
}

SourceProgram encodePushdown(const CounterMachine& a, const Name& haltSignal, const EncodeOptions& opts) {
  if (a.countersUsed() > 1) throw FormatError("a pushdown description uses counter c1 only");
  return parse(encodeText(a, haltSignal, opts, 1));
}

}  // namespace sl
