#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sl/analysis.hpp"
#include "sl/cps.hpp"
#include "sl/encodings.hpp"
#include "sl/equiv.hpp"
#include "sl/errors.hpp"
#include "sl/mealy.hpp"
#include "sl/semantics.hpp"
#include "sl/syntax.hpp"
#include "sl/tailcore.hpp"

using json = nlohmann::json;
using namespace sl;

namespace {

enum Exit { kOk = 0, kUsage = 1, kReject = 2, kDistinguished = 3, kInconclusive = 4, kRuntime = 5 };

struct Global {
  std::uint64_t fuel = kDefaultFuel;
  std::optional<std::size_t> instants;
  std::string scheduler = "deterministic";
  std::uint64_t seed = 0;
  std::string format = "text";
  bool json() const { return format == "json"; }
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string readFile(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void writeOutput(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + path + "'");
  out << text;
}

bool endsWith(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// A `.slt` file is read as a tail program; anything else is source and
// goes through the CPS translation.
TailProgram loadTail(const std::string& path) {
  std::string text = readFile(path);
  if (endsWith(path, ".slt")) return parseTail(text);
  return cpsProgram(parse(text));
}

Scheduler makeScheduler(const Global& g) {
  if (g.scheduler == "random") {
    std::cerr << "scheduler=random seed=" << g.seed << "\n";
    return Scheduler::random(g.seed);
  }
  return Scheduler::deterministic();
}

std::vector<NameSet> loadInputs(const std::string& path, const Global& g) {
  std::vector<NameSet> in;
  if (!path.empty()) in = parseInputTrace(readFile(path));
  std::size_t n = g.instants.value_or(path.empty() ? 1 : in.size());
  in.resize(n);
  return in;
}

json setJson(const NameSet& s) { return json(std::vector<std::string>(s.begin(), s.end())); }

void printTrace(const Trace& tr, bool diverged, std::size_t divergedAt, const Global& g) {
  if (g.json()) {
    json j;
    j["trace"] = json::array();
    for (const auto& s : tr) j["trace"].push_back({{"in", setJson(s.in)}, {"out", setJson(s.out)}});
    j["diverged"] = diverged;
    if (diverged) j["diverged_at"] = divergedAt;
    std::cout << j.dump() << "\n";
    return;
  }
  for (const auto& s : tr) std::cout << formatTraceStep(s) << "\n";
}

template <class Runner>
int runWith(Runner& run, const std::vector<NameSet>& inputs, const Global& g) {
  Trace tr;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    try {
      tr.push_back({inputs[k], run.instant(inputs[k])});
    } catch (const FuelExhausted& e) {
      printTrace(tr, true, k, g);
      std::cerr << "error: " << e.what() << "\n";
      return kRuntime;
    }
  }
  printTrace(tr, false, 0, g);
  return kOk;
}

int printVerdict(const Verdict& v, const Global& g) {
  if (g.json()) {
    json j{{"verdict", v.accept ? "accept" : "reject"}};
    if (v.accept) j["order"] = v.order;
    else j["cycle"] = v.cycle;
    std::cout << j.dump() << "\n";
  } else if (v.accept) {
    std::cout << "accept\n";
  } else {
    std::cout << "reject: " << v.describeCycle() << "\n";
  }
  return v.accept ? kOk : kReject;
}

std::string witnessWord(const std::vector<std::uint32_t>& w) {
  std::string s;
  for (std::size_t k = 0; k < w.size(); ++k) s += (k ? " " : "") + formatMask(w[k]);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Toolkit for the SL synchronous language"};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  app.add_option("--fuel", g.fuel, "Reduction budget per instant")->check(CLI::PositiveNumber);
  app.add_option("--instants", g.instants, "Number of instants");
  app.add_option("--scheduler", g.scheduler, "Thread selection")
      ->check(CLI::IsMember({"deterministic", "random"}));
  app.add_option("--seed", g.seed, "Seed of the random scheduler");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"text", "json"}));

  std::string file, file2, inputsPath, outPath;

  auto* run = app.add_subcommand("run", "Run a source program");
  run->add_option("program", file, "Source program")->required();
  run->add_option("--inputs", inputsPath, "Input trace, one line per instant");

  auto* runTail = app.add_subcommand("run-tail", "Run a tail program");
  runTail->add_option("program", file, "Tail program")->required();
  runTail->add_option("--inputs", inputsPath, "Input trace, one line per instant");

  auto* step = app.add_subcommand("step", "Run interactively, one input line per instant");
  step->add_option("program", file, "Source program")->required();

  unsigned depth = 1;
  auto* reactivity = app.add_subcommand("check-reactivity", "Reactivity analysis");
  reactivity->add_option("program", file, "Source (.sl) or tail (.slt) program")->required();
  reactivity->add_option("--depth", depth, "Call unfolding depth");

  auto* bounded = app.add_subcommand("check-bounded", "Bounded-context analysis");
  bounded->add_option("program", file, "Source program")->required();

  bool plainPause = false;
  auto* cps = app.add_subcommand("cps", "Translate a source program to the tail core");
  cps->add_option("program", file, "Source program")->required();
  cps->add_option("-o,--output", outPath, "Output file");
  cps->add_flag("--plain-pause", plainPause, "Translate pause through the general clauses");

  auto* toMealy = app.add_subcommand("to-mealy", "Extract the Mealy machine of a program");
  toMealy->add_option("program", file, "Source (.sl) or tail (.slt) program")->required();
  toMealy->add_option("-o,--output", outPath, "Output file");

  auto* fromMealy = app.add_subcommand("from-mealy", "Compile a monotone Mealy machine");
  fromMealy->add_option("machine", file, "Machine file")->required();
  fromMealy->add_option("-o,--output", outPath, "Output file");

  auto* mealyEquiv = app.add_subcommand("mealy-equiv", "Trace equivalence of two machines");
  mealyEquiv->add_option("a", file, "First machine")->required();
  mealyEquiv->add_option("b", file2, "Second machine")->required();

  std::string mode = "exact";
  std::size_t equivDepth = 8, stateLimit = 100000;
  bool labelled = false;
  auto* equiv = app.add_subcommand("equiv", "Labelled bisimilarity of two programs");
  equiv->add_option("a", file, "First program (.slt, or .sl through CPS)")->required();
  equiv->add_option("b", file2, "Second program")->required();
  equiv->add_option("--mode", mode)->check(CLI::IsMember({"exact", "trace", "bounded"}));
  equiv->add_option("--depth", equivDepth, "Exploration depth of the bounded mode");
  equiv->add_option("--state-limit", stateLimit);
  equiv->add_flag("--labelled-suspension", labelled, "Use the labelled suspension predicate");

  std::string haltSignal = "halt";
  bool pushdown = false, instrument = false;
  auto* encode = app.add_subcommand("encode-cm", "Encode a counter machine as a source program");
  encode->add_option("machine", file, "Counter machine file")->required();
  encode->add_option("-o,--output", outPath, "Output file");
  encode->add_option("--halt-signal", haltSignal);
  encode->add_flag("--pushdown", pushdown, "Single-stack encoding (counter c1 only)");
  encode->add_flag("--instrument", instrument, "Emit wave_r and wave_l during pops");

  std::size_t confLimit = 5000, confDepth = 6;
  auto* confluence = app.add_subcommand("confluence-test", "Exhaustive one-step diamond check");
  confluence->add_option("program", file, "Source (.sl) or tail (.slt) program")->required();
  confluence->add_option("--state-limit", confLimit);
  confluence->add_option("--depth", confDepth, "Depth of the tail exploration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (run->parsed()) {
      auto prog = parse(readFile(file));
      auto inputs = loadInputs(inputsPath, g);
      Runner r(prog, makeScheduler(g), g.fuel);
      return runWith(r, inputs, g);
    }
    if (runTail->parsed()) {
      auto prog = parseTail(readFile(file));
      auto inputs = loadInputs(inputsPath, g);
      TailRunner r(prog, makeScheduler(g), g.fuel);
      return runWith(r, inputs, g);
    }
    if (step->parsed()) {
      auto prog = parse(readFile(file));
      Runner r(prog, makeScheduler(g), g.fuel);
      std::string line;
      for (std::size_t k = 0; !g.instants || k < *g.instants; ++k) {
        if (!g.json()) std::cout << "I> " << std::flush;
        if (!std::getline(std::cin, line)) break;
        auto in = parseInputTrace(line);
        NameSet input = in.empty() ? NameSet{} : in.front();
        NameSet out = r.instant(input);
        if (g.json()) {
          std::cout << json{{"in", setJson(input)}, {"out", setJson(out)}, {"residual", r.canonicalResidual()}}.dump()
                    << "\n";
        } else {
          std::cout << "O=" << formatSet(out) << "\n" << r.canonicalResidual() << "\n";
        }
      }
      return kOk;
    }
    if (reactivity->parsed()) {
      std::string text = readFile(file);
      if (endsWith(file, ".slt")) return printVerdict(checkReactivityTail(parseTail(text), depth), g);
      return printVerdict(checkReactivity(parse(text), depth), g);
    }
    if (bounded->parsed()) return printVerdict(checkBounded(parse(readFile(file))), g);
    if (cps->parsed()) {
      auto src = parse(readFile(file));
      CpsOptions opts;
      opts.optimizedPause = !plainPause;
      CpsTranslator tr(src, opts);
      auto tail = tr.program();
      writeOutput(outPath, printCpsResult(tail, tr.index()));
      return kOk;
    }
    if (toMealy->parsed()) {
      writeOutput(outPath, printMealy(programToMealy(loadTail(file))));
      return kOk;
    }
    if (fromMealy->parsed()) {
      auto m = parseMealy(readFile(file));
      if (auto v = validateMealy(m)) {
        std::cerr << "error: " << describe(*v, m) << "\n";
        return kReject;
      }
      writeOutput(outPath, printTailProgram(mealyToProgram(m)));
      return kOk;
    }
    if (mealyEquiv->parsed()) {
      auto r = mealyTraceEquiv(parseMealy(readFile(file)), parseMealy(readFile(file2)));
      if (g.json()) {
        json j{{"verdict", r.equivalent ? "equivalent" : "distinguished"}};
        if (!r.equivalent) j["witness"] = r.witness;
        std::cout << j.dump() << "\n";
      } else if (r.equivalent) {
        std::cout << "equivalent\n";
      } else {
        std::cout << "distinguished\nwitness: " << witnessWord(r.witness) << "\n";
      }
      return r.equivalent ? kOk : kDistinguished;
    }
    if (equiv->parsed()) {
      EquivOptions opts;
      opts.mode = mode == "exact" ? EquivMode::Exact : mode == "trace" ? EquivMode::Trace : EquivMode::Bounded;
      opts.depth = equivDepth;
      opts.stateLimit = stateLimit;
      opts.labelledSuspension = labelled;
      auto r = equivPrograms(loadTail(file), loadTail(file2), opts);
      if (g.json()) {
        std::cout << json{{"verdict", verdictName(r.verdict)},
                          {"witness", r.witness},
                          {"states", r.states},
                          {"depth", r.depth}}
                         .dump()
                  << "\n";
      } else {
        std::cout << verdictName(r.verdict) << "\n";
        for (const auto& w : r.witness) std::cout << "  " << w << "\n";
      }
      switch (r.verdict) {
        case EquivResult::Equivalent: return kOk;
        case EquivResult::Distinguished: return kDistinguished;
        case EquivResult::Inconclusive: return kInconclusive;
      }
    }
    if (encode->parsed()) {
      auto m = parseCounterMachine(readFile(file));
      EncodeOptions opts;
      opts.instrument = instrument;
      SourceProgram p = pushdown ? encodePushdown(m, haltSignal, opts) : encodeCounterMachine(m, haltSignal, opts);
      writeOutput(outPath, printProgram(p));
      return kOk;
    }
    if (confluence->parsed()) {
      ConfluenceReport rep;
      if (endsWith(file, ".slt")) {
        auto tail = parseTail(readFile(file));
        rep = confluenceCheck(tailDefsToProc(tail), initialProc(tail), confDepth, confLimit);
      } else {
        rep = sourceConfluence(parse(readFile(file)), g.instants.value_or(3), confLimit);
      }
      if (g.json()) {
        json j{{"ok", rep.ok}, {"states", rep.states}, {"pairs", rep.pairs}};
        if (!rep.ok) j["violation"] = rep.violation;
        std::cout << j.dump() << "\n";
      } else {
        std::cout << (rep.ok ? "confluent" : "violation: " + rep.violation) << " (" << rep.states << " states, "
                  << rep.pairs << " pairs)\n";
      }
      return rep.ok ? kOk : kReject;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const SyntaxError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const HasSignalGeneration& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kReject;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}
