#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "mst/channel.hpp"
#include "mst/interpreter.hpp"
#include "mst/monitor.hpp"
#include "mst/parser.hpp"
#include "mst/render.hpp"
#include "mst/subtyping.hpp"
#include "mst/typechecker.hpp"

namespace {

constexpr int kUsage = 64;
constexpr int kParse = 65;

struct ParseFailure {
  std::string message;
};

mst::Program load(const std::vector<std::string>& paths) {
  std::vector<mst::SourceFile> files;
  for (auto& path : paths) {
    std::ifstream in(path);
    if (!in) throw ParseFailure{"cannot read " + path};
    std::stringstream ss;
    ss << in.rdbuf();
    files.push_back({path, ss.str()});
  }
  try {
    return mst::parse_files(files);
  } catch (const mst::Error& e) {
    throw ParseFailure{e.what()};
  }
}

// session types first, then value types such as [Σ] or {A,B}
mst::ValueType parse_type(const std::string& text, const mst::Program& p) {
  try {
    return mst::ValueType::session(mst::parse_session_type(text, &p));
  } catch (const mst::Error&) {
  }
  try {
    return mst::parse_value_type(text, &p);
  } catch (const mst::Error& e) {
    throw ParseFailure{e.what()};
  }
}

mst::Channel parse_channel(const std::string& text, const std::string& file) {
  try {
    if (file.empty()) return mst::parse_channel_type(text);
    mst::Program p = load({file});
    return mst::parse_channel_type(text, &p);
  } catch (const mst::Error& e) {
    throw ParseFailure{e.what()};
  }
}

int cmd_check(const std::vector<std::string>& files, bool library) {
  mst::Program p = load(files);
  mst::CheckOptions opts;
  opts.require_main = !library;
  mst::CheckReport r = mst::check_program(p, opts);
  std::cout << r.render();
  return r.ok() ? 0 : 1;
}

int cmd_run(const std::vector<std::string>& files, int steps, std::optional<uint64_t> seed, bool trace, bool vstates,
            bool vtraces, bool unchecked) {
  mst::Program p = load(files);
  if (!unchecked) {
    mst::CheckReport r = mst::check_program(p);
    if (!r.ok()) {
      std::cout << r.render();
      return 1;
    }
  }
  mst::RunOptions opts;
  opts.limit = steps;
  opts.seed = seed;
  std::optional<mst::Monitor> mon;
  std::optional<mst::Violation> violation;
  mst::Configuration init = mst::initial_config(p);
  if (vstates || vtraces) {
    mon.emplace(p, mst::MonitorOptions{vstates, vtraces});
    mon->start(init);
    violation = mon->check(init, 0);
  }
  mst::RunResult res;
  if (violation) {
    res.outcome.kind = mst::Outcome::Kind::Violation;
  } else {
    mst::StepObserver obs = nullptr;
    if (mon)
      obs = [&](const mst::Configuration& b, const mst::StepEvent& ev, const mst::Configuration& a, int n) {
        violation = mon->observe(b, ev, a, n);
        return !violation;
      };
    res = mst::run_from(p, init, opts, obs);
  }
  if (trace)
    for (auto& l : res.log) std::cout << l << "\n";
  if (violation) std::cout << violation->line() << "\n";
  std::cout << res.outcome.render() << "\n";
  return res.outcome.exit_code();
}

int cmd_relation(const std::string& file, const std::string& a, const std::string& b, bool equiv) {
  mst::Program p = load({file});
  mst::ValueType ta = parse_type(a, p), tb = parse_type(b, p);
  bool ok = equiv ? mst::equivalent(ta, tb) : mst::subtype_value(ta, tb);
  std::cout << (ok ? "yes" : "no") << "\n";
  return 0;
}

int cmd_trace(const std::string& file, const std::string& cls, const std::string& items) {
  mst::Program p = load({file});
  const mst::ClassDecl* c = p.cls(cls);
  if (!c) {
    std::cerr << "unknown class " << cls << "\n";
    return kUsage;
  }
  mst::TraceCheck r = mst::replay(c->session, mst::parse_trace(items));
  if (r.valid) {
    std::cout << "valid\n";
    return 0;
  }
  std::cout << "invalid at " << r.position << " (" << r.item << ")\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mst: modular session types for objects"};
  app.require_subcommand(1);

  std::vector<std::string> files;
  bool library = false;
  auto* check = app.add_subcommand("check", "type check a program");
  check->add_option("files", files, "source files")->required();
  check->add_flag("--library", library, "do not require a main method");

  std::vector<std::string> run_files;
  int steps = 1000;
  std::optional<uint64_t> seed;
  bool trace = false, vstates = false, vtraces = false, unchecked = false;
  auto* run = app.add_subcommand("run", "execute a program");
  run->add_option("files", run_files, "source files")->required();
  run->add_option("--steps", steps, "step limit");
  run->add_option("--seed", seed, "random scheduler seed");
  run->add_flag("--trace", trace, "print the event log");
  run->add_flag("--verify-states", vstates, "check every state against the tracked environments");
  run->add_flag("--verify-traces", vtraces, "check call traces against the session types");
  run->add_flag("--unchecked", unchecked, "skip the static check");

  std::string rel_file, t1, t2;
  auto* subtype = app.add_subcommand("subtype", "decide T1 <: T2");
  auto* equiv = app.add_subcommand("equiv", "decide T1 equivalent to T2");
  for (auto* sc : {subtype, equiv}) {
    sc->add_option("file", rel_file)->required();
    sc->add_option("t1", t1)->required();
    sc->add_option("t2", t2)->required();
  }

  std::string chan_text, chan_file;
  auto* dual = app.add_subcommand("dual", "dual of a channel type");
  auto* translate = app.add_subcommand("translate", "class session type of a channel endpoint");
  for (auto* sc : {dual, translate}) {
    sc->add_option("type", chan_text)->required();
    sc->add_option("--file", chan_file, "resolve channel names against this program");
  }

  std::string trace_file, trace_cls, trace_items;
  auto* tr = app.add_subcommand("trace", "validate a call trace against a class session type");
  tr->add_option("file", trace_file)->required();
  tr->add_option("class", trace_cls)->required();
  tr->add_option("items", trace_items)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*check) return cmd_check(files, library);
    if (*run) return cmd_run(run_files, steps, seed, trace, vstates, vtraces, unchecked);
    if (*subtype) return cmd_relation(rel_file, t1, t2, false);
    if (*equiv) return cmd_relation(rel_file, t1, t2, true);
    if (*dual) {
      std::cout << mst::render(mst::dual(parse_channel(chan_text, chan_file))) << "\n";
      return 0;
    }
    if (*translate) {
      std::cout << mst::render(mst::translate_channel(parse_channel(chan_text, chan_file))) << "\n";
      return 0;
    }
    if (*tr) return cmd_trace(trace_file, trace_cls, trace_items);
  } catch (const ParseFailure& e) {
    std::cerr << "parse error: " << e.message << "\n";
    return kParse;
  } catch (const mst::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kUsage;
}
