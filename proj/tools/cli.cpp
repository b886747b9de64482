#include "cli.hpp"

#include "dot.hpp"
#include "gadgetforge/lower.hpp"
#include "gadgetforge/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

namespace gadgetforge::cli {

namespace {

using json = nlohmann::ordered_json;
using machine::Natural;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::shared_ptr<spdlog::logger> make_logger(std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto log = std::make_shared<spdlog::logger>("gadgetforge", sink);
  log->set_pattern("[%l] %v");
  const char* env = std::getenv("GADGETFORGE_LOG");
  const std::string level = env ? env : "info";
  if (level == "quiet") log->set_level(spdlog::level::off);
  else if (level == "debug") log->set_level(spdlog::level::debug);
  else log->set_level(spdlog::level::info);
  return log;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") out << text;
  else write_file(path, text);
}

std::vector<Natural> parse_values(const std::string& text) {
  std::vector<Natural> v;
  if (text.empty()) return v;
  std::istringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos)
      throw UsageError("counter values must be comma-separated naturals (got '" + text + "')");
    v.emplace_back(part);
  }
  return v;
}

std::string sidecar_path(const std::string& system_path) {
  const std::string ext = ".json";
  if (system_path.size() > ext.size() && system_path.compare(system_path.size() - ext.size(), ext.size(), ext) == 0)
    return system_path.substr(0, system_path.size() - ext.size()) + ".map.json";
  return system_path + ".map.json";
}

json natural_json(const Natural& n) {
  if (n <= std::numeric_limits<std::uint64_t>::max()) return n.convert_to<std::uint64_t>();
  return n.str();
}

std::string run_result_json(const machine::Program& p, const machine::RunResult& r) {
  json j;
  j["status"] = machine::to_string(r.status);
  j["steps"] = r.steps;
  j["pc"] = r.final.pc;
  json cs = json::object();
  for (std::size_t i = 0; i < p.counters.size(); ++i) cs[p.counters[i]] = natural_json(r.final.counters[i]);
  j["counters"] = cs;
  return j.dump(2) + "\n";
}

machine::Program load_program(const std::string& path, spdlog::logger& log) {
  auto parsed = machine::parse_program_with_warnings(read_file(path));
  for (const auto& w : parsed.warnings) log.warn("{}: {}", path, w);
  return std::move(parsed.program);
}

reach::Witness witness_from_json(const gadgets::SystemOfGadgets& sys, const json& labels) {
  reach::Witness w;
  for (const auto& l : labels) {
    auto idx = sys.instance_index(l.at("instance").get<std::string>());
    if (!idx) throw gadgets::SchemaError("witness: unknown instance " + l.at("instance").dump());
    const auto* spec = sys.find_spec(sys.instances[*idx].spec);
    auto loc = [&](const char* key) {
      auto li = spec->location_index(l.at(key).get<std::string>());
      if (!li) throw gadgets::SchemaError(std::string("witness: unknown location ") + l.at(key).dump());
      return *li;
    };
    auto state = [&](const char* key) -> State {
      if (l.at(key).is_string()) {
        auto q = spec->state_from_name(l.at(key).get<std::string>());
        if (!q) throw gadgets::SchemaError(std::string("witness: unknown state ") + l.at(key).dump());
        return *q;
      }
      return l.at(key).get<State>();
    };
    w.push_back({static_cast<std::uint32_t>(*idx), loc("entry"), loc("exit"), state("from"), state("to")});
  }
  return w;
}

LoweringArtifact construction(const std::string& name, const std::string& range_text) {
  const auto range = range_text.empty() ? lower::Range{1, 2, 1, 2} : lower::parse_range(range_text);
  if (name == "inc-decnz-decnz") return lower::build_inc_decnz_decnz();
  if (name == "inc-jzdec-sim") return lower::sim_incdecjz_via_incjzdec();
  if (name == "inc-decnz-pz-sim") return lower::sim_incjzdec_via_incdecnzpz();
  if (name == "sscd") return lower::build_sscd_from_incdecnz();
  if (name == "edge-duplicator") return lower::build_edge_duplicator(range);
  if (name == "edge-duplicator-harness") return lower::edge_duplicator_harness(range);
  if (name == "inc-ab-sim") return lower::sim_incdecnzpz_via_incab(range);
  if (name == "inc-ab-sim-dup") return lower::sim_incdecnzpz_via_incab(range, lower::DuplicatorMode::ViaDuplicators);
  throw UsageError("unknown construction '" + name +
                   "' (expected inc-decnz-decnz, inc-jzdec-sim, inc-decnz-pz-sim, sscd, edge-duplicator, "
                   "edge-duplicator-harness, inc-ab-sim or inc-ab-sim-dup)");
}

gadgets::GadgetSpec load_spec(const std::string& name_or_file) {
  try {
    return gadgets::standard_spec(name_or_file);
  } catch (const std::invalid_argument&) {
  }
  std::ifstream probe(name_or_file);
  if (!probe) throw UsageError("unknown spec '" + name_or_file + "' (not a shipped spec name or a readable file)");
  return gadgets::parse_spec(read_file(name_or_file));
}

std::optional<Relation> parse_relation(const std::string& text) {
  if (text.empty()) return std::nullopt;
  if (text == "bisimulation") return Relation::Bisimulation;
  if (text == "simulation-equivalence") return Relation::SimulationEquivalence;
  throw UsageError("relation must be bisimulation or simulation-equivalence");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  auto log = make_logger(err);
  CLI::App app{"Counter machines, counter gadgets, lowerings and their verification", "gadgetforge"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  std::string input, output, sidecar, counters, target = "inc-dec-jz", range, flow = "primitive", spec_arg, map_arg,
                                                 relation, witness_arg, values, cx_dot;
  std::uint64_t max_steps = 100000, cap = 8, budget = 1000000;
  std::uint64_t verify_budget = verify::DeriveOptions{}.visit_budget;

  auto* run = app.add_subcommand("run", "Execute a counter-machine program");
  run->add_option("program", input, "Assembly file")->required();
  run->add_option("--counters", counters, "Initial values v0,v1,...");
  run->add_option("--max-steps", max_steps, "Step budget")->check(CLI::PositiveNumber);

  auto* compile = app.add_subcommand("compile", "Compile a program to a system of gadgets");
  compile->add_option("program", input, "Assembly file")->required();
  compile->add_option("--target", target, "inc-dec-jz | inc-jzdec | inc-decnz-pz | inc-ab");
  compile->add_option("--range", range, "a,b,c,d for --target inc-ab");
  compile->add_option("--counters", counters, "Initial values v0,v1,...");
  compile->add_option("--flow", flow, "Flow gadget mode for inc-dec-jz: primitive | expanded")
      ->check(CLI::IsMember({"primitive", "expanded"}));
  compile->add_option("-o,--output", output, "System JSON path (stdout if omitted)");
  compile->add_option("--sidecar", sidecar, "Sidecar path (default <output>.map.json)");

  auto* reach_cmd = app.add_subcommand("reach", "Bounded reachability from start to goal");
  reach_cmd->add_option("system", input, "System JSON")->required();
  reach_cmd->add_option("--cap", cap, "Counter cap")->check(CLI::PositiveNumber);
  reach_cmd->add_option("--budget", budget, "Visit budget")->check(CLI::PositiveNumber);
  reach_cmd->add_option("-o,--output", output, "Output path");

  auto* verify_cmd = app.add_subcommand("verify-sim", "Check a subsystem against a spec gadget");
  verify_cmd->add_option("system", input, "Implementation system JSON")->required();
  verify_cmd->add_option("--map", map_arg, "Sidecar with port map and encoding")->required();
  verify_cmd->add_option("--spec", spec_arg, "Spec name or spec JSON file (default: the sidecar's spec)");
  verify_cmd->add_option("--cap", cap, "Spec-state cap")->check(CLI::PositiveNumber);
  verify_cmd->add_option("--relation", relation, "bisimulation | simulation-equivalence");
  verify_cmd->add_option("--budget", verify_budget, "Internal visit budget")->check(CLI::PositiveNumber);
  verify_cmd->add_option("--counterexample-dot", cx_dot, "Write the counterexample path as DOT");
  verify_cmd->add_option("-o,--output", output, "Output path");

  auto* dot = app.add_subcommand("dot", "Graphviz export of a system");
  dot->add_option("system", input, "System JSON")->required();
  dot->add_option("--witness", witness_arg, "Reach outcome JSON whose witness is highlighted");
  dot->add_option("-o,--output", output, "Output path");

  auto* init = app.add_subcommand("init-prologue", "Emit an initializer for the given counter values");
  init->add_option("--values", values, "Target values v0,v1,...")->required();
  init->add_option("program", input, "Program to prefix (otherwise the prologue ends in HALT)");
  init->add_option("-o,--output", output, "Output path");

  auto* construct = app.add_subcommand("construct", "Write a shipped construction and its sidecar");
  construct->add_option("name", input, "Construction name")->required();
  construct->add_option("--range", range, "a,b,c,d (default 1,2,1,2)");
  construct->add_option("-o,--output", output, "System JSON path")->required();
  construct->add_option("--sidecar", sidecar, "Sidecar path (default <output>.map.json)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kError;
  }

  try {
    if (run->parsed()) {
      const auto program = load_program(input, *log);
      auto init_values = parse_values(counters);
      if (init_values.empty()) init_values.assign(program.counters.size(), 0);
      if (init_values.size() != program.counters.size())
        throw UsageError("--counters expects " + std::to_string(program.counters.size()) + " values");
      const auto r = machine::run(program, init_values, max_steps);
      log->debug("run finished after {} steps", r.steps);
      out << run_result_json(program, r);
      if (r.status == machine::Status::BudgetExhausted) return kBudgetExhausted;
      if (r.status == machine::Status::FellOffEnd) return kFellOffEnd;
      return kOk;
    }
    if (compile->parsed()) {
      const auto program = load_program(input, *log);
      const auto t = lower::parse_target(target);
      const auto init_values = parse_values(counters);
      lower::Range rg;
      if (!range.empty()) rg = lower::parse_range(range);
      else if (t == lower::Target::IncAB) throw UsageError("--target inc-ab requires --range a,b,c,d");
      LoweringArtifact art;
      if (t == lower::Target::IncDecJZ && flow == "expanded")
        art = lower::compile_machine_to_incdecjz(program, init_values, lower::FlowMode::Expanded);
      else art = lower::pipeline(program, init_values, t, rg);
      log->info("compiled {} instructions to {} instances, {} edges", program.instructions.size(),
                art.system.instances.size(), art.system.edges.size());
      emit(output, gadgets::serialize_system(art.system), out);
      if (!sidecar.empty() || (!output.empty() && output != "-"))
        write_file(sidecar.empty() ? sidecar_path(output) : sidecar, serialize_sidecar(art));
      return kOk;
    }
    if (reach_cmd->parsed()) {
      const auto system = gadgets::parse_system(read_file(input));
      const gadgets::Model model(system);
      const auto o = reach::bfs_reach(model, cap, budget);
      log->info("{} after exploring {} configurations", reach::to_string(o.verdict), o.stats.explored);
      emit(output, reach::outcome_to_json(model, o), out);
      if (o.verdict == reach::Verdict::Reachable) return kOk;
      return o.verdict == reach::Verdict::UnreachableWithinCap ? kNegative : kInconclusive;
    }
    if (verify_cmd->parsed()) {
      const auto system = gadgets::parse_system(read_file(input));
      auto art = parse_sidecar(read_file(map_arg), system);
      if (!spec_arg.empty()) art.spec = load_spec(spec_arg);
      if (!art.spec) throw UsageError("no spec given and the sidecar names none");
      verify::DeriveOptions opts;
      opts.visit_budget = verify_budget;
      const auto report = verify::verify_artifact(art, cap, parse_relation(relation), opts);
      log->info("{} (relation size {})", verify::to_string(report.verdict), report.relation_size);
      verify::BoundaryLTS ports;
      for (const auto& e : *system.boundary) ports.ports.push_back(e.str());
      const gadgets::Model model(system);
      emit(output, verify::report_to_json(report, &ports, &model), out);
      if (!cx_dot.empty()) {
        reach::Witness path;
        if (report.counterexample)
          for (const auto& s : report.counterexample->impl_steps)
            path.insert(path.end(), s.witness.begin(), s.witness.end());
        write_file(cx_dot, to_dot(system, path));
      }
      if (report.verdict == verify::Verdict::Equivalent) return kOk;
      return report.verdict == verify::Verdict::NotEquivalent ? kNegative : kInconclusive;
    }
    if (dot->parsed()) {
      const auto system = gadgets::parse_system(read_file(input));
      reach::Witness w;
      if (!witness_arg.empty()) {
        json j;
        try {
          j = json::parse(read_file(witness_arg));
        } catch (const json::parse_error& e) {
          throw gadgets::SchemaError(std::string("invalid JSON: ") + e.what());
        }
        w = witness_from_json(system, j.at("witness"));
      }
      emit(output, to_dot(system, w), out);
      return kOk;
    }
    if (init->parsed()) {
      const auto vals = parse_values(values);
      machine::Program p;
      if (input.empty()) p = lower::with_halt(lower::emit_initializer(vals));
      else p = lower::prepend_initializer(load_program(input, *log), vals);
      emit(output, machine::serialize(p), out);
      return kOk;
    }
    if (construct->parsed()) {
      const auto art = construction(input, range);
      write_file(output, gadgets::serialize_system(art.system));
      write_file(sidecar.empty() ? sidecar_path(output) : sidecar, serialize_sidecar(art));
      return kOk;
    }
  } catch (const machine::ParseError& e) {
    err << "error: " << input << ": " << e.what() << "\n";
    return kError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}

}  // namespace gadgetforge::cli
