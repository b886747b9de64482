#include "gadgetforge/machine.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <sstream>

namespace gadgetforge::machine {

namespace {

std::string format_parse_error(std::size_t line, const std::string& cause) {
  return "line " + std::to_string(line) + ": " + cause;
}

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> words;
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

std::string upper(std::string s) {
  for (auto& ch : s) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return s;
}

std::optional<std::size_t> parse_index(const std::string& s) {
  if (s.empty() || s.size() > 18) return std::nullopt;
  std::size_t v = 0;
  for (char ch : s) {
    if (!std::isdigit(static_cast<unsigned char>(ch))) return std::nullopt;
    v = v * 10 + static_cast<std::size_t>(ch - '0');
  }
  return v;
}

bool valid_counter_name(const std::string& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_';
  });
}

}  // namespace

ParseError::ParseError(std::size_t line, const std::string& cause)
    : std::runtime_error(format_parse_error(line, cause)), line_(line) {}

std::size_t Program::counter_index(const std::string& name) const {
  auto it = std::find(counters.begin(), counters.end(), name);
  if (it == counters.end()) throw std::out_of_range("unknown counter " + name);
  return static_cast<std::size_t>(it - counters.begin());
}

ParseResult parse_program_with_warnings(const std::string& text) {
  Program program;
  bool declared = false;
  struct Pending {
    std::size_t line;
    std::size_t index;
    std::vector<std::string> words;
  };
  std::vector<Pending> pending;
  std::map<std::size_t, std::size_t> seen;

  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    auto hash = raw.find('#');
    std::string line = hash == std::string::npos ? raw : raw.substr(0, hash);
    auto colon = line.find(':');
    auto words_all = split_words(line);
    if (words_all.empty()) continue;
    if (colon == std::string::npos) throw ParseError(lineno, "expected 'INDEX: INSTRUCTION'");
    std::string head = line.substr(0, colon);
    auto head_words = split_words(head);
    if (head_words.size() != 1) throw ParseError(lineno, "malformed line label");
    auto rest = split_words(line.substr(colon + 1));
    if (head_words[0] == "counters") {
      if (declared) throw ParseError(lineno, "counters declared twice");
      if (!pending.empty()) throw ParseError(lineno, "counters header must precede instructions");
      declared = true;
      for (const auto& c : rest) {
        if (!valid_counter_name(c)) throw ParseError(lineno, "invalid counter name '" + c + "'");
        if (std::find(program.counters.begin(), program.counters.end(), c) != program.counters.end())
          throw ParseError(lineno, "duplicate counter '" + c + "'");
        program.counters.push_back(c);
      }
      continue;
    }
    auto idx = parse_index(head_words[0]);
    if (!idx) throw ParseError(lineno, "invalid instruction index '" + head_words[0] + "'");
    if (auto it = seen.find(*idx); it != seen.end())
      throw ParseError(lineno, "duplicate instruction index " + std::to_string(*idx) + " (first at line " +
                                   std::to_string(it->second) + ")");
    seen[*idx] = lineno;
    if (rest.empty()) throw ParseError(lineno, "missing mnemonic");
    pending.push_back({lineno, *idx, rest});
  }
  if (pending.empty()) throw ParseError(lineno == 0 ? 1 : lineno, "program has no instructions");

  std::sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) { return a.index < b.index; });
  for (std::size_t i = 0; i < pending.size(); ++i)
    if (pending[i].index != i)
      throw ParseError(pending[i].line, "instruction index " + std::to_string(i) + " missing");

  auto counter_of = [&](const Pending& p, const std::string& name) -> std::size_t {
    auto it = std::find(program.counters.begin(), program.counters.end(), name);
    if (it != program.counters.end()) return static_cast<std::size_t>(it - program.counters.begin());
    if (declared) throw ParseError(p.line, "undeclared counter '" + name + "'");
    if (!valid_counter_name(name)) throw ParseError(p.line, "invalid counter name '" + name + "'");
    program.counters.push_back(name);
    return program.counters.size() - 1;
  };
  // Headerless programs declare counters in order of first appearance in the text.
  std::vector<const Pending*> by_line;
  for (const auto& p : pending) by_line.push_back(&p);
  std::sort(by_line.begin(), by_line.end(), [](const Pending* a, const Pending* b) { return a->line < b->line; });
  if (!declared)
    for (const Pending* p : by_line) {
      auto op = upper(p->words[0]);
      if ((op == "INC" || op == "DEC" || op == "JZ") && p->words.size() >= 2) counter_of(*p, p->words[1]);
    }

  const std::size_t n = pending.size();
  for (const auto& p : pending) {
    auto op = upper(p.words[0]);
    auto arity = [&](std::size_t k) {
      if (p.words.size() != k + 1)
        throw ParseError(p.line, op + " expects " + std::to_string(k) + " operand(s)");
    };
    if (op == "INC") {
      arity(1);
      program.instructions.push_back(Inc{counter_of(p, p.words[1])});
    } else if (op == "DEC") {
      arity(1);
      program.instructions.push_back(Dec{counter_of(p, p.words[1])});
    } else if (op == "JZ") {
      arity(2);
      auto c = counter_of(p, p.words[1]);
      auto t = parse_index(p.words[2]);
      if (!t) throw ParseError(p.line, "invalid jump target '" + p.words[2] + "'");
      if (*t >= n)
        throw ParseError(p.line, "target out of range: " + std::to_string(*t) + " not in [0, " + std::to_string(n) + ")");
      program.instructions.push_back(JZ{c, *t});
    } else if (op == "HALT") {
      arity(0);
      program.instructions.push_back(Halt{});
    } else {
      throw ParseError(p.line, "unknown mnemonic '" + p.words[0] + "'");
    }
  }

  ParseResult result{std::move(program), {}};
  if (can_fall_off_end(result.program))
    result.warnings.push_back("instruction " + std::to_string(n - 1) +
                              " is not HALT; control can fall off the end");
  return result;
}

Program parse_program(const std::string& text) { return parse_program_with_warnings(text).program; }

std::string serialize(const Program& program) {
  std::ostringstream out;
  out << "counters:";
  for (const auto& c : program.counters) out << ' ' << c;
  out << '\n';
  for (std::size_t i = 0; i < program.instructions.size(); ++i) {
    out << i << ": ";
    std::visit(
        [&](const auto& ins) {
          using T = std::decay_t<decltype(ins)>;
          if constexpr (std::is_same_v<T, Inc>) out << "INC " << program.counters[ins.counter];
          else if constexpr (std::is_same_v<T, Dec>) out << "DEC " << program.counters[ins.counter];
          else if constexpr (std::is_same_v<T, JZ>) out << "JZ " << program.counters[ins.counter] << ' ' << ins.target;
          else out << "HALT";
        },
        program.instructions[i]);
    out << '\n';
  }
  return out.str();
}

void validate(const Program& program) {
  if (program.instructions.empty()) throw std::invalid_argument("program has no instructions");
  const auto n = program.instructions.size();
  for (std::size_t i = 0; i < n; ++i) {
    std::visit(
        [&](const auto& ins) {
          using T = std::decay_t<decltype(ins)>;
          if constexpr (!std::is_same_v<T, Halt>) {
            if (ins.counter >= program.counters.size())
              throw std::invalid_argument("instruction " + std::to_string(i) + " uses an undeclared counter");
          }
          if constexpr (std::is_same_v<T, JZ>) {
            if (ins.target >= n)
              throw std::invalid_argument("instruction " + std::to_string(i) + ": target out of range");
          }
        },
        program.instructions[i]);
  }
}

bool can_fall_off_end(const Program& program) {
  return !program.instructions.empty() && !std::holds_alternative<Halt>(program.instructions.back());
}

const char* to_string(Status status) {
  switch (status) {
    case Status::Running: return "Running";
    case Status::Halted: return "Halted";
    case Status::FellOffEnd: return "FellOffEnd";
    case Status::BudgetExhausted: return "BudgetExhausted";
  }
  return "?";
}

StepResult step(const Program& program, const MachineConfig& config) {
  StepResult r{config, Status::Running};
  auto& c = r.config;
  std::visit(
      [&](const auto& ins) {
        using T = std::decay_t<decltype(ins)>;
        if constexpr (std::is_same_v<T, Inc>) {
          ++c.counters[ins.counter];
          ++c.pc;
        } else if constexpr (std::is_same_v<T, Dec>) {
          if (c.counters[ins.counter] > 0) --c.counters[ins.counter];
          ++c.pc;
        } else if constexpr (std::is_same_v<T, JZ>) {
          c.pc = c.counters[ins.counter] == 0 ? ins.target : c.pc + 1;
        } else {
          r.status = Status::Halted;
        }
      },
      program.instructions.at(config.pc));
  if (r.status == Status::Running && c.pc >= program.instructions.size()) r.status = Status::FellOffEnd;
  return r;
}

RunResult run(const Program& program, const std::vector<Natural>& initial, std::uint64_t max_steps) {
  if (initial.size() != program.counters.size())
    throw std::invalid_argument("expected " + std::to_string(program.counters.size()) + " initial counter values, got " +
                                std::to_string(initial.size()));
  RunResult result;
  result.final.counters = initial;
  while (result.steps < max_steps) {
    auto s = step(program, result.final);
    ++result.steps;
    result.final = std::move(s.config);
    if (s.status != Status::Running) {
      result.status = s.status;
      return result;
    }
  }
  result.status = Status::BudgetExhausted;
  return result;
}

}  // namespace gadgetforge::machine
