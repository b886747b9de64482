#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace gadgetforge::machine {

using Natural = boost::multiprecision::cpp_int;

struct Inc {
  std::size_t counter;
  bool operator==(const Inc&) const = default;
};
struct Dec {
  std::size_t counter;
  bool operator==(const Dec&) const = default;
};
struct JZ {
  std::size_t counter;
  std::size_t target;
  bool operator==(const JZ&) const = default;
};
struct Halt {
  bool operator==(const Halt&) const = default;
};

using Instruction = std::variant<Inc, Dec, JZ, Halt>;

struct Program {
  std::vector<std::string> counters;
  std::vector<Instruction> instructions;

  std::size_t counter_index(const std::string& name) const;
  bool operator==(const Program&) const = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& cause);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct ParseResult {
  Program program;
  std::vector<std::string> warnings;
};

// Counters are declared by the header line or, without one, in order of first use.
ParseResult parse_program_with_warnings(const std::string& text);
Program parse_program(const std::string& text);
std::string serialize(const Program& program);

// Throws std::invalid_argument on a violated Instruction or Program invariant.
void validate(const Program& program);
bool can_fall_off_end(const Program& program);

enum class Status { Running, Halted, FellOffEnd, BudgetExhausted };
const char* to_string(Status status);

struct MachineConfig {
  std::size_t pc = 0;
  std::vector<Natural> counters;
  bool operator==(const MachineConfig&) const = default;
};

struct StepResult {
  MachineConfig config;
  Status status = Status::Running;
};

StepResult step(const Program& program, const MachineConfig& config);

struct RunResult {
  Status status = Status::BudgetExhausted;
  MachineConfig final;
  std::uint64_t steps = 0;
};

RunResult run(const Program& program, const std::vector<Natural>& initial, std::uint64_t max_steps);

}  // namespace gadgetforge::machine
