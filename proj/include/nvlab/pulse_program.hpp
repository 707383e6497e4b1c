#pragma once

// Pulse-sequence DSL. Grammar (statements separated by newlines or ';',
// '#' starts a comment):
//
//   program   = { statement } ;
//   statement = "pulse" expr "on" target "phase" phase
//             | "wait" expr
//             | "repeat" ( INTEGER | "N" ) "{" { statement } "}" ;
//   target    = "m-1" | "m+1" | "sym" ;
//   phase     = "X" | "Y" | "-X" | "-Y" | expr ;
//   expr      = term { ( "+" | "-" ) term } ;
//   term      = unary { ( "*" | "/" ) unary } ;
//   unary     = [ "-" ] primary ;
//   primary   = NUMBER [ UNIT | "pi" ] | "pi" | "tau" | "N" | "(" expr ")" ;
//   UNIT      = "s" | "ms" | "us" | "ns" ;
//
// `tau` is the total free-evolution time in seconds and `N` the sequence
// order; "τ" is accepted as a spelling of tau. A number directly followed by
// pi multiplies it (3pi/2), a number followed by a unit is scaled to seconds.

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nvlab/spin.hpp"

namespace nvlab {

enum class Symbol { tau, order, pi };

struct Expr {
  enum class Kind { number, symbol, negate, add, subtract, multiply, divide };

  Kind kind = Kind::number;
  double value = 0.0;
  Symbol symbol = Symbol::pi;
  std::vector<Expr> operands;

  static Expr number(double v);
  static Expr sym(Symbol s);
  static Expr negate(Expr operand);
  static Expr binary(Kind op, Expr lhs, Expr rhs);

  bool operator==(const Expr&) const = default;
};

struct Bindings {
  double tau = 0.0;
  int order = 1;
};

// Throws CompileError on division by zero.
double evaluate(const Expr& expr, const Bindings& bindings);
bool references(const Expr& expr, Symbol symbol);

struct Node;

struct PulseNode {
  Expr angle;
  Transition transition = Transition::minus;
  Expr phase;
  bool operator==(const PulseNode&) const = default;
};

struct WaitNode {
  Expr duration;
  bool operator==(const WaitNode&) const = default;
};

struct RepeatNode {
  // count < 0 means the symbolic order N.
  int count = -1;
  std::vector<Node> body;
  bool symbolic() const { return count < 0; }
  bool operator==(const RepeatNode&) const;
};

struct Node {
  std::variant<PulseNode, WaitNode, RepeatNode> value;
  bool operator==(const Node&) const = default;
};

struct ProgramAst {
  std::vector<Node> nodes;

  bool uses_order() const;
  bool operator==(const ProgramAst&) const = default;
};

// Throws ParseError (line/column) on syntax errors and unknown symbols.
ProgramAst parse_pseq(std::string_view source);

// Canonical source text; parse_pseq(print_pseq(ast)) == ast.
std::string print_pseq(const ProgramAst& ast);

struct TimedInstruction {
  enum class Kind { pulse, delay };

  Kind kind = Kind::delay;
  PulseSpec pulse;
  double duration = 0.0;  // s, delays only
  double start = 0.0;     // s

  bool is_pulse() const { return kind == Kind::pulse; }
};

struct CompiledProgram {
  std::vector<TimedInstruction> instructions;
  double tau = 0.0;
  int order = 1;

  std::size_t pulse_count() const;
  std::size_t delay_count() const;
};

// Expands repeats, folds expressions, merges adjacent delays and assigns
// absolute start times. Throws CompileError for negative delays, angles
// outside (0, 2 pi], a total delay differing from tau, or invalid params.
CompiledProgram compile(const ProgramAst& ast, const Bindings& params);

enum class SequenceKind { ramsey, hahn, te_zero_field, t_ramsey, te_field, cpmg, tcpmg };

// Throws UsageError for unknown names.
SequenceKind sequence_kind_from_string(std::string_view name);
std::string_view to_string(SequenceKind kind);

struct BuiltinOptions {
  // Final TCPMG readout: pi/2 (default) or 3pi/2 on the -1 transition. Both
  // undo the opening pulse.
  bool tcpmgThreeHalvesReadout = false;
};

// Canonical DSL source of a builtin sequence.
std::string builtin_source(SequenceKind kind, const BuiltinOptions& options = {});
ProgramAst builtin(SequenceKind kind, const BuiltinOptions& options = {});

// Substitutes a concrete order for N (repeat counts and expressions).
// Throws UsageError when order < 1.
ProgramAst bind_order(const ProgramAst& ast, int order);
ProgramAst builtin(SequenceKind kind, int order, const BuiltinOptions& options = {});

// Instruction list as a JSON document (array of objects).
std::string to_json(const CompiledProgram& program);

}  // namespace nvlab
