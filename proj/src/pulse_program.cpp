#include "nvlab/pulse_program.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "nvlab/error.hpp"

namespace nvlab {

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

Expr Expr::number(double v) {
  Expr e;
  e.kind = Kind::number;
  e.value = v;
  return e;
}

Expr Expr::sym(Symbol s) {
  Expr e;
  e.kind = Kind::symbol;
  e.symbol = s;
  return e;
}

Expr Expr::negate(Expr operand) {
  Expr e;
  e.kind = Kind::negate;
  e.operands.push_back(std::move(operand));
  return e;
}

Expr Expr::binary(Kind op, Expr lhs, Expr rhs) {
  Expr e;
  e.kind = op;
  e.operands.push_back(std::move(lhs));
  e.operands.push_back(std::move(rhs));
  return e;
}

double evaluate(const Expr& expr, const Bindings& bindings) {
  using K = Expr::Kind;
  switch (expr.kind) {
    case K::number:
      return expr.value;
    case K::symbol:
      switch (expr.symbol) {
        case Symbol::tau:
          return bindings.tau;
        case Symbol::order:
          return static_cast<double>(bindings.order);
        case Symbol::pi:
          return kPi;
      }
      break;
    case K::negate:
      return -evaluate(expr.operands[0], bindings);
    case K::add:
      return evaluate(expr.operands[0], bindings) + evaluate(expr.operands[1], bindings);
    case K::subtract:
      return evaluate(expr.operands[0], bindings) - evaluate(expr.operands[1], bindings);
    case K::multiply:
      return evaluate(expr.operands[0], bindings) * evaluate(expr.operands[1], bindings);
    case K::divide: {
      const double denom = evaluate(expr.operands[1], bindings);
      if (denom == 0.0) throw CompileError("division by zero");
      return evaluate(expr.operands[0], bindings) / denom;
    }
  }
  throw CompileError("malformed expression");
}

bool references(const Expr& expr, Symbol symbol) {
  if (expr.kind == Expr::Kind::symbol) return expr.symbol == symbol;
  for (const auto& op : expr.operands)
    if (references(op, symbol)) return true;
  return false;
}

bool RepeatNode::operator==(const RepeatNode& other) const {
  return count == other.count && body == other.body;
}

namespace {

bool node_uses_order(const Node& node) {
  if (const auto* p = std::get_if<PulseNode>(&node.value))
    return references(p->angle, Symbol::order) || references(p->phase, Symbol::order);
  if (const auto* w = std::get_if<WaitNode>(&node.value))
    return references(w->duration, Symbol::order);
  const auto& r = std::get<RepeatNode>(node.value);
  if (r.symbolic()) return true;
  for (const auto& child : r.body)
    if (node_uses_order(child)) return true;
  return false;
}

}  // namespace

bool ProgramAst::uses_order() const {
  for (const auto& node : nodes)
    if (node_uses_order(node)) return true;
  return false;
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

namespace {

struct Token {
  enum class Kind { identifier, number, target, punct, newline, end };
  Kind kind = Kind::end;
  std::string text;
  double number = 0.0;
  bool timesPi = false;
  Transition target = Transition::minus;
  std::size_t line = 1;
  std::size_t column = 1;
};

std::string describe(const Token& t) {
  switch (t.kind) {
    case Token::Kind::end:
      return "end of input";
    case Token::Kind::newline:
      return "end of line";
    default:
      return "'" + t.text + "'";
  }
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_blanks();
      Token t;
      t.line = line_;
      t.column = column_;
      if (pos_ >= src_.size()) {
        t.kind = Token::Kind::end;
        out.push_back(t);
        return out;
      }
      const char c = src_[pos_];
      if (c == '\n' || c == ';') {
        t.kind = Token::Kind::newline;
        t.text = c == ';' ? ";" : "\\n";
        advance();
      } else if (c == 'm' && try_target(t)) {
        // handled
      } else if (static_cast<unsigned char>(c) == 0xCF && peek(1) == static_cast<char>(0x84)) {
        t.kind = Token::Kind::identifier;
        t.text = "tau";
        advance();
        advance();
      } else if (ident_start(c)) {
        t.kind = Token::Kind::identifier;
        while (pos_ < src_.size() && ident_char(src_[pos_])) {
          t.text += src_[pos_];
          advance();
        }
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
        lex_number(t);
      } else if (std::string_view("+-*/(){}").find(c) != std::string_view::npos) {
        t.kind = Token::Kind::punct;
        t.text = c;
        advance();
      } else {
        throw ParseError(std::string("unexpected character '") + c + "'", line_, column_);
      }
      out.push_back(std::move(t));
    }
  }

 private:
  char peek(std::size_t ahead) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else if ((static_cast<unsigned char>(src_[pos_]) & 0xC0) != 0x80) {
      ++column_;
    }
    ++pos_;
  }

  void skip_blanks() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\r') {
        advance();
      } else {
        break;
      }
    }
  }

  bool try_target(Token& t) {
    const char sign = peek(1);
    if ((sign != '-' && sign != '+') || peek(2) != '1' || ident_char(peek(3)) || peek(3) == '.')
      return false;
    t.kind = Token::Kind::target;
    t.target = sign == '-' ? Transition::minus : Transition::plus;
    t.text = std::string("m") + sign + "1";
    for (int i = 0; i < 3; ++i) advance();
    return true;
  }

  void lex_number(Token& t) {
    const std::size_t begin = pos_;
    while (std::isdigit(static_cast<unsigned char>(peek(0)))) advance();
    if (peek(0) == '.') {
      advance();
      while (std::isdigit(static_cast<unsigned char>(peek(0)))) advance();
    }
    if ((peek(0) == 'e' || peek(0) == 'E') &&
        (std::isdigit(static_cast<unsigned char>(peek(1))) ||
         ((peek(1) == '+' || peek(1) == '-') && std::isdigit(static_cast<unsigned char>(peek(2)))))) {
      advance();
      if (peek(0) == '+' || peek(0) == '-') advance();
      while (std::isdigit(static_cast<unsigned char>(peek(0)))) advance();
    }
    t.kind = Token::Kind::number;
    t.text = std::string(src_.substr(begin, pos_ - begin));
    t.number = std::stod(t.text);

    if (!ident_start(peek(0))) return;
    std::string suffix;
    const std::size_t line = line_, column = column_;
    while (ident_char(peek(0))) {
      suffix += peek(0);
      advance();
    }
    t.text += suffix;
    if (suffix == "pi") {
      t.timesPi = true;
    } else if (suffix == "s") {
    } else if (suffix == "ms") {
      t.number *= 1e-3;
    } else if (suffix == "us") {
      t.number *= 1e-6;
    } else if (suffix == "ns") {
      t.number *= 1e-9;
    } else {
      throw ParseError("unknown number suffix '" + suffix + "'", line, column);
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  ProgramAst run() {
    ProgramAst ast;
    ast.nodes = statements(/*nested=*/false);
    return ast;
  }

 private:
  const Token& current() const { return tokens_[pos_]; }
  const Token& next() const { return tokens_[std::min(pos_ + 1, tokens_.size() - 1)]; }
  void consume() {
    if (pos_ + 1 < tokens_.size()) ++pos_;
  }

  [[noreturn]] void fail(const std::string& expected) const {
    throw ParseError("expected " + expected + ", found " + describe(current()), current().line,
                     current().column);
  }

  bool is_punct(char c) const {
    return current().kind == Token::Kind::punct && current().text[0] == c;
  }
  bool is_word(std::string_view w) const {
    return current().kind == Token::Kind::identifier && current().text == w;
  }

  void expect_word(std::string_view w) {
    if (!is_word(w)) fail("'" + std::string(w) + "'");
    consume();
  }

  void skip_separators() {
    while (current().kind == Token::Kind::newline) consume();
  }

  void end_of_statement() {
    if (current().kind == Token::Kind::newline) {
      consume();
      return;
    }
    if (current().kind == Token::Kind::end || is_punct('}')) return;
    fail("end of statement");
  }

  std::vector<Node> statements(bool nested) {
    std::vector<Node> out;
    while (true) {
      skip_separators();
      if (current().kind == Token::Kind::end) {
        if (nested) fail("'}'");
        return out;
      }
      if (is_punct('}')) {
        if (!nested) fail("a statement");
        return out;
      }
      out.push_back(statement());
    }
  }

  Node statement() {
    if (is_word("pulse")) return pulse();
    if (is_word("wait")) {
      consume();
      WaitNode w{expr()};
      end_of_statement();
      return Node{std::move(w)};
    }
    if (is_word("repeat")) return repeat();
    fail("'pulse', 'wait' or 'repeat'");
  }

  Node pulse() {
    consume();
    PulseNode p;
    p.angle = expr();
    expect_word("on");
    if (current().kind == Token::Kind::target) {
      p.transition = current().target;
      consume();
    } else if (is_word("sym")) {
      p.transition = Transition::symmetric;
      consume();
    } else {
      fail("transition 'm-1', 'm+1' or 'sym'");
    }
    expect_word("phase");
    p.phase = phase();
    end_of_statement();
    return Node{std::move(p)};
  }

  static std::optional<Expr> named_phase(std::string_view name) {
    if (name == "X") return Expr::number(0.0);
    if (name == "Y") return Expr::binary(Expr::Kind::divide, Expr::sym(Symbol::pi), Expr::number(2.0));
    return std::nullopt;
  }

  Expr phase() {
    if (current().kind == Token::Kind::identifier) {
      if (auto named = named_phase(current().text)) {
        consume();
        return *named;
      }
    }
    if (is_punct('-') && next().kind == Token::Kind::identifier) {
      if (auto named = named_phase(next().text)) {
        consume();
        consume();
        // -X and -Y are the axes rotated by pi.
        return Expr::binary(Expr::Kind::add, *named, Expr::sym(Symbol::pi));
      }
    }
    return expr();
  }

  Node repeat() {
    consume();
    RepeatNode r;
    if (current().kind == Token::Kind::number && !current().timesPi) {
      const double v = current().number;
      if (v != std::floor(v) || v < 1.0 || current().text.find_first_of(".eE") != std::string::npos)
        fail("a positive integer repeat count");
      r.count = static_cast<int>(v);
      consume();
    } else if (is_word("N")) {
      r.count = -1;
      consume();
    } else {
      fail("repeat count (integer or N)");
    }
    if (!is_punct('{')) fail("'{'");
    consume();
    r.body = statements(/*nested=*/true);
    if (r.body.empty()) fail("a statement inside repeat");
    consume();  // '}'
    end_of_statement();
    return Node{std::move(r)};
  }

  Expr expr() {
    Expr lhs = term();
    while (is_punct('+') || is_punct('-')) {
      const auto op = is_punct('+') ? Expr::Kind::add : Expr::Kind::subtract;
      consume();
      lhs = Expr::binary(op, std::move(lhs), term());
    }
    return lhs;
  }

  Expr term() {
    Expr lhs = unary();
    while (is_punct('*') || is_punct('/')) {
      const auto op = is_punct('*') ? Expr::Kind::multiply : Expr::Kind::divide;
      const std::size_t line = current().line, column = current().column;
      consume();
      Expr rhs = unary();
      if (op == Expr::Kind::divide && !references(rhs, Symbol::tau) && !references(rhs, Symbol::order) &&
          evaluate(rhs, Bindings{}) == 0.0)
        throw ParseError("division by zero", line, column);
      lhs = Expr::binary(op, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  Expr unary() {
    if (is_punct('-')) {
      consume();
      return Expr::negate(primary());
    }
    return primary();
  }

  Expr primary() {
    const Token& t = current();
    if (t.kind == Token::Kind::number) {
      Expr e = Expr::number(t.number);
      if (t.timesPi) e = Expr::binary(Expr::Kind::multiply, std::move(e), Expr::sym(Symbol::pi));
      consume();
      return e;
    }
    if (t.kind == Token::Kind::identifier) {
      Expr e;
      if (t.text == "pi") {
        e = Expr::sym(Symbol::pi);
      } else if (t.text == "tau") {
        e = Expr::sym(Symbol::tau);
      } else if (t.text == "N") {
        e = Expr::sym(Symbol::order);
      } else {
        throw ParseError("unknown symbol '" + t.text + "'", t.line, t.column);
      }
      consume();
      return e;
    }
    if (is_punct('(')) {
      consume();
      Expr e = expr();
      if (!is_punct(')')) fail("')'");
      consume();
      return e;
    }
    fail("an expression");
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace

ProgramAst parse_pseq(std::string_view source) { return Parser(Lexer(source).run()).run(); }

// ---------------------------------------------------------------------------
// Printer
// ---------------------------------------------------------------------------

namespace {

void print_expr(std::ostream& os, const Expr& e) {
  using K = Expr::Kind;
  switch (e.kind) {
    case K::number: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", e.value);
      os << buf;
      return;
    }
    case K::symbol:
      os << (e.symbol == Symbol::tau ? "tau" : e.symbol == Symbol::order ? "N" : "pi");
      return;
    case K::negate:
      os << "(-";
      print_expr(os, e.operands[0]);
      os << ')';
      return;
    default: {
      const char op = e.kind == K::add ? '+' : e.kind == K::subtract ? '-' : e.kind == K::multiply ? '*' : '/';
      os << '(';
      print_expr(os, e.operands[0]);
      os << op;
      print_expr(os, e.operands[1]);
      os << ')';
    }
  }
}

void print_nodes(std::ostream& os, const std::vector<Node>& nodes, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  for (const auto& node : nodes) {
    if (const auto* p = std::get_if<PulseNode>(&node.value)) {
      os << pad << "pulse ";
      print_expr(os, p->angle);
      os << " on " << to_string(p->transition) << " phase ";
      print_expr(os, p->phase);
      os << '\n';
    } else if (const auto* w = std::get_if<WaitNode>(&node.value)) {
      os << pad << "wait ";
      print_expr(os, w->duration);
      os << '\n';
    } else {
      const auto& r = std::get<RepeatNode>(node.value);
      os << pad << "repeat ";
      if (r.symbolic())
        os << 'N';
      else
        os << r.count;
      os << " {\n";
      print_nodes(os, r.body, indent + 1);
      os << pad << "}\n";
    }
  }
}

}  // namespace

std::string print_pseq(const ProgramAst& ast) {
  std::ostringstream os;
  print_nodes(os, ast.nodes, 0);
  return os.str();
}

// ---------------------------------------------------------------------------
// Compiler
// ---------------------------------------------------------------------------

std::size_t CompiledProgram::pulse_count() const {
  std::size_t n = 0;
  for (const auto& ins : instructions) n += ins.is_pulse() ? 1 : 0;
  return n;
}

std::size_t CompiledProgram::delay_count() const { return instructions.size() - pulse_count(); }

namespace {

struct Expander {
  const Bindings& params;
  std::vector<TimedInstruction> out;
  long double requestedDelay = 0.0L;

  void run(const std::vector<Node>& nodes) {
    for (const auto& node : nodes) {
      if (const auto* p = std::get_if<PulseNode>(&node.value)) {
        TimedInstruction ins;
        ins.kind = TimedInstruction::Kind::pulse;
        ins.pulse.transition = p->transition;
        ins.pulse.angle = evaluate(p->angle, params);
        ins.pulse.axisPhase = evaluate(p->phase, params);
        if (!std::isfinite(ins.pulse.angle) || ins.pulse.angle <= 0.0 ||
            ins.pulse.angle > kTwoPi * (1.0 + 1e-12))
          throw CompileError("pulse angle outside (0, 2pi]");
        if (!std::isfinite(ins.pulse.axisPhase)) throw CompileError("non-finite pulse phase");
        out.push_back(ins);
      } else if (const auto* w = std::get_if<WaitNode>(&node.value)) {
        const double d = evaluate(w->duration, params);
        if (!std::isfinite(d)) throw CompileError("non-finite delay");
        if (d < 0.0) throw CompileError("negative computed delay");
        requestedDelay += d;
        if (!out.empty() && !out.back().is_pulse()) {
          out.back().duration = static_cast<double>(static_cast<long double>(out.back().duration) + d);
        } else {
          TimedInstruction ins;
          ins.kind = TimedInstruction::Kind::delay;
          ins.duration = d;
          out.push_back(ins);
        }
      } else {
        const auto& r = std::get<RepeatNode>(node.value);
        const int count = r.symbolic() ? params.order : r.count;
        for (int i = 0; i < count; ++i) run(r.body);
      }
    }
  }
};

}  // namespace

CompiledProgram compile(const ProgramAst& ast, const Bindings& params) {
  if (!(params.tau >= 0.0) || !std::isfinite(params.tau))
    throw CompileError("tau must be finite and non-negative");
  if (params.order < 1) throw CompileError("order N must be at least 1");

  Expander expander{params, {}};
  expander.run(ast.nodes);

  const long double mismatch = expander.requestedDelay - static_cast<long double>(params.tau);
  if (std::fabs(static_cast<double>(mismatch)) > 1e-15 * params.tau ||
      (params.tau == 0.0 && expander.requestedDelay != 0.0L)) {
    std::ostringstream msg;
    msg << "total delay " << static_cast<double>(expander.requestedDelay) << " s does not match tau "
        << params.tau << " s";
    throw CompileError(msg.str());
  }

  CompiledProgram program;
  program.tau = params.tau;
  program.order = params.order;
  program.instructions = std::move(expander.out);
  long double clock = 0.0L;
  for (auto& ins : program.instructions) {
    ins.start = static_cast<double>(clock);
    if (!ins.is_pulse()) clock += ins.duration;
  }
  return program;
}

// ---------------------------------------------------------------------------
// Builtins
// ---------------------------------------------------------------------------

SequenceKind sequence_kind_from_string(std::string_view name) {
  if (name == "ramsey") return SequenceKind::ramsey;
  if (name == "hahn") return SequenceKind::hahn;
  if (name == "te_zero_field") return SequenceKind::te_zero_field;
  if (name == "t_ramsey") return SequenceKind::t_ramsey;
  if (name == "te_field") return SequenceKind::te_field;
  if (name == "cpmg") return SequenceKind::cpmg;
  if (name == "tcpmg") return SequenceKind::tcpmg;
  throw UsageError("unknown sequence kind '" + std::string(name) + "'");
}

std::string_view to_string(SequenceKind kind) {
  switch (kind) {
    case SequenceKind::ramsey:
      return "ramsey";
    case SequenceKind::hahn:
      return "hahn";
    case SequenceKind::te_zero_field:
      return "te_zero_field";
    case SequenceKind::t_ramsey:
      return "t_ramsey";
    case SequenceKind::te_field:
      return "te_field";
    case SequenceKind::cpmg:
      return "cpmg";
    case SequenceKind::tcpmg:
      return "tcpmg";
  }
  return "?";
}

namespace {

constexpr std::string_view kTripleEcho =
    "  pulse pi on m-1 phase X\n"
    "  pulse pi on m+1 phase X\n"
    "  pulse pi on m-1 phase X\n";

}  // namespace

std::string builtin_source(SequenceKind kind, const BuiltinOptions& options) {
  std::string s;
  switch (kind) {
    case SequenceKind::ramsey:
      s = "pulse pi/2 on m-1 phase Y\n"
          "wait tau\n"
          "pulse 3pi/2 on m-1 phase Y\n";
      break;
    case SequenceKind::hahn:
      s = "pulse pi/2 on m-1 phase Y\n"
          "wait tau/2\n"
          "pulse pi on m-1 phase X\n"
          "wait tau/2\n"
          "pulse 3pi/2 on m-1 phase Y\n";
      break;
    case SequenceKind::te_zero_field:
      s = "pulse pi/4 on sym phase Y\n"
          "wait tau/2\n"
          "pulse pi on sym phase X\n"
          "wait tau/2\n"
          "pulse pi/4 on sym phase Y\n";
      break;
    case SequenceKind::t_ramsey:
    case SequenceKind::te_field:
      // One swap leaves the coherence on |0>,|+1>, so the readout addresses m+1.
      s = "pulse pi/2 on m-1 phase Y\n"
          "wait tau/2\n" +
          std::string(kTripleEcho) +
          "wait tau/2\n"
          "pulse pi/2 on m+1 phase Y\n";
      break;
    case SequenceKind::cpmg:
      s = "pulse pi/2 on m-1 phase Y\n"
          "repeat N {\n"
          "  wait tau/(2*N)\n"
          "  pulse pi on m-1 phase X\n"
          "  wait tau/(2*N)\n"
          "}\n"
          "pulse 3pi/2 on m-1 phase Y\n";
      break;
    case SequenceKind::tcpmg:
      // 2N triple-echo blocks at (2k-1) tau / 4N.
      s = "pulse pi/2 on m-1 phase Y\n"
          "repeat N {\n"
          "  wait tau/(4*N)\n" +
          std::string(kTripleEcho) + "  wait tau/(2*N)\n" + std::string(kTripleEcho) +
          "  wait tau/(4*N)\n"
          "}\n";
      s += options.tcpmgThreeHalvesReadout ? "pulse 3pi/2 on m-1 phase Y\n"
                                           : "pulse pi/2 on m-1 phase -Y\n";
      break;
  }
  return s;
}

ProgramAst builtin(SequenceKind kind, const BuiltinOptions& options) {
  return parse_pseq(builtin_source(kind, options));
}

namespace {

Expr bind_expr(const Expr& e, int order) {
  if (e.kind == Expr::Kind::symbol && e.symbol == Symbol::order)
    return Expr::number(static_cast<double>(order));
  Expr out = e;
  for (auto& op : out.operands) op = bind_expr(op, order);
  return out;
}

std::vector<Node> bind_nodes(const std::vector<Node>& nodes, int order) {
  std::vector<Node> out;
  out.reserve(nodes.size());
  for (const auto& node : nodes) {
    if (const auto* p = std::get_if<PulseNode>(&node.value)) {
      out.push_back(Node{PulseNode{bind_expr(p->angle, order), p->transition, bind_expr(p->phase, order)}});
    } else if (const auto* w = std::get_if<WaitNode>(&node.value)) {
      out.push_back(Node{WaitNode{bind_expr(w->duration, order)}});
    } else {
      const auto& r = std::get<RepeatNode>(node.value);
      RepeatNode bound;
      bound.count = r.symbolic() ? order : r.count;
      bound.body = bind_nodes(r.body, order);
      out.push_back(Node{std::move(bound)});
    }
  }
  return out;
}

}  // namespace

ProgramAst bind_order(const ProgramAst& ast, int order) {
  if (order < 1) throw UsageError("sequence order N must be at least 1");
  return ProgramAst{bind_nodes(ast.nodes, order)};
}

ProgramAst builtin(SequenceKind kind, int order, const BuiltinOptions& options) {
  return bind_order(builtin(kind, options), order);
}

std::string to_json(const CompiledProgram& program) {
  nlohmann::json doc;
  doc["tau_s"] = program.tau;
  doc["N"] = program.order;
  auto& list = doc["instructions"] = nlohmann::json::array();
  for (const auto& ins : program.instructions) {
    nlohmann::json j;
    j["start_s"] = ins.start;
    if (ins.is_pulse()) {
      j["kind"] = "pulse";
      j["transition"] = std::string(to_string(ins.pulse.transition));
      j["angle_rad"] = ins.pulse.angle;
      j["phase_rad"] = ins.pulse.axisPhase;
    } else {
      j["kind"] = "delay";
      j["duration_s"] = ins.duration;
    }
    list.push_back(std::move(j));
  }
  return doc.dump(2);
}

}  // namespace nvlab
