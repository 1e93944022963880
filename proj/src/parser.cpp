// SPDX-License-Identifier: Apache-2.0

#include "peb/parser.hpp"

#include <set>
#include <stdexcept>
#include <unordered_set>

#include "lexer.hpp"

namespace peb {

namespace {

const std::unordered_set<std::string> kSectionKeywords = {
    "CONTEXT",  "SETS",           "CONSTANTS", "END",   "MACHINE", "SEES",
    "VARIABLES", "INVARIANTS",    "INITIALISATION", "INITIALIZATION", "EVENTS",
    "EVENT",    "WEIGHT",         "ANY",       "WHERE", "THEN",    "PROPERTIES",
};

const std::unordered_set<std::string> kReservedWords = {
    "not", "or", "and", "mod", "div", "union", "inter", "card", "dom", "ran", "POW",
    "min", "max", "bool", "TRUE", "FALSE", "true", "false", "True", "False",
};

struct SyntaxError {
  std::string message;
  SourceSpan span;
};

class Parser {
 public:
  Parser(std::string_view source, const std::string& file)
      : file_(std::make_shared<const std::string>(file)), tokens_(tokenize(source)) {}

  Model parse_model() {
    Model model;
    check_lex_error();
    if (peek().kind == TokenKind::End) fail("expected CONTEXT or MACHINE");
    while (peek().kind != TokenKind::End) {
      if (peek().is_word("CONTEXT")) {
        if (model.context) fail("duplicate CONTEXT section");
        model.context = parse_context();
      } else if (peek().is_word("MACHINE")) {
        if (model.machine) fail("duplicate MACHINE section");
        model.machine = parse_machine();
      } else {
        unexpected("expected CONTEXT or MACHINE");
      }
    }
    return model;
  }

  ExprPtr parse_standalone_expression() {
    check_lex_error();
    if (peek().kind == TokenKind::End) fail("expected an expression");
    auto e = parse_expr();
    reject_enumerated(*e);
    if (peek().kind != TokenKind::End) unexpected("unexpected trailing input");
    return e;
  }

 private:
  // --- token plumbing -----------------------------------------------------

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = std::min(pos_ + ahead, tokens_.size() - 1);
    return tokens_[i];
  }
  const Token& advance() {
    const Token& t = tokens_[pos_];
    if (pos_ + 1 < tokens_.size()) ++pos_;
    last_ = &t;
    return t;
  }
  bool accept(std::string_view punct) {
    if (peek().is(punct)) {
      advance();
      return true;
    }
    return false;
  }
  bool accept_word(std::string_view word) {
    if (peek().is_word(word)) {
      advance();
      return true;
    }
    return false;
  }

  SourceSpan span_of(const Token& t) const {
    return SourceSpan{file_, t.line, t.column, static_cast<std::uint32_t>(t.length)};
  }
  SourceSpan span_from(const Token& first) const {
    SourceSpan s = span_of(first);
    if (last_ && last_->offset >= first.offset) {
      s.length = static_cast<std::uint32_t>(last_->offset + last_->length - first.offset);
    }
    return s;
  }

  [[noreturn]] void fail(const std::string& msg) { throw SyntaxError{msg, span_of(peek())}; }
  [[noreturn]] void unexpected(const std::string& what) {
    const Token& t = peek();
    if (t.kind == TokenKind::End) fail(what + ", found end of input");
    if (t.kind == TokenKind::Ident && is_all_caps(t.text) && !kSectionKeywords.count(t.text) &&
        !kReservedWords.count(t.text)) {
      // Likely a misspelled section keyword.
      fail("unknown keyword '" + t.text + "' (" + what + ")");
    }
    fail(what + ", found '" + t.text + "'");
  }

  static bool is_all_caps(const std::string& s) {
    bool letter = false;
    for (char c : s) {
      if (std::islower(static_cast<unsigned char>(c))) return false;
      if (std::isalpha(static_cast<unsigned char>(c))) letter = true;
    }
    return letter && s.size() > 2;
  }

  void check_lex_error() {
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (tokens_[i].kind == TokenKind::Error) {
        throw SyntaxError{tokens_[i].text, span_of(tokens_[i])};
      }
    }
  }

  bool at_section_keyword() const {
    return peek().kind == TokenKind::Ident && kSectionKeywords.count(peek().text) > 0;
  }

  std::string expect_ident(const std::string& what) {
    const Token& t = peek();
    if (t.kind != TokenKind::Ident || kSectionKeywords.count(t.text) || kReservedWords.count(t.text)) {
      unexpected("expected " + what);
    }
    return advance().text;
  }

  void expect(std::string_view punct) {
    if (!accept(punct)) unexpected("expected '" + std::string(punct) + "'");
  }
  void expect_word(std::string_view word) {
    if (!accept_word(word)) unexpected("expected " + std::string(word));
  }

  void skip_separators() {
    while (accept(";")) {
    }
  }

  // --- sections ------------------------------------------------------------

  Context parse_context() {
    Context ctx;
    const Token& start = advance();
    ctx.name = expect_ident("context name");
    ctx.span = span_from(start);
    std::set<std::string> seen;
    while (!peek().is_word("END")) {
      const Token& kw = peek();
      if (kw.is_word("SETS")) {
        section_once(seen, kw);
        advance();
        while (!at_section_keyword() && peek().kind != TokenKind::End) {
          ctx.sets.push_back(parse_set_decl());
          skip_separators();
        }
      } else if (kw.is_word("CONSTANTS")) {
        section_once(seen, kw);
        advance();
        while (!at_section_keyword() && peek().kind != TokenKind::End) {
          ctx.constants.push_back(parse_constant());
          skip_separators();
        }
      } else {
        unexpected("expected SETS, CONSTANTS or END in context");
      }
    }
    expect_word("END");
    return ctx;
  }

  void section_once(std::set<std::string>& seen, const Token& kw) {
    if (!seen.insert(kw.text).second) fail("duplicate " + kw.text + " section");
  }

  SetDecl parse_set_decl() {
    SetDecl decl;
    const Token& first = peek();
    decl.name = expect_ident("set name");
    expect(":");
    if (peek().kind == TokenKind::Int) {
      decl.cardinality = parse_int_token(advance());
    } else {
      expect("{");
      if (!peek().is("}")) {
        do {
          if (peek().kind == TokenKind::String) {
            decl.elements.push_back(advance().text);
          } else {
            decl.elements.push_back(expect_ident("set element"));
          }
        } while (accept(","));
      }
      expect("}");
    }
    decl.span = span_from(first);
    return decl;
  }

  ConstantDecl parse_constant() {
    ConstantDecl decl;
    const Token& first = peek();
    decl.name = expect_ident("constant name");
    expect(":");
    decl.type = parse_expr();
    expect(":=");
    decl.value = parse_expr();
    reject_enumerated(*decl.value);
    decl.span = span_from(first);
    return decl;
  }

  Machine parse_machine() {
    Machine m;
    const Token& start = advance();
    m.name = expect_ident("machine name");
    m.span = span_from(start);
    if (accept_word("SEES")) m.sees = expect_ident("context name");
    std::set<std::string> seen;
    while (peek().kind != TokenKind::End && !peek().is_word("END") &&
           !peek().is_word("CONTEXT") && !peek().is_word("MACHINE")) {
      const Token& kw = peek();
      if (kw.is_word("VARIABLES")) {
        section_once(seen, kw);
        advance();
        while (peek().kind == TokenKind::Ident && !at_section_keyword()) {
          m.variable_spans.push_back(span_of(peek()));
          m.variables.push_back(expect_ident("variable name"));
          if (!accept(",")) skip_separators();
        }
      } else if (kw.is_word("INVARIANTS")) {
        section_once(seen, kw);
        advance();
        while (!at_section_keyword() && peek().kind != TokenKind::End) {
          auto inv = parse_expr();
          reject_enumerated(*inv);
          m.invariants.push_back(std::move(inv));
          skip_separators();
        }
      } else if (kw.is_word("INITIALISATION") || kw.is_word("INITIALIZATION")) {
        if (seen.count("INITIALISATION") || seen.count("INITIALIZATION")) {
          fail("duplicate INITIALISATION section");
        }
        seen.insert(kw.text);
        advance();
        while (!at_section_keyword() && peek().kind != TokenKind::End) {
          Initialisation init;
          const Token& first = peek();
          init.target = expect_ident("variable name");
          expect(":=");
          init.value = parse_expr();
          reject_enumerated(*init.value);
          init.span = span_from(first);
          m.init.push_back(std::move(init));
          skip_separators();
        }
      } else if (kw.is_word("EVENTS")) {
        section_once(seen, kw);
        advance();
      } else if (kw.is_word("EVENT")) {
        if (seen.count("PROPERTIES")) fail("EVENT after PROPERTIES section");
        m.events.push_back(parse_event());
      } else if (kw.is_word("PROPERTIES")) {
        section_once(seen, kw);
        advance();
        while (!at_section_keyword() && peek().kind != TokenKind::End) {
          m.properties.push_back(parse_property(m.properties.size() + 1));
          skip_separators();
        }
      } else {
        unexpected("expected a machine section");
      }
    }
    // The closing END of a machine is optional at end of input.
    accept_word("END");
    return m;
  }

  Property parse_property(std::size_t position) {
    Property p;
    const Token& first = peek();
    if (peek().kind == TokenKind::Ident && peek(1).is(":=")) {
      p.name = expect_ident("property name");
      advance();
      p.named = true;
    } else {
      p.name = std::to_string(position);
    }
    p.expr = parse_expr();
    reject_enumerated(*p.expr);
    p.span = span_from(first);
    return p;
  }

  Event parse_event() {
    Event ev;
    const Token& start = advance();
    ev.name = expect_ident("event name");
    ev.span = span_from(start);
    std::set<std::string> seen;
    while (!peek().is_word("END")) {
      const Token& kw = peek();
      if (kw.is_word("WEIGHT")) {
        section_once(seen, kw);
        advance();
        ev.weight = parse_expr();
        reject_enumerated(*ev.weight);
      } else if (kw.is_word("ANY")) {
        section_once(seen, kw);
        advance();
        do {
          Parameter p;
          const Token& first = peek();
          p.name = expect_ident("parameter name");
          expect(":in");
          p.domain = parse_expr();
          reject_enumerated(*p.domain);
          p.span = span_from(first);
          ev.params.push_back(std::move(p));
          skip_separators();
        } while (peek().kind == TokenKind::Ident && !at_section_keyword());
      } else if (kw.is_word("WHERE")) {
        section_once(seen, kw);
        advance();
        ev.guard = parse_expr();
        reject_enumerated(*ev.guard);
      } else if (kw.is_word("THEN")) {
        section_once(seen, kw);
        advance();
        while (!at_section_keyword() && peek().kind != TokenKind::End) {
          ev.actions.push_back(parse_assignment());
          skip_separators();
        }
      } else {
        unexpected("expected WEIGHT, ANY, WHERE, THEN or END in event '" + ev.name + "'");
      }
    }
    expect_word("END");
    return ev;
  }

  Assignment parse_assignment() {
    Assignment a;
    const Token& first = peek();
    a.target = expect_ident("assignment target");
    if (accept(":in")) {
      a.kind = AssignKind::UniformSet;
      auto e = parse_expr();
      reject_enumerated(*e);
      a.exprs.push_back(std::move(e));
    } else {
      expect(":=");
      auto e = parse_expr();
      if (e->kind == ExprKind::Enumerated) {
        a.kind = AssignKind::Enumerated;
        a.exprs = e->args;
        a.probs = e->probs;
        for (const auto& x : a.exprs) reject_enumerated(*x);
      } else {
        reject_enumerated(*e);
        if (e->kind == ExprKind::SetLit && e->args.size() >= 2) {
          a.kind = AssignKind::UniformList;
          a.exprs = e->args;
        } else {
          a.kind = AssignKind::Deterministic;
          a.exprs.push_back(std::move(e));
        }
      }
    }
    a.span = span_from(first);
    return a;
  }

  void reject_enumerated(const Expr& e) {
    if (e.kind == ExprKind::Enumerated) {
      throw SyntaxError{"enumerated distribution {E @ p, ...} is only allowed as the right-hand "
                        "side of an assignment",
                        e.span};
    }
    for (const auto& a : e.args) reject_enumerated(*a);
  }

  // --- expressions -----------------------------------------------------------

  std::shared_ptr<Expr> node(ExprKind kind, const Token& first) {
    auto e = std::make_shared<Expr>();
    e->kind = kind;
    e->span = span_of(first);
    return e;
  }

  ExprPtr binary(Op op, ExprPtr lhs, ExprPtr rhs, const Token& first) {
    auto e = node(ExprKind::Binary, first);
    e->op = op;
    e->args = {std::move(lhs), std::move(rhs)};
    e->span = span_from(first);
    return e;
  }

  ExprPtr parse_expr() { return parse_iff(); }

  ExprPtr parse_iff() {
    const Token& first = peek();
    auto lhs = parse_or();
    if (accept("<=>")) return binary(Op::Iff, lhs, parse_or(), first);
    if (accept("=>")) return binary(Op::Implies, lhs, parse_iff(), first);
    return lhs;
  }

  ExprPtr parse_or() {
    const Token& first = peek();
    auto lhs = parse_and();
    while (true) {
      if (accept("\\/") || accept_word("or")) {
        lhs = binary(Op::Or, lhs, parse_and(), first);
      } else {
        return lhs;
      }
    }
  }

  ExprPtr parse_and() {
    const Token& first = peek();
    auto lhs = parse_not();
    while (true) {
      if (accept("/\\") || accept("&") || accept_word("and")) {
        lhs = binary(Op::And, lhs, parse_not(), first);
      } else {
        return lhs;
      }
    }
  }

  ExprPtr parse_not() {
    const Token& first = peek();
    if (accept_word("not")) {
      auto e = node(ExprKind::Unary, first);
      e->op = Op::Not;
      e->args = {parse_not()};
      e->span = span_from(first);
      return e;
    }
    return parse_relation();
  }

  ExprPtr parse_relation() {
    static const std::pair<std::string_view, Op> kOps[] = {
        {"=", Op::Eq},       {"/=", Op::Neq},       {"<", Op::Lt},
        {"<=", Op::Le},      {">", Op::Gt},         {">=", Op::Ge},
        {":", Op::In},       {"/:", Op::NotIn},     {"<:", Op::Subset},
        {"/<:", Op::NotSubset}, {"<<:", Op::StrictSubset},
    };
    const Token& first = peek();
    auto lhs = parse_maplet();
    for (const auto& [tok, op] : kOps) {
      if (accept(tok)) return binary(op, lhs, parse_maplet(), first);
    }
    return lhs;
  }

  ExprPtr parse_maplet() {
    const Token& first = peek();
    auto lhs = parse_setop();
    while (accept("|->")) lhs = binary(Op::Maplet, lhs, parse_setop(), first);
    return lhs;
  }

  ExprPtr parse_setop() {
    static const std::pair<std::string_view, Op> kOps[] = {
        {"<+", Op::Override}, {"<<|", Op::DomSub}, {"|>", Op::RangeRes},
        {"|>>", Op::RangeSub}, {"<|", Op::DomRes},  {"\\", Op::Diff},
    };
    const Token& first = peek();
    auto lhs = parse_interval();
    while (true) {
      bool matched = false;
      for (const auto& [tok, op] : kOps) {
        if (accept(tok)) {
          lhs = binary(op, lhs, parse_interval(), first);
          matched = true;
          break;
        }
      }
      if (!matched) {
        if (accept_word("union")) {
          lhs = binary(Op::Union, lhs, parse_interval(), first);
        } else if (accept_word("inter")) {
          lhs = binary(Op::Inter, lhs, parse_interval(), first);
        } else {
          return lhs;
        }
      }
    }
  }

  ExprPtr parse_interval() {
    const Token& first = peek();
    auto lhs = parse_additive();
    if (accept("..")) return binary(Op::Range, lhs, parse_additive(), first);
    return lhs;
  }

  ExprPtr parse_additive() {
    const Token& first = peek();
    auto lhs = parse_multiplicative();
    while (true) {
      if (accept("+")) {
        lhs = binary(Op::Add, lhs, parse_multiplicative(), first);
      } else if (accept("-")) {
        lhs = binary(Op::Sub, lhs, parse_multiplicative(), first);
      } else {
        return lhs;
      }
    }
  }

  ExprPtr parse_multiplicative() {
    const Token& first = peek();
    auto lhs = parse_unary();
    while (true) {
      if (accept("*")) {
        lhs = binary(Op::Mul, lhs, parse_unary(), first);
      } else if (accept_word("div") || accept("/")) {
        lhs = binary(Op::Div, lhs, parse_unary(), first);
      } else if (accept_word("mod")) {
        lhs = binary(Op::Mod, lhs, parse_unary(), first);
      } else {
        return lhs;
      }
    }
  }

  ExprPtr parse_unary() {
    const Token& first = peek();
    if (accept("-")) {
      if (peek().kind == TokenKind::Int && !peek().space_before) {
        // Fold `-5` into a literal so INT64_MIN stays representable.
        auto e = node(ExprKind::IntLit, first);
        e->int_value = parse_int_token(advance(), /*negate=*/true);
        e->span = span_from(first);
        return e;
      }
      auto e = node(ExprKind::Unary, first);
      e->op = Op::Neg;
      e->args = {parse_unary()};
      e->span = span_from(first);
      return e;
    }
    return parse_primary();
  }

  std::int64_t parse_int_token(const Token& t, bool negate = false) {
    std::uint64_t v = 0;
    for (char c : t.text) {
      std::uint64_t d = static_cast<std::uint64_t>(c - '0');
      if (v > (UINT64_MAX - d) / 10) throw SyntaxError{"integer literal out of range", span_of(t)};
      v = v * 10 + d;
    }
    const std::uint64_t limit = negate ? std::uint64_t{1} << 63 : (std::uint64_t{1} << 63) - 1;
    if (v > limit) throw SyntaxError{"integer literal out of range", span_of(t)};
    if (negate) return v == (std::uint64_t{1} << 63) ? INT64_MIN : -static_cast<std::int64_t>(v);
    return static_cast<std::int64_t>(v);
  }

  ExprPtr parse_primary() {
    static const std::pair<std::string_view, Op> kCalls[] = {
        {"card", Op::Card}, {"dom", Op::Dom}, {"ran", Op::Ran},      {"POW", Op::Pow},
        {"min", Op::Min},   {"max", Op::Max}, {"bool", Op::BoolOf},
    };
    const Token& first = peek();
    switch (first.kind) {
      case TokenKind::Int: {
        auto e = node(ExprKind::IntLit, first);
        e->int_value = parse_int_token(advance());
        return e;
      }
      case TokenKind::String: {
        auto e = node(ExprKind::SymLit, first);
        e->name = advance().text;
        return e;
      }
      case TokenKind::Decimal:
        fail("decimal literals are only allowed as probabilities after '@'");
      case TokenKind::Ident: {
        const std::string& w = first.text;
        if (w == "TRUE" || w == "true" || w == "True" || w == "FALSE" || w == "false" ||
            w == "False") {
          auto e = node(ExprKind::BoolLit, first);
          e->bool_value = w[0] == 'T' || w[0] == 't';
          advance();
          return e;
        }
        for (const auto& [word, op] : kCalls) {
          if (w == word) {
            advance();
            auto e = node(ExprKind::Call, first);
            e->op = op;
            expect("(");
            e->args = {parse_expr()};
            expect(")");
            e->span = span_from(first);
            return e;
          }
        }
        auto id = node(ExprKind::Ident, first);
        id->name = expect_ident("expression");
        if (peek().is("(") && !peek().space_before) {
          advance();
          auto e = node(ExprKind::Apply, first);
          e->args = {id, parse_expr()};
          expect(")");
          e->span = span_from(first);
          return e;
        }
        return id;
      }
      case TokenKind::Punct:
        if (accept("(")) {
          auto e = parse_expr();
          expect(")");
          return e;
        }
        if (first.is("{")) return parse_braces();
        unexpected("expected an expression");
      default:
        unexpected("expected an expression");
    }
  }

  ExprPtr parse_braces() {
    const Token& first = advance();
    if (accept("}")) {
      auto e = node(ExprKind::SetLit, first);
      e->span = span_from(first);
      return e;
    }
    if (peek().kind == TokenKind::Ident && peek(1).is(".")) {
      auto e = node(ExprKind::Comprehension, first);
      e->name = expect_ident("binder");
      expect(".");
      auto domain = parse_expr();
      expect("|");
      auto body = parse_expr();
      expect("}");
      e->args = {std::move(domain), std::move(body)};
      e->span = span_from(first);
      return e;
    }
    std::vector<ExprPtr> elems;
    std::vector<Rational> probs;
    bool enumerated = false;
    do {
      elems.push_back(parse_expr());
      if (accept("@")) {
        if (elems.size() > 1 && !enumerated) fail("mixing plain and '@' elements in braces");
        enumerated = true;
        probs.push_back(parse_probability());
      } else if (enumerated) {
        unexpected("expected '@' probability");
      }
    } while (accept(","));
    expect("}");
    auto e = node(enumerated ? ExprKind::Enumerated : ExprKind::SetLit, first);
    e->args = std::move(elems);
    e->probs = std::move(probs);
    e->span = span_from(first);
    return e;
  }

  Rational parse_probability() {
    const Token& t = peek();
    std::string text;
    if (t.kind == TokenKind::Decimal) {
      text = advance().text;
    } else if (t.kind == TokenKind::Int) {
      text = advance().text;
      if (accept("/")) {
        if (peek().kind != TokenKind::Int) unexpected("expected denominator");
        text += "/" + advance().text;
      }
    } else {
      unexpected("expected a probability literal");
    }
    auto q = parse_rational(text);
    if (!q) throw SyntaxError{"malformed probability '" + text + "'", span_of(t)};
    return *q;
  }

  std::shared_ptr<const std::string> file_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  const Token* last_ = nullptr;
};

}  // namespace

ParseResult parse_model(std::string_view source, const std::string& file_name) {
  ParseResult result;
  try {
    Parser p(source, file_name);
    result.model = p.parse_model();
  } catch (const SyntaxError& e) {
    result.diagnostics.push_back({Severity::Error, e.message, e.span});
  }
  return result;
}

ExprParseResult parse_expression(std::string_view text, const std::string& file_name) {
  ExprParseResult result;
  try {
    Parser p(text, file_name);
    result.expr = p.parse_standalone_expression();
  } catch (const SyntaxError& e) {
    result.diagnostics.push_back({Severity::Error, e.message, e.span});
  }
  return result;
}

ParseResult merge_models(std::vector<Model> parts) {
  ParseResult result;
  Model merged;
  for (auto& part : parts) {
    if (part.context) {
      if (merged.context) {
        result.diagnostics.push_back(
            {Severity::Error, "duplicate CONTEXT section", part.context->span});
        return result;
      }
      merged.context = std::move(part.context);
    }
    if (part.machine) {
      if (merged.machine) {
        result.diagnostics.push_back(
            {Severity::Error, "duplicate MACHINE section", part.machine->span});
        return result;
      }
      merged.machine = std::move(part.machine);
    }
  }
  result.model = std::move(merged);
  return result;
}

bool override_constant(Model& model, const std::string& name, ExprPtr value) {
  if (!model.context) return false;
  for (auto& c : model.context->constants) {
    if (c.name == name) {
      c.value = std::move(value);
      return true;
    }
  }
  return false;
}

}  // namespace peb
