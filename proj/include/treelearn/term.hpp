#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace treelearn {

// Ranked alphabet. Symbol names are unique; at least one symbol must be a
// constant, otherwise there are no ground terms.
class Signature {
public:
  struct Symbol {
    std::string name;
    std::size_t arity;
  };

  Signature() = default;

  explicit Signature(std::vector<Symbol> symbols) : symbols_(std::move(symbols)) {
    bool has_constant = false;
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
      auto [it, inserted] = index_.emplace(symbols_[i].name, i);
      if (!inserted)
        throw std::invalid_argument("duplicate symbol: " + symbols_[i].name);
      if (symbols_[i].arity == 0) has_constant = true;
    }
    if (!symbols_.empty() && !has_constant)
      throw std::invalid_argument("signature has no constant symbol");
  }

  const std::vector<Symbol>& symbols() const { return symbols_; }

  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  std::size_t arity(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("unknown symbol: " + name);
    return symbols_[it->second].arity;
  }

  std::size_t index_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("unknown symbol: " + name);
    return it->second;
  }

  std::vector<std::string> constants() const {
    std::vector<std::string> out;
    for (const auto& s : symbols_)
      if (s.arity == 0) out.push_back(s.name);
    return out;
  }

  bool operator==(const Signature& o) const {
    if (symbols_.size() != o.symbols_.size()) return false;
    for (std::size_t i = 0; i < symbols_.size(); ++i)
      if (symbols_[i].name != o.symbols_[i].name || symbols_[i].arity != o.symbols_[i].arity)
        return false;
    return true;
  }

private:
  std::vector<Symbol> symbols_;
  std::map<std::string, std::size_t> index_;
};

// Immutable term over a signature and variables. Shared subtrees are fine;
// equality is structural.
class Term {
public:
  Term() = default;

  static Term variable(std::string name) {
    auto n = std::make_shared<Node>();
    n->is_var = true;
    n->label = std::move(name);
    finish(*n);
    return Term(std::move(n));
  }

  static Term node(std::string symbol, std::vector<Term> children = {}) {
    auto n = std::make_shared<Node>();
    n->is_var = false;
    n->label = std::move(symbol);
    n->children = std::move(children);
    finish(*n);
    return Term(std::move(n));
  }

  bool valid() const { return node_ != nullptr; }
  bool is_variable() const { return node_->is_var; }
  const std::string& label() const { return node_->label; }
  const std::vector<Term>& children() const { return node_->children; }
  std::size_t size() const { return node_->size; }
  std::size_t hash() const { return node_->hash; }

  bool operator==(const Term& o) const {
    if (node_ == o.node_) return true;
    if (!node_ || !o.node_) return false;
    if (node_->hash != o.node_->hash) return false;
    return equal(*node_, *o.node_);
  }
  bool operator!=(const Term& o) const { return !(*this == o); }

  bool ground() const {
    if (is_variable()) return false;
    for (const auto& c : children())
      if (!c.ground()) return false;
    return true;
  }

  void collect_variables(std::vector<std::string>& out) const {
    if (is_variable()) {
      out.push_back(label());
      return;
    }
    for (const auto& c : children()) c.collect_variables(out);
  }

  // Distinct variable names in order of first occurrence.
  std::vector<std::string> variables() const {
    std::vector<std::string> occ;
    collect_variables(occ);
    std::vector<std::string> out;
    for (auto& v : occ)
      if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    return out;
  }

  bool linear() const {
    std::vector<std::string> occ;
    collect_variables(occ);
    std::sort(occ.begin(), occ.end());
    return std::adjacent_find(occ.begin(), occ.end()) == occ.end();
  }

  std::string str() const {
    std::ostringstream os;
    print(os);
    return os.str();
  }

  void print(std::ostream& os) const {
    os << label();
    if (!is_variable() && !children().empty()) {
      os << '(';
      for (std::size_t i = 0; i < children().size(); ++i) {
        if (i) os << ',';
        children()[i].print(os);
      }
      os << ')';
    }
  }

  // Canonical order: by size, then by printed form.
  static bool canonical_less(const Term& a, const Term& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a.str() < b.str();
  }

private:
  struct Node {
    bool is_var = false;
    std::string label;
    std::vector<Term> children;
    std::size_t size = 1;
    std::size_t hash = 0;
  };

  explicit Term(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  static void finish(Node& n) {
    std::size_t h = std::hash<std::string>{}(n.label) ^ (n.is_var ? 0x9e3779b97f4a7c15ull : 0);
    std::size_t sz = 1;
    for (const auto& c : n.children) {
      h = h * 1099511628211ull + c.hash();
      sz += c.size();
    }
    n.hash = h;
    n.size = sz;
  }

  static bool equal(const Node& a, const Node& b) {
    if (a.is_var != b.is_var || a.label != b.label) return false;
    if (a.children.size() != b.children.size()) return false;
    for (std::size_t i = 0; i < a.children.size(); ++i)
      if (a.children[i] != b.children[i]) return false;
    return true;
  }

  std::shared_ptr<const Node> node_;
};

struct TermHash {
  std::size_t operator()(const Term& t) const { return t.hash(); }
};

inline std::ostream& operator<<(std::ostream& os, const Term& t) {
  t.print(os);
  return os;
}

// Finite-domain mapping from variable names to terms.
class Substitution {
public:
  Substitution() = default;
  Substitution(std::initializer_list<std::pair<const std::string, Term>> init)
      : bindings_(init) {}

  void bind(const std::string& var, Term t) { bindings_[var] = std::move(t); }

  const Term* find(const std::string& var) const {
    auto it = bindings_.find(var);
    return it == bindings_.end() ? nullptr : &it->second;
  }

  const std::map<std::string, Term>& bindings() const { return bindings_; }

private:
  std::map<std::string, Term> bindings_;
};

// Homomorphic extension of a substitution; unbound variables stay intact.
inline Term substitute(const Term& t, const Substitution& sigma) {
  if (t.is_variable()) {
    if (const Term* bound = sigma.find(t.label())) return *bound;
    return t;
  }
  std::vector<Term> kids;
  kids.reserve(t.children().size());
  for (const auto& c : t.children()) kids.push_back(substitute(c, sigma));
  return Term::node(t.label(), std::move(kids));
}

// Term with exactly one variable occurrence (the hole).
class Context {
public:
  explicit Context(Term t) : term_(std::move(t)) {
    std::vector<std::string> occ;
    term_.collect_variables(occ);
    if (occ.size() != 1)
      throw std::invalid_argument("context must have exactly one variable occurrence");
    hole_ = occ.front();
  }

  static Context hole(const std::string& var = "X") {
    return Context(Term::variable(var));
  }

  const Term& term() const { return term_; }
  const std::string& hole_name() const { return hole_; }
  bool trivial() const { return term_.is_variable(); }
  std::size_t size() const { return term_.size(); }
  std::string str() const { return term_.str(); }

  bool operator==(const Context& o) const { return term_ == o.term_; }

private:
  Term term_;
  std::string hole_;
};

inline Term plug(const Context& c, const Term& t) {
  Substitution sigma;
  sigma.bind(c.hole_name(), t);
  return substitute(c.term(), sigma);
}

// Composes contexts: the hole of `outer` is filled with `inner`.
inline Context compose(const Context& outer, const Context& inner) {
  return Context(plug(outer, inner.term()));
}

struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, std::size_t pos)
      : std::runtime_error(msg + " at position " + std::to_string(pos)), position(pos) {}
  std::size_t position;
};

namespace detail {

class TermParser {
public:
  TermParser(const std::string& text, const Signature& sig) : text_(text), sig_(sig) {}

  Term parse() {
    Term t = parse_term();
    skip_ws();
    if (pos_ != text_.size()) throw ParseError("trailing input", pos_);
    return t;
  }

private:
  Term parse_term() {
    skip_ws();
    std::size_t start = pos_;
    std::string ident = parse_ident();
    skip_ws();
    std::vector<Term> args;
    bool parens = false;
    if (pos_ < text_.size() && text_[pos_] == '(') {
      parens = true;
      ++pos_;
      args.push_back(parse_term());
      skip_ws();
      while (pos_ < text_.size() && text_[pos_] == ',') {
        ++pos_;
        args.push_back(parse_term());
        skip_ws();
      }
      if (pos_ >= text_.size() || text_[pos_] != ')')
        throw ParseError("expected ')'", pos_);
      ++pos_;
    }
    // Uppercase-initial identifiers are variables.
    if (std::isupper(static_cast<unsigned char>(ident[0]))) {
      if (parens) throw ParseError("variable cannot have arguments", start);
      return Term::variable(ident);
    }
    if (!sig_.contains(ident)) throw ParseError("unknown symbol '" + ident + "'", start);
    std::size_t k = sig_.arity(ident);
    if (args.size() != k)
      throw ParseError("arity mismatch for '" + ident + "': expected " + std::to_string(k) +
                           ", got " + std::to_string(args.size()),
                       start);
    return Term::node(ident, std::move(args));
  }

  std::string parse_ident() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
            static_cast<unsigned char>(text_[pos_]) >= 0x80))
      ++pos_;
    if (pos_ == start) throw ParseError("expected identifier", pos_);
    return text_.substr(start, pos_ - start);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  const std::string& text_;
  const Signature& sig_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Term parse_term(const std::string& text, const Signature& sig) {
  return detail::TermParser(text, sig).parse();
}

// `f/2 g/1 a/0` style symbol list.
inline Signature parse_signature(const std::string& text) {
  std::vector<Signature::Symbol> symbols;
  std::istringstream is(text);
  std::string tok;
  while (is >> tok) {
    auto slash = tok.rfind('/');
    if (slash == std::string::npos || slash == 0 || slash + 1 == tok.size())
      throw std::invalid_argument("bad symbol declaration: " + tok);
    symbols.push_back({tok.substr(0, slash),
                       static_cast<std::size_t>(std::stoul(tok.substr(slash + 1)))});
  }
  return Signature(std::move(symbols));
}

inline std::string signature_to_string(const Signature& sig) {
  std::ostringstream os;
  bool first = true;
  for (const auto& s : sig.symbols()) {
    if (!first) os << ' ';
    os << s.name << '/' << s.arity;
    first = false;
  }
  return os.str();
}

}  // namespace treelearn
