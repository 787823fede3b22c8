#include "opaq/hoa.hpp"

#include "opaq/error.hpp"
#include "opaq/io.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace opaq {

namespace {

enum class Tok { Header, Ident, Int, String, Alias, Punct, Body, End, Eof };

struct Token {
  Tok kind = Tok::Eof;
  std::string text;
  std::size_t line = 0;
};

[[noreturn]] void fail(std::size_t line, const std::string& message) {
  throw Error(ErrorKind::Validation, "HOA line " + std::to_string(line) + ": " + message);
}

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0, line = 1;
  auto ident_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; };
  while (i < s.size()) {
    const char c = s[i];
    if (c == '\n') {
      ++line;
      ++i;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (s.substr(i, 2) == "/*") {
      const std::size_t close = s.find("*/", i + 2);
      if (close == std::string_view::npos) fail(line, "unterminated comment");
      line += std::count(s.begin() + i, s.begin() + close, '\n');
      i = close + 2;
    } else if (s.substr(i, 8) == "--BODY--") {
      out.push_back({Tok::Body, "--BODY--", line});
      i += 8;
    } else if (s.substr(i, 7) == "--END--") {
      out.push_back({Tok::End, "--END--", line});
      i += 7;
    } else if (s.substr(i, 9) == "--ABORT--") {
      fail(line, "automaton aborted by its producer");
    } else if (c == '"') {
      std::string text;
      ++i;
      while (i < s.size() && s[i] != '"') {
        if (s[i] == '\\' && i + 1 < s.size()) ++i;
        if (s[i] == '\n') ++line;
        text += s[i++];
      }
      if (i == s.size()) fail(line, "unterminated string");
      ++i;
      out.push_back({Tok::String, text, line});
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      out.push_back({Tok::Int, std::string(s.substr(i, j - i)), line});
      i = j;
    } else if (c == '@') {
      std::size_t j = i + 1;
      while (j < s.size() && ident_char(s[j])) ++j;
      out.push_back({Tok::Alias, std::string(s.substr(i, j - i)), line});
      i = j;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && ident_char(s[j])) ++j;
      if (j < s.size() && s[j] == ':') {
        out.push_back({Tok::Header, std::string(s.substr(i, j - i + 1)), line});
        i = j + 1;
      } else {
        out.push_back({Tok::Ident, std::string(s.substr(i, j - i)), line});
        i = j;
      }
    } else if (std::string_view("[](){}!&|").find(c) != std::string_view::npos) {
      out.push_back({Tok::Punct, std::string(1, c), line});
      ++i;
    } else {
      fail(line, std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back({Tok::Eof, "", line});
  return out;
}

// Boolean formula over integers: labels use APs, acceptance uses Inf/Fin sets.
struct Formula {
  enum Op { True, False, Atom, Not, And, Or, Inf, Fin } op = True;
  unsigned value = 0;
  bool negated_set = false;
  std::vector<Formula> kids;

  friend bool operator==(const Formula&, const Formula&) = default;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  const Token& peek() const { return toks_[pos_]; }
  Token take() { return toks_[pos_ == toks_.size() - 1 ? pos_ : pos_++]; }
  bool at_punct(const char* p) const { return peek().kind == Tok::Punct && peek().text == p; }
  void expect_punct(const char* p) {
    if (!at_punct(p)) fail(peek().line, std::string("expected '") + p + "', found '" + peek().text + "'");
    ++pos_;
  }
  unsigned take_int() {
    if (peek().kind != Tok::Int) fail(peek().line, "expected an integer, found '" + peek().text + "'");
    try {
      return static_cast<unsigned>(std::stoul(take().text));
    } catch (const std::out_of_range&) {
      fail(peek().line, "integer out of range");
    }
  }

  Formula label_expr() { return binary(false); }
  Formula acceptance_expr() { return binary(true); }

  std::map<std::string, Formula> aliases;

 private:
  Formula binary(bool acceptance) {
    Formula left = conjunction(acceptance);
    while (at_punct("|")) {
      ++pos_;
      left = Formula{Formula::Or, 0, false, {left, conjunction(acceptance)}};
    }
    return left;
  }
  Formula conjunction(bool acceptance) {
    Formula left = factor(acceptance);
    while (at_punct("&")) {
      ++pos_;
      left = Formula{Formula::And, 0, false, {left, factor(acceptance)}};
    }
    return left;
  }
  Formula factor(bool acceptance) {
    const Token& t = peek();
    if (t.kind == Tok::Ident && (t.text == "t" || t.text == "f")) {
      take();
      return Formula{t.text == "t" ? Formula::True : Formula::False, 0, false, {}};
    }
    if (at_punct("(")) {
      ++pos_;
      Formula f = binary(acceptance);
      expect_punct(")");
      return f;
    }
    if (acceptance) {
      if (t.kind == Tok::Ident && (t.text == "Inf" || t.text == "Fin")) {
        const bool inf = take().text == "Inf";
        expect_punct("(");
        bool negated = false;
        if (at_punct("!")) {
          ++pos_;
          negated = true;
        }
        const unsigned set = take_int();
        expect_punct(")");
        return Formula{inf ? Formula::Inf : Formula::Fin, set, negated, {}};
      }
      fail(t.line, "bad acceptance condition near '" + t.text + "'");
    }
    if (at_punct("!")) {
      ++pos_;
      return Formula{Formula::Not, 0, false, {factor(false)}};
    }
    if (t.kind == Tok::Int) return Formula{Formula::Atom, take_int(), false, {}};
    if (t.kind == Tok::Alias) {
      const auto it = aliases.find(t.text);
      if (it == aliases.end()) fail(t.line, "undefined alias " + t.text);
      take();
      return it->second;
    }
    fail(t.line, "bad label expression near '" + t.text + "'");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

bool holds(const Formula& f, unsigned letter) {
  switch (f.op) {
    case Formula::True: return true;
    case Formula::False: return false;
    case Formula::Atom: return f.value == letter;
    case Formula::Not: return !holds(f.kids[0], letter);
    case Formula::And: return holds(f.kids[0], letter) && holds(f.kids[1], letter);
    case Formula::Or: return holds(f.kids[0], letter) || holds(f.kids[1], letter);
    default: return false;
  }
}

unsigned max_atom(const Formula& f) {
  unsigned m = f.op == Formula::Atom ? f.value + 1 : 0;
  for (const Formula& k : f.kids) m = std::max(m, max_atom(k));
  return m;
}

Formula atom(Formula::Op op, unsigned set) { return Formula{op, set, false, {}}; }

// Inf(0) | (Fin(1) & (Inf(2) | ...)), the usual rendering of "parity min even k".
Formula parity_condition(unsigned k, unsigned from = 0) {
  const Formula head = atom(from % 2 == 0 ? Formula::Inf : Formula::Fin, from);
  if (from + 1 >= k) return head;
  return Formula{from % 2 == 0 ? Formula::Or : Formula::And, 0, false, {head, parity_condition(k, from + 1)}};
}

std::string render(const Formula& f, bool top = true) {
  switch (f.op) {
    case Formula::True: return "t";
    case Formula::False: return "f";
    case Formula::Inf: return "Inf(" + std::to_string(f.value) + ")";
    case Formula::Fin: return "Fin(" + std::to_string(f.value) + ")";
    case Formula::And:
    case Formula::Or: {
      std::string s = render(f.kids[0], false) + (f.op == Formula::And ? " & " : " | ") + render(f.kids[1], false);
      return top ? s : "(" + s + ")";
    }
    default: return "?";
  }
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

namespace {

struct HoaEdge {
  AutState source = 0;
  Formula label;
  AutState target = 0;
  std::size_t line = 0;
};

// Header and body of an automaton with state-based acceptance.
struct HoaData {
  std::vector<std::string> aps;
  AcceptanceKind kind = AcceptanceKind::Buchi;
  AutState initial = 0;
  std::vector<unsigned> acceptance;
  std::vector<HoaEdge> edges;
};

HoaData read_hoa(std::string_view text) {
  Parser p(lex(text));
  if (p.peek().kind != Tok::Header || p.peek().text != "HOA:") fail(p.peek().line, "expected 'HOA: v1'");
  p.take();
  if (p.peek().kind != Tok::Ident || p.peek().text != "v1") fail(p.peek().line, "only HOA v1 is supported");
  p.take();

  HoaData d;
  std::optional<std::size_t> states;
  std::optional<AutState> start;
  std::optional<unsigned> acc_sets;
  Formula condition;
  std::size_t condition_line = 0;
  std::string acc_name;

  while (p.peek().kind != Tok::Body) {
    const Token h = p.take();
    if (h.kind == Tok::Eof) fail(h.line, "missing --BODY--");
    if (h.kind != Tok::Header) fail(h.line, "expected a header item, found '" + h.text + "'");
    if (h.text == "States:") {
      states = p.take_int();
    } else if (h.text == "Start:") {
      if (start) fail(h.line, "several initial states are not supported");
      start = p.take_int();
      if (p.at_punct("&")) fail(h.line, "alternating automata are not supported");
    } else if (h.text == "AP:") {
      const unsigned n = p.take_int();
      for (unsigned i = 0; i < n; ++i) {
        if (p.peek().kind != Tok::String) fail(p.peek().line, "expected an AP name");
        d.aps.push_back(p.take().text);
      }
      if (std::set<std::string>(d.aps.begin(), d.aps.end()).size() != d.aps.size()) fail(h.line, "duplicate AP names");
    } else if (h.text == "Alias:") {
      if (p.peek().kind != Tok::Alias) fail(h.line, "expected an alias name");
      const std::string name = p.take().text;
      p.aliases[name] = p.label_expr();
    } else if (h.text == "Acceptance:") {
      condition_line = h.line;
      acc_sets = p.take_int();
      condition = p.acceptance_expr();
    } else if (h.text == "acc-name:") {
      while (p.peek().kind == Tok::Ident || p.peek().kind == Tok::Int) acc_name += (acc_name.empty() ? "" : " ") + p.take().text;
    } else {
      // name:, tool:, properties: and unknown items carry nothing we use.
      while (p.peek().kind != Tok::Header && p.peek().kind != Tok::Body && p.peek().kind != Tok::Eof) p.take();
    }
  }
  p.take();
  if (!acc_sets) fail(condition_line, "missing Acceptance: header");
  if (!start) fail(1, "missing Start: header");

  const auto& cond = condition;
  if (*acc_sets == 0 && (cond.op == Formula::True || cond.op == Formula::False)) {
    d.kind = AcceptanceKind::Buchi;
  } else if (*acc_sets == 1 && cond == atom(Formula::Inf, 0)) {
    d.kind = AcceptanceKind::Buchi;
  } else if (*acc_sets == 1 && cond == atom(Formula::Fin, 0)) {
    d.kind = AcceptanceKind::CoBuchi;
  } else if (*acc_sets >= 2 && cond == parity_condition(*acc_sets)) {
    d.kind = AcceptanceKind::Parity;
  } else {
    fail(condition_line, "unsupported acceptance '" + render(cond) + "'" +
                             (acc_name.empty() ? "" : " (" + acc_name + ")") +
                             "; use Buchi, co-Buchi or parity min even");
  }
  const bool all_accepting = *acc_sets == 0 && cond.op == Formula::True;

  std::vector<std::optional<unsigned>> marks;
  std::vector<bool> declared;
  auto ensure = [&](std::size_t n) {
    if (n > marks.size()) {
      marks.resize(n);
      declared.resize(n, false);
    }
  };
  if (states) ensure(*states);

  while (p.peek().kind != Tok::End) {
    const Token h = p.take();
    if (h.kind != Tok::Header || h.text != "State:") fail(h.line, "expected 'State:' or --END--, found '" + h.text + "'");
    if (p.at_punct("[")) fail(h.line, "state labels are not supported");
    const AutState s = p.take_int();
    if (states && s >= *states) fail(h.line, "state " + std::to_string(s) + " out of range");
    ensure(s + 1);
    if (declared[s]) fail(h.line, "state " + std::to_string(s) + " declared twice");
    declared[s] = true;
    if (p.peek().kind == Tok::String) p.take();
    if (p.at_punct("{")) {
      p.take();
      while (!p.at_punct("}")) {
        const unsigned m = p.take_int();
        if (m >= *acc_sets) fail(h.line, "acceptance set " + std::to_string(m) + " out of range");
        if (marks[s]) fail(h.line, "a state may carry at most one acceptance set");
        marks[s] = m;
      }
      p.take();
    }
    while (p.peek().kind != Tok::Header && p.peek().kind != Tok::End) {
      const std::size_t line = p.peek().line;
      if (!p.at_punct("[")) fail(line, "implicit labels are not supported");
      p.take();
      Formula label = p.label_expr();
      p.expect_punct("]");
      if (max_atom(label) > d.aps.size()) fail(line, "AP index out of range");
      const AutState target = p.take_int();
      if (p.at_punct("&")) fail(line, "alternating automata are not supported");
      if (p.at_punct("{")) fail(line, "transition-based acceptance is not supported; mark states instead");
      if (states && target >= *states) fail(line, "state " + std::to_string(target) + " out of range");
      ensure(target + 1);
      d.edges.push_back({s, std::move(label), target, line});
    }
  }
  if (!states) ensure(1);
  if (*start >= marks.size()) fail(1, "initial state out of range");
  d.initial = *start;

  d.acceptance.resize(marks.size());
  for (AutState s = 0; s < marks.size(); ++s) {
    if (d.kind == AcceptanceKind::Parity) {
      if (!marks[s]) fail(1, "parity automata need a priority on every state; state " + std::to_string(s) + " has none");
      d.acceptance[s] = *marks[s];
    } else {
      d.acceptance[s] = all_accepting || marks[s].has_value();
    }
  }
  return d;
}

}  // namespace

DetAutomaton parse_hoa(std::string_view text) {
  const HoaData d = read_hoa(text);
  DetAutomaton a = DetAutomaton::with_states(d.aps, d.acceptance.size(), d.kind);
  a.initial = d.initial;
  a.acceptance = d.acceptance;
  for (const HoaEdge& e : d.edges)
    for (Letter x = 0; x < d.aps.size(); ++x) {
      if (!holds(e.label, x)) continue;
      AutState& slot = a.next(e.source, x);
      if (slot != kNoState && slot != e.target)
        fail(e.line, "nondeterministic choice on AP \"" + d.aps[x] + "\" in state " + std::to_string(e.source));
      slot = e.target;
    }
  return a;
}

NondetAutomaton parse_hoa_nondet(std::string_view text) {
  const HoaData d = read_hoa(text);
  NondetAutomaton a;
  a.alphabet = d.aps;
  a.kind = d.kind;
  a.initial = d.initial;
  a.edges.resize(d.acceptance.size());
  for (const HoaEdge& e : d.edges)
    for (Letter x = 0; x < d.aps.size(); ++x)
      if (holds(e.label, x)) a.edges[e.source].push_back({x, e.target, d.acceptance[e.source]});
  for (auto& out : a.edges) {
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  return a;
}

std::string print_hoa(const DetAutomaton& a, const std::string& name) {
  std::ostringstream out;
  out << "HOA: v1\n";
  if (!name.empty()) out << "name: " << quote(name) << "\n";
  out << "States: " << a.num_states() << "\n";
  out << "Start: " << a.initial << "\n";
  out << "AP: " << a.num_letters();
  for (const std::string& x : a.alphabet) out << " " << quote(x);
  out << "\n";
  unsigned sets = 1;
  switch (a.kind) {
    case AcceptanceKind::Buchi:
      out << "acc-name: Buchi\nAcceptance: 1 Inf(0)\n";
      break;
    case AcceptanceKind::CoBuchi:
      out << "acc-name: co-Buchi\nAcceptance: 1 Fin(0)\n";
      break;
    case AcceptanceKind::Parity: {
      const unsigned top = a.acceptance.empty() ? 0 : *std::max_element(a.acceptance.begin(), a.acceptance.end());
      sets = std::max(2u, top + 1);
      out << "acc-name: parity min even " << sets << "\nAcceptance: " << sets << " " << render(parity_condition(sets))
          << "\n";
      break;
    }
  }
  out << "properties: trans-labels explicit-labels state-acc\n--BODY--\n";
  for (AutState s = 0; s < a.num_states(); ++s) {
    out << "State: " << s;
    if (a.kind == AcceptanceKind::Parity)
      out << " {" << a.acceptance[s] << "}";
    else if (a.acceptance[s])
      out << " {0}";
    out << "\n";
    std::map<AutState, std::vector<Letter>> by_target;
    for (Letter x = 0; x < a.num_letters(); ++x)
      if (a.next(s, x) != kNoState) by_target[a.next(s, x)].push_back(x);
    for (const auto& [target, xs] : by_target) {
      out << "[";
      for (std::size_t i = 0; i < xs.size(); ++i) out << (i ? " | " : "") << xs[i];
      out << "] " << target << "\n";
    }
  }
  out << "--END--\n";
  return out.str();
}

DetAutomaton bind_to_model(const DetAutomaton& src, const LabeledMdp& mdp, bool trace_only) {
  const RunAlphabet run = run_alphabet(mdp);
  std::vector<Letter> ap_of(run.symbols.size(), kNoState);
  for (Letter i = 0; i < src.num_letters(); ++i) {
    const std::string& ap = src.alphabet[i];
    std::optional<Letter> symbol;
    if (ap.rfind("state:", 0) == 0) {
      if (const auto q = mdp.state_index(std::string_view(ap).substr(6))) symbol = run.state_symbol[*q];
    } else if (ap.rfind("step:", 0) == 0) {
      const std::string_view body = std::string_view(ap).substr(5);
      for (std::size_t cut = body.find(','); cut != std::string_view::npos; cut = body.find(',', cut + 1)) {
        const auto act = mdp.action_index(body.substr(0, cut));
        const auto lab = mdp.label_index(body.substr(cut + 1));
        if (!act || !lab) continue;
        if (const auto it = run.step_symbol.find({*act, *lab}); it != run.step_symbol.end()) symbol = it->second;
      }
    } else {
      throw Error(ErrorKind::Validation, "AP \"" + ap + "\" is neither \"state:<q>\" nor \"step:<action>,<label>\"");
    }
    if (symbol) ap_of[*symbol] = i;
  }
  DetAutomaton out = DetAutomaton::with_states(run.symbols, src.num_states(), src.kind);
  out.initial = src.initial;
  out.acceptance = src.acceptance;
  for (AutState s = 0; s < src.num_states(); ++s)
    for (Letter x = 0; x < run.symbols.size(); ++x) {
      if (trace_only && run.is_state_symbol(x))
        out.next(s, x) = s;
      else if (ap_of[x] != kNoState)
        out.next(s, x) = src.next(s, ap_of[x]);
    }
  return complete(std::move(out));
}

DetAutomaton load_hoa(const std::filesystem::path& path) { return parse_hoa(read_file(path)); }

NondetAutomaton load_hoa_nondet(const std::filesystem::path& path) { return parse_hoa_nondet(read_file(path)); }

}  // namespace opaq
