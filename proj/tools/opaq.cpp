#include "opaq/automata.hpp"
#include "opaq/disclosure.hpp"
#include "opaq/error.hpp"
#include "opaq/gadgets.hpp"
#include "opaq/hoa.hpp"
#include "opaq/io.hpp"
#include "opaq/solve_mdp.hpp"
#include "opaq/solve_pomdp.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using nlohmann::json;
using namespace opaq;

namespace {

enum ExitCode { kOk = 0, kInternal = 1, kInvalid = 2, kUnsupported = 3, kResource = 4 };

struct Options {
  std::string model;
  std::string secret;
  bool trace_only = false;
  std::string engine = "exact";
  std::string delta;
  std::string emit_hoa;
  std::string emit_product;
  std::size_t memory_bound = 0;
  std::size_t support_cap = kDefaultSupportCap;
  std::vector<std::string> target;
  std::string acceptance = "buchi";
  bool absorbing = false;
  std::string out;
  std::string input;
  std::string input2;
};

struct Inputs {
  ModelDocument doc;
  DetAutomaton secret;
  Projection pi;
  bool trace_only = false;
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Validation, "cannot write '" + path + "'");
  out << text;
}

ModelDocument load_valid_model(const std::string& path) {
  ModelDocument doc = load_model(path);
  std::vector<Diagnostic> diags = validate(doc.model);
  if (doc.projection)
    for (Diagnostic& d : validate(doc.model.base, *doc.projection)) diags.push_back(std::move(d));
  if (!diags.empty()) throw ModelError(diags);
  return doc;
}

Inputs load_inputs(const Options& o) {
  Inputs in;
  in.doc = load_valid_model(o.model);
  in.pi = in.doc.projection_or_identity();
  const DetAutomaton raw = load_hoa(o.secret);
  // With no state APs an interleaved reading rejects every run.
  in.trace_only = o.trace_only || std::none_of(raw.alphabet.begin(), raw.alphabet.end(),
                                               [](const std::string& ap) { return ap.rfind("state:", 0) == 0; });
  in.secret = bind_to_model(raw, in.doc.model.base, in.trace_only);
  return in;
}

std::vector<StateId> target_states(const LabeledMdp& m, const std::vector<std::string>& names) {
  std::vector<StateId> out;
  for (const std::string& n : names) {
    const auto q = m.state_index(n);
    if (!q) throw Error(ErrorKind::Validation, "unknown target state '" + n + "'");
    out.push_back(*q);
  }
  return out;
}

json provenance_json(const DisclosureAutomaton& d) {
  json out = json::array();
  for (const PipelineStage& s : d.provenance) out.push_back({{"stage", s.name}, {"states", s.states}});
  return out;
}

std::string verdict_text(std::optional<bool> holds) {
  if (!holds) return "";
  return *holds ? "YES" : "NO";
}

void emit_artifacts(const Options& o, const DisclosureAutomaton& discl, const ProductPomdp& prod, bool partial) {
  if (!o.emit_hoa.empty()) write_text(o.emit_hoa, print_hoa(discl.automaton, "disclosure"));
  if (!o.emit_product.empty()) {
    ModelDocument doc;
    doc.model = prod.pomdp;
    doc.has_equivalence = partial;
    doc.priorities = prod.priority;
    write_text(o.emit_product, print_model(doc));
  }
}

Query make_query(QueryKind kind, const Options& o) {
  Query q{kind, 0};
  if (kind == QueryKind::Threshold) {
    try {
      q.delta = parse_rational(o.delta);
    } catch (const std::invalid_argument&) {
      throw Error(ErrorKind::Validation, "malformed threshold '" + o.delta + "'");
    }
    if (q.delta < 0 || q.delta > 1) throw Error(ErrorKind::Validation, "threshold must lie in [0, 1]");
  }
  return q;
}

std::optional<bool> verdict_for(QueryKind kind, const Rational& value, const Rational& delta) {
  switch (kind) {
    case QueryKind::Value: return std::nullopt;
    case QueryKind::Threshold: return value > delta;
    case QueryKind::AlmostSureOpacity: return value == 0;
    case QueryKind::LimitDisclosure:
    case QueryKind::AlmostSureDisclosure: return value == 1;
  }
  return std::nullopt;
}

json run_iterative(const Inputs& in, const Query& q, const Options& o, json report) {
  const DisclosureAutomaton discl = build_discl(in.secret, in.pi, in.doc.model.base);
  const ProductPomdp prod = product(in.doc.model.base, discl.automaton);
  emit_artifacts(o, discl, prod, false);
  const IntervalResult r = interval_parity_probability(prod.mdp(), prod.priority);
  report["value"] = nullptr;
  report["interval"] = {r.lower, r.upper};
  report["iterations"] = r.iterations;
  if (q.kind == QueryKind::Threshold) {
    const double delta = q.delta.get_d();
    report["verdict"] = r.lower > delta ? "YES" : r.upper <= delta ? "NO" : "UNKNOWN";
  }
  report["provenance"] = provenance_json(discl);
  report["product_states"] = prod.mdp().num_states();
  return report;
}

json run_query(QueryKind kind, const Options& o) {
  const Inputs in = load_inputs(o);
  const Query q = make_query(kind, o);
  json report;
  report["query"] = to_string(kind);
  if (kind == QueryKind::Threshold) report["delta"] = to_string(q.delta);
  report["observation"] = in.doc.perfect_observation() ? "perfect" : "partial";
  report["secret_reading"] = in.trace_only ? "trace-only" : "interleaved";

  if (in.doc.perfect_observation()) {
    if (o.engine == "iterative" && (kind == QueryKind::Value || kind == QueryKind::Threshold)) {
      report["engine"] = "iterative";
      return run_iterative(in, q, o, report);
    }
    report["engine"] = "exact";
    const Verdict v = decide(in.doc.model.base, in.secret, in.pi, q);
    emit_artifacts(o, v.solution.discl, v.solution.product, false);
    report["value"] = to_string(v.value);
    if (v.holds) report["verdict"] = verdict_text(v.holds);
    report["scheduler"] = scheduler_to_json(v.solution.product.mdp(), v.solution.certificate.scheduler);
    report["certificate_value"] = to_string(v.solution.certificate.witness_chain_value);
    report["provenance"] = provenance_json(v.solution.discl);
    report["product_states"] = v.solution.product.mdp().num_states();
    return report;
  }

  report["engine"] = "exact";
  if (kind == QueryKind::AlmostSureDisclosure) {
    const PomdpDisclosureSolution s = almost_sure_disclosure_pomdp(in.doc.model, in.secret, in.pi, o.support_cap);
    emit_artifacts(o, s.discl, s.product, true);
    report["verdict"] = s.result.yes ? "YES" : "NO";
    if (s.result.witness) {
      report["scheduler"] = scheduler_to_json(s.product.mdp(), *s.result.witness);
      report["certificate_value"] = to_string(s.result.witness_value);
    }
    report["belief_supports"] = s.result.supports;
    report["winning_pairs"] = s.result.winning_pairs;
    report["provenance"] = provenance_json(s.discl);
    report["product_states"] = s.product.mdp().num_states();
    return report;
  }

  // Observation-based schedulers are among all schedulers, so a zero value
  // under full information settles every query; anything else is undecidable.
  const Verdict bound = decide(in.doc.model.base, in.secret, in.pi, {QueryKind::Value, 0});
  if (bound.value != 0) throw Error(ErrorKind::Unsupported, undecidable_query_message(to_string(kind)));
  emit_artifacts(o, bound.solution.discl, bound.solution.product, false);
  report["value"] = to_string(bound.value);
  if (const auto holds = verdict_for(kind, bound.value, q.delta)) report["verdict"] = verdict_text(holds);
  report["note"] = "the disclosure is 0 even for schedulers that observe states fully";
  report["provenance"] = provenance_json(bound.solution.discl);
  report["product_states"] = bound.solution.product.mdp().num_states();
  return report;
}

json run_symmetric(const Options& o) {
  const Inputs in = load_inputs(o);
  json report;
  report["query"] = "symmetric";
  report["observation"] = in.doc.perfect_observation() ? "perfect" : "partial";
  const SymmetricVerdict v = decide_symmetric(in.doc.model.base, in.secret, in.pi);
  if (!in.doc.perfect_observation() && !v.holds)
    throw Error(ErrorKind::Unsupported, undecidable_query_message("symmetric"));
  report["secret_value"] = to_string(v.secret.value);
  report["complement_value"] = to_string(v.complement.value);
  report["verdict"] = v.holds ? "YES" : "NO";
  report["provenance"] = provenance_json(v.secret.solution.discl);
  report["complement_provenance"] = provenance_json(v.complement.solution.discl);
  return report;
}

json run_pomdp_as_disclosure(const Options& o) {
  const ModelDocument doc = load_valid_model(o.model);
  const std::vector<StateId> target = target_states(doc.model.base, o.target);
  const GadgetInstance g = build_gadget(doc.model, target, AcceptanceKind::Buchi, true);
  const PomdpDisclosureSolution s = almost_sure_disclosure_pomdp(g.gadget, g.secret, g.projection, o.support_cap);
  json report;
  report["query"] = "pomdp-as-disclosure";
  report["target"] = o.target;
  report["verdict"] = s.result.yes ? "YES" : "NO";
  report["gadget_states"] = g.gadget.base.num_states();
  report["product_states"] = s.product.mdp().num_states();
  report["belief_supports"] = s.result.supports;
  report["provenance"] = provenance_json(s.discl);
  if (s.result.witness) report["scheduler"] = scheduler_to_json(s.product.mdp(), *s.result.witness);
  if (o.memory_bound > 0) {
    const PartiallyObservableMdp absorbing = make_absorbing(doc.model, target);
    std::vector<bool> in_target(absorbing.base.num_states(), false);
    for (StateId q : target) in_target[q] = true;
    const OracleResult r = enumerate_scheduler_oracle(absorbing, buchi_priorities(in_target), o.memory_bound);
    report["oracle"] = {{"verdict", r.yes ? "YES" : "NO"}, {"memory_bound", o.memory_bound}, {"explored", r.explored}};
  }
  return report;
}

json run_gadget(const Options& o) {
  const ModelDocument doc = load_valid_model(o.model);
  const std::vector<StateId> target = target_states(doc.model.base, o.target);
  const AcceptanceKind kind = o.acceptance == "co-buchi" ? AcceptanceKind::CoBuchi : AcceptanceKind::Buchi;
  const GadgetInstance g = build_gadget(doc.model, target, kind, o.absorbing);
  std::filesystem::create_directories(o.out);
  ModelDocument out;
  out.model = g.gadget;
  out.has_equivalence = true;
  out.projection = g.projection;
  const std::string model_path = (std::filesystem::path(o.out) / "model.json").string();
  const std::string secret_path = (std::filesystem::path(o.out) / "secret.hoa").string();
  write_text(model_path, print_model(out));
  write_text(secret_path, print_hoa(g.secret, "gadget secret"));
  return {{"model", model_path}, {"secret", secret_path}, {"states", g.gadget.base.num_states()},
          {"acceptance", to_string(kind)}, {"absorbing", o.absorbing}};
}

void print_automaton(const Options& o, const DetAutomaton& a, const std::string& name) {
  const std::string text = print_hoa(a, name);
  if (o.out.empty())
    std::cout << text;
  else
    write_text(o.out, text);
}

int run_automaton(const std::string& op, const Options& o) {
  if (op == "determinize") {
    const NondetAutomaton a = load_hoa_nondet(o.input);
    DetAutomaton d = a.kind == AcceptanceKind::CoBuchi ? miyano_hayashi(a) : determinize_nba(nba_of_parity(a));
    print_automaton(o, d, "determinized");
  } else if (op == "complement") {
    print_automaton(o, dualize(complete(load_hoa(o.input))), "complement");
  } else if (op == "product") {
    const DetAutomaton a = complete(load_hoa(o.input));
    const DetAutomaton b = complete(load_hoa(o.input2));
    if (a.alphabet != b.alphabet) throw Error(ErrorKind::Validation, "product operands must have the same AP list");
    if (a.kind == AcceptanceKind::Buchi && b.kind == AcceptanceKind::Buchi)
      print_automaton(o, trim(intersect_dba(a, b)), "product");
    else
      print_automaton(o, determinize_nba(intersect_nba(nba_of_parity(to_nondet(a)), nba_of_parity(to_nondet(b)))),
                      "product");
  } else if (op == "emptiness") {
    const NondetAutomaton a = load_hoa_nondet(o.input);
    const EmptinessResult r = is_empty(a);
    json report = {{"empty", r.empty}};
    if (r.witness) {
      auto names = [&](const std::vector<Letter>& w) {
        std::vector<std::string> out;
        for (Letter x : w) out.push_back(a.alphabet[x]);
        return out;
      };
      report["witness"] = {{"stem", names(r.witness->stem)}, {"cycle", names(r.witness->cycle)}};
    }
    std::cout << report.dump(2) << "\n";
  } else {
    throw Error(ErrorKind::Validation, "unknown automaton operation '" + op + "'");
  }
  return kOk;
}

int report_error(const std::string& message, int code) {
  std::cerr << "opaq: " << message << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Disclosure and opacity analysis of labeled MDPs and POMDPs"};
  app.require_subcommand(1);
  Options o;

  auto analysis = [&](const std::string& name, const std::string& help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("-m,--model", o.model, "Model file (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("-s,--secret", o.secret, "Secret automaton (HOA)")->required()->check(CLI::ExistingFile);
    sub->add_flag("--trace-only", o.trace_only, "The secret reads only steps; state symbols self-loop");
    sub->add_option("--engine", o.engine, "exact or iterative")->check(CLI::IsMember({"exact", "iterative"}));
    sub->add_option("--emit-hoa", o.emit_hoa, "Write the disclosure automaton");
    sub->add_option("--emit-product", o.emit_product, "Write the product model");
    sub->add_option("--support-cap", o.support_cap, "Maximum number of belief supports");
    sub->add_option("--memory-bound", o.memory_bound, "Memory bound for the scheduler-enumeration oracle");
    return sub;
  };

  CLI::App* validate_cmd = app.add_subcommand("validate", "Check a model file");
  validate_cmd->add_option("-m,--model", o.model, "Model file (JSON)")->required()->check(CLI::ExistingFile);

  const std::vector<std::pair<QueryKind, CLI::App*>> queries = {
      {QueryKind::Value, analysis("value", "Maximal disclosure probability")},
      {QueryKind::Threshold, analysis("threshold", "Is the maximal disclosure above delta?")},
      {QueryKind::AlmostSureOpacity, analysis("almost-sure-opacity", "Is the disclosure 0 under every scheduler?")},
      {QueryKind::LimitDisclosure, analysis("limit-disclosure", "Is the supremum of the disclosure 1?")},
      {QueryKind::AlmostSureDisclosure,
       analysis("almost-sure-disclosure", "Is there a scheduler disclosing with probability 1?")},
  };
  queries[1].second->add_option("--delta", o.delta, "Threshold p/q")->required();
  CLI::App* symmetric_cmd = analysis("symmetric", "Almost-sure opacity of the secret and of its complement");

  CLI::App* pad_cmd = app.add_subcommand("pomdp-as-disclosure", "Almost-sure reachability of a target set via the two-copy gadget");
  pad_cmd->add_option("-m,--model", o.model, "POMDP file (JSON)")->required()->check(CLI::ExistingFile);
  pad_cmd->add_option("--target", o.target, "Target state names")->required()->delimiter(',');
  pad_cmd->add_option("--support-cap", o.support_cap, "Maximum number of belief supports");
  pad_cmd->add_option("--memory-bound", o.memory_bound, "Cross-check with the scheduler-enumeration oracle");

  CLI::App* gadget_cmd = app.add_subcommand("gadget", "Write the two-copy gadget of a POMDP");
  gadget_cmd->add_option("-m,--model", o.model, "POMDP file (JSON)")->required()->check(CLI::ExistingFile);
  gadget_cmd->add_option("--target", o.target, "Target state names")->required()->delimiter(',');
  gadget_cmd->add_option("--acceptance", o.acceptance, "buchi or co-buchi")->check(CLI::IsMember({"buchi", "co-buchi"}));
  gadget_cmd->add_flag("--absorbing", o.absorbing, "Make the copy-1 targets absorbing");
  gadget_cmd->add_option("-o,--out", o.out, "Output directory")->required();

  CLI::App* automaton_cmd = app.add_subcommand("automaton", "HOA utilities");
  std::string op;
  automaton_cmd->add_option("op", op, "determinize, complement, product or emptiness")
      ->required()
      ->check(CLI::IsMember({"determinize", "complement", "product", "emptiness"}));
  automaton_cmd->add_option("-i,--input", o.input, "Automaton (HOA)")->required()->check(CLI::ExistingFile);
  automaton_cmd->add_option("-j,--other", o.input2, "Second operand of product")->check(CLI::ExistingFile);
  automaton_cmd->add_option("-o,--out", o.out, "Output file; stdout by default");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  const auto started = std::chrono::steady_clock::now();
  try {
    json report;
    if (validate_cmd->parsed()) {
      const ModelDocument doc = load_valid_model(o.model);
      report = {{"valid", true},
                {"states", doc.model.base.num_states()},
                {"observation", doc.perfect_observation() ? "perfect" : "partial"}};
      if (doc.projection) {
        const DivergenceReport d = check_observation_divergence(doc.model.base, *doc.projection);
        report["divergent"] = d.divergent;
        for (const Diagnostic& x : d.diagnostics) report["warnings"].push_back(x.message);
      }
    } else if (symmetric_cmd->parsed()) {
      report = run_symmetric(o);
    } else if (pad_cmd->parsed()) {
      report = run_pomdp_as_disclosure(o);
    } else if (gadget_cmd->parsed()) {
      report = run_gadget(o);
    } else if (automaton_cmd->parsed()) {
      if (op == "product" && o.input2.empty()) throw Error(ErrorKind::Validation, "product needs a second operand (-j)");
      return run_automaton(op, o);
    } else {
      for (const auto& [kind, sub] : queries)
        if (sub->parsed()) report = run_query(kind, o);
    }
    report["wall_time"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    std::cout << report.dump(2) << "\n";
    return kOk;
  } catch (const Error& e) {
    switch (e.kind()) {
      case ErrorKind::Validation: return report_error(e.what(), kInvalid);
      case ErrorKind::Unsupported: return report_error(e.what(), kUnsupported);
      case ErrorKind::Resource: return report_error(e.what(), kResource);
    }
  } catch (const std::exception& e) {
    return report_error(std::string("internal error: ") + e.what(), kInternal);
  }
  return kInternal;
}
