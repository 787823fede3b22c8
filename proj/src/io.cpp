#include "opaq/io.hpp"

#include <algorithm>
#include <cstring>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace opaq {

using nlohmann::json;

namespace {

constexpr std::size_t kNoClass = static_cast<std::size_t>(-1);

// Maps JSON pointers to the line where their value starts. Only used to
// annotate diagnostics, so it assumes the text already parsed.

class LineIndex {
 public:
  explicit LineIndex(std::string_view text) { scan(text); }

  std::optional<std::size_t> line_of(const std::string& pointer) const {
    const auto it = lines_.find(pointer);
    if (it == lines_.end()) return std::nullopt;
    return it->second;
  }

 private:
  void scan(std::string_view t) {
    std::size_t i = 0, line = 1;
    struct Frame {
      bool object;
      std::size_t index;
      std::string key;
      std::string pointer;
    };
    std::vector<Frame> stack;
    bool expect_key = false;
    auto current = [&]() -> std::string {
      if (stack.empty()) return "";
      const Frame& f = stack.back();
      return f.pointer + "/" + (f.object ? escape(f.key) : std::to_string(f.index));
    };
    auto read_string = [&]() {
      std::string s;
      ++i;
      while (i < t.size() && t[i] != '"') {
        if (t[i] == '\\' && i + 1 < t.size()) {
          s += t[i + 1];
          i += 2;
          continue;
        }
        if (t[i] == '\n') ++line;
        s += t[i++];
      }
      ++i;
      return s;
    };
    lines_[""] = 1;
    while (i < t.size()) {
      const char c = t[i];
      if (c == '\n') {
        ++line;
        ++i;
      } else if (std::isspace(static_cast<unsigned char>(c)) || c == ':') {
        ++i;
      } else if (c == ',') {
        if (!stack.empty() && !stack.back().object) ++stack.back().index;
        if (!stack.empty() && stack.back().object) expect_key = true;
        ++i;
      } else if (c == '{' || c == '[') {
        const std::string p = current();
        if (!stack.empty()) lines_.emplace(p, line);
        stack.push_back({c == '{', 0, "", p});
        expect_key = c == '{';
        ++i;
      } else if (c == '}' || c == ']') {
        if (!stack.empty()) stack.pop_back();
        expect_key = false;
        ++i;
      } else if (c == '"' && expect_key) {
        stack.back().key = read_string();
        expect_key = false;
        lines_.emplace(current(), line);
      } else {
        if (!stack.empty()) lines_.emplace(current(), line);
        if (c == '"')
          read_string();
        else
          while (i < t.size() && !std::strchr(",]}\n \t\r", t[i])) ++i;
      }
    }
  }

  static std::string escape(const std::string& key) {
    std::string out;
    for (char c : key) {
      if (c == '~')
        out += "~0";
      else if (c == '/')
        out += "~1";
      else
        out += c;
    }
    return out;
  }

  std::map<std::string, std::size_t> lines_;
};

class Reader {
 public:
  explicit Reader(const LineIndex& index) : index_(index) {}

  void fail(const std::string& pointer, const std::string& code, const std::string& message) {
    std::string where;
    if (auto line = index_.line_of(pointer)) where = "line " + std::to_string(*line) + ": ";
    diags_.push_back({code, where + message + (pointer.empty() ? "" : " (at " + pointer + ")")});
  }

  bool require_object(const json& j, const std::string& pointer, const std::set<std::string>& allowed) {
    if (!j.is_object()) {
      fail(pointer, "type", "expected an object");
      return false;
    }
    for (const auto& [key, value] : j.items())
      if (!allowed.count(key)) fail(pointer + "/" + key, "unknown-field", "unknown field '" + key + "'");
    return true;
  }

  std::optional<std::vector<std::string>> names(const json& j, const std::string& pointer, bool allow_empty) {
    if (!j.is_array()) {
      fail(pointer, "type", "expected an array of names");
      return std::nullopt;
    }
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < j.size(); ++i) {
      const std::string p = pointer + "/" + std::to_string(i);
      if (!j[i].is_string()) {
        fail(p, "type", "expected a string");
        continue;
      }
      const std::string s = j[i].get<std::string>();
      if (s.empty()) fail(p, "name", "names must be nonempty");
      if (!seen.insert(s).second) fail(p, "duplicate-name", "duplicate name '" + s + "'");
      out.push_back(s);
    }
    if (out.empty() && !allow_empty) fail(pointer, "empty", "list must not be empty");
    return out;
  }

  template <class Lookup>
  std::optional<std::size_t> name_ref(const json& j, const std::string& pointer, const char* what, Lookup lookup) {
    if (!j.is_string()) {
      fail(pointer, "type", std::string("expected a ") + what + " name");
      return std::nullopt;
    }
    auto id = lookup(j.get<std::string>());
    if (!id) fail(pointer, "unknown-name", std::string("unknown ") + what + " '" + j.get<std::string>() + "'");
    return id;
  }

  std::vector<Diagnostic>& diagnostics() { return diags_; }

 private:
  const LineIndex& index_;
  std::vector<Diagnostic> diags_;
};

std::string join_messages(const std::vector<Diagnostic>& d) {
  std::string s;
  for (const Diagnostic& x : d) s += (s.empty() ? "" : "\n") + x.message;
  return s;
}

}  // namespace

ModelError::ModelError(std::vector<Diagnostic> diagnostics)
    : Error(ErrorKind::Validation, join_messages(diagnostics)), diagnostics_(std::move(diagnostics)) {}

bool ModelDocument::perfect_observation() const {
  if (!has_equivalence) return true;
  return model.num_classes() == model.base.num_states();
}

Projection ModelDocument::projection_or_identity() const {
  return projection ? *projection : identity_projection(model.base);
}

ModelDocument parse_model(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ModelError({{"json", "line " + std::to_string(line) + ", column " + std::to_string(column) +
                                   ": malformed JSON"}});
  }
  const LineIndex index(text);
  Reader r(index);
  ModelDocument doc;
  LabeledMdp& m = doc.model.base;
  if (!r.require_object(root, "", {"states", "labels", "actions", "initial", "transitions", "equivalence", "projection",
                                   "acceptance"}))
    throw ModelError(r.diagnostics());
  for (const char* key : {"states", "labels", "actions", "initial", "transitions"})
    if (!root.contains(key)) r.fail("", "missing-field", std::string("missing field '") + key + "'");
  if (!r.diagnostics().empty()) throw ModelError(r.diagnostics());

  if (auto v = r.names(root["states"], "/states", false)) m.states = *v;
  if (auto v = r.names(root["labels"], "/labels", true)) m.labels = *v;
  if (auto v = r.names(root["actions"], "/actions", true)) m.actions = *v;
  if (!r.diagnostics().empty()) throw ModelError(r.diagnostics());

  auto state_of = [&](const std::string& s) { return m.state_index(s); };
  auto action_of = [&](const std::string& s) { return m.action_index(s); };
  auto label_of = [&](const std::string& s) { return m.label_index(s); };

  const json& init = root["initial"];
  if (init.is_object() || init.is_array())
    r.fail("/initial", "initial-distribution",
           "initial distributions are not supported; name a single initial state");
  else if (auto q = r.name_ref(init, "/initial", "state", state_of))
    m.initial = *q;

  m.choices.resize(m.states.size());
  const json& trans = root["transitions"];
  if (!trans.is_array()) {
    r.fail("/transitions", "type", "expected an array of transitions");
  } else {
    std::set<std::pair<StateId, ActionId>> seen;
    for (std::size_t i = 0; i < trans.size(); ++i) {
      const std::string p = "/transitions/" + std::to_string(i);
      const json& t = trans[i];
      if (!r.require_object(t, p, {"from", "action", "dist"})) continue;
      if (!t.contains("from") || !t.contains("action") || !t.contains("dist")) {
        r.fail(p, "missing-field", "transition needs 'from', 'action' and 'dist'");
        continue;
      }
      const auto from = r.name_ref(t["from"], p + "/from", "state", state_of);
      const auto action = r.name_ref(t["action"], p + "/action", "action", action_of);
      if (!t["dist"].is_array()) {
        r.fail(p + "/dist", "type", "expected an array of outcomes");
        continue;
      }
      Choice c;
      for (std::size_t k = 0; k < t["dist"].size(); ++k) {
        const std::string po = p + "/dist/" + std::to_string(k);
        const json& o = t["dist"][k];
        if (!r.require_object(o, po, {"label", "to", "prob"})) continue;
        if (!o.contains("label") || !o.contains("to") || !o.contains("prob")) {
          r.fail(po, "missing-field", "outcome needs 'label', 'to' and 'prob'");
          continue;
        }
        const auto label = r.name_ref(o["label"], po + "/label", "label", label_of);
        const auto to = r.name_ref(o["to"], po + "/to", "state", state_of);
        Rational prob;
        if (!o["prob"].is_string()) {
          r.fail(po + "/prob", "type", "probabilities are strings such as \"3/4\"");
          continue;
        }
        try {
          prob = parse_rational(o["prob"].get<std::string>());
        } catch (const std::invalid_argument&) {
          r.fail(po + "/prob", "probability", "malformed probability '" + o["prob"].get<std::string>() + "'");
          continue;
        }
        if (label && to) c.outcomes.push_back({*label, *to, prob});
      }
      if (!from || !action) continue;
      if (!seen.insert({*from, *action}).second) {
        r.fail(p, "duplicate-transition", "action '" + m.actions[*action] + "' defined twice for '" + m.states[*from] + "'");
        continue;
      }
      c.action = *action;
      m.choices[*from].push_back(std::move(c));
    }
  }
  for (auto& cs : m.choices)
    std::sort(cs.begin(), cs.end(), [](const Choice& a, const Choice& b) { return a.action < b.action; });

  doc.model.observation_class.resize(m.states.size());
  for (StateId q = 0; q < m.states.size(); ++q) doc.model.observation_class[q] = q;
  if (root.contains("equivalence")) {
    doc.has_equivalence = true;
    const json& eq = root["equivalence"];
    std::vector<std::size_t> cls(m.states.size(), kNoClass);
    if (!eq.is_array()) {
      r.fail("/equivalence", "type", "expected an array of classes");
    } else {
      for (std::size_t c = 0; c < eq.size(); ++c) {
        const std::string p = "/equivalence/" + std::to_string(c);
        if (!eq[c].is_array() || eq[c].empty()) {
          r.fail(p, "partition", "each class is a nonempty array of state names");
          continue;
        }
        for (std::size_t k = 0; k < eq[c].size(); ++k) {
          const auto q = r.name_ref(eq[c][k], p + "/" + std::to_string(k), "state", state_of);
          if (!q) continue;
          if (cls[*q] != kNoClass)
            r.fail(p + "/" + std::to_string(k), "partition", "state '" + m.states[*q] + "' appears in two classes");
          cls[*q] = c;
        }
      }
      for (StateId q = 0; q < m.states.size(); ++q)
        if (cls[q] == kNoClass) r.fail("/equivalence", "partition", "state '" + m.states[q] + "' is in no class");
      std::map<std::size_t, std::size_t> dense;
      for (StateId q = 0; q < m.states.size(); ++q)
        if (cls[q] != kNoClass) doc.model.observation_class[q] = dense.emplace(cls[q], dense.size()).first->second;
    }
  }

  if (root.contains("projection")) {
    const json& pj = root["projection"];
    if (r.require_object(pj, "/projection", {"observables", "states", "steps"})) {
      Projection pi;
      if (pj.contains("observables")) {
        if (auto v = r.names(pj["observables"], "/projection/observables", true)) pi.observables = *v;
      } else {
        r.fail("/projection", "missing-field", "projection needs 'observables'");
      }
      auto obs_of = [&](const json& v, const std::string& p) -> std::optional<ObsId> {
        if (!v.is_string()) {
          r.fail(p, "type", "expected an observable name or \"\"");
          return std::nullopt;
        }
        const std::string s = v.get<std::string>();
        if (s.empty()) return kErased;
        const auto it = std::find(pi.observables.begin(), pi.observables.end(), s);
        if (it == pi.observables.end()) {
          r.fail(p, "unknown-name", "unknown observable '" + s + "'");
          return std::nullopt;
        }
        return static_cast<ObsId>(it - pi.observables.begin());
      };
      pi.state_obs.assign(m.states.size(), kErased);
      if (pj.contains("states")) {
        if (!pj["states"].is_object()) r.fail("/projection/states", "type", "expected an object");
        else
          for (const auto& [name, v] : pj["states"].items()) {
            const std::string p = "/projection/states/" + name;
            const auto q = m.state_index(name);
            if (!q) {
              r.fail(p, "unknown-name", "unknown state '" + name + "'");
              continue;
            }
            if (auto o = obs_of(v, p)) pi.state_obs[*q] = *o;
          }
      }
      if (pj.contains("steps")) {
        if (!pj["steps"].is_object()) r.fail("/projection/steps", "type", "expected an object");
        else
          for (const auto& [key, v] : pj["steps"].items()) {
            const std::string p = "/projection/steps/" + key;
            // The key is "action,label"; names may contain commas, so try every split.
            std::vector<std::pair<ActionId, LabelId>> matches;
            for (std::size_t cut = key.find(','); cut != std::string::npos; cut = key.find(',', cut + 1)) {
              const auto a = m.action_index(std::string_view(key).substr(0, cut));
              const auto l = m.label_index(std::string_view(key).substr(cut + 1));
              if (a && l) matches.emplace_back(*a, *l);
            }
            if (matches.size() != 1) {
              r.fail(p, "unknown-name", "step key '" + key + "' does not name exactly one action,label pair");
              continue;
            }
            if (auto o = obs_of(v, p); o && *o != kErased) pi.step_obs[matches.front()] = *o;
          }
      }
      doc.projection = std::move(pi);
    }
  }

  if (root.contains("acceptance")) {
    const json& acc = root["acceptance"];
    if (r.require_object(acc, "/acceptance", {"priorities"}) && acc.contains("priorities") &&
        acc["priorities"].is_object()) {
      std::vector<unsigned> prio(m.states.size(), 0);
      for (const auto& [name, v] : acc["priorities"].items()) {
        const auto q = m.state_index(name);
        if (!q || !v.is_number_unsigned()) {
          r.fail("/acceptance/priorities/" + name, "acceptance", "bad priority entry '" + name + "'");
          continue;
        }
        prio[*q] = v.get<unsigned>();
      }
      doc.priorities = std::move(prio);
    } else {
      r.fail("/acceptance", "acceptance", "acceptance needs a 'priorities' object");
    }
  }

  if (!r.diagnostics().empty()) throw ModelError(r.diagnostics());
  return doc;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Validation, "cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ModelDocument load_model(const std::filesystem::path& path) { return parse_model(read_file(path)); }

json projection_to_json(const LabeledMdp& mdp, const Projection& pi) {
  json j;
  j["observables"] = pi.observables;
  json states = json::object();
  for (StateId q = 0; q < mdp.num_states(); ++q) {
    const ObsId o = pi.of_state(q);
    states[mdp.states[q]] = o == kErased ? "" : pi.observables[o];
  }
  j["states"] = states;
  json steps = json::object();
  for (const auto& [step, o] : pi.step_obs)
    if (o != kErased) steps[mdp.actions[step.first] + "," + mdp.labels[step.second]] = pi.observables[o];
  j["steps"] = steps;
  return j;
}

json model_to_json(const ModelDocument& doc) {
  const LabeledMdp& m = doc.model.base;
  json j;
  j["states"] = m.states;
  j["labels"] = m.labels;
  j["actions"] = m.actions;
  j["initial"] = m.states.at(m.initial);
  json trans = json::array();
  for (StateId q = 0; q < m.num_states(); ++q)
    for (const Choice& c : m.choices[q]) {
      json dist = json::array();
      for (const Outcome& o : c.outcomes)
        dist.push_back({{"label", m.labels[o.label]}, {"to", m.states[o.target]}, {"prob", to_string(o.probability)}});
      trans.push_back({{"from", m.states[q]}, {"action", m.actions[c.action]}, {"dist", dist}});
    }
  j["transitions"] = trans;
  if (doc.has_equivalence) {
    std::vector<std::vector<std::string>> classes(doc.model.num_classes());
    for (StateId q = 0; q < m.num_states(); ++q) classes[doc.model.observation_class[q]].push_back(m.states[q]);
    j["equivalence"] = classes;
  }
  if (doc.projection) j["projection"] = projection_to_json(m, *doc.projection);
  if (doc.priorities) {
    json prio = json::object();
    for (StateId q = 0; q < m.num_states(); ++q) prio[m.states[q]] = (*doc.priorities)[q];
    j["acceptance"] = {{"priorities", prio}};
  }
  return j;
}

std::string print_model(const ModelDocument& doc) { return model_to_json(doc).dump(2) + "\n"; }

json scheduler_to_json(const LabeledMdp& mdp, const Scheduler& s) {
  auto memory_name = [&](MemoryId m) { return m < s.memory_names.size() ? s.memory_names[m] : std::to_string(m); };
  const bool deterministic = std::all_of(s.choice.begin(), s.choice.end(), [](const auto& kv) {
    return kv.second.size() == 1 && kv.second.front().weight == 1;
  });
  json j;
  if (s.memory_size == 1 && s.update.empty() && deterministic) {
    json table = json::object();
    for (StateId q = 0; q < mdp.num_states(); ++q) {
      const auto d = s.choice_at(mdp, 0, q);
      if (!d.empty()) table[mdp.states[q]] = mdp.actions[d.front().action];
    }
    j["memoryless"] = table;
    return j;
  }
  json memory = json::array();
  for (MemoryId m = 0; m < s.memory_size; ++m) memory.push_back(memory_name(m));
  j["memory"] = memory;
  j["initial"] = memory_name(s.initial_memory);
  j["observation_based"] = s.observation_based;
  json choice = json::array();
  for (const auto& [key, dist] : s.choice) {
    json actions = json::object();
    for (const ActionWeight& w : dist) actions[mdp.actions[w.action]] = to_string(w.weight);
    choice.push_back({{"memory", memory_name(key.first)}, {"state", mdp.states[key.second]}, {"actions", actions}});
  }
  j["choice"] = choice;
  json update = json::array();
  for (const auto& [key, dist] : s.update) {
    json next = json::object();
    for (const MemoryWeight& w : dist) next[memory_name(w.memory)] = to_string(w.weight);
    json entry = {{"memory", memory_name(key.memory)}, {"action", mdp.actions[key.action]}, {"state", mdp.states[key.state]},
                  {"next", next}};
    if (key.label != kAnyLabel) entry["label"] = mdp.labels[key.label];
    update.push_back(entry);
  }
  j["update"] = update;
  return j;
}

}  // namespace opaq
