// Copyright 2026 The bbrt Authors
// SPDX-License-Identifier: Apache-2.0

#include "bbrt/io.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include "bbrt/adapter.hpp"
#include "bbrt/error.hpp"

namespace fs = std::filesystem;

namespace bbrt {

namespace {

// ---- value coercions (throw std::invalid_argument with a short reason) ----

std::uint64_t as_u64(const Json& v) {
  const bool ok = v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
  if (!ok) throw std::invalid_argument("expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::size_t as_count(const Json& v) { return static_cast<std::size_t>(as_u64(v)); }

int as_int(const Json& v) {
  if (!v.is_number_integer()) throw std::invalid_argument("expected an integer");
  const auto x = v.get<std::int64_t>();
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
    throw std::invalid_argument("integer out of range");
  }
  return static_cast<int>(x);
}

double as_number(const Json& v) {
  if (!v.is_number()) throw std::invalid_argument("expected a number");
  return v.get<double>();
}

// NaN and infinities are stored as null.
double as_number_or_nan(const Json& v) {
  if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return as_number(v);
}

bool as_bool(const Json& v) {
  if (!v.is_boolean()) throw std::invalid_argument("expected true or false");
  return v.get<bool>();
}

std::string as_string(const Json& v) {
  if (!v.is_string()) throw std::invalid_argument("expected a string");
  return v.get<std::string>();
}

const Json& as_object(const Json& v) {
  if (!v.is_object()) throw std::invalid_argument("expected an object");
  return v;
}

const Json& as_array(const Json& v) {
  if (!v.is_array()) throw std::invalid_argument("expected an array");
  return v;
}

// Reads the fields of one JSON object, collecting problems instead of
// stopping at the first.
class Fields {
 public:
  Fields(const Json& obj, std::string prefix, std::vector<std::string>& errors)
      : obj_(obj), prefix_(std::move(prefix)), errors_(errors) {
    if (!obj_.is_object()) {
      errors_.push_back((prefix_.empty() ? std::string("document") : prefix_.substr(0, prefix_.size() - 1)) +
                        ": expected an object");
      ok_ = false;
    }
  }

  bool has(const char* key) const { return ok_ && obj_.contains(key); }

  void read(const char* key, const std::function<void(const Json&)>& fn) {
    if (!has(key)) return;
    used_.insert(key);
    try {
      fn(obj_.at(key));
    } catch (const Error& e) {
      add_nested(key, e.what());
    } catch (const std::exception& e) {
      errors_.push_back(prefix_ + key + ": " + e.what());
    }
  }

  void ignore(const char* key) { used_.insert(key); }

  void finish() {
    if (!ok_) return;
    for (const auto& [k, v] : obj_.items()) {
      if (!used_.count(k)) errors_.push_back(prefix_ + k + ": unknown field");
    }
  }

  std::string path(const char* key) const { return prefix_ + key; }

 private:
  // Nested parsers report "a: b\n  c: d" blocks; re-prefix each line.
  void add_nested(const char* key, const std::string& what) {
    if (what.find('\n') == std::string::npos) {
      errors_.push_back(prefix_ + key + ": " + what);
      return;
    }
    std::istringstream in(what);
    std::string line;
    bool any = false;
    while (std::getline(in, line)) {
      const auto first = line.find_first_not_of(' ');
      if (first == std::string::npos) continue;
      line = line.substr(first);
      if (line.back() == ':' && !any) continue;  // header line of a nested block
      errors_.push_back(prefix_ + key + "." + line);
      any = true;
    }
    if (!any) errors_.push_back(prefix_ + key + ": " + what);
  }

  const Json& obj_;
  std::string prefix_;
  std::vector<std::string>& errors_;
  std::set<std::string> used_;
  bool ok_ = true;
};

[[noreturn]] void throw_config(std::string_view what, const std::vector<std::string>& errors) {
  std::string msg = std::string(what) + ":";
  for (const auto& e : errors) msg += "\n  " + e;
  throw Error(ErrorCode::kConfig, msg);
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  if (path.is_relative() && !base.empty()) return base / path;
  return path;
}

Json weights_to_json(const std::vector<double>& w) {
  Json o = Json::object();
  for (std::size_t i = 0; i < w.size(); ++i) o[render(Token{static_cast<std::uint8_t>(i)})] = w[i];
  return o;
}

std::vector<double> weights_from_json(const Json& j) {
  as_object(j);
  std::vector<double> w(alphabet_size(), 0.0);
  for (const auto& [sym, v] : j.items()) w.at(token(sym).id) = as_number(v);
  return w;
}

Json props_json(const PropertyValues& p) {
  return Json{{"objective", p.objective}, {"logp", p.logp},         {"qed", p.qed},
              {"mol_wt", p.mol_wt},       {"sim_prev", p.sim_prev}, {"sim_init", p.sim_init}};
}

PropertyValues props_from(const Json& j) {
  PropertyValues p;
  p.objective = as_number(j.at("objective"));
  p.logp = as_number(j.at("logp"));
  p.qed = as_number(j.at("qed"));
  p.mol_wt = as_number(j.at("mol_wt"));
  p.sim_prev = as_number(j.at("sim_prev"));
  p.sim_init = as_number(j.at("sim_init"));
  return p;
}

Json entry_json(const EnsembleEntry& e, std::size_t rank) {
  Json j{{"rank", rank}, {"sequence", render(e.tokens)}, {"seed", e.seed_index}, {"iteration", e.iteration}};
  j.update(props_json(e.props));
  return j;
}

EnsembleEntry entry_from(const Json& j) {
  EnsembleEntry e;
  e.tokens = tokenize(as_string(j.at("sequence")));
  e.props = props_from(j);
  e.seed_index = as_count(j.at("seed"));
  e.iteration = as_count(j.at("iteration"));
  return e;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

// ---- files --------------------------------------------------------------------------

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::kIo, "write to '" + tmp.string() + "' failed");
  }
  fs::rename(tmp, path);
}

Json read_json_file(const fs::path& path) {
  const std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kConfig, "'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

// ---- corpora and pairs ----------------------------------------------------------

std::vector<TokenSequence> parse_corpus(std::string_view text, std::string_view origin) {
  std::vector<TokenSequence> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.remove_suffix(1);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front()))) line.remove_prefix(1);
    if (line.empty() || line.front() == '#') continue;
    try {
      out.push_back(tokenize(line));
    } catch (const Error& e) {
      throw Error(e.code(), std::string(origin) + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<TokenSequence> read_corpus(const fs::path& path) {
  return parse_corpus(read_text_file(path), path.string());
}

std::string format_corpus(std::span<const TokenSequence> corpus) {
  std::string out;
  for (const auto& s : corpus) out += render(s) + "\n";
  return out;
}

Json pair_to_json(const TranslationPair& p) {
  return Json{{"src", render(p.source)}, {"tgt", render(p.target)}, {"sim", p.sim}, {"gain", p.gain}};
}

TranslationPair pair_from_json(const Json& j) {
  TranslationPair p;
  p.source = tokenize(as_string(j.at("src")));
  p.target = tokenize(as_string(j.at("tgt")));
  p.sim = as_number(j.at("sim"));
  p.gain = as_number(j.at("gain"));
  return p;
}

std::vector<TranslationPair> read_pairs(const fs::path& path) {
  const std::string text = read_text_file(path);
  std::vector<TranslationPair> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(pair_from_json(Json::parse(line)));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kIo, path.string() + ":" + std::to_string(line_no) + ": bad pair record: " + e.what());
    }
  }
  return out;
}

std::string format_pairs(std::span<const TranslationPair> pairs) {
  std::string out;
  for (const auto& p : pairs) out += pair_to_json(p).dump() + "\n";
  return out;
}

// ---- oracles, decoders, models ------------------------------------------------------

Json oracle_to_json(const PropertyOracle& o) {
  Json j{{"name", std::string(oracle_name(o.kind))}};
  if (o.kind == OracleKind::kPenalizedLogp || o.kind == OracleKind::kQed) {
    // The QED surrogate reads the logP table for its lipophilicity term.
    j["logp_params"] = Json{{"carbon", o.logp.carbon},
                            {"soft_hetero", o.logp.soft_hetero},
                            {"polar", o.logp.polar},
                            {"fluorine", o.logp.fluorine},
                            {"sa_atom", o.logp.sa_atom},
                            {"sa_branch", o.logp.sa_branch},
                            {"sa_ring", o.logp.sa_ring},
                            {"ring_size_limit", o.logp.ring_size_limit}};
  }
  if (o.kind == OracleKind::kQed) {
    j["qed_params"] = Json{{"mw_center", o.qed.mw_center},       {"mw_width", o.qed.mw_width},
                           {"logp_center", o.qed.logp_center},   {"logp_width", o.qed.logp_width},
                           {"ring_center", o.qed.ring_center},   {"ring_width", o.qed.ring_width}};
  }
  j["normalization"] =
      o.normalization ? Json{{"mean", o.normalization->mean}, {"stddev", o.normalization->stddev}} : Json(nullptr);
  return j;
}

PropertyOracle oracle_from_json(const Json& j) {
  std::vector<std::string> errors;
  PropertyOracle o;
  Fields f(j, "", errors);
  if (!f.has("name")) errors.push_back("name: required");
  f.read("name", [&](const Json& v) { o.kind = parse_oracle_kind(as_string(v)); });
  f.read("logp_params", [&](const Json& v) {
    Fields p(v, "logp_params.", errors);
    p.read("carbon", [&](const Json& x) { o.logp.carbon = as_number(x); });
    p.read("soft_hetero", [&](const Json& x) { o.logp.soft_hetero = as_number(x); });
    p.read("polar", [&](const Json& x) { o.logp.polar = as_number(x); });
    p.read("fluorine", [&](const Json& x) { o.logp.fluorine = as_number(x); });
    p.read("sa_atom", [&](const Json& x) { o.logp.sa_atom = as_number(x); });
    p.read("sa_branch", [&](const Json& x) { o.logp.sa_branch = as_number(x); });
    p.read("sa_ring", [&](const Json& x) { o.logp.sa_ring = as_number(x); });
    p.read("ring_size_limit", [&](const Json& x) { o.logp.ring_size_limit = as_int(x); });
    p.finish();
  });
  f.read("qed_params", [&](const Json& v) {
    Fields p(v, "qed_params.", errors);
    p.read("mw_center", [&](const Json& x) { o.qed.mw_center = as_number(x); });
    p.read("mw_width", [&](const Json& x) { o.qed.mw_width = as_number(x); });
    p.read("logp_center", [&](const Json& x) { o.qed.logp_center = as_number(x); });
    p.read("logp_width", [&](const Json& x) { o.qed.logp_width = as_number(x); });
    p.read("ring_center", [&](const Json& x) { o.qed.ring_center = as_number(x); });
    p.read("ring_width", [&](const Json& x) { o.qed.ring_width = as_number(x); });
    p.finish();
    if (!(o.qed.mw_width > 0 && o.qed.logp_width > 0 && o.qed.ring_width > 0)) {
      errors.push_back("qed_params: widths must be > 0");
    }
  });
  f.read("normalization", [&](const Json& v) {
    if (v.is_null()) return;
    Normalization n;
    Fields p(v, "normalization.", errors);
    p.read("mean", [&](const Json& x) { n.mean = as_number(x); });
    p.read("stddev", [&](const Json& x) { n.stddev = as_number(x); });
    p.finish();
    if (!(n.stddev > 0.0)) errors.push_back("normalization.stddev: must be > 0");
    o.normalization = n;
  });
  f.finish();
  if (!errors.empty()) throw_config("invalid oracle", errors);
  return o;
}

Json decode_spec_to_json(const DecodeSpec& d) {
  Json j = std::visit(
      [](const auto& s) -> Json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GreedySpec>) {
          return Json{{"strategy", "greedy"}, {"copies", s.copies}};
        } else if constexpr (std::is_same_v<T, BeamSpec>) {
          return Json{{"strategy", "beam"},
                      {"width", s.width},
                      {"num_returned", s.num_returned},
                      {"length_normalize", s.length_normalize}};
        } else {
          return Json{{"strategy", "top-k"}, {"k", s.k}, {"num_samples", s.num_samples}};
        }
      },
      d.strategy);
  j["max_length"] = d.max_length;
  return j;
}

DecodeSpec decode_spec_from_json(const Json& j) {
  std::vector<std::string> errors;
  DecodeSpec d;
  Fields f(j, "", errors);
  std::string strategy = "top-k";
  if (!f.has("strategy")) errors.push_back("strategy: required (greedy, beam or top-k)");
  f.read("strategy", [&](const Json& v) { strategy = as_string(v); });
  if (strategy == "greedy") {
    GreedySpec g;
    f.read("copies", [&](const Json& v) { g.copies = as_count(v); });
    d.strategy = g;
  } else if (strategy == "beam") {
    BeamSpec b;
    f.read("width", [&](const Json& v) { b.width = as_count(v); });
    f.read("num_returned", [&](const Json& v) { b.num_returned = as_count(v); });
    f.read("length_normalize", [&](const Json& v) { b.length_normalize = as_bool(v); });
    d.strategy = b;
  } else if (strategy == "top-k") {
    TopKSpec t;
    f.read("k", [&](const Json& v) { t.k = as_count(v); });
    f.read("num_samples", [&](const Json& v) { t.num_samples = as_count(v); });
    d.strategy = t;
  } else {
    errors.push_back("strategy: unknown decoder '" + strategy + "'");
  }
  f.read("max_length", [&](const Json& v) { d.max_length = as_count(v); });
  f.finish();
  if (!errors.empty()) throw_config("invalid decoder", errors);
  return d;
}

Json reference_to_json(const ReferenceTranslator& m) {
  Json vocab = Json::array();
  for (Token t : m.vocabulary().tokens()) vocab.push_back(render(t));
  return Json{{"format", "bbrt-reference/1"},  {"vocab", vocab},
              {"oracle", oracle_to_json(m.oracle())}, {"boundaries", m.boundaries()},
              {"alpha", m.alpha()},               {"counts", m.counts()}};
}

ReferenceTranslator reference_from_json(const Json& j) {
  try {
    if (j.value("format", std::string()) != "bbrt-reference/1") {
      throw Error(ErrorCode::kConfig, "not a reference translator model file");
    }
    std::vector<Token> tokens;
    for (const auto& s : as_array(j.at("vocab"))) tokens.push_back(token(as_string(s)));
    std::vector<double> boundaries;
    for (const auto& b : as_array(j.at("boundaries"))) boundaries.push_back(as_number(b));
    std::vector<std::uint32_t> counts;
    counts.reserve(j.at("counts").size());
    for (const auto& c : as_array(j.at("counts"))) counts.push_back(static_cast<std::uint32_t>(as_count(c)));
    return ReferenceTranslator(Vocabulary(std::move(tokens)), oracle_from_json(j.at("oracle")),
                               std::move(boundaries), as_number(j.at("alpha")), std::move(counts));
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("bad reference model: ") + e.what());
  }
}

Json local_edit_to_json(const LocalEditParams& p) {
  return Json{{"copy_prob", p.copy_prob},
              {"early_stop", p.early_stop},
              {"tail_stop", p.tail_stop},
              {"edit_weights", weights_to_json(p.edit_weights)},
              {"tail_weights", weights_to_json(p.tail_weights)}};
}

LocalEditParams local_edit_from_json(const Json& j) {
  std::vector<std::string> errors;
  LocalEditParams p = LocalEditParams::carbon_appender();
  Fields f(j, "", errors);
  f.read("copy_prob", [&](const Json& v) { p.copy_prob = as_number(v); });
  f.read("early_stop", [&](const Json& v) { p.early_stop = as_number(v); });
  f.read("tail_stop", [&](const Json& v) { p.tail_stop = as_number(v); });
  f.read("edit_weights", [&](const Json& v) { p.edit_weights = weights_from_json(v); });
  f.read("tail_weights", [&](const Json& v) { p.tail_weights = weights_from_json(v); });
  f.finish();
  if (errors.empty()) {
    try {
      p.validate();
    } catch (const Error& e) {
      errors.push_back(e.what());
    }
  }
  if (!errors.empty()) throw_config("invalid local-edit parameters", errors);
  return p;
}

Json model_spec_to_json(const ModelSpec& m) {
  Json j{{"kind", m.kind}};
  if (m.kind == "reference") j["path"] = m.path;
  if (m.kind == "local-edit") j["params"] = local_edit_to_json(m.local_edit);
  if (m.kind == "external") {
    j["endpoint"] = m.endpoint;
    j["mode"] = std::string(model_mode_name(m.mode));
    j["timeout_ms"] = m.timeout_ms;
  }
  return j;
}

namespace {

ModelSpec model_spec_from_json(const Json& j, std::vector<std::string>& errors) {
  ModelSpec m;
  Fields f(j, "model.", errors);
  f.read("kind", [&](const Json& v) { m.kind = as_string(v); });
  f.read("path", [&](const Json& v) { m.path = as_string(v); });
  f.read("endpoint", [&](const Json& v) { m.endpoint = as_string(v); });
  f.read("mode", [&](const Json& v) {
    const auto s = as_string(v);
    if (s == "token-level") m.mode = ModelMode::kTokenLevel;
    else if (s == "sequence-level") m.mode = ModelMode::kSequenceLevel;
    else throw std::invalid_argument("expected token-level or sequence-level");
  });
  f.read("timeout_ms", [&](const Json& v) {
    m.timeout_ms = as_int(v);
    if (m.timeout_ms <= 0) throw std::invalid_argument("must be > 0");
  });
  f.read("params", [&](const Json& v) { m.local_edit = local_edit_from_json(v); });
  f.finish();
  if (m.kind == "reference") {
    if (m.path.empty()) errors.push_back("model.path: required for a reference model");
  } else if (m.kind == "external") {
    if (m.endpoint.empty()) errors.push_back("model.endpoint: required for an external model");
  } else if (m.kind != "local-edit" && m.kind != "echo") {
    errors.push_back("model.kind: expected reference, local-edit, echo or external");
  }
  return m;
}

}  // namespace

std::shared_ptr<ConditionalModel> load_model(const ModelSpec& spec, const fs::path& base_dir) {
  if (spec.kind == "reference") {
    return std::make_shared<ReferenceTranslator>(reference_from_json(read_json_file(resolve(base_dir, spec.path))));
  }
  if (spec.kind == "local-edit") return std::make_shared<LocalEditModel>(spec.local_edit);
  if (spec.kind == "echo") return std::make_shared<EchoModel>();
  if (spec.kind == "external") {
    return ExternalModel::connect(spec.endpoint, spec.mode, AdapterOptions{std::chrono::milliseconds(spec.timeout_ms)});
  }
  throw Error(ErrorCode::kConfig, "unknown model kind '" + spec.kind + "'");
}

// ---- run configs ------------------------------------------------------------------------

RunConfig preset(std::string_view name) {
  if (name == "default") return RunConfig{};
  if (name == "full-budget") return full_budget_preset();
  throw Error(ErrorCode::kConfig, "unknown preset '" + std::string(name) + "' (default, full-budget)");
}

Json run_config_to_json(const RunConfig& c) {
  Json decoders = Json::array();
  for (const auto& d : c.decoders) decoders.push_back(decode_spec_to_json(d));
  Json seeds = Json::array();
  for (const auto& s : c.seeds) seeds.push_back(render(s));
  return Json{{"iterations", c.iterations},
              {"samples", c.samples},
              {"decoders", decoders},
              {"scoring", std::string(scoring_name(c.scoring))},
              {"objective", oracle_to_json(c.objective)},
              {"logp_oracle", oracle_to_json(c.logp_oracle)},
              {"qed_oracle", oracle_to_json(c.qed_oracle)},
              {"radius", c.radius},
              {"max_length", c.max_length},
              {"seeds", seeds},
              {"rng_seed", c.rng_seed},
              {"top_m", c.top_m},
              {"diversity_cap", c.diversity_cap},
              {"execution", c.execution == Execution::kParallel ? "parallel" : "serial"}};
}

Json experiment_to_json(const ExperimentConfig& c) {
  Json j = run_config_to_json(c.run);
  j["model"] = model_spec_to_json(c.model);
  return j;
}

namespace {

// Fills `c` from the run keys of `j`; `extra` marks keys owned by the caller.
void read_run_fields(Fields& f, RunConfig& c, const fs::path& base_dir, std::vector<std::string>& errors) {
  if (f.has("preset")) {
    f.read("preset", [&](const Json& v) { c = preset(as_string(v)); });
  }
  f.read("iterations", [&](const Json& v) { c.iterations = as_count(v); });
  f.read("samples", [&](const Json& v) { c.samples = as_count(v); });
  f.read("decoders", [&](const Json& v) {
    as_array(v);
    c.decoders.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      try {
        c.decoders.push_back(decode_spec_from_json(v[i]));
      } catch (const Error& e) {
        std::istringstream in(e.what());
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
          errors.push_back("decoders[" + std::to_string(i) + "]." + line.substr(line.find_first_not_of(' ')));
        }
      }
    }
  });
  f.read("scoring", [&](const Json& v) { c.scoring = parse_scoring_kind(as_string(v)); });
  f.read("objective", [&](const Json& v) { c.objective = oracle_from_json(v); });
  f.read("logp_oracle", [&](const Json& v) { c.logp_oracle = oracle_from_json(v); });
  f.read("qed_oracle", [&](const Json& v) { c.qed_oracle = oracle_from_json(v); });
  f.read("radius", [&](const Json& v) { c.radius = as_int(v); });
  f.read("max_length", [&](const Json& v) { c.max_length = as_count(v); });
  f.read("seeds", [&](const Json& v) {
    as_array(v);
    c.seeds.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      try {
        c.seeds.push_back(tokenize(as_string(v[i])));
      } catch (const std::exception& e) {
        errors.push_back("seeds[" + std::to_string(i) + "]: " + e.what());
      }
    }
  });
  f.read("seeds_file", [&](const Json& v) {
    for (auto& s : read_corpus(resolve(base_dir, as_string(v)))) c.seeds.push_back(std::move(s));
  });
  f.read("rng_seed", [&](const Json& v) { c.rng_seed = as_u64(v); });
  f.read("top_m", [&](const Json& v) { c.top_m = as_count(v); });
  f.read("diversity_cap", [&](const Json& v) { c.diversity_cap = as_count(v); });
  f.read("execution", [&](const Json& v) {
    const auto s = as_string(v);
    if (s == "parallel") c.execution = Execution::kParallel;
    else if (s == "serial") c.execution = Execution::kSerial;
    else throw std::invalid_argument("expected parallel or serial");
  });
}

}  // namespace

RunConfig run_config_from_json(const Json& j, const fs::path& base_dir) {
  std::vector<std::string> errors;
  RunConfig c;
  Fields f(j, "", errors);
  read_run_fields(f, c, base_dir, errors);
  f.finish();
  // Fields that failed to parse keep their defaults, so this adds no noise.
  for (auto& v : c.violations()) errors.push_back(std::move(v));
  if (!errors.empty()) throw_config("invalid run config", errors);
  return c;
}

ExperimentConfig experiment_from_json(const Json& j, const fs::path& base_dir) {
  std::vector<std::string> errors;
  ExperimentConfig c;
  Fields f(j, "", errors);
  read_run_fields(f, c.run, base_dir, errors);
  if (!f.has("model")) errors.push_back("model: required");
  f.read("model", [&](const Json& v) { c.model = model_spec_from_json(v, errors); });
  f.finish();
  for (auto& v : c.run.violations()) errors.push_back(std::move(v));
  if (!errors.empty()) throw_config("invalid run config", errors);
  return c;
}

ExperimentConfig load_experiment(const fs::path& path) {
  return experiment_from_json(read_json_file(path), path.parent_path());
}

// ---- traces and reports ------------------------------------------------------------------

std::string trace_header_line(const RunConfig& c) {
  return Json{{"type", "header"}, {"format", "bbrt-trace/1"}, {"config", run_config_to_json(c)}}.dump();
}

Json step_to_json(std::size_t seed_index, const TraceStep& step) {
  const auto& b = step.batch;
  Json alts = Json::array();
  for (std::size_t i = 0; i < b.candidates.size(); ++i) {
    const auto& c = b.candidates[i];
    Json a{{"index", i},
           {"seq", render(c.seq.tokens)},
           {"ll", std::isfinite(c.seq.log_likelihood) ? Json(c.seq.log_likelihood) : Json(nullptr)},
           {"finished", c.seq.finished}};
    a.update(props_json(c.props));
    alts.push_back(std::move(a));
  }
  const auto& w = step.winner();
  return Json{{"type", "step"},
              {"seed", seed_index},
              {"iteration", b.iteration},
              {"source", render(b.source)},
              {"chosen", b.chosen},
              {"winner", render(w.seq.tokens)},
              {"provenance", std::string(provenance_name(step.provenance))},
              {"sim_prev", w.props.sim_prev},
              {"sim_init", w.props.sim_init},
              {"generated", b.generated},
              {"dropped", b.dropped},
              {"alternatives", std::move(alts)}};
}

std::string trace_step_line(std::size_t seed_index, const TraceStep& step) {
  return step_to_json(seed_index, step).dump();
}

std::string trace_truncated_line(std::size_t seed_index, std::string_view error) {
  return Json{{"type", "truncated"}, {"seed", seed_index}, {"error", std::string(error)}}.dump();
}

std::string format_trace(const RunConfig& c, std::span<const SeedTrace> traces) {
  std::string out = trace_header_line(c) + "\n";
  for (const auto& t : traces) {
    for (const auto& s : t.steps) out += trace_step_line(t.seed_index, s) + "\n";
    if (t.truncated) out += trace_truncated_line(t.seed_index, *t.truncated) + "\n";
  }
  return out;
}

LoadedTrace parse_trace(std::string_view text) {
  LoadedTrace out;
  bool have_header = false;
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (line.empty()) continue;
    try {
      const Json j = Json::parse(line);
      const std::string type = as_string(j.at("type"));
      if (type == "header") {
        out.config = run_config_from_json(j.at("config"));
        out.traces.resize(out.config.seeds.size());
        for (std::size_t i = 0; i < out.traces.size(); ++i) {
          out.traces[i].seed_index = i;
          out.traces[i].seed = out.config.seeds[i];
        }
        have_header = true;
        continue;
      }
      if (!have_header) throw Error(ErrorCode::kIo, "trace does not start with a header line");
      const std::size_t seed = as_count(j.at("seed"));
      if (seed >= out.traces.size()) throw Error(ErrorCode::kIo, "seed index out of range");
      SeedTrace& t = out.traces[seed];
      if (type == "truncated") {
        t.truncated = as_string(j.at("error"));
        continue;
      }
      if (type != "step") throw Error(ErrorCode::kIo, "unknown record type '" + type + "'");
      TraceStep step;
      step.batch.iteration = as_count(j.at("iteration"));
      step.batch.source = tokenize(as_string(j.at("source")));
      step.batch.chosen = as_count(j.at("chosen"));
      step.batch.generated = as_count(j.at("generated"));
      step.batch.dropped = as_count(j.at("dropped"));
      const auto prov = as_string(j.at("provenance"));
      step.provenance = prov == "user-override" ? Provenance::kUserOverride : Provenance::kAuto;
      for (const auto& a : as_array(j.at("alternatives"))) {
        Candidate c;
        c.seq.tokens = tokenize(as_string(a.at("seq")));
        c.seq.log_likelihood = as_number_or_nan(a.at("ll"));
        c.seq.finished = as_bool(a.at("finished"));
        c.props = props_from(a);
        c.graph = decode(c.seq.tokens);
        c.fp = morgan_fingerprint(c.graph, out.config.radius);
        step.batch.candidates.push_back(std::move(c));
      }
      if (step.batch.chosen >= step.batch.candidates.size()) throw Error(ErrorCode::kIo, "chosen index out of range");
      t.generations += step.batch.generated;
      t.dropped += step.batch.dropped;
      t.steps.push_back(std::move(step));
    } catch (const Error& e) {
      throw Error(ErrorCode::kIo, "trace line " + std::to_string(line_no) + ": " + e.what());
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kIo, "trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header) throw Error(ErrorCode::kIo, "trace has no header line");
  return out;
}

Json report_to_json(const EnsembleReport& r) {
  Json top = Json::array();
  for (std::size_t i = 0; i < r.top.size(); ++i) top.push_back(entry_json(r.top[i], i + 1));
  Json series = Json::array();
  for (const auto& s : r.series) {
    series.push_back(Json{{"iteration", s.iteration},
                          {"count", s.count},
                          {"mean", s.mean},
                          {"stddev", s.stddev},
                          {"max", s.max},
                          {"diversity", s.diversity ? Json(*s.diversity) : Json(nullptr)}});
  }
  return Json{{"kind", r.non_recursive ? "non-recursive baseline" : "recursive"},
              {"non_recursive", r.non_recursive},
              {"seeds", r.seeds},
              {"truncated_seeds", r.truncated_seeds},
              {"generations", r.generations},
              {"dropped", r.dropped},
              {"best", r.best ? entry_json(*r.best, 1) : Json(nullptr)},
              {"top", std::move(top)},
              {"series", std::move(series)}};
}

EnsembleReport report_from_json(const Json& j) {
  try {
    EnsembleReport r;
    r.non_recursive = as_bool(j.at("non_recursive"));
    r.seeds = as_count(j.at("seeds"));
    r.truncated_seeds = as_count(j.at("truncated_seeds"));
    r.generations = as_count(j.at("generations"));
    r.dropped = as_count(j.at("dropped"));
    if (!j.at("best").is_null()) r.best = entry_from(j.at("best"));
    for (const auto& e : as_array(j.at("top"))) r.top.push_back(entry_from(e));
    for (const auto& s : as_array(j.at("series"))) {
      IterationStats st;
      st.iteration = as_count(s.at("iteration"));
      st.count = as_count(s.at("count"));
      st.mean = as_number(s.at("mean"));
      st.stddev = as_number(s.at("stddev"));
      st.max = as_number(s.at("max"));
      if (!s.at("diversity").is_null()) st.diversity = as_number(s.at("diversity"));
      r.series.push_back(st);
    }
    return r;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kIo, std::string("bad report document: ") + e.what());
  }
}

std::string series_csv(const EnsembleReport& r) {
  std::string out = "iteration,mean,stddev,max,diversity\n";
  for (const auto& s : r.series) {
    out += std::to_string(s.iteration) + "," + format_number(s.mean) + "," + format_number(s.stddev) + "," +
           format_number(s.max) + "," + (s.diversity ? format_number(*s.diversity) : std::string()) + "\n";
  }
  return out;
}

std::string top_table(const EnsembleReport& r, std::size_t rows) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-4s %10s %8s %8s %9s  %s\n", "rank", "objective", "logp", "qed", "mol_wt",
                "sequence");
  out += buf;
  for (std::size_t i = 0; i < std::min(rows, r.top.size()); ++i) {
    const auto& e = r.top[i];
    std::snprintf(buf, sizeof buf, "%-4zu %10.4f %8.3f %8.4f %9.3f  ", i + 1, e.props.objective, e.props.logp,
                  e.props.qed, e.props.mol_wt);
    out += buf + render(e.tokens) + "\n";
  }
  return out;
}

// ---- run store ------------------------------------------------------------------------------

Json manifest_to_json(const RunManifest& m) {
  return Json{{"run_id", m.run_id},   {"config", m.config},   {"inputs", m.inputs},
              {"outputs", m.outputs}, {"created", m.created}, {"finished", m.finished},
              {"engine_version", m.engine_version}};
}

RunManifest manifest_from_json(const Json& j) {
  try {
    RunManifest m;
    m.run_id = as_string(j.at("run_id"));
    m.config = j.at("config");
    m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
    m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
    m.created = as_string(j.at("created"));
    m.finished = as_string(j.at("finished"));
    m.engine_version = as_string(j.at("engine_version"));
    return m;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kIo, std::string("bad manifest: ") + e.what());
  }
}

RunStore::RunStore(fs::path root) : root_(std::move(root)) { fs::create_directories(root_ / "runs"); }

std::string RunStore::create_run(std::string_view prefix) {
  for (int n = 1; n < 1000000; ++n) {
    char suffix[16];
    std::snprintf(suffix, sizeof suffix, "-%04d", n);
    const std::string id = std::string(prefix) + suffix;
    if (fs::create_directory(root_ / "runs" / id)) return id;
  }
  throw Error(ErrorCode::kIo, "run store is full");
}

fs::path RunStore::run_dir(std::string_view run_id) const {
  if (run_id.empty() || run_id.find('/') != std::string_view::npos || run_id.find("..") != std::string_view::npos) {
    throw Error(ErrorCode::kInvalidArgument, "invalid run id");
  }
  return root_ / "runs" / std::string(run_id);
}

void RunStore::write_manifest(const RunManifest& m) const {
  write_text_file(run_dir(m.run_id) / "manifest.json", manifest_to_json(m).dump(2) + "\n");
}

RunManifest RunStore::read_manifest(std::string_view run_id) const {
  const fs::path p = run_dir(run_id) / "manifest.json";
  if (!fs::exists(p)) throw Error(ErrorCode::kNotFound, "unknown run '" + std::string(run_id) + "'");
  return manifest_from_json(read_json_file(p));
}

std::vector<std::string> RunStore::list_runs() const {
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(root_ / "runs")) {
    if (e.is_directory() && fs::exists(e.path() / "manifest.json")) out.push_back(e.path().filename().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace bbrt
