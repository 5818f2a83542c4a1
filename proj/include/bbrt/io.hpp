// Copyright 2026 The bbrt Authors
// SPDX-License-Identifier: Apache-2.0

// File formats. Configs, models, reports and manifests are JSON documents;
// pairs and traces are line-delimited JSON; corpora are one surface string
// per line (lines starting with '#' are comments); iteration series are CSV.

#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bbrt/engine.hpp"
#include "bbrt/translator.hpp"

namespace bbrt {

using Json = nlohmann::json;

std::string read_text_file(const std::filesystem::path& path);
// Writes via a temporary file renamed into place.
void write_text_file(const std::filesystem::path& path, std::string_view content);
Json read_json_file(const std::filesystem::path& path);

// ---- corpora and pairs -----------------------------------------------------

std::vector<TokenSequence> parse_corpus(std::string_view text, std::string_view origin = "<corpus>");
std::vector<TokenSequence> read_corpus(const std::filesystem::path& path);
std::string format_corpus(std::span<const TokenSequence> corpus);

Json pair_to_json(const TranslationPair& p);
TranslationPair pair_from_json(const Json& j);
std::vector<TranslationPair> read_pairs(const std::filesystem::path& path);
std::string format_pairs(std::span<const TranslationPair> pairs);

// ---- oracles, decoders, models ----------------------------------------------

Json oracle_to_json(const PropertyOracle& o);
PropertyOracle oracle_from_json(const Json& j);

Json decode_spec_to_json(const DecodeSpec& d);
DecodeSpec decode_spec_from_json(const Json& j);

Json reference_to_json(const ReferenceTranslator& m);
ReferenceTranslator reference_from_json(const Json& j);

Json local_edit_to_json(const LocalEditParams& p);
LocalEditParams local_edit_from_json(const Json& j);

// Which translation model a run talks to.
struct ModelSpec {
  std::string kind = "reference";  // reference | local-edit | echo | external
  std::string path;                // reference: model file
  std::string endpoint;            // external: exec:<cmd> or tcp:<host>:<port>
  ModelMode mode = ModelMode::kTokenLevel;
  int timeout_ms = 10000;
  LocalEditParams local_edit = LocalEditParams::carbon_appender();
};

Json model_spec_to_json(const ModelSpec& m);
// Relative paths resolve against base_dir.
std::shared_ptr<ConditionalModel> load_model(const ModelSpec& spec, const std::filesystem::path& base_dir = {});

// ---- run configs ----------------------------------------------------------------

struct ExperimentConfig {
  RunConfig run;
  ModelSpec model;
};

Json run_config_to_json(const RunConfig& c);
Json experiment_to_json(const ExperimentConfig& c);

// Accepts an optional "preset" (applied before the other keys) and
// "seeds_file" (appended to "seeds", resolved against base_dir). Every
// malformed or unknown field and every semantic violation is collected
// into a single Config error.
ExperimentConfig experiment_from_json(const Json& j, const std::filesystem::path& base_dir = {});
RunConfig run_config_from_json(const Json& j, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment(const std::filesystem::path& path);

// Named presets: "default", "full-budget".
RunConfig preset(std::string_view name);

// ---- traces and reports ----------------------------------------------------------

std::string trace_header_line(const RunConfig& c);
std::string trace_step_line(std::size_t seed_index, const TraceStep& step);
std::string trace_truncated_line(std::size_t seed_index, std::string_view error);
// Header, then each seed's steps (and truncation marker) in seed order.
std::string format_trace(const RunConfig& c, std::span<const SeedTrace> traces);

struct LoadedTrace {
  RunConfig config;
  std::vector<SeedTrace> traces;
};
// Rebuilds graphs and fingerprints from the stored sequences.
LoadedTrace parse_trace(std::string_view text);

Json step_to_json(std::size_t seed_index, const TraceStep& step);
Json report_to_json(const EnsembleReport& r);
EnsembleReport report_from_json(const Json& j);
// Columns: iteration,mean,stddev,max,diversity.
std::string series_csv(const EnsembleReport& r);
// Plain-text table of the top rows of the ensemble.
std::string top_table(const EnsembleReport& r, std::size_t rows = 3);

// ---- run store ------------------------------------------------------------------

struct RunManifest {
  std::string run_id;
  Json config;
  std::map<std::string, std::string> inputs;
  std::map<std::string, std::string> outputs;
  std::string created;
  std::string finished;
  std::string engine_version;
};

Json manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const Json& j);

// Directory of run folders, each holding manifest.json and its artifacts.
class RunStore {
 public:
  explicit RunStore(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }
  // Creates runs/<prefix>-NNNN with the first unused number.
  std::string create_run(std::string_view prefix);
  std::filesystem::path run_dir(std::string_view run_id) const;
  void write_manifest(const RunManifest& m) const;
  RunManifest read_manifest(std::string_view run_id) const;
  std::vector<std::string> list_runs() const;

 private:
  std::filesystem::path root_;
};

std::string utc_timestamp();

}  // namespace bbrt
