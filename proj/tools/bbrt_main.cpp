// Copyright 2026 The bbrt Authors
// SPDX-License-Identifier: Apache-2.0

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bbrt/adapter.hpp"
#include "bbrt/corpus.hpp"
#include "bbrt/error.hpp"
#include "bbrt/io.hpp"
#include "bbrt/kernels.hpp"
#include "bbrt/service.hpp"
#include "bbrt/translator.hpp"

namespace fs = std::filesystem;
using namespace bbrt;

namespace {

PropertyOracle oracle_for(const std::string& property) {
  switch (parse_oracle_kind(property)) {
    case OracleKind::kPenalizedLogp: return PropertyOracle::penalized_logp();
    case OracleKind::kQed: return PropertyOracle::qed_surrogate();
    case OracleKind::kMolecularWeight: return PropertyOracle::molecular_weight();
  }
  return PropertyOracle::penalized_logp();
}

std::optional<PropertyBand> parse_band(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  if (v.size() != 2 || v[0] > v[1]) throw Error(ErrorCode::kInvalidArgument, "a band is two values lo <= hi");
  return PropertyBand{v[0], v[1]};
}

std::vector<MolGraph> decode_corpus(const std::vector<TokenSequence>& corpus) {
  return kernels::parallel::decode_all(corpus);
}

HttpServer* g_server = nullptr;

extern "C" void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recursive black-box translation for SELFIES molecule optimization"};
  app.set_version_flag("--version", BBRT_VERSION);
  app.require_subcommand(1);

  // corpus
  CorpusOptions corpus_opts;
  std::string corpus_out;
  auto* corpus_cmd = app.add_subcommand("corpus", "Generate a synthetic SELFIES corpus");
  corpus_cmd->add_option("--count", corpus_opts.count, "Number of distinct sequences")->capture_default_str();
  corpus_cmd->add_option("--min-length", corpus_opts.min_length)->capture_default_str();
  corpus_cmd->add_option("--max-length", corpus_opts.max_length)->capture_default_str();
  corpus_cmd->add_option("--seed", corpus_opts.seed)->capture_default_str();
  corpus_cmd->add_option("--out", corpus_out, "Output file")->required();

  // pairs
  std::string pairs_corpus, pairs_out, pairs_property = "penalized-logp";
  double pairs_tau = 0.4;
  bool pairs_no_tau = false;
  std::size_t pairs_budget = 1000;
  std::uint64_t pairs_seed = 0;
  int pairs_radius = kDefaultFingerprintRadius;
  std::vector<double> source_band, target_band;
  auto* pairs_cmd = app.add_subcommand("pairs", "Build similarity-constrained translation pairs");
  pairs_cmd->add_option("--corpus", pairs_corpus)->required()->check(CLI::ExistingFile);
  pairs_cmd->add_option("--tau", pairs_tau, "Similarity threshold in (0,1)")->capture_default_str();
  pairs_cmd->add_flag("--no-tau", pairs_no_tau, "Use only the property bands");
  pairs_cmd->add_option("--property", pairs_property)->capture_default_str();
  pairs_cmd->add_option("--budget", pairs_budget)->capture_default_str()->check(CLI::PositiveNumber);
  pairs_cmd->add_option("--seed", pairs_seed)->capture_default_str();
  pairs_cmd->add_option("--radius", pairs_radius)->capture_default_str()->check(CLI::Range(0, 4));
  pairs_cmd->add_option("--source-band", source_band, "lo hi")->expected(2);
  pairs_cmd->add_option("--target-band", target_band, "lo hi")->expected(2);
  pairs_cmd->add_option("--out", pairs_out)->required();

  // train
  std::string train_pairs, train_out, train_property = "penalized-logp";
  ReferenceTrainingOptions train_opts;
  auto* train_cmd = app.add_subcommand("train", "Train the reference translator on a pair file");
  train_cmd->add_option("--pairs", train_pairs)->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--property", train_property, "Oracle used for source buckets")->capture_default_str();
  train_cmd->add_option("--alpha", train_opts.alpha)->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--buckets", train_opts.buckets)->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--max-length", train_opts.max_length)->capture_default_str()->check(CLI::PositiveNumber);
  train_cmd->add_option("--out", train_out)->required();

  // run
  std::string run_config, run_store = "bbrt-store", run_out_dir;
  bool run_baseline = false;
  auto* run_cmd = app.add_subcommand("run", "Run a config and write trace, report and series");
  run_cmd->add_option("--config", run_config)->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--store", run_store, "Run store directory")->capture_default_str();
  run_cmd->add_option("--out-dir", run_out_dir, "Write artifacts here instead of a new store run");
  run_cmd->add_flag("--baseline", run_baseline, "Run the single-pass baseline at equal budget");

  // report
  std::string report_trace, report_out;
  std::size_t report_top = 3;
  auto* report_cmd = app.add_subcommand("report", "Rebuild the ensemble report from a trace file");
  report_cmd->add_option("--trace", report_trace)->required()->check(CLI::ExistingFile);
  report_cmd->add_option("--top", report_top)->capture_default_str();
  report_cmd->add_option("--out", report_out, "Also write the report JSON here");

  // serve
  std::string serve_bind = "127.0.0.1:8080", serve_store = "bbrt-store";
  auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP session API");
  serve_cmd->add_option("--bind", serve_bind, "host:port")->capture_default_str();
  serve_cmd->add_option("--store", serve_store)->capture_default_str();

  // seeds
  std::string seeds_corpus, seeds_out, seeds_property = "penalized-logp";
  std::size_t seeds_count = 10, seeds_start = 0, seeds_strata = 1;
  int seeds_radius = kDefaultFingerprintRadius;
  auto* seeds_cmd = app.add_subcommand("seeds", "Pick maximally diverse seeds with MaxMin");
  seeds_cmd->add_option("--corpus", seeds_corpus)->required()->check(CLI::ExistingFile);
  seeds_cmd->add_option("--count", seeds_count)->capture_default_str();
  seeds_cmd->add_option("--start", seeds_start)->capture_default_str();
  seeds_cmd->add_option("--strata", seeds_strata, "Property bands, one seed set each")->capture_default_str();
  seeds_cmd->add_option("--property", seeds_property, "Oracle defining the strata")->capture_default_str();
  seeds_cmd->add_option("--radius", seeds_radius)->capture_default_str()->check(CLI::Range(0, 4));
  seeds_cmd->add_option("--out", seeds_out, "Output file (set N goes to <out>.N when strata > 1)")->required();

  // serve-model
  std::string sm_model;
  bool sm_echo = false, sm_local_edit = false;
  auto* sm_cmd = app.add_subcommand("serve-model", "Speak the model wire protocol on stdin/stdout");
  sm_cmd->add_option("--model", sm_model, "Reference translator file");
  sm_cmd->add_flag("--echo", sm_echo, "Sequence-level echo model");
  sm_cmd->add_flag("--local-edit", sm_local_edit, "Carbon-appender local edit model");

  // print-config
  std::string pc_preset = "default";
  auto* pc_cmd = app.add_subcommand("print-config", "Print a complete config with every default");
  pc_cmd->add_option("--preset", pc_preset, "default or full-budget")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*corpus_cmd) {
      const auto corpus = generate_synthetic_corpus(corpus_opts);
      write_text_file(corpus_out, format_corpus(corpus));
      std::cout << "wrote " << corpus.size() << " sequences to " << corpus_out << "\n";
    } else if (*pairs_cmd) {
      const auto corpus = read_corpus(pairs_corpus);
      PairConstraint c;
      c.tau = pairs_no_tau ? std::nullopt : std::optional<double>(pairs_tau);
      c.oracle = oracle_for(pairs_property);
      c.radius = pairs_radius;
      c.source_band = parse_band(source_band);
      c.target_band = parse_band(target_band);
      PairStats stats;
      const auto pairs = build_pairs(corpus, c, pairs_budget, pairs_seed, &stats);
      write_text_file(pairs_out, format_pairs(pairs));
      std::printf("examined %zu ordered pairs, accepted %zu (%.2f%%); wrote %s\n", stats.examined, stats.accepted,
                  stats.examined ? 100.0 * static_cast<double>(stats.accepted) / static_cast<double>(stats.examined)
                                 : 0.0,
                  pairs_out.c_str());
    } else if (*train_cmd) {
      const auto pairs = read_pairs(train_pairs);
      const auto model = train_reference(pairs, oracle_for(train_property), train_opts);
      write_text_file(train_out, reference_to_json(model).dump() + "\n");
      std::cout << "trained on " << pairs.size() << " pairs (" << model.bucket_count() << " buckets); wrote "
                << train_out << "\n";
    } else if (*run_cmd) {
      ExperimentConfig exp = load_experiment(run_config);
      if (run_baseline) exp.run = non_recursive_baseline(exp.run);
      const auto model = load_model(exp.model, fs::path(run_config).parent_path());
      const std::string created = utc_timestamp();
      const auto result = bbrt_run(exp.run, *model);

      fs::path dir;
      RunManifest manifest;
      std::unique_ptr<RunStore> store;
      if (!run_out_dir.empty()) {
        dir = run_out_dir;
        fs::create_directories(dir);
      } else {
        store = std::make_unique<RunStore>(run_store);
        manifest.run_id = store->create_run(run_baseline ? "baseline" : "run");
        dir = store->run_dir(manifest.run_id);
      }
      write_text_file(dir / "trace.jsonl", format_trace(exp.run, result.traces));
      write_text_file(dir / "report.json", report_to_json(result.report).dump(2) + "\n");
      write_text_file(dir / "series.csv", series_csv(result.report));
      if (store) {
        manifest.config = experiment_to_json(exp);
        manifest.inputs["config"] = fs::absolute(run_config).string();
        if (exp.model.kind == "reference") {
          manifest.inputs["model"] = fs::absolute(fs::path(run_config).parent_path() / exp.model.path).string();
        }
        manifest.outputs = {{"trace", "trace.jsonl"}, {"report", "report.json"}, {"series", "series.csv"}};
        manifest.created = created;
        manifest.finished = utc_timestamp();
        manifest.engine_version = BBRT_VERSION;
        store->write_manifest(manifest);
        std::cout << "run " << manifest.run_id << " -> " << dir.string() << "\n";
      } else {
        std::cout << "artifacts -> " << dir.string() << "\n";
      }
      if (result.report.non_recursive) std::cout << "non-recursive baseline (n = 1)\n";
      std::cout << "seeds " << result.report.seeds << ", truncated " << result.report.truncated_seeds
                << ", generations " << result.report.generations << ", dropped " << result.report.dropped << "\n\n";
      std::cout << top_table(result.report, 3) << "\n" << series_csv(result.report);
    } else if (*report_cmd) {
      const auto loaded = parse_trace(read_text_file(report_trace));
      RunConfig cfg = loaded.config;
      cfg.top_m = std::max(cfg.top_m, report_top);
      const auto rep = build_report(cfg, loaded.traces);
      if (rep.non_recursive) std::cout << "non-recursive baseline (n = 1)\n";
      std::cout << top_table(rep, report_top) << "\n" << series_csv(rep);
      if (!report_out.empty()) write_text_file(report_out, report_to_json(rep).dump(2) + "\n");
    } else if (*serve_cmd) {
      const auto colon = serve_bind.rfind(':');
      if (colon == std::string::npos) throw Error(ErrorCode::kInvalidArgument, "--bind expects host:port");
      SessionService service(serve_store);
      HttpServer server(service);
      const int port = server.bind(serve_bind.substr(0, colon), std::stoi(serve_bind.substr(colon + 1)));
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "serving /v1 on " << serve_bind.substr(0, colon) << ":" << port << " (store "
                << serve_store << ", " << service.session_count() << " sessions restored)" << std::endl;
      server.listen();
      g_server = nullptr;
    } else if (*seeds_cmd) {
      const auto corpus = read_corpus(seeds_corpus);
      const auto graphs = decode_corpus(corpus);
      const auto sets =
          stratified_seed_sets(graphs, oracle_for(seeds_property), seeds_strata, seeds_count, seeds_start, seeds_radius);
      for (std::size_t s = 0; s < sets.size(); ++s) {
        std::vector<TokenSequence> picked;
        for (std::size_t i : sets[s]) picked.push_back(corpus[i]);
        const std::string path = sets.size() == 1 ? seeds_out : seeds_out + "." + std::to_string(s);
        write_text_file(path, format_corpus(picked));
        std::cout << "wrote " << picked.size() << " seeds to " << path << "\n";
      }
    } else if (*sm_cmd) {
      std::shared_ptr<ConditionalModel> model;
      if (sm_echo + sm_local_edit + !sm_model.empty() != 1) {
        throw Error(ErrorCode::kInvalidArgument, "choose exactly one of --model, --echo, --local-edit");
      }
      if (sm_echo) model = std::make_shared<EchoModel>();
      else if (sm_local_edit) model = std::make_shared<LocalEditModel>();
      else model = std::make_shared<ReferenceTranslator>(reference_from_json(read_json_file(sm_model)));
      std::ios::sync_with_stdio(false);
      serve_protocol(*model, std::cin, std::cout);
    } else if (*pc_cmd) {
      ExperimentConfig exp;
      exp.run = preset(pc_preset);
      exp.run.seeds = {tokenize("[C][C][C][C][C][C]")};
      exp.model.path = "model.json";
      std::cout << experiment_to_json(exp).dump(2) << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "error (" << error_code_name(e.code()) << "): " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
