// Copyright 2026 The bbrt Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "bbrt/io.hpp"
#include "test_support.hpp"

using namespace bbrt;

namespace {

RunConfig small_config() {
  RunConfig c;
  c.iterations = 3;
  c.samples = 8;
  c.decoders = {DecodeSpec{TopKSpec{3, 6}, 50}, DecodeSpec{BeamSpec{2, 2}, 50}};
  c.seeds = {tokenize("[C][C][O]"), tokenize("[C][N][C][=O]")};
  c.rng_seed = 4;
  c.top_m = 7;
  return c;
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("corpus text with comments") {
    const auto corpus = parse_corpus("# header\n[C][C]\n\n  # indented comment\n[C][#N]\n");
    REQUIRE(corpus.size() == 2);
    CHECK(render(corpus[1]) == "[C][#N]");
    CHECK(parse_corpus(format_corpus(corpus)) == corpus);
    CHECK(test::error_code_of([] { parse_corpus("[C]\n[Q]\n"); }) == ErrorCode::kUnknownToken);
  }

  TEST_CASE("missing files name their path") {
    try {
      read_corpus("/nonexistent/dir/corpus.selfies");
      FAIL("expected an I/O error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kIo);
      CHECK(std::string(e.what()).find("/nonexistent/dir/corpus.selfies") != std::string::npos);
    }
  }

  TEST_CASE("pairs round-trip") {
    test::TempDir dir("io");
    const std::vector<TranslationPair> pairs{{tokenize("[C]"), tokenize("[C][C]"), 0.62, 0.45},
                                             {tokenize("[C][O]"), tokenize("[C][C][O]"), 0.5, 0.5}};
    write_text_file(dir.path() / "p.jsonl", format_pairs(pairs));
    const auto back = read_pairs(dir.path() / "p.jsonl");
    REQUIRE(back.size() == 2);
    CHECK(back[0].source == pairs[0].source);
    CHECK(back[1].target == pairs[1].target);
    CHECK(back[0].sim == 0.62);
    CHECK(back[0].gain == 0.45);
    CHECK(pair_to_json(pairs[0]) == Json::parse(R"({"src":"[C]","tgt":"[C][C]","sim":0.62,"gain":0.45})"));
  }

  TEST_CASE("oracle and decoder documents round-trip") {
    PropertyOracle o = PropertyOracle::qed_surrogate();
    o.qed.mw_center = 250;
    o.normalization = Normalization{0.4, 0.1};
    const PropertyOracle back = oracle_from_json(oracle_to_json(o));
    CHECK(oracle_to_json(back) == oracle_to_json(o));
    CHECK(back.evaluate(test::chain(5)) == o.evaluate(test::chain(5)));
    for (const DecodeSpec& d : {DecodeSpec{GreedySpec{4}, 9}, DecodeSpec{BeamSpec{5, 3, true}, 9},
                                DecodeSpec{TopKSpec{2, 11}, 30}}) {
      CHECK(decode_spec_to_json(decode_spec_from_json(decode_spec_to_json(d))) == decode_spec_to_json(d));
    }
  }

  TEST_CASE("reference model round-trip") {
    const std::vector<TranslationPair> pairs{{tokenize("[C]"), tokenize("[C][C]"), 0.5, 0.45},
                                             {tokenize("[C][O]"), tokenize("[C][C][O]"), 0.5, 0.5}};
    const ReferenceTranslator m = train_reference(pairs, PropertyOracle::penalized_logp());
    const ReferenceTranslator back = reference_from_json(reference_to_json(m));
    CHECK(back.counts() == m.counts());
    CHECK(back.boundaries() == m.boundaries());
    CHECK(back.next_token_dist(tokenize("[C][O]"), tokenize("[C]")) ==
          m.next_token_dist(tokenize("[C][O]"), tokenize("[C]")));
  }

  TEST_CASE("experiment config round-trip and presets") {
    ExperimentConfig e;
    e.run = small_config();
    e.model.kind = "local-edit";
    const Json j = experiment_to_json(e);
    CHECK(experiment_to_json(experiment_from_json(j)) == j);
    const RunConfig full = preset("full-budget");
    CHECK(full.iterations == 25);
    CHECK(full.samples == 220);
    std::size_t total = 0;
    for (const auto& d : full.decoders) total += d.budget();
    CHECK(total == 220);
    CHECK(test::error_code_of([] { preset("huge"); }) == ErrorCode::kConfig);
  }

  TEST_CASE("config errors list every field") {
    Json j = run_config_to_json(small_config());
    j["iterations"] = 0;
    j["radius"] = "two";
    j["bogus"] = true;
    j["scoring"] = "max-fun";
    try {
      run_config_from_json(j);
      FAIL("expected a config error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kConfig);
      const std::string msg = e.what();
      for (const char* field : {"iterations", "radius", "bogus", "scoring"}) {
        INFO(std::string(field));
        CHECK(msg.find(field) != std::string::npos);
      }
    }
  }

  TEST_CASE("preset key and seeds file") {
    test::TempDir dir("io");
    write_text_file(dir.path() / "seeds.selfies", "[C][O]\n[C][N]\n");
    const Json j = {{"preset", "full-budget"}, {"seeds_file", "seeds.selfies"}, {"iterations", 3}};
    const RunConfig c = run_config_from_json(j, dir.path());
    CHECK(c.iterations == 3);
    CHECK(c.samples == 220);
    CHECK(c.seeds.size() == 2);
  }

  TEST_CASE("trace and report round-trip") {
    const RunConfig c = small_config();
    const RunResult r = bbrt_run(c, LocalEditModel{});
    const std::string text = format_trace(c, r.traces);
    const LoadedTrace loaded = parse_trace(text);
    CHECK(format_trace(loaded.config, loaded.traces) == text);
    CHECK(run_config_to_json(loaded.config) == run_config_to_json(c));
    const EnsembleReport rebuilt = build_report(loaded.config, loaded.traces);
    CHECK(report_to_json(rebuilt) == report_to_json(r.report));
    const Json rj = report_to_json(r.report);
    CHECK(report_to_json(report_from_json(rj)) == rj);
    CHECK(rj["kind"] == "recursive");
    CHECK(series_csv(r.report).rfind("iteration,mean,stddev,max,diversity\n", 0) == 0);
    CHECK(top_table(r.report).find("objective") != std::string::npos);
  }

  TEST_CASE("baseline reports are flagged") {
    RunConfig c = small_config();
    c.iterations = 1;
    const RunResult r = bbrt_run(c, LocalEditModel{});
    CHECK(report_to_json(r.report)["kind"] == "non-recursive baseline");
  }

  TEST_CASE("run store") {
    test::TempDir dir("store");
    RunStore store(dir.path());
    const std::string a = store.create_run("run");
    const std::string b = store.create_run("run");
    CHECK(a != b);
    RunManifest m;
    m.run_id = a;
    m.config = run_config_to_json(small_config());
    m.inputs["model"] = "model.json";
    m.outputs["trace"] = "trace.jsonl";
    m.created = utc_timestamp();
    m.finished = utc_timestamp();
    m.engine_version = BBRT_VERSION;
    store.write_manifest(m);
    CHECK(manifest_to_json(store.read_manifest(a)) == manifest_to_json(m));
    const auto runs = store.list_runs();
    CHECK(std::find(runs.begin(), runs.end(), a) != runs.end());
  }

  TEST_CASE("model specs load") {
    test::TempDir dir("models");
    const std::vector<TranslationPair> pairs{{tokenize("[C]"), tokenize("[C][C]"), 0.5, 0.45}};
    write_text_file(dir.path() / "m.json",
                    reference_to_json(train_reference(pairs, PropertyOracle::penalized_logp())).dump());
    ModelSpec ref;
    ref.path = "m.json";
    CHECK(load_model(ref, dir.path())->mode() == ModelMode::kTokenLevel);
    ModelSpec echo;
    echo.kind = "echo";
    CHECK(load_model(echo)->mode() == ModelMode::kSequenceLevel);
    ModelSpec le;
    le.kind = "local-edit";
    CHECK(load_model(le)->vocabulary().size() == alphabet_size());
    ModelSpec missing;
    missing.path = "absent.json";
    CHECK(test::error_code_of([&] { load_model(missing, dir.path()); }) == ErrorCode::kIo);
  }
}
