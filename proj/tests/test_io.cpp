#include <gtest/gtest.h>

#include <filesystem>
#include <string>
#include <vector>

#include "lobkit/io/config.hpp"
#include "lobkit/io/experiment.hpp"

using namespace lobkit;
using namespace lobkit::io;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lobkit_test_io_" + name);
  fs::remove_all(p);
  return p;
}

bool mentions(const ConfigError& e, const std::string& needle) {
  for (const auto& p : e.problems())
    if (p.find(needle) != std::string::npos) return true;
  return false;
}

ConfigError config_error(std::string_view text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e;
  }
  ADD_FAILURE() << "expected a configuration error";
  return ConfigError({});
}

std::string small_config(const std::string& kind, const std::string& out, const std::string& extra) {
  return "[experiment]\nkind = " + kind + "\nseed = 11\nreplicas = 2\noutput = " + out + "\n" + extra;
}

}  // namespace

TEST(Config, MinimalBookConfigFillsDefaults) {
  const ExperimentConfig c = parse_config("[experiment]\nkind = simulate-book\n");
  EXPECT_EQ(c.kind, "simulate-book");
  EXPECT_EQ(c.seed, 1u);
  EXPECT_EQ(c.replicas, 1);
  EXPECT_EQ(c.integer("model", "levels"), 200);
  EXPECT_EQ(c.reals("generator", "limit").size(), 5u);
  EXPECT_EQ(c.real("generator", "horizon"), 1000.0);
}

TEST(Config, CommentsAndWhitespace) {
  const ExperimentConfig c =
      parse_config("# comment\n\n[experiment]\n  kind =  llob  \n; other\n[model]\ncancellation=0.5\r\n");
  EXPECT_EQ(c.real("model", "cancellation"), 0.5);
}

TEST(Config, DuplicateKeyNamesKeyAndLine) {
  const ConfigError e = config_error("[experiment]\nkind = llob\n[model]\ndiffusivity = 1\ndiffusivity = 2\n");
  ASSERT_EQ(e.problems().size(), 1u);
  EXPECT_NE(e.problems()[0].find("model.diffusivity"), std::string::npos);
  EXPECT_NE(e.problems()[0].find("line 5"), std::string::npos);
  EXPECT_NE(e.problems()[0].find("line 4"), std::string::npos);
}

TEST(Config, UnknownKeyIsNamed) {
  const ConfigError e = config_error("[experiment]\nkind = llob\n[model]\nvolatility = 1\n");
  EXPECT_TRUE(mentions(e, "unknown key 'model.volatility'"));
}

TEST(Config, AllErrorsAreCollected) {
  const ConfigError e =
      config_error("[experiment]\nkind = stats\nreplicas = 0\n[generator]\nalpha = x\nbogus = 1\n[extra]\n");
  EXPECT_TRUE(mentions(e, "replicas"));
  EXPECT_TRUE(mentions(e, "generator.alpha"));
  EXPECT_TRUE(mentions(e, "generator.bogus"));
  EXPECT_TRUE(mentions(e, "[extra]"));
  EXPECT_EQ(e.problems().size(), 4u);
}

TEST(Config, MissingExperimentSection) {
  EXPECT_TRUE(mentions(config_error("[model]\nrho = 0.1\n"), "missing required section [experiment]"));
  EXPECT_TRUE(mentions(config_error("[experiment]\nseed = 3\n"), "experiment.kind"));
  EXPECT_TRUE(mentions(config_error("[experiment]\nkind = nothing\n"), "experiment.kind"));
}

TEST(Config, ReplicaCountZeroIsRejected) {
  EXPECT_TRUE(mentions(config_error("[experiment]\nkind = coimpact\nreplicas = 0\n"), "experiment.replicas"));
}

TEST(Config, KindHint) {
  EXPECT_EQ(parse_config("[model]\nrho = 0.4\n", "coimpact").real("model", "rho"), 0.4);
  EXPECT_THROW(parse_config("[experiment]\nkind = llob\n", "coimpact"), ConfigError);
}

TEST(Config, RoundTrip) {
  const ExperimentConfig c =
      parse_config("[experiment]\nkind = metaorder\nseed = 9\n[generator]\nshape = front-loaded\ncount = 50\n");
  const std::string text = serialize_config(c);
  const ExperimentConfig back = parse_config(text);
  EXPECT_EQ(back, c);
  EXPECT_EQ(serialize_config(back), text);
}

TEST(Config, HashIsStableUnderReordering) {
  const ExperimentConfig a =
      parse_config("[experiment]\nkind = coimpact\nseed = 4\n[model]\nrho = 0.3\nnoise = 0.01\n[generator]\ndays = 10\n");
  const ExperimentConfig b =
      parse_config("[generator]\ndays = 10\n[model]\nnoise = 0.01\nrho = 0.3\n[experiment]\nseed = 4\nkind = coimpact\n");
  const ExperimentConfig c =
      parse_config("[experiment]\nkind = coimpact\nseed = 4\n[model]\nrho = 0.31\nnoise = 0.01\n[generator]\ndays = 10\n");
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_NE(config_hash(a), config_hash(c));
}

TEST(Config, ChoiceValidation) {
  EXPECT_TRUE(mentions(config_error("[experiment]\nkind = metaorder\n[generator]\nshape = twisted\n"), "generator.shape"));
}

TEST(Experiment, SameConfigRunTwiceIsByteIdentical) {
  const std::vector<std::pair<std::string, std::string>> kinds{
      {"simulate-flow", "[generator]\ncount = 500\n"},
      {"simulate-book", "[generator]\nhorizon = 20\n"},
      {"stats", "[generator]\ncount = 5000\n[fit]\nmax_lag = 50\nlag_max = 50\n"},
      {"calibrate", "[generator]\ncount = 5000\n[fit]\nmax_lag = 10\n"},
      {"impact", "[generator]\ncount = 5000\n[fit]\nmax_lag = 10\n"},
      {"llob", "[generator]\npoints = 3\nnodes = 32\n"},
      {"metaorder", "[generator]\ncount = 200\n"},
      {"coimpact", "[generator]\ndays = 500\n"}};
  for (const auto& [kind, extra] : kinds) {
    const fs::path a = scratch(kind + "_a"), b = scratch(kind + "_b");
    const RunManifest ma = run_experiment(parse_config(small_config(kind, a.string(), extra)));
    const RunManifest mb = run_experiment(parse_config(small_config(kind, b.string(), extra)));
    ASSERT_TRUE(ma.ok()) << kind << ": " << ma.replicas[0].error;
    ASSERT_EQ(ma.replicas.size(), 2u);
    EXPECT_NE(ma.replicas[0].seed, ma.replicas[1].seed);
    for (std::size_t r = 0; r < 2; ++r) {
      ASSERT_EQ(ma.replicas[r].files.size(), mb.replicas[r].files.size());
      for (std::size_t f = 0; f < ma.replicas[r].files.size(); ++f) {
        EXPECT_EQ(ma.replicas[r].files[f].hash, mb.replicas[r].files[f].hash) << kind << " " << ma.replicas[r].files[f].path;
        EXPECT_EQ(read_file(a / ma.replicas[r].files[f].path), read_file(b / mb.replicas[r].files[f].path));
      }
    }
    EXPECT_EQ(ma.config_hash, mb.config_hash);
    EXPECT_TRUE(fs::is_regular_file(a / "manifest.json"));
    EXPECT_TRUE(fs::is_regular_file(a / "config.ini"));
    fs::remove_all(a);
    fs::remove_all(b);
  }
}

TEST(Experiment, ReplicaSeedsFollowTheMasterSeed) {
  const fs::path out = scratch("seeds");
  const RunManifest m = run_experiment(parse_config(small_config("simulate-flow", out.string(), "[generator]\ncount = 10\n")));
  for (const auto& r : m.replicas) EXPECT_EQ(r.seed, derive_seed(11, r.index));
  const auto j = nlohmann::json::parse(read_file(out / "manifest.json"));
  EXPECT_EQ(j["config_hash"], m.config_hash);
  EXPECT_EQ(j["replicas"].size(), 2u);
  EXPECT_EQ(j["replicas"][1]["files"][0]["path"], "replica_001/signs.csv");
  fs::remove_all(out);
}

TEST(Experiment, FailingReplicaIsRecorded) {
  const fs::path out = scratch("failure");
  // phi_min above phi_max passes the per-key schema but fails the run.
  const RunManifest m = run_experiment(
      parse_config(small_config("metaorder", out.string(), "[generator]\ncount = 5\nphi_min = 0.5\nphi_max = 0.1\n")));
  EXPECT_FALSE(m.ok());
  EXPECT_NE(m.replicas[0].error.find("phi_min"), std::string::npos);
  EXPECT_TRUE(m.replicas[0].files.empty());
  EXPECT_FALSE(fs::exists(out / "replica_000"));
  const auto j = nlohmann::json::parse(read_file(out / "manifest.json"));
  EXPECT_EQ(j["ok"], false);
  EXPECT_EQ(j["replicas"][0]["status"], "failed");
  fs::remove_all(out);
}

TEST(Experiment, NoTemporaryFilesRemain) {
  const fs::path out = scratch("atomic");
  run_experiment(parse_config(small_config("coimpact", out.string(), "[generator]\ndays = 200\n")));
  for (const auto& e : fs::recursive_directory_iterator(out))
    EXPECT_EQ(e.path().string().find(".tmp"), std::string::npos) << e.path();
  fs::remove_all(out);
}

TEST(Experiment, OutputsRoundTripThroughTheirReaders) {
  const fs::path out = scratch("readers");
  run_experiment(parse_config(small_config("simulate-flow", out.string(), "[generator]\ncount = 300\n")));
  const std::string text = read_file(out / "replica_000" / "signs.csv");
  EXPECT_EQ(signs_to_csv(signs_from_csv(text)), text);
  fs::remove_all(out);
}

TEST(Report, ImpactCurveFromThreeBins) {
  const fs::path dir = scratch("report_curve");
  fs::create_directories(dir);
  ImpactCurve c;
  c.bins = {{1e-4, 1e-3, 5e-4, 0.01, 0.001, 10}, {1e-3, 1e-2, 5e-3, 0.03, 0.002, 12}, {1e-2, 1e-1, 5e-2, 0.1, 0.01, 7}};
  write_file_atomic(dir / "impact_curve.csv", impact_curve_to_csv(c));
  const std::vector<fs::path> inputs{dir / "impact_curve.csv"};
  const auto files = emit_report(inputs, ReportKind::ImpactCurve, dir / "report");
  const Table t = parse_csv(read_file(files[0]));
  EXPECT_EQ(t.header, (std::vector<std::string>{"phi", "impact", "stderr", "n"}));
  EXPECT_EQ(t.rows.size(), 3u);
  ASSERT_EQ(files.size(), 2u);
  EXPECT_EQ(files[1].extension(), ".dat");
  const std::string dat = read_file(files[1]);
  EXPECT_EQ(dat.substr(0, dat.find('\n')), "# phi impact");
  fs::remove_all(dir);
}

TEST(Report, SurfaceIsLongFormat) {
  const fs::path dir = scratch("report_surface");
  fs::create_directories(dir);
  ImpactSurface s;
  s.cells = {{0.1, 1, 0.01, 0.1, 0.5, 0.05, 0.02, 0.001, 9},
             {0.1, 1, 0.1, 1, 0.5, 0.5, 0.06, 0.002, 8},
             {1, 10, 0.01, 0.1, 5, 0.05, 0.04, 0.003, 7}};
  write_file_atomic(dir / "surface.csv", impact_surface_to_csv(s));
  const std::vector<fs::path> inputs{dir / "surface.csv", dir / "surface.csv"};
  const auto files = emit_report(inputs, ReportKind::Surface, dir / "report");
  const Table t = parse_csv(read_file(files[0]));
  EXPECT_EQ(t.header, (std::vector<std::string>{"source", "T", "eta", "impact", "stderr", "n"}));
  EXPECT_EQ(t.rows.size(), 6u);
  EXPECT_EQ(files.size(), 1u + 2u * 2u);  // one panel per duration bin per input
  fs::remove_all(dir);
}

TEST(Report, ExperimentOutputsFeedReports) {
  const fs::path out = scratch("report_pipeline");
  run_experiment(parse_config(small_config("metaorder", out.string(), "[generator]\ncount = 200\n")));
  run_experiment(parse_config(small_config("coimpact", (out / "co").string(), "[generator]\ndays = 500\n")));
  const fs::path r0 = out / "replica_000";
  const std::vector<std::pair<ReportKind, fs::path>> cases{{ReportKind::ImpactCurve, r0 / "impact_curve.csv"},
                                                           {ReportKind::Surface, r0 / "surface.csv"},
                                                           {ReportKind::Decay, r0 / "decay.csv"},
                                                           {ReportKind::CoImpact, out / "co" / "replica_000" / "curve.csv"}};
  for (const auto& [kind, input] : cases) {
    const std::vector<fs::path> inputs{input};
    EXPECT_NO_THROW(emit_report(inputs, kind, out / "report")) << report_name(kind);
  }
  fs::remove_all(out);
}

TEST(Report, MissingInputsAreListed) {
  const std::vector<fs::path> inputs{"/nonexistent/a.csv", "/nonexistent/b.csv"};
  try {
    emit_report(inputs, ReportKind::Response, scratch("report_missing"));
    FAIL() << "expected an error";
  } catch (const InvalidArgument& e) {
    const std::string m = e.what();
    EXPECT_NE(m.find("a.csv"), std::string::npos);
    EXPECT_NE(m.find("b.csv"), std::string::npos);
  }
}

TEST(Report, EmptyInputSetIsAnError) {
  EXPECT_THROW(emit_report({}, ReportKind::Decay, scratch("report_empty")), InvalidArgument);
  EXPECT_THROW(parse_report_kind("histogram"), InvalidArgument);
}
