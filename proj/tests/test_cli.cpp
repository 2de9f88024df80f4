#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "demrep/io.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "demrep");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = demrep::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path workdir(const std::string& name) {
  const fs::path p = fs::current_path() / ("cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string write_config(const fs::path& dir, const std::string& name, const json& j) {
  demrep::write_text(dir / name, j.dump(2));
  return (dir / name).string();
}

json toy_solve(const fs::path& out) {
  return {{"schemaVersion", 1},
          {"frame", {{"kind", "dense"}, {"M", 1}, {"N", 2}, {"entries", {1, 1}}}},
          {"signal", {{"values", {1}}}},
          {"solver", {{"algorithm", "cram"}, {"tolGap", 1e-10}}},
          {"output", out.string()}};
}

std::vector<std::string> files_under(const fs::path& root) {
  std::vector<std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) out.push_back(e.path().string());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(Cli, Version) {
  const auto r = run({"--version"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("demrep ", 0), 0u);
}

TEST(Cli, MissingSubcommandIsUsageError) {
  const auto r = run({});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(json::parse(r.err).at("error"), "usage");
  EXPECT_EQ(run({"bogus"}).code, 1);
}

TEST(Cli, SolveToy) {
  const auto dir = workdir("toy");
  const auto r = run({"solve", write_config(dir, "toy.json", toy_solve(dir / "out"))});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, (dir / "out" / "result.json").string() + "\n" + (dir / "out" / "x.bin").string() + "\n");
  EXPECT_TRUE(r.err.empty());
  const auto doc = json::parse(demrep::read_text(dir / "out" / "result.json"));
  EXPECT_NEAR(doc.at("result").at("primalObjective").get<double>(), 0.5, 1e-9);
  EXPECT_LE(doc.at("result").at("relativeGap").get<double>(), 1e-9);
  EXPECT_TRUE(doc.at("result").at("converged").get<bool>());
  const auto x = demrep::read_vector_binary(dir / "out" / "x.bin");
  EXPECT_NEAR(std::abs(x(0) - 0.5), 0.0, 1e-8);
}

TEST(Cli, SolveIterationCapExitsTwo) {
  const auto dir = workdir("cap");
  json cfg = {{"schemaVersion", 1},
              {"seed", 4},
              {"frame", {{"family", "gaussian"}, {"N", 64}, {"M", 16}}},
              {"signal", {{"synthetic", "complex-normal"}, {"norm", 1.0}}},
              {"solver", {{"maxIters", 1}}}};
  const auto r = run({"solve", write_config(dir, "cap.json", cfg), "--out", (dir / "o").string()});
  EXPECT_EQ(r.code, 2);
  const auto doc = json::parse(demrep::read_text(dir / "o" / "result.json"));
  EXPECT_FALSE(doc.at("result").at("converged").get<bool>());
  EXPECT_EQ(doc.at("result").at("iterations").get<int>(), 1);
}

TEST(Cli, SolveLengthMismatch) {
  const auto dir = workdir("mismatch");
  json cfg = toy_solve(dir / "out");
  cfg["signal"]["values"] = {1, 2, 3};
  const auto r = run({"solve", write_config(dir, "bad.json", cfg)});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
  const auto e = json::parse(r.err);
  EXPECT_EQ(e.at("error"), "dimension");
  EXPECT_EQ(e.at("expected").get<int>(), 1);
  EXPECT_EQ(e.at("actual").get<int>(), 3);
  EXPECT_FALSE(fs::exists(dir / "out"));
}

TEST(Cli, MalformedConfig) {
  const auto dir = workdir("malformed");
  demrep::write_text(dir / "broken.json", "{\"schemaVersion\": 1,");
  auto r = run({"solve", (dir / "broken.json").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(json::parse(r.err).at("error"), "config");

  json cfg = toy_solve(dir / "out");
  cfg["sovler"] = json::object();
  r = run({"solve", write_config(dir, "typo.json", cfg)});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(json::parse(r.err).at("message").get<std::string>().find("sovler"), std::string::npos);
}

TEST(Cli, OverridesApplyAfterParse) {
  const auto dir = workdir("override");
  const auto path = write_config(dir, "toy.json", toy_solve(dir / "out"));
  const auto r = run({"solve", path, "--set", "solver.maxIters=1", "--set", "writeRepresentation=false"});
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(fs::exists(dir / "out" / "x.bin"));
  EXPECT_EQ(run({"solve", path, "--set", "noequals"}).code, 1);
}

TEST(Cli, ApplyOverride) {
  json j = {{"a", {{"b", 1}}}};
  demrep::cli::apply_override(j, "a.b=2.5");
  demrep::cli::apply_override(j, "a.c.d=[1,2]");
  demrep::cli::apply_override(j, "name=plain text");
  EXPECT_EQ(j.at("a").at("b"), 2.5);
  EXPECT_EQ(j.at("a").at("c").at("d"), json::array({1, 2}));
  EXPECT_EQ(j.at("name"), "plain text");
  EXPECT_THROW(demrep::cli::apply_override(j, "a.b.x=1"), demrep::ConfigError);
}

TEST(Cli, FrameInfoParseval) {
  const auto dir = workdir("info_dft");
  json cfg = {{"schemaVersion", 1}, {"seed", 2}, {"frame", {{"family", "subsampled-dft"}, {"N", 128}, {"M", 64}}}};
  const auto r = run({"frame-info", write_config(dir, "f.json", cfg), "--out", (dir / "o").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = json::parse(demrep::read_text(dir / "o" / "frame_info.json"));
  EXPECT_NEAR(doc.at("A").get<double>(), 1.0, 1e-10);
  EXPECT_NEAR(doc.at("B").get<double>(), 1.0, 1e-10);
  EXPECT_EQ(doc.at("redundancy").get<double>(), 2.0);
  EXPECT_LE(doc.at("parsevalResidual").get<double>(), 1e-12);
}

TEST(Cli, FrameInfoGaussianFromEigenvalues) {
  const auto dir = workdir("info_gauss");
  json cfg = {{"schemaVersion", 1}, {"frame", {{"family", "gaussian"}, {"N", 64}, {"M", 32}, {"seed", 9}}}};
  const auto r = run({"frame-info", write_config(dir, "f.json", cfg), "--out", (dir / "o").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = json::parse(demrep::read_text(dir / "o" / "frame_info.json"));
  const auto f = demrep::build_frame(demrep::FrameFamily::Gaussian, 64, 32, 9);
  Eigen::SelfAdjointEigenSolver<demrep::ComplexMatrix> eig(f.matrix() * f.matrix().adjoint());
  EXPECT_NEAR(doc.at("A").get<double>(), eig.eigenvalues().minCoeff(), 1e-10);
  EXPECT_NEAR(doc.at("B").get<double>(), eig.eigenvalues().maxCoeff(), 1e-10);
  EXPECT_LT(doc.at("A").get<double>(), 1.0);
  EXPECT_GT(doc.at("B").get<double>(), 1.0);
}

TEST(Cli, FrameInfoUp) {
  const auto dir = workdir("info_up");
  json cfg = {{"schemaVersion", 1},
              {"frame", {{"family", "subsampled-dft"}, {"N", 12}, {"M", 6}, {"seed", 1}}},
              {"upDelta", 1.0 / 6.0}};
  auto r = run({"frame-info", write_config(dir, "f.json", cfg), "--out", (dir / "o").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto doc = json::parse(demrep::read_text(dir / "o" / "frame_info.json"));
  EXPECT_TRUE(doc.at("up").at("eta").is_number());
  EXPECT_EQ(doc.at("up").at("supportCount").get<double>(), 66.0);

  cfg["frame"] = {{"family", "subsampled-dft"}, {"N", 64}, {"M", 32}, {"seed", 1}};
  cfg["upDelta"] = 0.25;
  r = run({"frame-info", write_config(dir, "g.json", cfg), "--out", (dir / "o").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  doc = json::parse(demrep::read_text(dir / "o" / "frame_info.json"));
  EXPECT_EQ(doc.at("up").at("eta"), "refused");
  EXPECT_GT(doc.at("up").at("supportCount").get<double>(), 1e6);
}

TEST(Cli, PhaseDiagramDeterministicAndContained) {
  const auto dir = workdir("phase");
  json cfg = {{"schemaVersion", 1},
              {"kind", "phase-ku"},
              {"N", 16},
              {"M", {8, 16}},
              {"trials", 3},
              {"families", {"gaussian", "subsampled-dft"}},
              {"seed", 3},
              {"solver", {{"maxIters", 100000}}}};
  const auto path = write_config(dir, "phase.json", cfg);
  const auto a = run({"phase-diagram", path, "--out", (dir / "a").string(), "--threads", "2"});
  ASSERT_EQ(a.code, 0) << a.err;
  const auto b = run({"phase-diagram", path, "--out", (dir / "b").string(), "--threads", "1"});
  ASSERT_EQ(b.code, 0) << b.err;
  for (const char* f : {"trials.csv", "phase_grid.csv", "transition.csv"})
    EXPECT_EQ(demrep::read_text(dir / "a" / f), demrep::read_text(dir / "b" / f)) << f;
  EXPECT_EQ(std::count(a.out.begin(), a.out.end(), '\n'), 4);

  // Nothing outside the config file and the two output directories.
  const auto files = files_under(dir);
  for (const auto& f : files) {
    const bool ok = f == path || f.rfind((dir / "a").string(), 0) == 0 || f.rfind((dir / "b").string(), 0) == 0;
    EXPECT_TRUE(ok) << f;
  }

  // The manifest's config echo reproduces the run.
  const auto manifest = json::parse(demrep::read_text(dir / "a" / "manifest.json"));
  json echo = manifest.at("config");
  echo["output"] = (dir / "c").string();
  const auto c = run({"phase-diagram", write_config(dir, "echo.json", echo)});
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_EQ(demrep::read_text(dir / "a" / "trials.csv"), demrep::read_text(dir / "c" / "trials.csv"));
}

TEST(Cli, PhaseDiagramFailureBudgetExitsThree) {
  const auto dir = workdir("budget");
  json cfg = {{"schemaVersion", 1}, {"kind", "phase-papr"}, {"N", 16},         {"M", {8}},
              {"trials", 2},        {"families", {"gaussian"}}, {"solver", {{"maxIters", 1}}}};
  const auto r = run({"phase-diagram", write_config(dir, "p.json", cfg), "--out", (dir / "o").string()});
  EXPECT_EQ(r.code, 3);
  const auto manifest = json::parse(demrep::read_text(dir / "o" / "manifest.json"));
  EXPECT_FALSE(manifest.at("withinBudget").get<bool>());
  EXPECT_EQ(manifest.at("points").at(0).at("failures").get<int>(), 2);
}

TEST(Cli, ExperimentKindMustMatchSubcommand) {
  const auto dir = workdir("kind");
  json cfg = {{"schemaVersion", 1}, {"kind", "phase-ku"}, {"N", 8}, {"M", {4}}, {"trials", 1}};
  EXPECT_EQ(run({"ofdm-papr", write_config(dir, "p.json", cfg)}).code, 1);
}

TEST(Cli, SeedFromEnvironment) {
  const auto dir = workdir("env");
  json cfg = {{"schemaVersion", 1}, {"kind", "phase-papr"}, {"N", 16}, {"M", {8}},
              {"trials", 2},        {"families", {"subsampled-dft"}}, {"seed", 1}};
  const auto path = write_config(dir, "p.json", cfg);
  ASSERT_EQ(setenv("DEMREP_SEED", "77", 1), 0);
  const auto a = run({"phase-diagram", path, "--out", (dir / "a").string()});
  unsetenv("DEMREP_SEED");
  const auto b = run({"phase-diagram", path, "--out", (dir / "b").string(), "--set", "seed=77"});
  const auto c = run({"phase-diagram", path, "--out", (dir / "c").string()});
  ASSERT_EQ(a.code, 0);
  ASSERT_EQ(b.code, 0);
  ASSERT_EQ(c.code, 0);
  EXPECT_EQ(demrep::read_text(dir / "a" / "trials.csv"), demrep::read_text(dir / "b" / "trials.csv"));
  EXPECT_NE(demrep::read_text(dir / "a" / "trials.csv"), demrep::read_text(dir / "c" / "trials.csv"));
}

TEST(Cli, OfdmSmall) {
  const auto dir = workdir("ofdm");
  json cfg = {{"schemaVersion", 1}, {"kind", "ofdm-papr"}, {"N", 64}, {"usedCarriers", 48},
              {"reservedCount", 4}, {"qamOrder", 16},      {"trials", 4}};
  const auto r = run({"ofdm-papr", write_config(dir, "o.json", cfg), "--out", (dir / "o").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "o" / "ccdf.csv"));

  cfg["reservedCount"] = 0;
  const auto bad = run({"ofdm-papr", write_config(dir, "bad.json", cfg)});
  EXPECT_EQ(bad.code, 1);
}

TEST(Cli, ProxCheck) {
  const auto dir = workdir("prox");
  const auto r = run({"prox-check", "--out", (dir / "o").string(), "--set", "trials=200"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = json::parse(demrep::read_text(dir / "o" / "prox_check.json"));
  EXPECT_TRUE(doc.at("pass").get<bool>());
  EXPECT_LE(doc.at("maxAbsErrorInf").get<double>(), 1e-10);
  EXPECT_EQ(doc.at("trials").get<int>(), 200);
}
