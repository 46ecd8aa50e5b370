#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "thermobg/frame_io.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
};

const fs::path& workdir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("thermobg_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome cli(const std::string& args) {
  const fs::path log = workdir() / "last.log";
  const std::string cmd = std::string(THERMOBG_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(log)};
}

bool same_tree(const fs::path& a, const fs::path& b) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    if (!e.is_regular_file() || e.path().extension() != ".pgm") continue;
    ++n;
    if (slurp(e.path()) != slurp(b / e.path().filename())) return false;
  }
  return n > 0;
}

// Small scene shared by the tests below: 32x24, a bimodal corner and an
// object that moves through frames 105..124.
const fs::path& scene() {
  static const fs::path dir = [] {
    const fs::path sc = workdir() / "scene.txt";
    std::ofstream(sc) << "width = 32\nheight = 24\nframes = 130\nseed = 11\nbackground = 40 1.5\n"
                         "region = 0 0 6 6 60 2 90 2\nevent = 8 4 10 10 200 3 105 125 0.5 0\n";
    const fs::path out = workdir() / "scene";
    const auto r = cli("synth video --scenario " + sc.string() + " --out " + out.string());
    EXPECT_EQ(r.code, 0) << r.out;
    return out;
  }();
  return dir;
}

const fs::path& model() {
  static const fs::path path = [] {
    const fs::path m = workdir() / "model.vimm";
    const auto r = cli("fit --input " + (scene() / "frames").string() + " --out " + m.string() + " --quiet");
    EXPECT_EQ(r.code, 0) << r.out;
    return m;
  }();
  return path;
}

}  // namespace

TEST(CliFit, PrintsHistogramAndIsReproducible) {
  const fs::path again = workdir() / "model2.vimm";
  const auto r = cli("fit --input " + (scene() / "frames").string() + " --out " + again.string() + " --workers 3");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("components  pixels"), std::string::npos);
  EXPECT_EQ(slurp(again), slurp(model()));
  EXPECT_EQ(slurp(again).rfind("VIMM1 32 24 100 256", 0), 0u);
}

TEST(CliFit, TooFewFramesIsDataError) {
  const fs::path few = workdir() / "few";
  fs::create_directories(few);
  for (int i = 0; i < 50; ++i) fs::copy_file(scene() / "frames" / ("frame_0000" + std::string(i < 10 ? "0" : "") + std::to_string(i) + ".pgm"), few / ("f" + std::to_string(100 + i) + ".pgm"));
  const auto r = cli("fit --input " + few.string() + " --history 100 --out " + (workdir() / "x.vimm").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("50"), std::string::npos) << r.out;
}

TEST(CliRun, SegmentsTheMovingObject) {
  const fs::path out = workdir() / "masks";
  auto r = cli("run --model " + model().string() + " --input " + (scene() / "frames").string() + " --out " + out.string() +
               " --save-posterior");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(fs::exists(out / "manifest.json"));
  EXPECT_TRUE(fs::exists(out / "posterior" / "frame_000110.pgm"));
  const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  EXPECT_EQ(manifest["frames"], 130);

  r = cli("eval --pred " + out.string() + " --gt " + (scene() / "gt").string());
  ASSERT_EQ(r.code, 0) << r.out;
  const auto report = nlohmann::json::parse(r.out);
  EXPECT_GE(report["f1"].get<double>(), 0.9) << r.out.substr(0, 400);
  EXPECT_EQ(report["frames_evaluated"], 130);
}

TEST(CliRun, WorkerCountDoesNotChangeOutput) {
  const fs::path a = workdir() / "w1";
  const fs::path b = workdir() / "w8";
  const std::string common = "run --model " + model().string() + " --input " + (scene() / "frames").string() + " --skip 90";
  ASSERT_EQ(cli(common + " --workers 1 --out " + a.string() + " --save-model " + (a.string() + ".vimm")).code, 0);
  ASSERT_EQ(cli(common + " --workers 8 --out " + b.string() + " --save-model " + (b.string() + ".vimm")).code, 0);
  EXPECT_TRUE(same_tree(a, b));
  EXPECT_EQ(slurp(a.string() + ".vimm"), slurp(b.string() + ".vimm"));
  EXPECT_NE(slurp(a.string() + ".vimm"), slurp(model()));
}

TEST(CliRun, FreezeLeavesStaticSceneMasksConstant) {
  const fs::path in = workdir() / "static";
  fs::create_directories(in);
  for (int i = 0; i < 5; ++i) fs::copy_file(scene() / "frames" / "frame_000110.pgm", in / ("s" + std::to_string(i) + ".pgm"));
  const fs::path out = workdir() / "frozen";
  ASSERT_EQ(cli("run --freeze --model " + model().string() + " --input " + in.string() + " --out " + out.string()).code, 0);
  const std::string first = slurp(out / "s0.pgm");
  for (int i = 1; i < 5; ++i) EXPECT_EQ(slurp(out / ("s" + std::to_string(i) + ".pgm")), first);
  EXPECT_GT(thermobg::read_mask(out / "s0.pgm").foreground_count(), 50u);
}

TEST(CliEval, MissingPredictionsAreNamed) {
  const fs::path pred = workdir() / "partial";
  fs::create_directories(pred);
  fs::copy_file(scene() / "gt" / "frame_000000.pgm", pred / "frame_000000.pgm");
  const auto r = cli("eval --pred " + pred.string() + " --gt " + (scene() / "gt").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("frame_000129.pgm"), std::string::npos);
}

TEST(CliEval, SubsampleIsSeeded) {
  const std::string args = "eval --pred " + (scene() / "gt").string() + " --gt " + (scene() / "gt").string() + " --subsample 7 --seed 4";
  const auto a = cli(args);
  ASSERT_EQ(a.code, 0) << a.out;
  EXPECT_EQ(cli(args).out, a.out);
  EXPECT_EQ(nlohmann::json::parse(a.out)["frames_evaluated"], 7);
}

TEST(CliSynth, FitDemoRecoversThreeComponents) {
  const fs::path csv = workdir() / "fit.csv";
  const auto r = cli("synth fit-demo --out " + csv.string());
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("recovered K=3"), std::string::npos) << r.out;
  EXPECT_EQ(slurp(csv).rfind("stage,row,component,x,density,weight,mean,variance\n", 0), 0u);
}

TEST(CliSynth, UpdateDemoStages) {
  const fs::path csv = workdir() / "update.csv";
  const auto r = cli("synth update-demo --out " + csv.string());
  ASSERT_EQ(r.code, 0) << r.out;
  const std::string text = slurp(csv);
  for (const char* stage : {"\nt0,", "\nt25,", "\nt50,"}) EXPECT_NE(text.find(stage), std::string::npos) << stage;
}

TEST(CliBench, ReportsThroughput) {
  const auto r = cli("bench --size 16x12 --frames 5 --history 20 --kmax 5");
  ASSERT_EQ(r.code, 0) << r.out;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_GT(j["fps"].get<double>(), 0.0);
}

TEST(CliExitCodes, UsageAndData) {
  EXPECT_EQ(cli("").code, 1);
  EXPECT_EQ(cli("frobnicate").code, 1);
  EXPECT_EQ(cli("run --model x").code, 1);
  EXPECT_EQ(cli("fit --input /nonexistent --out /tmp/x.vimm").code, 2);
  EXPECT_EQ(cli("fit --input " + (scene() / "frames").string() + " --raw 32by24 --out /tmp/x.vimm").code, 1);
}
