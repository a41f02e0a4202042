#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "xspec/io.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string err;
};

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("xspec_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

Result run(const std::string& args, const fs::path& dir) {
    const fs::path err = dir / "stderr.txt";
    const std::string cmd = std::string(XSPEC_CLI_PATH) + " " + args + " > " + (dir / "stdout.txt").string() +
                            " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = fs::exists(err) ? xspec::read_file(err) : "";
    return r;
}

const char* kSynth = "synth --subjects 6 --image-size 24 --seed 4 --set images_per_condition=1 --set noise_std=0.005";
const char* kPre = "preprocess --patch 12 --stride 12 --normalize zero_mean_unit_var";
const char* kModel = "--arch 4,M,8 --set lr=0.001 --batch 8 --set genuine_pairs=same_capture";

// synth -> preprocess -> train -> embed -> eval-cmc inside `dir`.
void pipeline(const fs::path& dir) {
    const std::string d = dir.string();
    ASSERT_EQ(run(std::string(kSynth) + " --out " + d + "/raw", dir).code, 0);
    ASSERT_EQ(run(std::string(kPre) + " --in " + d + "/raw --out " + d + "/patches", dir).code, 0);
    const Result t = run("train --data " + d + "/patches --out " + d + "/model.ckpt --epochs 2 " + kModel, dir);
    ASSERT_EQ(t.code, 0) << t.err;
    ASSERT_EQ(run("embed --ckpt " + d + "/model.ckpt --data " + d + "/patches --out " + d + "/emb.csv", dir).code, 0);
    const Result e = run("eval-cmc --ckpt " + d + "/model.ckpt --data " + d + "/patches --out " + d +
                             "/report --trials 2 --train-subjects 3 --set epochs=1 --set lr=0.001 --set batch=8",
                         dir);
    ASSERT_EQ(e.code, 0) << e.err;
}

}  // namespace

TEST(Cli, HelpAndMissingSubcommand) {
    const fs::path dir = scratch("help");
    EXPECT_EQ(run("--help", dir).code, 0);
    EXPECT_NE(run("", dir).code, 0);
}

TEST(Cli, PipelineIsByteReproducible) {
    const fs::path a = scratch("pipe_a"), b = scratch("pipe_b");
    pipeline(a);
    pipeline(b);
    for (const char* f : {"model.ckpt", "model.train_log.csv", "emb.csv", "report/cmc.csv", "report/rank1.json",
                          "report/table.txt", "report/resolved_config.json", "patches/polarimetric.xspt",
                          "raw/manifest.csv"}) {
        ASSERT_TRUE(fs::exists(a / f)) << f;
        EXPECT_EQ(xspec::read_file(a / f), xspec::read_file(b / f)) << f;
    }
    const std::string cmc = xspec::read_file(a / "report/cmc.csv");
    EXPECT_EQ(cmc.rfind("rank,rate\n", 0), 0u);
    EXPECT_NE(cmc.find("\n3,1\n"), std::string::npos);
    const std::string log = xspec::read_file(a / "model.train_log.csv");
    EXPECT_EQ(std::count(log.begin(), log.end(), '\n'), 3);
    const std::string echoed = xspec::read_file(a / "model.config.json");
    EXPECT_NE(echoed.find("\"architecture\": \"4,M,8\""), std::string::npos);
    EXPECT_NE(echoed.find("\"rng_algorithm\""), std::string::npos);

    // An echoed config reproduces the run.
    const fs::path c = scratch("pipe_c");
    const Result r = run("train --data " + (a / "patches").string() + " --out " + (c / "model.ckpt").string() +
                             " --config " + (a / "model.config.json").string(),
                         c);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(xspec::read_file(c / "model.train_log.csv"), log);
}

TEST(Cli, ConventionIsEchoed) {
    const fs::path dir = scratch("conv");
    const std::string d = dir.string();
    ASSERT_EQ(run(std::string(kSynth) + " --out " + d + "/raw", dir).code, 0);
    ASSERT_EQ(run(std::string(kPre) + " --convention as_written --in " + d + "/raw --out " + d + "/p", dir).code, 0);
    EXPECT_NE(xspec::read_file(dir / "p/resolved_config.json").find("\"convention\": \"as_written\""),
              std::string::npos);
}

TEST(Cli, ErrorKindsMapToExitCodes) {
    const fs::path dir = scratch("errors");
    const std::string d = dir.string();
    ASSERT_EQ(run(std::string(kSynth) + " --out " + d + "/raw", dir).code, 0);
    ASSERT_EQ(run(std::string(kPre) + " --in " + d + "/raw --out " + d + "/p", dir).code, 0);

    Result r = run("eval-cmc --data " + d + "/p --out " + d + "/r --trials 1 --train-subjects 0", dir);
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("xspec: error kind=config"), std::string::npos) << r.err;

    r = run("eval-cmc --data " + d + "/p --out " + d + "/r --trials 1 --train-subjects 6 --no-finetune", dir);
    EXPECT_EQ(r.code, 2);

    r = run("synth --out " + d + "/x --set no_such_key=1", dir);
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("no_such_key"), std::string::npos);

    r = run("preprocess --in " + d + "/does_not_exist --out " + d + "/q", dir);
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("kind=io"), std::string::npos);

    xspec::write_file(dir / "bad.ckpt", "not a checkpoint");
    r = run("embed --ckpt " + d + "/bad.ckpt --data " + d + "/p --out " + d + "/e.csv", dir);
    EXPECT_EQ(r.code, 5);
    EXPECT_NE(r.err.find("kind=format"), std::string::npos);
}

TEST(Cli, ThermalProbesAndUntrainedEval) {
    const fs::path dir = scratch("thermal");
    const std::string d = dir.string();
    ASSERT_EQ(run(std::string(kSynth) + " --out " + d + "/raw", dir).code, 0);
    ASSERT_EQ(run(std::string(kPre) + " --in " + d + "/raw --out " + d + "/p", dir).code, 0);
    const Result r = run("eval-cmc --data " + d + "/p --out " + d + "/r --trials 2 --train-subjects 3 --no-finetune "
                         "--probe-input thermal_s0 --set architecture=4,M,8",
                         dir);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(xspec::read_file(dir / "r/table.txt").find("thermal_s0"), std::string::npos);
}
