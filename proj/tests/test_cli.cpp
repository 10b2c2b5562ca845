// Copyright 2026 The segpipe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "../tools/cli.hpp"
#include "segpipe/config.hpp"
#include "segpipe/dataset.hpp"
#include "segpipe/image.hpp"
#include "segpipe/palette.hpp"
#include "segpipe/report.hpp"
#include "testutil.hpp"

using namespace segpipe;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "segpipe");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

// Every regular file under root, keyed by relative path.
std::map<std::string, std::string> snapshot(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = slurp(e.path());
    }
    return files;
}

}  // namespace

TEST(Cli, VersionAndHelp) {
    const auto v = run({"--version"});
    EXPECT_EQ(v.code, cli::kOk);
    EXPECT_NE(v.out.find("segpipe"), std::string::npos);
    EXPECT_EQ(run({"--help"}).code, cli::kOk);
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run({"frobnicate"}).code, cli::kUsage);
    EXPECT_EQ(run({"gen", "--no-such-flag"}).code, cli::kUsage);
    EXPECT_EQ(run({}).code, cli::kUsage);
    const auto r = run({"cluster", "--input", "a.ppm", "--out", "m.km"});
    EXPECT_EQ(r.code, cli::kUsage);
    EXPECT_NE(r.err.find("--k"), std::string::npos) << r.err;
    EXPECT_EQ(run({"train", "--optimizer", "rmsprop", "--print-config"}).code, cli::kUsage);
    EXPECT_EQ(run({"--simd", "sse9", "gen"}).code, cli::kUsage);
}

// Each subcommand's help lists its flags with their defaults.
TEST(Cli, SubcommandHelpShowsDefaults) {
    const std::vector<std::pair<std::string, std::vector<std::string>>> cases{
        {"gen", {"--count", "8", "--width", "32", "--seed", "42"}},
        {"train", {"--epochs", "100", "--batch-size", "2", "--optimizer", "adam", "--checkpoint", "model.segm"}},
        {"labelgen", {"--k", "12", "--max-iters", "100"}},
        {"split", {"--ratio", "0.8"}},
        {"bench", {"--warmup", "10", "--repeats", "3"}},
        {"eval", {"--audit-tolerance", "0.05", "--classes", "12"}},
        {"cluster", {"--k", "--tol", "0.5"}},
        {"recolor", {"--source", "palette"}},
        {"augment", {"--ops"}},
        {"infer", {"--input", "--out"}},
    };
    for (const auto& [cmd, needles] : cases) {
        const auto r = run({cmd, "--help"});
        EXPECT_EQ(r.code, cli::kOk) << cmd;
        for (const auto& n : needles) EXPECT_NE(r.out.find(n), std::string::npos) << cmd << " help lacks " << n;
    }
}

TEST(Cli, EmptyConfigGivesDefaults) {
    testutil::TempDir dir("cli");
    spit(dir / "c.json", "{}");
    const auto r = run({"--config", (dir / "c.json").string(), "--print-config"});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    EXPECT_EQ(r.out, config_to_json(PipelineConfig{}));
}

TEST(Cli, FlagsOverrideConfig) {
    testutil::TempDir dir("cli");
    spit(dir / "c.json", R"({"epochs": 50, "seed": 3})");
    const std::string cfg = (dir / "c.json").string();
    auto from_file = apply_config_json(run({"--config", cfg, "--print-config"}).out);
    EXPECT_EQ(from_file.epochs, 50u);
    auto r = run({"--config", cfg, "--print-config", "train", "--epochs", "10"});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    const auto resolved = apply_config_json(r.out);
    EXPECT_EQ(resolved.epochs, 10u);
    EXPECT_EQ(resolved.seed, 3u);
}

TEST(Cli, UnknownConfigKeyIsNamed) {
    testutil::TempDir dir("cli");
    spit(dir / "c.json", R"({"epochz": 5})");
    const auto r = run({"--config", (dir / "c.json").string(), "--print-config"});
    EXPECT_EQ(r.code, cli::kUsage);
    EXPECT_NE(r.err.find("epochz"), std::string::npos) << r.err;
    spit(dir / "d.json", R"({"epochs": "many"})");
    EXPECT_EQ(run({"--config", (dir / "d.json").string(), "--print-config"}).code, cli::kUsage);
}

TEST(Cli, MissingInputIsDataError) {
    testutil::TempDir dir("cli");
    const auto r = run({"cluster", "--input", (dir / "none.ppm").string(), "--k", "3", "--out", (dir / "m.km").string()});
    EXPECT_EQ(r.code, cli::kData);
    EXPECT_NE(r.err.find("none.ppm"), std::string::npos);
}

TEST(Cli, GenIsDeterministic) {
    testutil::TempDir a("cli"), b("cli");
    for (const auto* d : {&a, &b}) {
        ASSERT_EQ(run({"gen", "--data-dir", d->path().string(), "--count", "3", "--width", "16", "--height", "16"}).code,
                  cli::kOk);
    }
    const auto sa = snapshot(a.path());
    EXPECT_EQ(sa, snapshot(b.path()));
    EXPECT_EQ(sa.count("images/scene_002.ppm"), 1u);
    EXPECT_EQ(sa.count("truth/scene_000.pgm"), 1u);
    EXPECT_EQ(sa.count("palette.csv"), 1u);
}

TEST(Cli, ClusterWritesModel) {
    testutil::TempDir dir("cli");
    auto [img, labels] = generate_synthetic_scene(32, 32, 1, Palette::street12());
    save_image(img, dir / "a.ppm");
    const auto r = run({"cluster", "--input", (dir / "a.ppm").string(), "--k", "4", "--seed", "7", "--out",
                        (dir / "model.km").string(), "--labels-out", (dir / "l.pgm").string()});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    EXPECT_NE(r.out.find("inertia"), std::string::npos);
    const std::string model = slurp(dir / "model.km");
    EXPECT_EQ(model.rfind("4 7 ", 0), 0u) << model;
    EXPECT_EQ(load_labels(dir / "l.pgm").width, 32u);
    // Same flags, same bytes.
    run({"cluster", "--input", (dir / "a.ppm").string(), "--k", "4", "--seed", "7", "--out", (dir / "again.km").string()});
    EXPECT_EQ(slurp(dir / "again.km"), model);
}

TEST(Cli, EvalPredTruthReport) {
    testutil::TempDir dir("cli");
    fs::create_directories(dir / "pred");
    fs::create_directories(dir / "truth");
    for (int i = 0; i < 3; ++i) {
        auto labels = generate_synthetic_scene(32, 32, i, Palette::street12()).second;
        save_labels(labels, dir / ("truth/s" + std::to_string(i) + ".pgm"));
        labels.labels[0] = static_cast<std::uint8_t>((labels.labels[0] + 1) % 12);
        save_labels(labels, dir / ("pred/s" + std::to_string(i) + ".pgm"));
    }
    const auto r = run({"eval", "--pred", (dir / "pred").string(), "--truth", (dir / "truth").string(), "--classes",
                        "12", "--report", (dir / "out.csv").string()});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    const Report rep = parse_report_csv(slurp(dir / "out.csv"));
    EXPECT_EQ(rep.rows.size(), 12u);
    ASSERT_TRUE(rep.summary_value("mean_iou").has_value());
    EXPECT_GT(*rep.summary_value("mean_iou"), 0.9);
    EXPECT_NE(r.out.find("mean_iou"), std::string::npos);
}

TEST(Cli, EvalCountsAudit) {
    testutil::TempDir dir("cli");
    spit(dir / "c.csv", "class,tp,fp,fn,printed_iou\n1,4,0,2,0.6\n2,3,2,0,0.6\n");
    const auto r = run({"eval", "--counts", (dir / "c.csv").string(), "--audit", (dir / "audit.csv").string()});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    const std::string audit = slurp(dir / "audit.csv");
    EXPECT_EQ(audit.rfind("class,name,tp,fp,fn,iou_computed,iou_printed,consistent\n", 0), 0u);
    EXPECT_NE(r.out.find("1 printed values inconsistent"), std::string::npos) << r.out;
}

TEST(Cli, DivergedTrainingExitCode) {
    testutil::TempDir dir("cli");
    const std::string d = dir.path().string();
    ASSERT_EQ(run({"gen", "--data-dir", d, "--count", "2", "--width", "16", "--height", "16"}).code, cli::kOk);
    fs::rename(dir / "truth", dir / "labels");
    const auto r = run({"train", "--data-dir", d, "--epochs", "20", "--optimizer", "sgd", "--lr", "1e30", "--widths",
                        "4,8", "--checkpoint", (dir / "m.segm").string()});
    EXPECT_EQ(r.code, cli::kDiverged) << r.err;
    EXPECT_NE(r.err.find("diverged"), std::string::npos);
}

TEST(Cli, PipelineIsReproducible) {
    testutil::TempDir a("cli"), b("cli");
    for (const auto* dir : {&a, &b}) {
        const std::string d = dir->path().string();
        const std::string ck = (dir->path() / "m.segm").string();
        ASSERT_EQ(run({"gen", "--data-dir", d, "--count", "4", "--width", "16", "--height", "16"}).code, cli::kOk);
        ASSERT_EQ(run({"labelgen", "--data-dir", d, "--k", "12"}).code, cli::kOk);
        ASSERT_EQ(run({"split", "--data-dir", d}).code, cli::kOk);
        const auto t = run({"train", "--data-dir", d, "--epochs", "3", "--widths", "4,8", "--checkpoint", ck,
                            "--report", (dir->path() / "train.csv").string()});
        ASSERT_EQ(t.code, cli::kOk) << t.err;
        ASSERT_EQ(run({"eval", "--data-dir", d, "--checkpoint", ck, "--report", (dir->path() / "eval.json").string()})
                      .code,
                  cli::kOk);
        ASSERT_EQ(run({"infer", "--checkpoint", ck, "--input", d + "/images/scene_000.ppm", "--out",
                       (dir->path() / "p.pgm").string(), "--color", (dir->path() / "p.ppm").string()})
                      .code,
                  cli::kOk);
    }
    EXPECT_EQ(snapshot(a.path()), snapshot(b.path()));
}
