#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <set>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include "test_support.hpp"
#include "vitalsel/evalproto/split.hpp"
#include "vitalsel/fitness/fitness.hpp"
#include "vitalsel/io.hpp"

using namespace vitalsel;
namespace fs = std::filesystem;

namespace {

const std::string kCli = VITALSEL_CLI_PATH;

int run(const std::string& args, const fs::path& err = {})
{
    std::string cmd = "'" + kCli + "' " + args + " > /dev/null";
    cmd += err.empty() ? " 2>/dev/null" : " 2>'" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p)
{
    return io::read_text(p);
}

std::string q(const fs::path& p)
{
    return "'" + p.string() + "'";
}

// One small cohort shared by every test in the suite.
class Cli : public ::testing::Test {
protected:
    static inline fs::path root;
    static inline fs::path data_dir;
    static inline fs::path features;

    static void SetUpTestSuite()
    {
        root = fs::temp_directory_path() / ("vitalsel_cli_" + std::to_string(::getpid()));
        fs::remove_all(root);
        fs::create_directories(root);
        io::write_json(root / "synth.json", {{"seed", 11}, {"n_subjects", 10}});
        data_dir = root / "data";
        ASSERT_EQ(run("--out " + q(data_dir) + " synth " + q(root / "synth.json")), 0);
        ASSERT_EQ(run("--out " + q(root) + " extract " + q(data_dir) + " --threads 2"), 0);
        features = root / "features.csv";
    }

    static void TearDownTestSuite() { fs::remove_all(root); }

    static fs::path fresh(const std::string& name)
    {
        auto p = root / name;
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }
};

} // namespace

TEST_F(Cli, SynthWritesOneFilePerSessionAndIsRepeatable)
{
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(data_dir / "sessions")) {
        n += e.is_regular_file() ? 1 : 0;
    }
    EXPECT_EQ(n, 80u);
    const auto again = fresh("synth_again");
    ASSERT_EQ(run("--out " + q(again) + " synth " + q(root / "synth.json")), 0);
    EXPECT_EQ(slurp(again / "manifest.json"), slurp(data_dir / "manifest.json"));
    EXPECT_EQ(slurp(again / "sessions" / "s007_apnea_lying.csv"), slurp(data_dir / "sessions" / "s007_apnea_lying.csv"));
}

TEST_F(Cli, OutputDirectoryFromEnvironment)
{
    const auto dir = fresh("env_out");
    io::write_json(root / "tiny.json", {{"seed", 2}, {"n_subjects", 1}, {"duration_s", 10.0}});
    const std::string cmd = "VITALSEL_OUT_DIR=" + q(dir) + " '" + kCli + "' synth " + q(root / "tiny.json") + " > /dev/null";
    ASSERT_EQ(std::system(cmd.c_str()), 0);
    EXPECT_TRUE(fs::exists(dir / "manifest.json"));
}

TEST_F(Cli, ExtractShapeAndRepeatability)
{
    const auto fm = io::read_feature_csv(features);
    EXPECT_EQ(fm.rows(), 80u * 21u);
    EXPECT_EQ(fm.cols(), 189u);
    const auto text = slurp(features);
    EXPECT_EQ(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(text.find('\n')), ','), 191);
    const auto again = fresh("extract_again");
    ASSERT_EQ(run("--out " + q(again) + " extract " + q(data_dir) + " -o f.csv"), 0);
    EXPECT_EQ(slurp(again / "f.csv"), text);
}

TEST_F(Cli, SelectIsDeterministicAcrossThreads)
{
    const std::string args = " select " + q(features) + " --seed 5 --pop-size 8 --generations 2 --trees 10 --identification-trees 10";
    const auto a = fresh("sel_a");
    const auto b = fresh("sel_b");
    ASSERT_EQ(run("--out " + q(a) + args + " --telemetry " + q(a / "t.jsonl")), 0);
    ASSERT_EQ(run("--out " + q(b) + args + " --threads 2 --telemetry " + q(b / "t.jsonl")), 0);
    EXPECT_EQ(slurp(a / "archive.json"), slurp(b / "archive.json"));
    EXPECT_EQ(slurp(a / "selected_mask.json"), slurp(b / "selected_mask.json"));
    EXPECT_EQ(slurp(a / "t.jsonl"), slurp(b / "t.jsonl"));
    const auto tele = slurp(a / "t.jsonl");
    EXPECT_EQ(std::count(tele.begin(), tele.end(), '\n'), 3);
    const auto archive = io::read_json(a / "archive.json");
    EXPECT_GE(archive["size"].get<int>(), 1);
    EXPECT_EQ(archive["members"][0]["catalog_size"], 189);
}

TEST_F(Cli, DownstreamCommandsRun)
{
    const auto dir = fresh("pipeline");
    const std::string model = q(features) + " --seed 3 --trees 10 --identification-trees 10 --stride 3";
    ASSERT_EQ(run("--out " + q(dir) + " select " + model + " --pop-size 6 --generations 1 --surrogate"), 0);
    ASSERT_EQ(run("--out " + q(dir) + " rfe " + model + " --n-target 20 --step 20"), 0);
    EXPECT_EQ(io::read_json(dir / "rfe_mask.json")["mask"]["count"], 20);

    ASSERT_EQ(run("--out " + q(dir) + " evaluate " + model + " --mask " + q(dir / "selected_mask.json") + " --repeats 2"), 0);
    const auto rep = io::read_json(dir / "report.json");
    EXPECT_EQ(rep["repeats"], 2);
    EXPECT_FALSE(rep.contains("wall_seconds"));
    EXPECT_TRUE(fs::exists(dir / "identification_confusion.csv"));
    EXPECT_EQ(slurp(dir / "recognition_confusion.csv").substr(0, 10), "truth\\pred");

    ASSERT_EQ(run("--out " + q(dir) + " evaluate " + model + " --protocol loso"), 0);
    EXPECT_EQ(io::read_json(dir / "report.json")["runs"].size(), 10u);

    ASSERT_EQ(run("--out " + q(dir) + " compare " + model + " --mo-mask " + q(dir / "selected_mask.json") + " --rfe-mask " +
                  q(dir / "rfe_mask.json") + " --protocol split"),
              0);
    const auto cmp = slurp(dir / "comparison.csv");
    EXPECT_EQ(std::count(cmp.begin(), cmp.end(), '\n'), 4);
    EXPECT_NE(cmp.find("\nrfe,20,"), std::string::npos);

    ASSERT_EQ(run("--out " + q(dir) + " importance " + model + " --top 5"), 0);
    const auto imp = slurp(dir / "importance.csv");
    EXPECT_EQ(std::count(imp.begin(), imp.end(), '\n'), 11);
}

TEST_F(Cli, SweepRuns)
{
    const auto dir = fresh("sweep");
    ASSERT_EQ(run("--out " + q(dir) + " sweep " + q(features) +
                  " --seed 1 --pop-sizes 4 --gen-counts 1 --repeats 1 --trees 5 --identification-trees 5 --stride 4"),
              0);
    const auto csv = slurp(dir / "sweep.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
}

TEST_F(Cli, ErrorsAndExitCodes)
{
    const auto dir = fresh("errors");
    EXPECT_EQ(run("--out " + q(dir) + " select " + q(features) + " --pop-size 4 --generations 1"), 1);
    EXPECT_EQ(run("--out " + q(dir) + " evaluate " + q(features)), 1);
    EXPECT_EQ(run("select " + q(features) + " --seed 1 --no-such-flag"), 1);
    EXPECT_EQ(run(""), 1);
    EXPECT_EQ(run("--out " + q(dir) + " rfe " + q(features) + " --seed 1"), 1);
    EXPECT_EQ(run("--out " + q(dir) + " extract " + q(dir)), 2);

    io::write_json(root / "noseed.json", {{"n_subjects", 2}});
    EXPECT_EQ(run("--out " + q(dir) + " synth " + q(root / "noseed.json")), 2);

    io::write_json(dir / "bad_mask.json", {{"features", {"chest_mean", "not_a_feature", "also_missing"}}});
    const auto err = dir / "stderr.txt";
    EXPECT_EQ(run("--out " + q(dir) + " evaluate " + q(features) + " --seed 1 --mask " + q(dir / "bad_mask.json"), err), 2);
    const auto msg = slurp(err);
    EXPECT_NE(msg.find("not_a_feature"), std::string::npos);
    EXPECT_NE(msg.find("also_missing"), std::string::npos);
}

// With a 12-feature catalog every mask can be scored, so the archive can be
// checked against the true Pareto set of the same fitness.
TEST_F(Cli, ToyArchiveLiesOnTheParetoSet)
{
    testsupport::ToySpec spec;
    spec.act_cols = 4;
    spec.id_cols = 4;
    spec.noise_cols = 4;
    spec.rows_per_cell = 4;
    spec.seed = 8;
    const auto toy = testsupport::toy_dataset(spec);
    const auto dir = fresh("toy");
    io::write_feature_csv(dir / "toy.csv", toy);
    ASSERT_EQ(run("--out " + q(dir) + " select " + q(dir / "toy.csv") + " --seed 9 --classifier knn --pop-size 50 --generations 50"), 0);

    const auto data = io::read_feature_csv(dir / "toy.csv");
    auto o = fitness_options(ObjectiveMode::SuppressIdentity);
    o.recognition.kind = ClassifierKind::Knn;
    o.identification.kind = ClassifierKind::Knn;
    const auto subjects = data.subjects();
    const int n = static_cast<int>(subjects.size());
    const auto split = split_subjects(subjects, 9, {n - 8, 4, 4});
    const auto ctx = FitnessContext::build(data, split, Stage::Selection, o);

    std::vector<Objectives> all;
    for (std::uint64_t code = 1; code < (1u << 12); ++code) {
        all.push_back(evaluate(FeatureMask::from_bits(code, 12), ctx));
    }
    const auto archive = io::read_json(dir / "archive.json");
    ASSERT_GE(archive["members"].size(), 1u);
    for (const auto& m : archive["members"]) {
        const auto mask = io::mask_from_json(m, data.names());
        const auto obj = evaluate(mask, ctx);
        EXPECT_EQ(m["objectives"].get<Objectives>(), obj);
        for (const auto& other : all) {
            ASSERT_FALSE(dominates(other, obj)) << mask.to_string();
        }
    }
}
