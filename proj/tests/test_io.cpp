#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include <unistd.h>

#include "test_support.hpp"
#include "vitalsel/io.hpp"
#include "vitalsel/sigsynth.hpp"

using namespace vitalsel;
using namespace vitalsel::io;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir()
    {
        static int counter = 0;
        path = fs::temp_directory_path() / ("vitalsel_io_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

bool same_bits(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        return false;
    }
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double x = a.data()[i];
        const double y = b.data()[i];
        if (!(x == y || (std::isnan(x) && std::isnan(y)))) {
            return false;
        }
    }
    return true;
}

} // namespace

TEST(FormatDouble, RoundTripsExactly)
{
    auto rng = make_rng(12, {});
    for (int i = 0; i < 2000; ++i) {
        const double v = gaussian(rng) * std::pow(10.0, uniform(rng, -30.0, 30.0));
        EXPECT_EQ(parse_double(format_double(v)), v);
    }
    EXPECT_TRUE(std::isnan(parse_double(format_double(std::nan("")))));
    EXPECT_EQ(parse_double(format_double(-std::numeric_limits<double>::infinity())), -std::numeric_limits<double>::infinity());
    EXPECT_THROW(parse_double("1.5x"), DataError);
    EXPECT_THROW(parse_double(""), DataError);
}

TEST(Sessions, DatasetRoundTrip)
{
    TempDir tmp;
    const auto records = synthesize_dataset(9, 2, std::vector<Activity>{Activity::Normal, Activity::Apnea},
                                            std::vector<Position>{Position::Lying}, 5.0, 20.0);
    write_dataset(tmp.path, records, nlohmann::json{{"seed", 9}});
    EXPECT_TRUE(fs::exists(tmp.path / "sessions" / "s001_normal_lying.csv"));
    const auto back = read_dataset(tmp.path);
    ASSERT_EQ(back.size(), records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        EXPECT_EQ(back[i].labels, records[i].labels);
        EXPECT_EQ(back[i].seed, records[i].seed);
        EXPECT_EQ(back[i].sample_rate_hz, records[i].sample_rate_hz);
        EXPECT_EQ(back[i].channels, records[i].channels);
    }
    EXPECT_EQ(read_json(tmp.path / "manifest.json")["config"]["seed"], 9);
}

TEST(Sessions, Errors)
{
    TempDir tmp;
    EXPECT_THROW(read_dataset(tmp.path), DataError);
    const RowLabels l{1, Activity::Normal, Position::Sitting};
    EXPECT_THROW(parse_session_csv("a,b,c,d\n0,1,2,3\n", l, 20.0, 0, "x"), DataError);
    EXPECT_THROW(parse_session_csv("t,chest,respiration,cardiac\n0,1,2\n", l, 20.0, 0, "x"), DataError);
    EXPECT_THROW(parse_session_csv("t,chest,respiration,cardiac\n0,1,nan,3\n", l, 20.0, 0, "x"), DataError);
    EXPECT_THROW(parse_session_csv("t,chest,respiration,cardiac\n", l, 20.0, 0, "x"), DataError);
    const auto ok = parse_session_csv("t,chest,respiration,cardiac\r\n0,1,2,3\r\n0.05,4,5,6\r\n", l, 20.0, 0, "x");
    EXPECT_EQ(ok.size(), 2u);
    EXPECT_EQ(ok.channel(Channel::Cardiac)[1], 6.0);
}

TEST(FeatureCsv, LosslessRoundTrip)
{
    auto m = testsupport::toy_dataset();
    m.values()(0, 0) = std::numeric_limits<double>::quiet_NaN();
    m.values()(1, 1) = 1e-300;
    const auto text = feature_csv(m);
    const auto back = parse_feature_csv(text);
    EXPECT_EQ(back.names(), m.names());
    EXPECT_EQ(back.labels(), m.labels());
    EXPECT_TRUE(same_bits(back.values(), m.values()));
    EXPECT_EQ(feature_csv(back), text);

    TempDir tmp;
    write_feature_csv(tmp.path / "f.csv", m);
    EXPECT_EQ(feature_csv(read_feature_csv(tmp.path / "f.csv")), text);
}

TEST(FeatureCsv, Errors)
{
    EXPECT_THROW(parse_feature_csv(""), DataError);
    EXPECT_THROW(parse_feature_csv("a,b,c\n"), DataError);
    EXPECT_THROW(parse_feature_csv("f,subject,activity,position\n1,2,normal\n"), DataError);
    EXPECT_THROW(parse_feature_csv("f,subject,activity,position\n1,2,jogging,sitting\n"), DataError);
    EXPECT_THROW(parse_feature_csv("f,subject,activity,position\nx,2,normal,sitting\n"), DataError);
    EXPECT_THROW(read_feature_csv("/nonexistent/vitalsel.csv"), DataError);
}

TEST(MaskJson, RoundTrip)
{
    const std::vector<std::string> names{"a", "b", "c", "d", "e"};
    auto rng = make_rng(3, {});
    for (int t = 0; t < 50; ++t) {
        FeatureMask m(names.size());
        for (std::size_t j = 0; j < names.size(); ++j) {
            m.set(j, uniform01(rng) < 0.5);
        }
        const auto j = mask_json(m, names);
        EXPECT_EQ(j["count"], m.count());
        EXPECT_EQ(j["catalog_size"], 5);
        EXPECT_EQ(mask_from_json(nlohmann::json::parse(j.dump()), names), m);
    }
}

TEST(MaskJson, UnknownFeaturesAreListed)
{
    const std::vector<std::string> names{"a", "b"};
    try {
        (void)mask_from_json(nlohmann::json{{"features", {"a", "zz", "yy"}}}, names);
        FAIL();
    } catch (const DataError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("zz"), std::string::npos);
        EXPECT_NE(msg.find("yy"), std::string::npos);
    }
    EXPECT_THROW(mask_from_json(nlohmann::json::object(), names), DataError);
    EXPECT_THROW(mask_json(FeatureMask(3), names), InvalidArgument);
}

TEST(ArchiveJson, MembersAndTelemetry)
{
    ParetoArchive archive;
    Individual ind;
    ind.mask = FeatureMask::from_string("101");
    ind.objectives = {0.9, 0.7, 0.6};
    archive.offer(ind);
    const auto j = archive_json(archive, {"x", "y", "z"}, ObjectiveMode::SuppressIdentity);
    EXPECT_EQ(j["size"], 1);
    EXPECT_EQ(j["members"][0]["features"], nlohmann::json({"x", "z"}));
    EXPECT_EQ(j["members"][0]["objectives"], nlohmann::json({0.9, 0.7, 0.6}));

    GenerationStats s;
    s.generation = 3;
    s.best = {0.9, 0.7, 0.6};
    s.archive_size = 1;
    s.wall_seconds = 1.5;
    const auto quiet = telemetry_line(s, false);
    EXPECT_EQ(quiet.back(), '\n');
    EXPECT_FALSE(nlohmann::json::parse(quiet).contains("wall_seconds"));
    EXPECT_EQ(nlohmann::json::parse(telemetry_line(s, true))["wall_seconds"], 1.5);
}
