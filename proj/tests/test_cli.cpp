// SPDX-License-Identifier: Apache-2.0
//
// Runs the spgd executable end to end.
#include "spgd/io.hpp"
#include "spgd/metrics.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace spgd;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("spgd_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    int run(const std::string& args) {
        const std::string cmd = std::string(SPGD_CLI) + " " + args + " > " + path("stdout.txt") + " 2> " + path("stderr.txt");
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string read(const std::string& name) const {
        std::ifstream in(path(name));
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }

    /// x * y on a 5 x 5 grid of [-1, 1]^2.
    void write_product_csv(const std::string& name) const {
        std::ofstream out(path(name));
        out.precision(17);
        out << "s1,s2,f\n";
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) {
                const double x = -1 + 0.5 * i, y = -1 + 0.5 * j;
                out << x << ',' << y << ',' << x * y << '\n';
            }
    }

    fs::path dir_;
};

}  // namespace

TEST_F(Cli, FitPredictRoundTrip) {
    write_product_csv("xy.csv");
    ASSERT_EQ(run("fit --data " + path("xy.csv") + " --out " + path("m.json") + " --report " + path("r.json")), 0)
        << read("stderr.txt");
    const double train = read_json(path("r.json")).at("train_error").get<double>();
    EXPECT_LT(train, 1e-6);

    ASSERT_EQ(run("predict --model " + path("m.json") + " --data " + path("xy.csv") + " --out " + path("p.csv")), 0);
    EXPECT_NE(read("stdout.txt").find("relative error"), std::string::npos);
    const CsvTable pred = read_csv(path("p.csv"));
    ASSERT_EQ(pred.header.back(), "f_pred");
    const double err = relative_l2_error(pred.rows.col(pred.column("f")), pred.rows.col(pred.column("f_pred")));
    EXPECT_NEAR(err, train, 1e-12);
}

TEST_F(Cli, MissingFileExitsOne) { EXPECT_EQ(run("fit --data " + path("none.csv")), 1); }

TEST_F(Cli, MalformedCsvReportsLine) {
    write("bad.csv", "s1,f\n1,2\n1,2,3\n");
    EXPECT_EQ(run("fit --data " + path("bad.csv")), 1);
    EXPECT_NE(read("stderr.txt").find("line 3"), std::string::npos);
}

TEST_F(Cli, DimensionMismatchExitsOne) {
    write_product_csv("xy.csv");
    ASSERT_EQ(run("fit --data " + path("xy.csv") + " --out " + path("m.json")), 0);
    write("three.csv", "s1,s2,s3\n0,0,0\n");
    EXPECT_EQ(run("predict --model " + path("m.json") + " --data " + path("three.csv")), 1);
}

TEST_F(Cli, EmptyDataWritesHeaderOnly) {
    write_product_csv("xy.csv");
    ASSERT_EQ(run("fit --data " + path("xy.csv") + " --out " + path("m.json")), 0);
    write("empty.csv", "");
    ASSERT_EQ(run("predict --model " + path("m.json") + " --data " + path("empty.csv") + " --out " + path("p.csv")), 0);
    EXPECT_EQ(read_csv(path("p.csv")).rows.rows(), 0);
}

TEST_F(Cli, RankZeroFitExitsTwo) {
    write("zero.csv", "s1,f\n0,0\n0.5,0\n1,0\n");
    EXPECT_EQ(run("fit --data " + path("zero.csv")), 2);
}

TEST_F(Cli, ConfigFileAndFlagOverride) {
    write_product_csv("xy.csv");
    write("run.cfg", "method = rspgd\nseed = 3\n");
    ASSERT_EQ(run("fit --config " + path("run.cfg") + " --data " + path("xy.csv") + " --method spgd --report " +
                  path("r.json")),
              0);
    EXPECT_EQ(read_json(path("r.json")).at("method").get<std::string>(), "spgd");
    ASSERT_EQ(run("fit --config " + path("run.cfg") + " --data " + path("xy.csv") + " --report " + path("r.json")), 0);
    EXPECT_EQ(read_json(path("r.json")).at("method").get<std::string>(), "rspgd");
    write("bad.cfg", "methd = spgd\n");
    EXPECT_EQ(run("fit --config " + path("bad.cfg") + " --data " + path("xy.csv")), 1);
}

TEST_F(Cli, UnknownCaseListsValidIds) {
    EXPECT_EQ(run("benchmark --case bogus"), 1);
    EXPECT_NE(read("stderr.txt").find("s2_ex1"), std::string::npos);
}

TEST_F(Cli, AnovaAnchorOutsideBoxExitsOne) {
    EXPECT_EQ(run("anova --case anova --anchor 5,5"), 1);
}

TEST_F(Cli, AnovaAdditiveSobol) {
    {
        std::ofstream out(path("add.csv"));
        out.precision(17);
        out << "s1,s2,f\n";
        out << "0,0,0\n";
        // f = x + y^2 on the cross, then four coupling points.
        for (int i = 0; i <= 8; ++i) {
            const double v = -1 + 0.25 * i;
            if (i == 4) continue;
            out << v << ",0," << v << '\n';
            out << "0," << v << ',' << v * v << '\n';
        }
        out << "0.7,0.6," << 0.7 + 0.36 << '\n' << "-0.3,0.9," << -0.3 + 0.81 << '\n';
        out << "0.4,-0.8," << 0.4 + 0.64 << '\n' << "-0.9,-0.2," << -0.9 + 0.04 << '\n';
    }
    ASSERT_EQ(run("anova --data " + path("add.csv") + " --anchor 0,0 --sobol 100000 --out " + path("a.json")), 0)
        << read("stderr.txt");
    const std::string out = read("stdout.txt");
    const auto pos = out.find("S_12 = ");
    ASSERT_NE(pos, std::string::npos) << out;
    EXPECT_LT(std::abs(std::stod(out.substr(pos + 7))), 0.01);
    // An ANOVA model is also accepted by predict.
    EXPECT_EQ(run("predict --model " + path("a.json") + " --data " + path("add.csv")), 0);
}

TEST_F(Cli, SindyThresholdPaths) {
    EXPECT_EQ(run("sindy --samples 20 --stls-threshold 100 --out " + path("s")), 0);
    EXPECT_NE(read("stderr.txt").find("empty"), std::string::npos) << read("stderr.txt");
    EXPECT_TRUE(fs::exists(path("s/coefficients.csv")));
    EXPECT_TRUE(fs::exists(path("s/trajectory.csv")));
}

TEST_F(Cli, SindyFewSamplesWarns) {
    EXPECT_EQ(run("sindy --samples 5 --out " + path("s")), 0);
    EXPECT_FALSE(read("stderr.txt").empty());
}
