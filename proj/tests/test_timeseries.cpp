#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fnarx/error.hpp"
#include "fnarx/timeseries.hpp"
#include "helpers.hpp"

namespace fs = std::filesystem;
using namespace fnarx;

namespace {

fs::path temp_dir(const std::string& name) {
  auto d = fs::temp_directory_path() / ("fnarx_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream f(p);
  f << s;
}

std::string read_text(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Trajectory random_trajectory(std::size_t n, std::uint64_t seed, double dt = 0.025) {
  SamplingGrid g{dt, n, 0.0};
  return Trajectory(g, {{"a", test::random_series(n, seed)}, {"b", test::random_series(n, seed + 1)}},
                    Channel{"y", test::random_series(n, seed + 2)});
}

}  // namespace

TEST(Trajectory, RejectsLengthMismatchAndNonFinite) {
  SamplingGrid g{0.1, 3, 0.0};
  EXPECT_THROW(Trajectory(g, {{"x", {1, 2}}}), Error);
  EXPECT_THROW(Trajectory(g, {{"x", {1, 2, NAN}}}), Error);
  EXPECT_THROW(Trajectory(g, {{"x", {1, 2, 3}}}, Channel{"x", {1, 2, 3}}), Error);
  EXPECT_THROW(Trajectory(SamplingGrid{0.0, 3, 0.0}, {{"x", {1, 2, 3}}}), Error);
}

TEST(Trajectory, OutputAccess) {
  SamplingGrid g{0.1, 3, 0.0};
  Trajectory t(g, {{"x", {1, 2, 3}}});
  EXPECT_FALSE(t.has_output());
  EXPECT_THROW(t.output(), Error);
  auto with = t.with_output({"y", {4, 5, 6}});
  EXPECT_EQ(with.output().values[2], 6.0);
  EXPECT_FALSE(with.without_output().has_output());
  EXPECT_DOUBLE_EQ(g.time(2), 0.2);
}

TEST(ExperimentalDesign, RejectsMixedSchema) {
  SamplingGrid g{0.1, 3, 0.0};
  Trajectory a(g, {{"x", {1, 2, 3}}}, Channel{"y", {0, 0, 0}});
  Trajectory b(g, {{"z", {1, 2, 3}}}, Channel{"y", {0, 0, 0}});
  Trajectory c(SamplingGrid{0.2, 3, 0.0}, {{"x", {1, 2, 3}}}, Channel{"y", {0, 0, 0}});
  EXPECT_THROW(ExperimentalDesign({a, b}), Error);
  EXPECT_THROW(ExperimentalDesign({a, c}), Error);
  EXPECT_THROW(ExperimentalDesign(std::vector<Trajectory>{}), Error);
  Trajectory longer(SamplingGrid{0.1, 5, 0.0}, {{"x", {1, 2, 3, 4, 5}}},
                    Channel{"y", {0, 0, 0, 0, 0}});
  EXPECT_EQ(ExperimentalDesign({a, longer}).total_steps(), 8u);
}

TEST(LoadCsv, ThreeRowFile) {
  auto d = temp_dir("csv3");
  write_text(d / "a.csv", "t,x\n0,1\n0.5,2\n1.0,3\n");
  auto t = load_csv(d / "a.csv");
  EXPECT_DOUBLE_EQ(t.dt(), 0.5);
  EXPECT_EQ(t.n_steps(), 3u);
  EXPECT_EQ(t.exogenous(0).values, (std::vector<double>{1, 2, 3}));
}

TEST(LoadCsv, NonUniformGridNamesRow) {
  auto d = temp_dir("csvbad");
  write_text(d / "a.csv", "t,x\n0,1\n0.5,2\n1.1,3\n");
  try {
    load_csv(d / "a.csv");
    FAIL() << "expected rejection";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("non-uniform grid at row 2"), std::string::npos)
        << e.what();
  }
}

TEST(LoadCsv, MissingValueNamesRow) {
  auto d = temp_dir("csvnan");
  write_text(d / "a.csv", "t,x\n0,1\n0.5,\n1.0,3\n");
  try {
    load_csv(d / "a.csv");
    FAIL() << "expected rejection";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("row"), std::string::npos) << e.what();
  }
  write_text(d / "b.csv", "t,x\n0,1\n0.5,nan\n1.0,3\n");
  EXPECT_THROW(load_csv(d / "b.csv"), Error);
}

TEST(LoadCsv, RolesSelectColumns) {
  auto d = temp_dir("csvroles");
  write_text(d / "a.csv", "t,u,v,y\n0,1,2,3\n1,4,5,6\n");
  ChannelRoles roles;
  roles.output = "y";
  auto t = load_csv(d / "a.csv", roles);
  EXPECT_EQ(t.exogenous_names(), (std::vector<std::string>{"u", "v"}));
  EXPECT_EQ(t.output().values[1], 6.0);
  roles.exogenous = {"v"};
  EXPECT_EQ(load_csv(d / "a.csv", roles).n_exogenous(), 1u);
  roles.exogenous = {"w"};
  EXPECT_THROW(load_csv(d / "a.csv", roles), Error);
}

// Writing, reading and writing again reproduces the file byte for byte, and
// every value survives at full precision.
TEST(LoadCsv, RoundTripOnRandomTrajectories) {
  auto d = temp_dir("csvrt");
  for (std::uint64_t s = 0; s < 100; ++s) {
    auto t = random_trajectory(20 + s, 1000 + 3 * s);
    save_csv(t, d / "a.csv");
    ChannelRoles roles;
    roles.output = "y";
    auto back = load_csv(d / "a.csv", roles);
    save_csv(back, d / "b.csv");
    ASSERT_EQ(read_text(d / "a.csv"), read_text(d / "b.csv"));
    ASSERT_EQ(back.exogenous(1).values, t.exogenous(1).values);
    ASSERT_EQ(back.output().values, t.output().values);
  }
}

TEST(Resample, UpsamplingKeepsKnots) {
  auto t = random_trajectory(41, 5);
  auto up = resample(t, 0.00625);
  EXPECT_EQ(up.n_steps() - 1, 4 * (t.n_steps() - 1));
  for (std::size_t k = 0; k < t.n_steps(); ++k) {
    EXPECT_EQ(up.exogenous(0).values[4 * k], t.exogenous(0).values[k]);
  }
  // Midpoint is the linear interpolant.
  const auto& a = t.output().values;
  EXPECT_NEAR(up.output().values[2], 0.5 * (a[0] + a[1]), 1e-15);
}

TEST(Resample, DecimationKeepsEveryKth) {
  auto t = random_trajectory(43, 6);
  auto down = resample(t, 0.1);
  ASSERT_EQ(down.n_steps(), 11u);
  for (std::size_t j = 0; j < down.n_steps(); ++j) {
    EXPECT_EQ(down.output().values[j], t.output().values[4 * j]);
  }
}

TEST(Resample, RoundTripIsIdentity) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto t = random_trajectory(30 + s, 40 + s);
    auto back = resample(resample(t, 0.025 / 4), 0.025);
    ASSERT_EQ(back.n_steps(), t.n_steps());
    EXPECT_EQ(back.exogenous(0).values, t.exogenous(0).values);
    EXPECT_EQ(back.output().values, t.output().values);
  }
}

TEST(Resample, NonIntegerRatioRejected) {
  auto t = random_trajectory(10, 1);
  EXPECT_THROW(resample(t, 0.03), Error);
  EXPECT_THROW(resample(t, -1.0), Error);
}

TEST(SplitDesign, DeterministicPartition) {
  std::vector<Trajectory> ts;
  for (int i = 0; i < 5; ++i) {
    SamplingGrid g{1.0, 2, 0.0};
    ts.emplace_back(g, std::vector<Channel>{{"x", {double(i), 0}}});
  }
  ExperimentalDesign d(ts);
  auto [a, b] = split_design(d, 2, 7);
  auto [a2, b2] = split_design(d, 2, 7);
  ASSERT_EQ(a.size(), 2u);
  ASSERT_EQ(b.size(), 3u);
  std::vector<double> ids;
  for (const auto* part : {&a, &b}) {
    for (const auto& t : *part) ids.push_back(t.exogenous(0).values[0]);
  }
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(a[i].exogenous(0).values, a2[i].exogenous(0).values);
  }
  std::sort(ids.begin(), ids.end());
  EXPECT_EQ(ids, (std::vector<double>{0, 1, 2, 3, 4}));
  EXPECT_THROW(split_design(d, 5, 7), Error);
  EXPECT_THROW(split_design(d, 0, 7), Error);
  EXPECT_EQ(concat_designs(a, b).size(), 5u);
}

TEST(DesignManifest, WriteThenRead) {
  auto d = temp_dir("manifest");
  std::vector<Trajectory> ts;
  for (std::uint64_t s = 0; s < 3; ++s) ts.push_back(random_trajectory(15, 10 * s));
  ExperimentalDesign design(ts);
  auto manifest = write_design(design, d);
  auto back = read_design(manifest);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back.output_name(), "y");
  EXPECT_EQ(back.exogenous_names(), design.exogenous_names());
  EXPECT_EQ(back[2].output().values, design[2].output().values);
}
