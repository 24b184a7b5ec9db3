#include <gtest/gtest.h>

#include "orgbin/embed.hpp"
#include "support.hpp"

using namespace orgbin;
using namespace orgbin::embed;
using orgbin::testing::TempDir;
using orgbin::testing::write_file;

TEST(LoadEmbeddings, ParsesLine) {
  TempDir dir;
  write_file(dir / "v.txt", "the 0.1 0.2 0.3\n");
  auto t = load_embeddings(dir / "v.txt");
  EXPECT_EQ(t.dim(), 3u);
  const double* v = t.find("the");
  ASSERT_NE(v, nullptr);
  EXPECT_EQ(v[0], 0.1);
  EXPECT_EQ(v[1], 0.2);
  EXPECT_EQ(v[2], 0.3);
}

TEST(LoadEmbeddings, DimensionErrorNamesLine) {
  TempDir dir;
  write_file(dir / "v.txt", "the 0.1 0.2 0.3\nof 1 2 3 4\n");
  try {
    load_embeddings(dir / "v.txt");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  write_file(dir / "w.txt", "the 0.1 0.2 0.3\n");
  EXPECT_THROW(load_embeddings(dir / "w.txt", 4), DataError);
}

TEST(LoadEmbeddings, NonNumericErrorNamesLine) {
  TempDir dir;
  write_file(dir / "v.txt", "a 1 2\nb 1 2\nc 1 x\n");
  try {
    load_embeddings(dir / "v.txt");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(LoadEmbeddings, DuplicateKeepsFirstAndWarns) {
  TempDir dir;
  write_file(dir / "v.txt", "a 1 2\na 3 4\n");
  int warnings = 0;
  log::ScopedSink guard([&](log::Level l, std::string_view) { warnings += l == log::Level::warn; });
  auto t = load_embeddings(dir / "v.txt");
  EXPECT_EQ(t.size(), 1u);
  EXPECT_EQ(t.find("a")[0], 1.0);
  EXPECT_EQ(warnings, 1);
}

TEST(BuildMatrix, RowsFromTableAndPadZero) {
  EmbeddingTable t(3);
  t.add("sql", {0.5, -0.125, 1e-3});
  textprep::Vocab v({"sql", "other"}, 1);
  log::ScopedSink quiet([](log::Level, std::string_view) {});
  auto m = build_matrix(v, t, 1);
  ASSERT_EQ(m.values.rows(), 4);
  EXPECT_TRUE(m.values.row(0).isZero(0.0));
  EXPECT_EQ(m.values(2, 0), 0.5);
  EXPECT_EQ(m.values(2, 1), -0.125);
  EXPECT_EQ(m.values(2, 2), 1e-3);
  for (int r : {1, 3})
    for (int c = 0; c < 3; ++c) {
      EXPECT_LE(std::abs(m.values(r, c)), 0.25);
    }
  EXPECT_FALSE(m.values.row(1).isZero(0.0));
  EXPECT_DOUBLE_EQ(m.coverage, 1.0 / 4.0);
  auto again = build_matrix(v, t, 1);
  EXPECT_EQ(m.values, again.values);
  auto other = build_matrix(v, t, 2);
  EXPECT_NE(m.values, other.values);
}

TEST(BuildMatrix, FileVectorsBitExactAndCoverageOracle) {
  TempDir dir;
  write_file(dir / "v.txt", "alpha 0.1234567890123 -2.5e-3 7\nbeta 1 2 3\ngamma 0 0 0\n");
  auto t = load_embeddings(dir / "v.txt");
  textprep::Vocab v({"alpha", "gamma", "delta"}, 1);
  log::ScopedSink quiet([](log::Level, std::string_view) {});
  auto m = build_matrix(v, t, 9, 0.1);
  EXPECT_EQ(m.values(2, 0), 0.1234567890123);
  EXPECT_EQ(m.values(2, 1), -2.5e-3);
  std::size_t found = 0;
  for (const auto& tok : v.tokens()) found += t.contains(tok);
  EXPECT_DOUBLE_EQ(m.coverage, static_cast<double>(found) / static_cast<double>(v.size()));
  for (int c = 0; c < 3; ++c) EXPECT_LE(std::abs(m.values(4, c)), 0.1);
}

TEST(BuildMatrix, ZeroDimensionRejected) {
  EmbeddingTable t(0);
  EXPECT_THROW(build_matrix(textprep::Vocab(), t, 1), ConfigError);
}
