#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "orgbin/gold.hpp"
#include "support.hpp"

using namespace orgbin;
using namespace orgbin::gold;
using orgbin::testing::TempDir;
using orgbin::testing::write_file;

namespace {

struct QuietLog {
  log::ScopedSink guard{[](log::Level, std::string_view) {}};
};

}  // namespace

TEST(Gold, ReferenceClassPercentages) {
  auto ds = make_dataset(orgbin::testing::sized_records(orgbin::testing::reference_class_sizes()), default_bins());
  EXPECT_EQ(ds.size(), 5210u);
  auto pct = ds.percentages();
  ASSERT_EQ(pct.size(), 5u);
  // Independent oracle: round(100 * n / total, 2).
  const double total = 5210.0;
  const std::vector<double> sizes{1780, 1351, 961, 673, 445};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(pct[i], std::round(10000.0 * sizes[i] / total) / 100.0);
  // Printed table values; two of them differ from the counts in the last digit.
  const std::vector<double> printed{34.17, 25.94, 18.45, 12.92, 8.52};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(pct[i], printed[i], 0.02 + 1e-9);
  EXPECT_DOUBLE_EQ(pct[0], 34.17);
  EXPECT_DOUBLE_EQ(pct[2], 18.45);
  EXPECT_DOUBLE_EQ(pct[3], 12.92);
  EXPECT_NEAR(std::accumulate(pct.begin(), pct.end(), 0.0), 100.0, 0.02);
}

TEST(Gold, ClassOrderIsDescendingCount) {
  auto ds = make_dataset(orgbin::testing::sized_records({{"Video Games", 3}, {"Databases", 1}, {"Mobile", 3}}), default_bins());
  ASSERT_EQ(ds.classes.size(), 3u);
  EXPECT_EQ(ds.classes[0], "Mobile");  // ties follow declared order
  EXPECT_EQ(ds.classes[1], "Video Games");
  EXPECT_EQ(ds.classes[2], "Databases");
  EXPECT_EQ(ds.labels[0], 1u);
}

TEST(Gold, SingletonFile) {
  TempDir dir;
  write_file(dir / "g.jsonl", R"({"record_id":"a","tokens":["select","from"],"bin":"Databases"})" "\n");
  auto ds = load_gold(dir / "g.jsonl");
  EXPECT_EQ(ds.size(), 1u);
  ASSERT_EQ(ds.classes.size(), 1u);
  EXPECT_EQ(ds.classes[0], "Databases");
  EXPECT_DOUBLE_EQ(ds.percentages()[0], 100.0);
}

TEST(Gold, UnknownBinIsRejectedPerRecord) {
  TempDir dir;
  QuietLog quiet;
  write_file(dir / "g.jsonl",
             R"({"record_id":"a","tokens":["x"],"bin":"Routers"})" "\n"
             R"({"record_id":"b","tokens":["x"],"bin":"Mobile"})" "\n");
  auto ds = load_gold(dir / "g.jsonl");
  EXPECT_EQ(ds.size(), 1u);
  ASSERT_EQ(ds.rejections.size(), 1u);
  EXPECT_EQ(ds.rejections[0].line_no, 1u);
  EXPECT_NE(ds.rejections[0].reason.find("Routers"), std::string::npos);
}

TEST(Gold, EmptyFileIsAnError) {
  TempDir dir;
  write_file(dir / "g.jsonl", "");
  EXPECT_THROW(load_gold(dir / "g.jsonl"), DataError);
  EXPECT_THROW(load_gold(dir / "missing.jsonl"), DataError);
}

TEST(Gold, RawTextIsNormalizedAndShapeChecked) {
  TempDir dir;
  QuietLog quiet;
  write_file(dir / "g.jsonl",
             R"({"record_id":"a","raw_text":"SQL Injections!!","bin":"Databases","forum":"f","post_id":"1"})" "\n"
             R"({"record_id":"b","tokens":["Upper"],"bin":"Databases"})" "\n"
             R"({"record_id":"c","tokens":["x"],"raw_text":"x","bin":"Databases"})" "\n"
             R"({"record_id":"a","tokens":["x"],"bin":"Databases"})" "\n"
             R"({"record_id":"d","raw_text":"$$$","bin":"Databases"})" "\n");
  auto ds = load_gold(dir / "g.jsonl");
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds.records[0].tokens, (textprep::TokenSequence{"sql", "injection"}));
  ASSERT_TRUE(ds.records[0].source);
  EXPECT_EQ(ds.records[0].source->post_id, "1");
  EXPECT_EQ(ds.rejections.size(), 4u);
}

TEST(Gold, WriteThenLoadRoundTrips) {
  TempDir dir;
  std::vector<GoldRecord> recs{{"f/1", {"a", "b"}, "Software", corpus::PostKey{"f", "1"}},
                               {"f/2", {"c"}, "Mobile", std::nullopt}};
  write_gold(dir / "g.jsonl", recs);
  auto ds = load_gold(dir / "g.jsonl");
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.records[0].tokens, recs[0].tokens);
  EXPECT_EQ(ds.records[1].bin, "Mobile");
  EXPECT_FALSE(ds.records[1].source);
}

TEST(BinSet, RejectsDuplicatesAndEmptyNames) {
  EXPECT_THROW(BinSet({"a", "a"}), ConfigError);
  EXPECT_THROW(BinSet({""}), ConfigError);
  EXPECT_EQ(default_bins().index_of("Mobile"), 3u);
}
