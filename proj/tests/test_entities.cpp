#include <gtest/gtest.h>

#include "orgbin/entities.hpp"
#include "support.hpp"

using namespace orgbin;
using namespace orgbin::entities;
using orgbin::testing::post_json;
using orgbin::testing::TempDir;
using orgbin::testing::write_file;

namespace {

struct QuietLog {
  log::ScopedSink guard{[](log::Level, std::string_view) {}};
};

corpus::ForumPost make_post(std::string id, std::string title, std::string code, std::string discussion = "") {
  corpus::ForumPost p;
  p.post_id = std::move(id);
  p.forum = "f";
  p.language = "English";
  p.title = std::move(title);
  p.source_code = std::move(code);
  p.discussion = std::move(discussion);
  return p;
}

}  // namespace

TEST(Extract, NetflixSentence) {
  auto g = Gazetteer::starter();
  auto ms = extract_orgs("This SQL injection gives a free login to a Netflix account.", g);
  ASSERT_EQ(ms.size(), 1u);
  EXPECT_EQ(ms[0].canonical_name, "Netflix");
  EXPECT_EQ(ms[0].surface, "Netflix");
}

TEST(Extract, EmptyText) { EXPECT_TRUE(extract_orgs("", Gazetteer::starter()).empty()); }

TEST(Extract, CaseInsensitive) {
  Gazetteer g({{"MySQL", {"mysql"}, "Databases"}});
  auto ms = extract_orgs("MySQL rocks; mysql forever", g);
  ASSERT_EQ(ms.size(), 2u);
  EXPECT_EQ(ms[0].canonical_name, "MySQL");
  EXPECT_EQ(ms[1].canonical_name, "MySQL");
  EXPECT_EQ(ms[1].surface, "mysql");
  EXPECT_EQ(ms[1].start, std::string("MySQL rocks; mysql forever").find("mysql"));
}

TEST(Extract, WordBoundariesRequired) {
  auto g = Gazetteer::starter();
  EXPECT_TRUE(extract_orgs("googleplex mysqldump xgoogle", g).empty());
  auto ms = extract_orgs("(google)", g);
  ASSERT_EQ(ms.size(), 1u);
  EXPECT_EQ(ms[0].start, 1u);
  EXPECT_EQ(ms[0].end, 7u);
}

TEST(Extract, LongestMatchWinsAndSpacesMatchWhitespaceRuns) {
  Gazetteer g({{"Google", {}, "Software"}, {"Google Cloud", {"gcp"}, "Software"}});
  auto ms = extract_orgs("use google \t cloud or Google", g);
  ASSERT_EQ(ms.size(), 2u);
  EXPECT_EQ(ms[0].canonical_name, "Google Cloud");
  EXPECT_EQ(ms[0].surface, "google \t cloud");
  EXPECT_EQ(ms[1].canonical_name, "Google");
}

TEST(Extract, SpansAreOrderedNonOverlappingAndMatchSurface) {
  auto g = Gazetteer::starter();
  Rng rng(3);
  const std::vector<std::string> words{"Mozilla", "zynga", "the", "Oracle", "x", "MYSQL", "twitch,", "-", "Verizon."};
  for (int trial = 0; trial < 200; ++trial) {
    std::string text;
    for (int w = 0; w < 15; ++w) text += words[rng.below(words.size())] + (rng.below(2) ? " " : "  ");
    auto ms = extract_orgs(text, g);
    for (std::size_t i = 0; i < ms.size(); ++i) {
      EXPECT_LT(ms[i].start, ms[i].end);
      EXPECT_LE(ms[i].end, text.size());
      EXPECT_EQ(text.substr(ms[i].start, ms[i].end - ms[i].start), ms[i].surface);
      if (i > 0) EXPECT_LE(ms[i - 1].end, ms[i].start);
    }
    std::string upper = text;
    for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    auto mu = extract_orgs(upper, g);
    ASSERT_EQ(mu.size(), ms.size());
    for (std::size_t i = 0; i < ms.size(); ++i) EXPECT_EQ(mu[i].canonical_name, ms[i].canonical_name);
  }
}

TEST(AssignBins, MozillaIsOpenSource) {
  auto g = Gazetteer::starter();
  auto counts = assign_bins(extract_orgs("Mozilla", g), g);
  EXPECT_EQ(counts.at("Open Source"), 1u);
  EXPECT_EQ(counts.at("Databases"), 0u);
}

TEST(AssignBins, VideoGamesTrio) {
  auto g = Gazetteer::starter();
  auto counts = assign_bins(extract_orgs("Twitch, Oculus, and Zynga", g), g);
  EXPECT_EQ(counts.at("Video Games"), 3u);
}

TEST(AssignBins, EmptyAndUnknown) {
  auto g = Gazetteer::starter();
  auto counts = assign_bins({}, g);
  EXPECT_EQ(counts.size(), 5u);
  for (const auto& [bin, n] : counts) EXPECT_EQ(n, 0u);
  OrgMention m;
  m.canonical_name = "Acme";
  try {
    assign_bins({m}, g);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("Acme"), std::string::npos);
  }
}

TEST(PruneBins, ThresholdAndIdempotence) {
  EXPECT_EQ(prune_bins({{"Open Source", 961}, {"X", 99}}), (BinCounts{{"Open Source", 961}}));
  EXPECT_EQ(prune_bins({{"Y", 100}}), (BinCounts{{"Y", 100}}));
  EXPECT_TRUE(prune_bins({}).empty());
  Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    BinCounts c;
    for (int b = 0; b < 6; ++b) c["b" + std::to_string(b)] = rng.below(200);
    auto once = prune_bins(c);
    EXPECT_EQ(prune_bins(once), once);
    for (const auto& [bin, n] : once) EXPECT_EQ(c.at(bin), n);
  }
}

TEST(Gazetteer, UniquenessRules) {
  EXPECT_THROW(Gazetteer({{"MySQL", {}, "Databases"}, {"mysql", {}, "Software"}}), DataError);
  EXPECT_THROW(Gazetteer({{"A", {"shared"}, "Databases"}, {"B", {"Shared"}, "Software"}}), DataError);
  EXPECT_THROW(Gazetteer({{"A", {}, ""}}), DataError);
}

TEST(Gazetteer, ShippedCsvMatchesStarter) {
  auto shipped = Gazetteer::from_csv(ORGBIN_DATA_DIR "/gazetteer.csv");
  auto starter = Gazetteer::starter();
  ASSERT_EQ(shipped.entries().size(), starter.entries().size());
  for (const auto& e : starter.entries()) EXPECT_EQ(shipped.bin_of(e.canonical_name), e.bin);
  EXPECT_EQ(shipped.bin_of("Netflix"), "Software");
  EXPECT_EQ(shipped.bin_of("Mozilla"), "Open Source");
}

TEST(Gazetteer, CsvAliasesAndErrors) {
  TempDir dir;
  write_file(dir / "g.csv", "canonical_name,aliases,bin\nGoogle,\"Alphabet; GOOG\",Software\n");
  auto g = Gazetteer::from_csv(dir / "g.csv");
  auto ms = extract_orgs("alphabet and goog", g);
  ASSERT_EQ(ms.size(), 2u);
  EXPECT_EQ(ms[1].canonical_name, "Google");
  write_file(dir / "bad.csv", "name,bin\n");
  EXPECT_THROW(Gazetteer::from_csv(dir / "bad.csv"), DataError);
  write_file(dir / "short.csv", "canonical_name,aliases,bin\nGoogle,Software\n");
  EXPECT_THROW(Gazetteer::from_csv(dir / "short.csv"), DataError);
}

TEST(MajorityBin, MajorityThenEarliest) {
  auto g = Gazetteer::starter();
  GazetteerRecognizer rec(g);
  auto bins = gold::default_bins();
  auto p1 = make_post("1", "Mozilla and MySQL, then Mozilla again", "x");
  EXPECT_EQ(majority_bin(post_mentions(p1, rec), g, bins), "Open Source");
  auto p2 = make_post("2", "MySQL then Mozilla", "x");
  EXPECT_EQ(majority_bin(post_mentions(p2, rec), g, bins), "Databases");
  EXPECT_EQ(majority_bin(post_mentions(p2, rec), g, gold::BinSet({"Open Source"})), "Open Source");
  auto p3 = make_post("3", "nothing here", "x");
  EXPECT_FALSE(majority_bin(post_mentions(p3, rec), g, bins));
}

TEST(BuildGold, LabelsAndSkips) {
  TempDir dir;
  QuietLog quiet;
  corpus::CorpusStore store(dir / "store");
  store.append(make_post("1", "free login to a Netflix account", "SELECT * FROM users"));
  store.append(make_post("2", "Mozilla", "x = 1", "Mozilla, MySQL"));
  store.append(make_post("3", "no orgs", "code"));
  store.append(make_post("4", "Netflix", ""));
  store.append(make_post("5", "nothing", "Netflix in code only"));
  auto g = Gazetteer::starter();
  auto ds = build_gold(store, g, gold::default_bins());
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.records[0].record_id, "f/1");
  EXPECT_EQ(ds.records[0].bin, "Software");
  EXPECT_EQ(ds.records[0].tokens, (textprep::TokenSequence{"select", "from", "user"}));
  EXPECT_EQ(ds.records[1].bin, "Open Source");
  auto only_db = build_gold_records(store, g, gold::BinSet({"Databases"}));
  ASSERT_EQ(only_db.size(), 1u);
  EXPECT_EQ(only_db[0].bin, "Databases");
  EXPECT_THROW(build_gold_records(store, g, gold::BinSet()), ConfigError);
}

TEST(ExtractStore, StableOrderByPostThenSpan) {
  TempDir dir;
  corpus::CorpusStore store(dir / "store");
  store.append(make_post("b", "Zynga Oculus", ""));
  store.append(make_post("a", "Verizon", ""));
  auto ms = extract_store(store, Gazetteer::starter());
  ASSERT_EQ(ms.size(), 3u);
  EXPECT_EQ(ms[0].post.post_id, "a");
  EXPECT_EQ(ms[1].canonical_name, "Zynga");
  EXPECT_EQ(ms[2].canonical_name, "Oculus");
}
