#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <sstream>
#include <unistd.h>

#include "udgp/evaluate.hpp"
#include "udgp/ingest.hpp"
#include "udgp/pipeline.hpp"

using namespace udgp;

namespace {

std::string random_dna(std::size_t len, std::mt19937_64& rng) {
  static const char bases[] = "ACGT";
  std::string s(len, 'A');
  for (char& c : s) c = bases[rng() % 4];
  return s;
}

// Removes every accidental SmaI site, then plants sites at the given starts.
std::string planted(std::size_t len, const std::vector<std::size_t>& starts, std::mt19937_64& rng) {
  std::string s = random_dna(len, rng);
  for (std::size_t p = s.find("CCCGGG"); p != std::string::npos; p = s.find("CCCGGG")) s[p] = 'A';
  for (std::size_t p : starts) s.replace(p, 6, "CCCGGG");
  return s;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("udgp_test_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST(Fasta, ParsesFirstRecord) {
  std::istringstream in(">chr test\nacgt\n\nNNRY  \n>second\nGGGG\n");
  EXPECT_EQ(parse_fasta(in), "ACGTNNRY");
}

TEST(Fasta, Errors) {
  std::istringstream no_header("ACGT\n");
  EXPECT_THROW(parse_fasta(no_header), Error);
  std::istringstream empty(">x\n\n");
  EXPECT_THROW(parse_fasta(empty), Error);
  std::istringstream bad(">x\nAC-GT\n");
  try {
    parse_fasta(bad, "f.fa");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Data);
    EXPECT_NE(std::string(e.what()).find("f.fa:2"), std::string::npos);
  }
  EXPECT_THROW(parse_fasta(std::string("/nonexistent/x.fa")), Error);
}

TEST(Digest, SmaIExample) {
  const auto r = digest("AACCCGGGTT", find_enzyme("SmaI"));
  EXPECT_EQ(r.sites, (std::vector<std::size_t>{0, 5, 10}));
  auto d = r.distances.values();
  std::sort(d.begin(), d.end());
  EXPECT_EQ(d, (std::vector<double>{5, 5, 10}));
  EXPECT_EQ(r.distances.points(), 3u);
}

TEST(Digest, NoSiteGivesEndsOnly) {
  const auto r = digest("ACGTACGT", find_enzyme("SmaI"));
  EXPECT_EQ(r.sites, (std::vector<std::size_t>{0, 8}));
  EXPECT_EQ(r.distances.values(), std::vector<double>{8});
  EXPECT_THROW(find_enzyme("EcoRI"), Error);
  EXPECT_THROW(digest("ACGT", Enzyme{"x", "ACGN", 1}), Error);
}

TEST(Digest, PalindromicSiteMirrorsOnReverseStrand) {
  std::mt19937_64 rng(41);
  const std::string s = planted(5000, {100, 1234, 3000, 4500}, rng);
  const auto fwd = digest(s, find_enzyme("SmaI"));
  const auto rev = digest(reverse_complement(s), find_enzyme("SmaI"));
  std::vector<std::size_t> mirrored;
  for (auto x : fwd.sites) mirrored.push_back(s.size() - x);
  std::sort(mirrored.begin(), mirrored.end());
  EXPECT_EQ(rev.sites, mirrored);
  EXPECT_EQ(reverse_complement("AACG"), "CGTT");
}

TEST(DistanceFile, RoundTripIsExact) {
  std::mt19937_64 rng(42);
  std::vector<double> u(448);  // 448 * 447 / 2 = 100128 distances
  for (double& v : u) v = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  std::sort(u.begin(), u.end());
  const auto dm = pairwise_distances(PointConfig(u, Geometry::line()));
  ASSERT_GE(dm.size(), 100000u);
  const auto path = temp_file("dist.txt");
  write_distances(path.string(), dm);
  const auto back = read_distances(path.string());
  std::filesystem::remove(path);
  EXPECT_EQ(back.values(), dm.values());
  EXPECT_EQ(back.points(), 448u);
  EXPECT_EQ(back.kind(), MultisetKind::TurnpikeRaw);
}

TEST(DistanceFile, HeaderAndInference) {
  std::istringstream a("# kind=beltway N=2\n0.25\n0.75\n");
  const auto dm = read_distances(a);
  EXPECT_EQ(dm.kind(), MultisetKind::BeltwayRaw);
  EXPECT_EQ(dm.points(), 2u);
  std::istringstream b("# comment\n1\n2\n 3 \n");
  EXPECT_EQ(read_distances(b).points(), 3u);
  std::istringstream c("1\n2\n");
  EXPECT_THROW(read_distances(c), Error);
  std::istringstream d("1\nabc\n3\n");
  EXPECT_THROW(read_distances(d), Error);
  std::istringstream e("# kind=turnpike N=3\n1\n2\n3\n");
  EXPECT_THROW(read_distances(e, "<e>", std::nullopt, 4), Error);
}

// A digest with planted sites, solved on a 1 bp grid.
TEST(Digest, PlantedTenKilobaseRecovered) {
  std::mt19937_64 rng(43);
  const std::vector<std::size_t> starts = {400, 1300, 2150, 3700, 4400, 6100, 7000, 8800};
  const std::string s = planted(10000, starts, rng);
  const auto dg = digest(s, find_enzyme("SmaI"));
  ASSERT_EQ(dg.sites.size(), 10u);
  const double d_min = 200.0;
  const Grid grid = Grid::line_for(dg.distances.max(), 1.0);
  PipelineConfig cfg;
  cfg.d_min = d_min;
  const auto sel = select_sigma(dg.distances, grid, default_sigma_grid(d_min, 1.0), cfg);
  const PointConfig truth(std::vector<double>(dg.sites.begin(), dg.sites.end()), Geometry::line());
  const PointConfig est(sel.chosen().extraction->locations, Geometry::line());
  const auto score = score_recovery(truth, est, d_min);
  EXPECT_EQ(score.matched, 10u);
  for (double err : score.errors) EXPECT_LE(err, 2.0);
}
