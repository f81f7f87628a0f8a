#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "doctest.h"
#include "evqc/errors.hpp"
#include "evqc/survey.hpp"
#include "json.hpp"

using namespace evqc;

namespace {

const std::string kHeader = "HOUSEID,VEHID,TRAVDAY,STRTTIME,ENDTIME,TRVLCMIN,TRPMILES,WHYFROM,WHYTO\n";

std::vector<TripRecord> parse(const std::string& body, IngestDiagnostics& diag) {
  std::istringstream in(kHeader + body);
  return parse_records(in, ColumnMap{}, DestinationMapping::nhts2017(), diag);
}

std::vector<TripChain> chains_of(const std::string& body) {
  IngestDiagnostics diag;
  return build_chains(parse(body, diag), &diag);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("HHMM times and miles are converted") {
  IngestDiagnostics diag;
  const auto recs = parse("1,1,1,0830,0900,30,10,1,3\n", diag);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].start_time == 510);
  CHECK(recs[0].end_time == 540);
  CHECK(recs[0].length_km == 10 * 1.609344);
  CHECK(recs[0].destination == SiteClass::W);
  CHECK(recs[0].origin == SiteClass::H);
  CHECK(diag.rows_rejected() == 0);

  CHECK(parse_hhmm("830") == 510);
  CHECK(parse_hhmm("0000") == 0);
  CHECK(parse_hhmm("2359") == 1439);
  CHECK_FALSE(parse_hhmm("2400"));
  CHECK_FALSE(parse_hhmm("1260"));
  CHECK_FALSE(parse_hhmm("ab"));
}

TEST_CASE("negative duration row is rejected with its line number") {
  IngestDiagnostics diag;
  const auto recs = parse("1,1,1,0830,0900,-5,10,1,3\n", diag);
  CHECK(recs.empty());
  REQUIRE(diag.rows_rejected() == 1);
  CHECK(diag.rejected_rows[0].line == 2);
  CHECK(diag.rows_read == 1);
}

TEST_CASE("header-only file parses to nothing") {
  IngestDiagnostics diag;
  CHECK(parse("", diag).empty());
  CHECK(diag.rows_rejected() == 0);
  CHECK(diag.rows_read == 0);
}

TEST_CASE("end before start is only accepted as a midnight wrap") {
  IngestDiagnostics diag;
  const auto recs = parse("1,1,1,2340,0010,30,10,15,1\n1,1,1,1500,1400,30,3,1,9\n", diag);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].end_time == 10);
  REQUIRE(diag.rows_rejected() == 1);
  CHECK(diag.rejected_rows[0].reason == "end before start without midnight wrap");
}

TEST_CASE("missing mapped column is a configuration error naming it") {
  std::istringstream in("HOUSEID,VEHID,TRAVDAY,STRTTIME,ENDTIME,TRVLCMIN,WHYTO\n");
  IngestDiagnostics diag;
  try {
    parse_records(in, ColumnMap{}, DestinationMapping::nhts2017(), diag);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("TRPMILES") != std::string::npos);
  }
}

TEST_CASE("origin column is optional") {
  std::istringstream in("HOUSEID,VEHID,TRAVDAY,STRTTIME,ENDTIME,TRVLCMIN,TRPMILES,WHYTO\n"
                        "1,1,1,0800,0900,60,10,3\n1,1,1,1800,1900,60,10,1\n");
  IngestDiagnostics diag;
  const auto recs = parse_records(in, ColumnMap{}, DestinationMapping::nhts2017(), diag);
  REQUIRE(recs.size() == 2);
  CHECK_FALSE(recs[0].origin);
  const auto chains = build_chains(recs, &diag);
  REQUIRE(chains.size() == 1);
  CHECK(chains[0].chain_type.name() == "H-W-H");
}

TEST_CASE("simple commute gives one H-W-H chain") {
  const auto chains = chains_of("1,1,1,0830,0900,30,10,1,3\n1,1,1,1800,1830,30,10,3,1\n");
  REQUIRE(chains.size() == 1);
  CHECK(chains[0].chain_type == ChainType::simple(SiteClass::W));
  REQUIRE(chains[0].dwell_minutes.size() == 1);
  CHECK(chains[0].dwell_minutes[0] == 540.0);
  CHECK(is_valid_chain(chains[0]));
}

TEST_CASE("three-trip chain with two dwell values") {
  const auto chains =
      chains_of("1,1,1,0800,0830,30,10,1,3\n1,1,1,1700,1720,20,3,3,9\n1,1,1,1800,1830,30,9,9,1\n");
  REQUIRE(chains.size() == 1);
  CHECK(chains[0].chain_type.name() == "H-W-SE-H");
  REQUIRE(chains[0].dwell_minutes.size() == 2);
  CHECK(chains[0].dwell_minutes[0] == 510.0);
  CHECK(chains[0].dwell_minutes[1] == 40.0);
}

TEST_CASE("five trips before returning home emit nothing") {
  IngestDiagnostics diag;
  const auto recs = parse(
      "1,1,1,0700,0710,10,4,1,3\n1,1,1,0800,0810,10,4,3,9\n1,1,1,0900,0910,10,4,9,6\n"
      "1,1,1,1000,1010,10,4,6,11\n1,1,1,1100,1110,10,4,11,1\n",
      diag);
  CHECK(build_chains(recs, &diag).empty());
  CHECK(diag.discarded_segments["too_many_trips"] == 1);
}

TEST_CASE("overlapping trips invalidate the chain") {
  IngestDiagnostics diag;
  const auto recs = parse("1,1,1,0800,0840,40,15,1,3\n1,1,1,0830,0900,30,14,3,1\n", diag);
  REQUIRE(recs.size() == 2);
  CHECK(build_chains(recs, &diag).empty());
  CHECK(diag.discarded_segments["overlapping_trips"] == 1);
}

TEST_CASE("chain returning after midnight keeps unwrapped times") {
  const auto chains = chains_of("1,1,6,2010,2035,25,9,1,15\n1,1,6,2340,0010,30,10,15,1\n");
  REQUIRE(chains.size() == 1);
  CHECK(chains[0].chain_type.name() == "H-SR-H");
  CHECK(chains[0].end_minutes[1] == 1450);
  CHECK(chains[0].dwell_minutes[0] == 185.0);
}

TEST_CASE("same class twice is kept as its literal type") {
  const auto chains =
      chains_of("1,1,1,0800,0830,30,10,1,3\n1,1,1,1200,1210,10,2,3,4\n1,1,1,1700,1730,30,10,3,1\n");
  REQUIRE(chains.size() == 1);
  CHECK(chains[0].chain_type.name() == "H-W-W-H");
}

TEST_CASE("velocity is length over hours; zero-length trips are skipped") {
  // 30 km in 30 minutes.
  const double miles = 30.0 / 1.609344;
  std::ostringstream body;
  body << "1,1,1,0830,0900,30," << std::setprecision(17) << miles << ",1,3\n";
  body << "1,1,1,1800,1810,10,0,3,1\n";
  const auto ds = extract_features(chains_of(body.str()));
  const auto& f = ds[ChainType::simple(SiteClass::W)];
  CHECK(f.count == 1);
  REQUIRE(f.velocity_kmh[0].size() == 1);
  CHECK(f.velocity_kmh[0][0] == doctest::Approx(60.0).epsilon(1e-12));
  CHECK(f.velocity_kmh[1].empty());
  CHECK(f.length_km[1].size() == 1);
}

TEST_CASE("empty chain list gives all-zero counts") {
  const auto ds = extract_features({});
  CHECK(ds.total_chains() == 0);
  for (const auto& t : ds.types) CHECK(t.count == 0);
  CHECK_THROWS_AS(chain_type_proportions(ds), DataError);
}

TEST_CASE("counts and proportions") {
  const std::string w = "0830,0900,30,10,1,3\n";
  const std::string wh = "1800,1830,30,10,3,1\n";
  const std::string se = "1000,1010,10,2,1,9\n";
  const std::string seh = "1100,1110,10,2,9,1\n";
  std::string body;
  for (int h = 1; h <= 3; ++h) body += std::to_string(h) + ",1,1," + w + std::to_string(h) + ",1,1," + wh;
  body += "9,1,1," + se + "9,1,1," + seh;
  const auto ds = extract_features(chains_of(body));
  CHECK(ds[ChainType::simple(SiteClass::W)].count == 3);
  CHECK(ds[ChainType::simple(SiteClass::SE)].count == 1);
  CHECK(ds.total_chains() == 4);
  const auto p = chain_type_proportions(ds);
  CHECK(p[0] == 0.75);
  CHECK(p[1] == 0.25);
  double sum = 0.0;
  for (std::size_t i = 2; i < p.size(); ++i) CHECK(p[i] == 0.0);
  for (double v : p) sum += v;
  CHECK(std::abs(sum - 1.0) <= 1e-12);
}

TEST_CASE("single type carries all mass") {
  const auto ds = extract_features(chains_of("1,1,1,1000,1010,10,2,1,11\n1,1,1,1100,1110,10,2,11,1\n"));
  const auto p = chain_type_proportions(ds);
  CHECK(p[ChainType::simple(SiteClass::SR).index()] == 1.0);
}

TEST_CASE("chain type taxonomy round-trips") {
  for (std::size_t i = 0; i < ChainType::kCount; ++i) {
    const auto ct = ChainType::from_index(i);
    CHECK(ChainType::parse(ct.name()) == ct);
    CHECK(ct.destination(ct.trip_count() - 1) == SiteClass::H);
  }
  CHECK(ChainType::complex(SiteClass::W, SiteClass::SE).index() == 5);
  CHECK(ChainType::complex(SiteClass::O, SiteClass::O).index() == 19);
}

TEST_CASE("bundled fixture matches its recorded expectations") {
  const std::filesystem::path dir = EVQC_DATA_DIR;
  const auto expected = nlohmann::json::parse(slurp(dir / "trips_fixture_expected.json"));
  std::ifstream in(dir / "trips_fixture.csv");
  IngestDiagnostics diag;
  const auto recs = parse_records(in, ColumnMap{}, DestinationMapping::nhts2017(), diag);
  const auto chains = build_chains(recs, &diag);

  CHECK(diag.rows_read == expected["rows"].get<std::size_t>());
  CHECK(diag.rows_rejected() == expected["rows_rejected"].get<std::size_t>());
  std::map<std::string, std::size_t> reasons;
  for (const auto& r : diag.rejected_rows) ++reasons[r.reason];
  CHECK(nlohmann::json(reasons) == expected["rejected_by_reason"]);
  CHECK(chains.size() == expected["chains"].get<std::size_t>());
  CHECK(nlohmann::json(diag.discarded_segments) == expected["discarded_segments"]);

  std::map<std::string, std::size_t> by_type;
  for (const auto& c : chains) {
    ++by_type[c.chain_type.name()];
    CHECK(is_valid_chain(c));
  }
  CHECK(nlohmann::json(by_type) == expected["chains_by_type"]);

  const auto ds = extract_features(chains);
  CHECK(ds.total_chains() == chains.size());
  std::size_t nonzero = 0;
  for (const auto& t : ds.types) {
    if (t.count > 0) ++nonzero;
    for (const auto& s : t.end_time) CHECK(s.size() == t.count);
    for (const auto& s : t.length_km) CHECK(s.size() == t.count);
    for (const auto& s : t.dwell_min) CHECK(s.size() == t.count);
    for (const auto& s : t.velocity_kmh) {
      CHECK(s.size() <= t.count);
      for (double v : s) CHECK(v > 0.0);
    }
  }
  CHECK(nonzero >= 2);
}

TEST_CASE("dataset serialization is deterministic and reads back") {
  const std::filesystem::path dir = EVQC_DATA_DIR;
  auto build = [&] {
    std::ifstream in(dir / "trips_fixture.csv");
    IngestDiagnostics diag;
    return extract_features(
        build_chains(parse_records(in, ColumnMap{}, DestinationMapping::nhts2017(), diag), &diag));
  };
  const auto tmp = std::filesystem::temp_directory_path() / "evqc_test_survey";
  std::filesystem::remove_all(tmp);
  write_dataset(build(), tmp / "a");
  write_dataset(build(), tmp / "b");
  std::size_t files = 0;
  for (const auto& e : std::filesystem::directory_iterator(tmp / "a")) {
    ++files;
    CHECK(slurp(e.path()) == slurp(tmp / "b" / e.path().filename()));
  }
  CHECK(files > 1);

  const auto original = build();
  const auto back = read_dataset(tmp / "a");
  for (std::size_t i = 0; i < ChainType::kCount; ++i) {
    CHECK(back.types[i].count == original.types[i].count);
    for (const auto f : kAllFeatures) CHECK(back.types[i].series(f) == original.types[i].series(f));
  }
  std::filesystem::remove_all(tmp);
}
