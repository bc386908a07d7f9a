#include <gtest/gtest.h>

#include "comfort/csv.hpp"
#include "fixtures.hpp"

using namespace comfort;

namespace {

std::string header_only() { return csv_header() + "\n"; }

Errc code_of(const std::string& text) {
  try {
    read_csv_string(text);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return Errc::Io;
}

std::string one_row_csv(const ComfortRecord& r) { return csv_header() + "\n" + format_row(r) + "\n"; }

}  // namespace

TEST(Csv, HeaderHasThirtyFourCanonicalColumns) {
  EXPECT_EQ(canonical_columns().size(), 34u);
  EXPECT_EQ(canonical_columns().front(), "timestamp");
  EXPECT_EQ(canonical_columns().back(), "air_velocity");
}

TEST(Csv, EmptyBody) {
  const auto rs = read_csv_string(header_only());
  EXPECT_TRUE(rs.records.empty());
}

TEST(Csv, RoundTripThreeRecords) {
  Rng rng(3);
  const auto rs = fixture::random_set(rng, 3);
  const auto back = read_csv_string(to_csv_string(rs));
  EXPECT_EQ(back, rs);
}

TEST(Csv, RoundTripRandomSets) {
  Rng rng(1234);
  for (int i = 0; i < 1000; ++i) {
    auto rs = fixture::random_set(rng, static_cast<std::size_t>(fixture::integer(rng, 0, 6)), "S" + std::to_string(i));
    rs.scenario = i % 2 ? Scenario::Vehicle : Scenario::Indoor;
    rs.nominal_rate_hz = i % 3 ? 30.0 : 3.0;
    const auto text = to_csv_string(rs);
    const auto back = read_csv_string(text);
    ASSERT_EQ(back, rs) << text;
    EXPECT_EQ(to_csv_string(back), text);
  }
}

TEST(Csv, ShortRowNamesTheRow) {
  Rng rng(5);
  auto rs = fixture::random_set(rng, 2);
  auto text = to_csv_string(rs);
  // Drop the last field of the second data row.
  const auto last_line_start = text.rfind('\n', text.size() - 2) + 1;
  const auto cut = text.rfind(',');
  ASSERT_GT(cut, last_line_start);
  text = text.substr(0, cut) + "\n";
  try {
    read_csv_string(text);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MalformedRow);
    ASSERT_TRUE(e.row());
    EXPECT_EQ(*e.row(), 2u);
  }
}

TEST(Csv, ThirtyThreeColumnRow) {
  ComfortRecord r;
  auto row = format_row(r);
  row = row.substr(0, row.rfind(','));  // 35 fields
  row = row.substr(0, row.rfind(','));  // 34
  row = row.substr(0, row.rfind(','));  // 33
  const std::string canon_header = [] {
    std::string h;
    for (const auto& c : canonical_columns()) h += (h.empty() ? "" : ",") + c;
    return h;
  }();
  EXPECT_EQ(code_of(canon_header + "\n" + row + "\n"), Errc::MalformedRow);
}

TEST(Csv, AcceptsCanonicalColumnsOnly) {
  ComfortRecord r;
  r.label = ThermalLabel::from_int(2);
  auto row = format_row(r);
  row = row.substr(0, row.rfind(','));
  row = row.substr(0, row.rfind(','));
  std::string h;
  for (const auto& c : canonical_columns()) h += (h.empty() ? "" : ",") + c;
  const auto rs = read_csv_string(h + "\n" + row + "\n");
  ASSERT_EQ(rs.records.size(), 1u);
  EXPECT_EQ(rs.records[0].label->value(), 2);
  EXPECT_EQ(rs.records[0].label_source, LabelSource::UserRated);
}

TEST(Csv, NonMonotonicTimestamp) {
  ComfortRecord a, b;
  a.timestamp = 100;
  b.timestamp = 90;
  const auto text = csv_header() + "\n" + format_row(a) + "\n" + format_row(b) + "\n";
  try {
    read_csv_string(text);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NonMonotonicTimestamp);
    EXPECT_EQ(e.row(), std::optional<std::size_t>(2));
  }
}

TEST(Csv, OutOfBoundsValues) {
  ComfortRecord r;
  r.humidity = 140;
  EXPECT_EQ(code_of(one_row_csv(r)), Errc::OutOfBoundsValue);
  r = {};
  r.tiredness = 0;
  EXPECT_EQ(code_of(one_row_csv(r)), Errc::OutOfBoundsValue);
  r = {};
  r.gsr = -1;
  EXPECT_EQ(code_of(one_row_csv(r)), Errc::OutOfBoundsValue);
}

TEST(Csv, UnknownCategories) {
  ComfortRecord r;
  r.emotion_self = "Bored";
  EXPECT_EQ(code_of(one_row_csv(r)), Errc::UnknownCategory);
  r = {};
  r.gender = "X";
  EXPECT_EQ(code_of(one_row_csv(r)), Errc::UnknownCategory);
}

TEST(Csv, BadNumbers) {
  ComfortRecord r;
  auto text = one_row_csv(r);
  const auto pos = text.find("\n") + 1;
  text.replace(pos, text.find(',', pos) - pos, "12x");
  EXPECT_EQ(code_of(text), Errc::MalformedRow);
}

TEST(Csv, MissingHeader) { EXPECT_EQ(code_of(""), Errc::MalformedRow); }

TEST(Csv, MetadataLine) {
  RecordSet rs;
  rs.participant_id = "V03";
  rs.scenario = Scenario::Vehicle;
  rs.nominal_rate_hz = 3;
  rs.records.push_back(ComfortRecord{});
  const auto back = read_csv_string(to_csv_string(rs));
  EXPECT_EQ(back.participant_id, "V03");
  EXPECT_EQ(back.scenario, Scenario::Vehicle);
  EXPECT_EQ(back.nominal_rate_hz, 3.0);
}

TEST(Csv, FileRoundTripAndIoError) {
  fixture::TempDir dir("csv");
  Rng rng(8);
  const auto rs = fixture::random_set(rng, 20, "P07");
  write_csv(rs, dir.path / "P07.csv");
  EXPECT_EQ(read_csv(dir.path / "P07.csv"), rs);
  try {
    read_csv(dir.path / "missing.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::Io);
  }
}

TEST(Record, DemographicsValidation) {
  Demographics d;
  EXPECT_NO_THROW(validate(d));
  d.tiredness = 0;
  EXPECT_THROW(validate(d), Error);
  d = {};
  d.gender = "Q";
  EXPECT_THROW(validate(d), Error);
}
