#pragma once

// Canonical CSV dialect: UTF-8, comma separated, mandatory header, NA for
// nulls, integer epoch-ms timestamps. An optional leading "# key=value ..."
// line carries participant, scenario and nominal rate.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "comfort/error.hpp"
#include "comfort/record.hpp"

namespace comfort {

namespace csv_detail {

inline constexpr std::string_view kNa = "NA";

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline bool needs_quotes(std::string_view s) {
  return s.find_first_of(",\"\r\n") != std::string_view::npos || s == kNa;
}

inline std::string quote(std::string_view s) {
  if (!needs_quotes(s)) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

struct Field {
  std::string text;
  bool quoted = false;
  bool is_na() const { return !quoted && text == kNa; }
};

/// Splits one record. Quoted fields may contain separators, doubled quotes
/// and newlines, so the caller passes the whole stream.
inline bool read_row(std::istream& in, std::vector<Field>& out) {
  out.clear();
  int ch = in.peek();
  if (ch == EOF) return false;
  Field cur;
  bool in_quotes = false;
  while (true) {
    ch = in.get();
    if (ch == EOF) {
      out.push_back(std::move(cur));
      return true;
    }
    const char c = static_cast<char>(ch);
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          cur.text += '"';
          in.get();
        } else {
          in_quotes = false;
        }
      } else {
        cur.text += c;
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
      cur.quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur = Field{};
    } else if (c == '\n') {
      out.push_back(std::move(cur));
      return true;
    } else if (c != '\r') {
      cur.text += c;
    }
  }
}

inline double parse_double(const Field& f, std::string_view col, std::size_t row) {
  double v = 0.0;
  const auto* first = f.text.data();
  const auto* last = first + f.text.size();
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw Error(Errc::MalformedRow, "column " + std::string(col) + " value '" + f.text + "' at row " +
                                        std::to_string(row) + " is not a number",
                row);
  return v;
}

inline std::int64_t parse_int(const Field& f, std::string_view col, std::size_t row) {
  std::int64_t v = 0;
  const auto* first = f.text.data();
  const auto* last = first + f.text.size();
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw Error(Errc::MalformedRow, "column " + std::string(col) + " value '" + f.text + "' at row " +
                                        std::to_string(row) + " is not an integer",
                row);
  return v;
}

inline std::optional<double> parse_opt_double(const Field& f, std::string_view col, std::size_t row) {
  if (f.is_na()) return std::nullopt;
  return parse_double(f, col, row);
}

inline std::optional<std::string> parse_opt_string(const Field& f) {
  if (f.is_na()) return std::nullopt;
  return f.text;
}

inline void require(const Field& f, std::string_view col, std::size_t row) {
  if (f.is_na())
    throw Error(Errc::MalformedRow, "column " + std::string(col) + " must not be NA at row " + std::to_string(row),
                row);
}

}  // namespace csv_detail

inline std::string csv_header() {
  std::string h;
  for (const auto& c : canonical_columns()) h += (h.empty() ? "" : ",") + c;
  for (const auto& c : extension_columns()) h += "," + c;
  return h;
}

inline std::string format_row(const ComfortRecord& r) {
  using namespace csv_detail;
  std::string s;
  s.reserve(256);
  auto put = [&s](std::string_view v) {
    if (!s.empty()) s += ',';
    s += v;
  };
  auto put_d = [&](double v) { put(format_double(v)); };
  auto put_od = [&](const std::optional<double>& v) { put(v ? format_double(*v) : std::string(kNa)); };
  auto put_os = [&](const std::optional<std::string>& v) { put(v ? quote(*v) : std::string(kNa)); };

  s += std::to_string(r.timestamp);
  put(r.label ? std::to_string(r.label->value()) : std::string(kNa));
  put_d(r.age);
  put(quote(r.gender));
  put_d(r.weight);
  put_d(r.height);
  put_d(r.body_fat);
  put_d(r.body_temp);
  put(r.sport ? "1" : "0");
  put_d(r.meal_hours);
  put(std::to_string(r.tiredness));
  put_d(r.clothing);
  put_od(r.radiation_temp);
  put_od(r.ambient_temp_pce);
  put_d(r.ambient_temp_arduino);
  put_d(r.humidity);
  put_d(r.heart_rate);
  put_d(r.wrist_temp);
  put_d(r.gsr);
  put(quote(r.emotion_self));
  put_os(r.emotion_ml);
  put_os(r.rgb_frame_ref);
  for (const auto& k : r.keypoints) put_os(k);
  put_od(r.metabolic_rate);
  put_od(r.air_velocity);
  put(r.label ? std::string(to_string(r.label_source)) : std::string(kNa));
  put_od(r.solar_radiation_ibp);
  return s;
}

inline void write_csv(const RecordSet& rs, std::ostream& out) {
  out << "# participant=" << rs.participant_id << " scenario=" << to_string(rs.scenario)
      << " rate_hz=" << csv_detail::format_double(rs.nominal_rate_hz) << '\n';
  out << csv_header() << '\n';
  for (const auto& r : rs.records) out << format_row(r) << '\n';
}

inline std::string to_csv_string(const RecordSet& rs) {
  std::ostringstream os;
  write_csv(rs, os);
  return os.str();
}

inline void write_csv(const RecordSet& rs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  write_csv(rs, out);
  if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

/// Parses and validates a RecordSet. Row numbers in errors count data rows
/// from 1. Participant defaults to `default_participant` when the metadata
/// line is absent.
inline RecordSet read_csv(std::istream& in, const std::string& default_participant = "") {
  using namespace csv_detail;
  RecordSet rs;
  rs.participant_id = default_participant;

  std::string first;
  while (in.peek() == '#') {
    std::getline(in, first);
    std::istringstream meta(first.substr(1));
    std::string kv;
    while (meta >> kv) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) continue;
      const auto key = kv.substr(0, eq);
      const auto val = kv.substr(eq + 1);
      if (key == "participant") rs.participant_id = val;
      else if (key == "scenario") rs.scenario = scenario_from_string(val);
      else if (key == "rate_hz") rs.nominal_rate_hz = std::stod(val);
    }
  }

  std::vector<Field> fields;
  if (!read_row(in, fields)) throw Error(Errc::MalformedRow, "missing header row");
  const auto& canon = canonical_columns();
  const auto& ext = extension_columns();
  if (fields.size() < kCanonicalColumns)
    throw Error(Errc::MalformedRow, "header has " + std::to_string(fields.size()) + " columns, expected 34");
  for (std::size_t i = 0; i < kCanonicalColumns; ++i) {
    if (fields[i].text != canon[i])
      throw Error(Errc::MalformedRow, "header column " + std::to_string(i + 1) + " is '" + fields[i].text +
                                          "', expected '" + canon[i] + "'");
  }
  const std::size_t n_ext = fields.size() - kCanonicalColumns;
  if (n_ext > ext.size()) throw Error(Errc::MalformedRow, "unexpected trailing header columns");
  for (std::size_t i = 0; i < n_ext; ++i) {
    if (fields[kCanonicalColumns + i].text != ext[i])
      throw Error(Errc::MalformedRow, "unknown extension column '" + fields[kCanonicalColumns + i].text + "'");
  }
  const std::size_t width = fields.size();

  std::size_t row = 0;
  while (read_row(in, fields)) {
    if (fields.size() == 1 && fields[0].text.empty() && !fields[0].quoted) continue;  // blank line
    ++row;
    if (fields.size() != width)
      throw Error(Errc::MalformedRow,
                  "row " + std::to_string(row) + " has " + std::to_string(fields.size()) + " columns, expected " +
                      std::to_string(width),
                  row);
    ComfortRecord r;
    std::size_t c = 0;
    auto next = [&]() -> const Field& { return fields[c++]; };
    auto req_d = [&](std::string_view name) {
      const auto& f = next();
      require(f, name, row);
      return parse_double(f, name, row);
    };

    {
      const auto& f = next();
      require(f, "timestamp", row);
      r.timestamp = parse_int(f, "timestamp", row);
    }
    {
      const auto& f = next();
      if (!f.is_na()) {
        const auto v = parse_int(f, "label", row);
        if (v < ThermalLabel::kMin || v > ThermalLabel::kMax)
          throw Error(Errc::OutOfBoundsValue, "label " + std::to_string(v) + " at row " + std::to_string(row), row);
        r.label = ThermalLabel::from_int(static_cast<int>(v));
        r.label_source = LabelSource::UserRated;
      }
    }
    r.age = req_d("age");
    {
      const auto& f = next();
      require(f, "gender", row);
      r.gender = f.text;
    }
    r.weight = req_d("weight");
    r.height = req_d("height");
    r.body_fat = req_d("body_fat");
    r.body_temp = req_d("body_temp");
    {
      const auto& f = next();
      require(f, "sport", row);
      const auto v = parse_int(f, "sport", row);
      if (v != 0 && v != 1) throw Error(Errc::OutOfBoundsValue, "sport must be 0 or 1 at row " + std::to_string(row), row);
      r.sport = v == 1;
    }
    r.meal_hours = req_d("meal_hours");
    {
      const auto& f = next();
      require(f, "tiredness", row);
      const auto v = parse_int(f, "tiredness", row);
      if (v < 1 || v > 10)
        throw Error(Errc::OutOfBoundsValue, "tiredness " + std::to_string(v) + " at row " + std::to_string(row), row);
      r.tiredness = static_cast<int>(v);
    }
    r.clothing = req_d("clothing");
    r.radiation_temp = parse_opt_double(next(), "radiation_temp", row);
    r.ambient_temp_pce = parse_opt_double(next(), "ambient_temp_pce", row);
    r.ambient_temp_arduino = req_d("ambient_temp_arduino");
    r.humidity = req_d("humidity");
    r.heart_rate = req_d("heart_rate");
    r.wrist_temp = req_d("wrist_temp");
    r.gsr = req_d("gsr");
    {
      const auto& f = next();
      require(f, "emotion_self", row);
      r.emotion_self = f.text;
    }
    r.emotion_ml = parse_opt_string(next());
    r.rgb_frame_ref = parse_opt_string(next());
    for (auto& k : r.keypoints) k = parse_opt_string(next());
    r.metabolic_rate = parse_opt_double(next(), "metabolic_rate", row);
    r.air_velocity = parse_opt_double(next(), "air_velocity", row);
    if (n_ext >= 1) {
      const auto& f = next();
      if (!f.is_na()) {
        if (f.text == "UserRated") r.label_source = LabelSource::UserRated;
        else if (f.text == "Extrapolated") r.label_source = LabelSource::Extrapolated;
        else throw Error(Errc::MalformedRow, "label_source '" + f.text + "' at row " + std::to_string(row), row);
      }
    }
    if (n_ext >= 2) r.solar_radiation_ibp = parse_opt_double(next(), "solar_radiation_ibp", row);
    if (!r.label) r.label_source = LabelSource::Extrapolated;

    validate_record(r, row);
    rs.records.push_back(std::move(r));
  }
  validate_timestamps(rs);
  return rs;
}

inline RecordSet read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  return read_csv(in, path.stem().string());
}

inline RecordSet read_csv_string(const std::string& text, const std::string& participant = "") {
  std::istringstream in(text);
  return read_csv(in, participant);
}

}  // namespace comfort
