#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace og::csv {

/// Streaming reader for the toolkit's CSV dialect: UTF-8, mandatory header
/// row, `#` comment lines anywhere, `#key=value` comments exposed as
/// directives. Field data is viewed in-place; views stay valid for the
/// lifetime of the reader.
class Reader {
 public:
  static constexpr int kMaxFields = 8;

  Reader(const std::filesystem::path& path, std::string_view expected_header);

  /// Accepts any of the listed headers; `matched_header()` tells which one.
  Reader(const std::filesystem::path& path,
         std::initializer_list<std::string_view> accepted_headers);

  int matched_header() const { return matched_header_; }

  /// Advances to the next data row. Returns false at end of file.
  bool next();

  int field_count() const { return field_count_; }
  std::string_view field(int i) const { return fields_[static_cast<std::size_t>(i)]; }
  int line() const { return line_; }
  const std::filesystem::path& path() const { return path_; }

  /// `#key=value` comment lines seen so far (the whole file for directives
  /// placed above the header, which is where writers put them).
  const std::map<std::string, std::string>& directives() const { return directives_; }

  double parse_double(int i) const;
  std::int64_t parse_int(int i) const;

  [[noreturn]] void fail(const std::string& what) const;

 private:
  std::filesystem::path path_;
  std::string buffer_;
  std::size_t pos_ = 0;
  int line_ = 0;
  int matched_header_ = 0;
  int field_count_ = 0;
  std::array<std::string_view, kMaxFields> fields_;
  std::map<std::string, std::string> directives_;

  bool next_line(std::string_view& out);
};

/// Shortest representation that round-trips exactly.
void append_number(std::string& out, double value);
void append_number(std::string& out, std::int64_t value);

/// Writes the buffer atomically-ish (truncate + write + flush); throws IoError.
void write_file(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

}  // namespace og::csv
