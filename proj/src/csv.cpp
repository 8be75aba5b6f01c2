#include "og/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "og/errors.hpp"

namespace og::csv {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) {
    raise(Errc::missing_input, "no such file: " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    raise(Errc::io_error, "cannot open " + path.string());
  }
  std::string content;
  in.seekg(0, std::ios::end);
  content.resize(static_cast<std::size_t>(in.tellg()));
  in.seekg(0);
  in.read(content.data(), static_cast<std::streamsize>(content.size()));
  if (in.bad()) {
    raise(Errc::io_error, "read failure on " + path.string());
  }
  return content;
}

Reader::Reader(const std::filesystem::path& path, std::string_view expected_header)
    : Reader(path, {expected_header}) {}

Reader::Reader(const std::filesystem::path& path,
               std::initializer_list<std::string_view> accepted_headers)
    : path_(path), buffer_(read_file(path)) {
  // Locate the header: first non-comment, non-blank line.
  std::string_view line;
  while (next_line(line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::string_view body = trim(line.substr(1));
      if (auto eq = body.find('='); eq != std::string_view::npos) {
        directives_.emplace(std::string(trim(body.substr(0, eq))),
                            std::string(trim(body.substr(eq + 1))));
      }
      continue;
    }
    int idx = 0;
    for (const std::string_view header : accepted_headers) {
      if (line == header) {
        matched_header_ = idx;
        return;
      }
      ++idx;
    }
    fail("unrecognized header '" + std::string(line) + "'");
  }
  raise(Errc::empty_file, path_.string() + ": no header row");
}

bool Reader::next_line(std::string_view& out) {
  if (pos_ >= buffer_.size()) return false;
  const std::size_t start = pos_;
  const std::size_t nl = buffer_.find('\n', pos_);
  if (nl == std::string::npos) {
    pos_ = buffer_.size();
    out = std::string_view(buffer_).substr(start);
  } else {
    pos_ = nl + 1;
    out = std::string_view(buffer_).substr(start, nl - start);
  }
  ++line_;
  return true;
}

bool Reader::next() {
  std::string_view line;
  while (next_line(line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::string_view body = trim(line.substr(1));
      if (auto eq = body.find('='); eq != std::string_view::npos) {
        directives_.emplace(std::string(trim(body.substr(0, eq))),
                            std::string(trim(body.substr(eq + 1))));
      }
      continue;
    }
    field_count_ = 0;
    std::string_view rest = line;
    while (true) {
      if (field_count_ == kMaxFields) fail("too many fields");
      const std::size_t comma = rest.find(',');
      std::string_view f =
          comma == std::string_view::npos ? rest : rest.substr(0, comma);
      fields_[static_cast<std::size_t>(field_count_++)] = trim(f);
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    return true;
  }
  return false;
}

double Reader::parse_double(int i) const {
  const std::string_view f = fields_[static_cast<std::size_t>(i)];
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
  if (ec != std::errc{} || ptr != f.data() + f.size() || !std::isfinite(value)) {
    fail("bad numeric field '" + std::string(f) + "'");
  }
  return value;
}

std::int64_t Reader::parse_int(int i) const {
  const std::string_view f = fields_[static_cast<std::size_t>(i)];
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
  if (ec != std::errc{} || ptr != f.data() + f.size()) {
    fail("bad integer field '" + std::string(f) + "'");
  }
  return value;
}

void Reader::fail(const std::string& what) const {
  raise(Errc::malformed_row,
        path_.string() + ":" + std::to_string(line_) + ": " + what);
}

void append_number(std::string& out, double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, static_cast<std::size_t>(ptr - buf));
  (void)ec;
}

void append_number(std::string& out, std::int64_t value) {
  char buf[24];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, static_cast<std::size_t>(ptr - buf));
  (void)ec;
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    raise(Errc::io_error, "cannot open " + path.string() + " for writing");
  }
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) {
    raise(Errc::io_error, "write failure on " + path.string());
  }
}

}  // namespace og::csv
