#include "argmap/report.hpp"

#include <charconv>
#include <fstream>

#include "argmap/error.hpp"
#include "argmap/io.hpp"

namespace argmap::report {
namespace {

template <typename Fn>
void for_each_csv_row(std::istream& in, const std::vector<std::string>& expected_header, Fn fn) {
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto fields = io::parse_csv_row(line);
    if (!header_seen) {
      if (fields != expected_header) throw ParseError(line_no, "unexpected CSV header");
      header_seen = true;
      continue;
    }
    if (fields.size() != expected_header.size()) {
      throw ParseError(line_no, "expected " + std::to_string(expected_header.size()) + " fields");
    }
    fn(fields, line_no);
  }
  if (!header_seen) throw ParseError(line_no, "missing CSV header");
}

int parse_int(const std::string& s, std::size_t line) {
  int v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ParseError(line, "bad integer '" + s + "'");
  return v;
}

double parse_double(const std::string& s, std::size_t line) {
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ParseError(line, "bad number '" + s + "'");
  return v;
}

}  // namespace

CsvDocument::CsvDocument(const std::string& comment, std::vector<std::string> header)
    : columns_(header.size()) {
  text_ = "# " + comment + '\n';
  text_ += io::csv_row(header);
}

void CsvDocument::row(const std::vector<std::string>& fields) {
  if (fields.size() != columns_) throw Error("CSV row has the wrong number of fields");
  text_ += io::csv_row(fields);
}

RankingTable read_rankings(std::istream& in) {
  RankingTable table;
  for_each_csv_row(in, kRankingColumns, [&](const std::vector<std::string>& f, std::size_t line) {
    auto& ranked = table[{f[1], parse_int(f[2], line)}][f[0]][f[4]];
    const int rank = parse_int(f[5], line);
    if (rank != static_cast<int>(ranked.size()) + 1) throw ParseError(line, "ranks must be consecutive from 1");
    ranked.push_back({f[6], parse_double(f[7], line)});
  });
  return table;
}

RankingTable read_rankings_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open rankings file " + path.string());
  return read_rankings(in);
}

Pool read_pool(std::istream& in) {
  Pool pool;
  for_each_csv_row(in, kPoolColumns, [&](const std::vector<std::string>& f, std::size_t line) {
    parse_int(f[1], line);
    pool[f[2]].insert(f[3]);
  });
  return pool;
}

Pool read_pool_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("cannot open pool file " + path.string());
  return read_pool(in);
}

}  // namespace argmap::report
