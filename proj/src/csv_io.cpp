#include "topolow/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "topolow/common.hpp"
#include "topolow/configuration.hpp"

namespace topolow::csv {

namespace {

constexpr std::string_view kLongHeader[] = {"object_i", "object_j", "value"};

bool is_long_header(const std::vector<std::string>& fields) {
  return fields.size() == 3 && fields[0] == kLongHeader[0] && fields[1] == kLongHeader[1] &&
         fields[2] == kLongHeader[2];
}

double parse_number(std::string_view text, std::size_t line, std::size_t column) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (text.empty() || ec != std::errc() || ptr != last) {
    throw ParseError("invalid number '" + std::string(text) + "'", line, column);
  }
  if (!std::isfinite(value)) throw ParseError("non-finite number", line, column);
  return value;
}

struct Record {
  std::vector<std::string> fields;
  std::size_t line = 0;
};

std::vector<Record> read_records(std::istream& in) {
  std::vector<Record> records;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (trim(text).empty()) continue;
    records.push_back({split_record(text), line});
  }
  return records;
}

// Column position (1-based, in characters) of field `index` in a record; only
// used for error messages so an approximation from field widths suffices.
std::size_t column_of(const Record& record, std::size_t index) {
  std::size_t column = 1;
  for (std::size_t f = 0; f < index && f < record.fields.size(); ++f)
    column += record.fields[f].size() + 1;
  return column;
}

CellGrid read_long(const std::vector<Record>& records) {
  std::vector<std::string> labels;
  std::map<std::string, std::size_t> index;
  auto intern = [&](const std::string& label) {
    auto [it, inserted] = index.emplace(label, labels.size());
    if (inserted) labels.push_back(label);
    return it->second;
  };
  struct Entry {
    std::size_t i, j;
    ObservationCell cell;
    std::size_t line;
  };
  std::vector<Entry> entries;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != 3) {
      throw ParseError("expected 3 fields (object_i,object_j,value), got " +
                           std::to_string(rec.fields.size()),
                       rec.line, 1);
    }
    if (rec.fields[0].empty() || rec.fields[1].empty())
      throw ParseError("empty object label", rec.line, 1);
    const std::size_t i = intern(rec.fields[0]);
    const std::size_t j = intern(rec.fields[1]);
    entries.push_back({i, j, parse_cell(rec.fields[2], rec.line, column_of(rec, 2)), rec.line});
  }
  const std::size_t m = labels.size();
  CellGrid grid{labels, std::vector<ObservationCell>(m * m)};
  std::vector<bool> assigned(m * m, false);
  for (const auto& e : entries) {
    const std::size_t k = e.i * m + e.j;
    if (assigned[k]) {
      throw ParseError("duplicate entry for (" + labels[e.i] + ", " + labels[e.j] + ")", e.line, 1);
    }
    assigned[k] = true;
    grid.cells[k] = e.cell;
  }
  return grid;
}

CellGrid read_wide(const std::vector<Record>& records) {
  const auto& header = records.front();
  if (header.fields.size() < 3) throw ParseError("wide header needs at least 2 labels", header.line, 1);
  std::vector<std::string> labels(header.fields.begin() + 1, header.fields.end());
  const std::size_t m = labels.size();
  if (records.size() != m + 1) {
    throw ParseError("wide matrix with " + std::to_string(m) + " column labels has " +
                         std::to_string(records.size() - 1) + " data rows",
                     records.back().line, 1);
  }
  CellGrid grid{labels, std::vector<ObservationCell>(m * m)};
  for (std::size_t r = 0; r < m; ++r) {
    const auto& rec = records[r + 1];
    if (rec.fields.size() != m + 1) {
      throw ParseError("expected " + std::to_string(m + 1) + " fields, got " +
                           std::to_string(rec.fields.size()),
                       rec.line, 1);
    }
    if (rec.fields[0] != labels[r]) {
      throw ParseError("row label '" + rec.fields[0] + "' does not match column label '" +
                           labels[r] + "'",
                       rec.line, 1);
    }
    for (std::size_t c = 0; c < m; ++c)
      grid.cells[r * m + c] = parse_cell(rec.fields[c + 1], rec.line, column_of(rec, c + 1));
  }
  return grid;
}

}  // namespace

std::string_view trim(std::string_view s) noexcept {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_record(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    auto field = trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    if (field.size() >= 2 && field.front() == '"' && field.back() == '"')
      field = trim(field.substr(1, field.size() - 2));
    fields.emplace_back(field);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

ObservationCell parse_cell(std::string_view token, std::size_t line, std::size_t column) {
  token = trim(token);
  if (token.empty() || token == "NA") return ObservationCell::missing();
  if (token.front() == '<') return ObservationCell::left_censored(parse_number(token.substr(1), line, column));
  if (token.front() == '>') return ObservationCell::right_censored(parse_number(token.substr(1), line, column));
  return ObservationCell::exact(parse_number(token, line, column));
}

std::string format_number(double value, int digits) {
  char buf[64];
  const auto result = digits > 0
                          ? std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, digits)
                          : std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, result.ptr);
}

std::string format_cell(const ObservationCell& cell) {
  switch (cell.kind) {
    case CellKind::Missing: return "NA";
    case CellKind::Exact: return format_number(cell.value);
    case CellKind::LeftCensored: return "<" + format_number(cell.value);
    case CellKind::RightCensored: return ">" + format_number(cell.value);
  }
  return "NA";
}

CellGrid read_grid(std::istream& in, Layout layout) {
  const auto records = read_records(in);
  if (records.empty()) throw ParseError("empty input", 0, 0);
  if (layout == Layout::Auto) layout = is_long_header(records.front().fields) ? Layout::Long : Layout::Wide;
  if (layout == Layout::Long) {
    if (!is_long_header(records.front().fields))
      throw ParseError("long format needs the header object_i,object_j,value", records.front().line, 1);
    return read_long(records);
  }
  return read_wide(records);
}

CellGrid read_grid_file(const std::filesystem::path& path, Layout layout) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'", 0, 0);
  return read_grid(in, layout);
}

DissimilarityMatrix to_dissimilarity(CellGrid grid) {
  return DissimilarityMatrix(std::move(grid.labels), std::move(grid.cells));
}

SimilarityMatrix to_similarity(CellGrid grid) {
  return SimilarityMatrix{std::move(grid.labels), std::move(grid.cells)};
}

DissimilarityMatrix read_dissimilarity_file(const std::filesystem::path& path, Layout layout) {
  return to_dissimilarity(read_grid_file(path, layout));
}

void write_wide(std::ostream& out, const DissimilarityMatrix& d) {
  const std::size_t m = d.size();
  out << "label";
  for (const auto& l : d.labels()) out << ',' << l;
  out << '\n';
  for (std::size_t i = 0; i < m; ++i) {
    out << d.labels()[i];
    for (std::size_t j = 0; j < m; ++j) out << ',' << format_cell(d.at(i, j));
    out << '\n';
  }
}

void write_wide(std::ostream& out, const DenseMatrix& values, const std::vector<std::string>& labels) {
  out << "label";
  for (const auto& l : labels) out << ',' << l;
  out << '\n';
  for (std::size_t i = 0; i < values.rows(); ++i) {
    out << labels[i];
    for (std::size_t j = 0; j < values.cols(); ++j) out << ',' << format_number(values(i, j));
    out << '\n';
  }
}

void write_coordinates(std::ostream& out, const Configuration& config,
                       const std::vector<std::string>& labels) {
  out << "label";
  for (std::size_t k = 0; k < config.dimension(); ++k) out << ",dim_" << (k + 1);
  out << '\n';
  for (std::size_t i = 0; i < config.size(); ++i) {
    out << labels[i];
    for (double v : config.point(i)) out << ',' << format_number(v, 17);
    out << '\n';
  }
}

LabelledCoordinates read_coordinates(std::istream& in) {
  const auto records = read_records(in);
  if (records.size() < 2) throw ParseError("coordinates file needs a header and at least one row", 0, 0);
  const auto& header = records.front();
  const std::size_t dim = header.fields.size() - 1;
  if (dim == 0 || header.fields[0] != "label")
    throw ParseError("coordinates header must be label,dim_1,...", header.line, 1);
  LabelledCoordinates out{{}, DenseMatrix(records.size() - 1, dim)};
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != dim + 1)
      throw ParseError("expected " + std::to_string(dim + 1) + " fields", rec.line, 1);
    out.labels.push_back(rec.fields[0]);
    for (std::size_t k = 0; k < dim; ++k)
      out.coords(r - 1, k) = parse_number(rec.fields[k + 1], rec.line, column_of(rec, k + 1));
  }
  return out;
}

LabelledCoordinates read_coordinates_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'", 0, 0);
  return read_coordinates(in);
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << content;
}

}  // namespace topolow::csv
