#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "topolow/dense_matrix.hpp"
#include "topolow/dissimilarity.hpp"

namespace topolow {

class Configuration;  // configuration.hpp

namespace csv {

enum class Layout { Auto, Long, Wide };

/// Cell token grammar: decimal ("12.5"), "<x" (left-censored), ">x"
/// (right-censored), empty or "NA" (missing). Surrounding whitespace is
/// ignored, also between the censoring sign and the number. Throws
/// ParseError with the given position on malformed tokens.
ObservationCell parse_cell(std::string_view token, std::size_t line = 0, std::size_t column = 0);

std::string format_cell(const ObservationCell& cell);

/// Shortest round-trip decimal representation, or fixed significant digits
/// when `digits` > 0. Locale independent.
std::string format_number(double value, int digits = 0);

/// Labelled grid of cells as read from a file, before any interpretation as
/// similarity or dissimilarity.
struct CellGrid {
  std::vector<std::string> labels;
  std::vector<ObservationCell> cells;  // row-major
};

CellGrid read_grid(std::istream& in, Layout layout = Layout::Auto);
CellGrid read_grid_file(const std::filesystem::path& path, Layout layout = Layout::Auto);

DissimilarityMatrix to_dissimilarity(CellGrid grid);
SimilarityMatrix to_similarity(CellGrid grid);

DissimilarityMatrix read_dissimilarity_file(const std::filesystem::path& path,
                                            Layout layout = Layout::Auto);

void write_wide(std::ostream& out, const DissimilarityMatrix& d);
void write_wide(std::ostream& out, const DenseMatrix& values, const std::vector<std::string>& labels);

/// Coordinates as `label,dim_1,...,dim_N` with 17 significant digits.
void write_coordinates(std::ostream& out, const Configuration& config,
                       const std::vector<std::string>& labels);

struct LabelledCoordinates {
  std::vector<std::string> labels;
  DenseMatrix coords;
};
LabelledCoordinates read_coordinates(std::istream& in);
LabelledCoordinates read_coordinates_file(const std::filesystem::path& path);

/// Splits one CSV record on commas, trimming whitespace and surrounding
/// double quotes.
std::vector<std::string> split_record(std::string_view line);

std::string_view trim(std::string_view s) noexcept;

void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace csv
}  // namespace topolow
