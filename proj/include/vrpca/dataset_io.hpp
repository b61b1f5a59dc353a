#ifndef VRPCA_DATASET_IO_HPP
#define VRPCA_DATASET_IO_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vrpca/data_matrix.hpp"

namespace vrpca {

// On-disk dataset layouts:
//
//   dense binary  "VRPD", u32 version (=1), u32 d, u32 n, then d*n
//                 little-endian f64 values, column-major.
//   sparse text   header line "#d=<d> n=<n>", then one line per column of
//                 space-separated "index:value" tokens (0-based). An empty
//                 line is a zero column.
//   dense CSV     one column of X per row; lines starting with '#' are
//                 comments/headers.
enum class DatasetFormat { dense_binary, sparse_text, dense_csv };

inline constexpr std::uint32_t kDenseBinaryVersion = 1;

/// "vrpd", "sparse" or "csv".
DatasetFormat parse_dataset_format(std::string_view name);
std::string_view to_string(DatasetFormat format) noexcept;

void write_dense_binary(const DataMatrix& X, std::ostream& out);
void write_sparse_text(const DataMatrix& X, std::ostream& out);
void write_dense_csv(const DataMatrix& X, std::ostream& out);

DataMatrix read_dense_binary(std::istream& in);
DataMatrix read_sparse_text(std::istream& in);
DataMatrix read_dense_csv(std::istream& in);

void write_dataset(const DataMatrix& X, const std::filesystem::path& path, DatasetFormat format);

/// Reads any supported layout, detected from the file content.
DataMatrix read_dataset(const std::filesystem::path& path);
DatasetFormat detect_format(const std::filesystem::path& path);

/// X with its all-zero rows removed; kept_rows maps new row -> old row.
struct ZeroRowReduction {
  DataMatrix matrix;
  std::vector<std::size_t> kept_rows;
};
ZeroRowReduction drop_zero_rows(const DataMatrix& X);

/// Lower-case hex SHA-256 of the file bytes.
std::string file_sha256(const std::filesystem::path& path);

}  // namespace vrpca

#endif  // VRPCA_DATASET_IO_HPP
