#include "vrpca/dataset_io.hpp"

#include <openssl/evp.h>

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>

#include "vrpca/errors.hpp"

namespace vrpca {

namespace {

constexpr char kMagic[4] = {'V', 'R', 'P', 'D'};

void put_u32(std::ostream& out, std::uint32_t v) {
  std::array<char, 4> b;
  for (int j = 0; j < 4; ++j) b[j] = static_cast<char>((v >> (8 * j)) & 0xffu);
  out.write(b.data(), b.size());
}

void put_f64(std::ostream& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  std::array<char, 8> b;
  for (int j = 0; j < 8; ++j) b[j] = static_cast<char>((bits >> (8 * j)) & 0xffu);
  out.write(b.data(), b.size());
}

std::uint32_t get_u32(std::istream& in) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), b.size())) {
    throw IoError("dense binary: truncated header");
  }
  std::uint32_t v = 0;
  for (int j = 0; j < 4; ++j) v |= std::uint32_t{b[j]} << (8 * j);
  return v;
}

// Shortest round-trip decimal form, independent of the global locale.
std::string format_double(double v) {
  std::array<char, 32> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

double parse_double(std::string_view token, std::size_t line_no) {
  double v = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
    throw IoError("line " + std::to_string(line_no) + ": cannot parse number '" +
                  std::string(token) + "'");
  }
  return v;
}

template <class Int>
Int parse_int(std::string_view token, std::size_t line_no) {
  Int v{};
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
    throw IoError("line " + std::to_string(line_no) + ": cannot parse integer '" +
                  std::string(token) + "'");
  }
  return v;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

}  // namespace

DatasetFormat parse_dataset_format(std::string_view name) {
  if (name == "vrpd" || name == "binary") return DatasetFormat::dense_binary;
  if (name == "sparse") return DatasetFormat::sparse_text;
  if (name == "csv") return DatasetFormat::dense_csv;
  throw DomainError("unknown dataset format '" + std::string(name) + "'");
}

std::string_view to_string(DatasetFormat format) noexcept {
  switch (format) {
    case DatasetFormat::dense_binary: return "vrpd";
    case DatasetFormat::sparse_text: return "sparse";
    case DatasetFormat::dense_csv: return "csv";
  }
  return "unknown";
}

void write_dense_binary(const DataMatrix& X, std::ostream& out) {
  out.write(kMagic, sizeof(kMagic));
  put_u32(out, kDenseBinaryVersion);
  put_u32(out, static_cast<std::uint32_t>(X.dim()));
  put_u32(out, static_cast<std::uint32_t>(X.count()));
  for (double v : X.dense_values()) put_f64(out, v);
}

DataMatrix read_dense_binary(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw IoError("dense binary: bad magic (expected VRPD)");
  }
  const auto version = get_u32(in);
  if (version != kDenseBinaryVersion) {
    throw IoError("dense binary: unsupported version " + std::to_string(version));
  }
  const std::size_t d = get_u32(in);
  const std::size_t n = get_u32(in);
  if (d == 0 || n == 0) throw IoError("dense binary: zero dimension");
  std::vector<unsigned char> raw(d * n * 8);
  if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
    throw IoError("dense binary: truncated payload");
  }
  std::vector<double> values(d * n);
  for (std::size_t j = 0; j < values.size(); ++j) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= std::uint64_t{raw[j * 8 + b]} << (8 * b);
    values[j] = std::bit_cast<double>(bits);
  }
  return DataMatrix::dense(d, n, std::move(values));
}

void write_sparse_text(const DataMatrix& X, std::ostream& out) {
  out << "#d=" << X.dim() << " n=" << X.count() << '\n';
  for (std::size_t i = 0; i < X.count(); ++i) {
    bool first = true;
    X.column(i).for_each_nonzero([&](std::size_t r, double v) {
      if (v == 0.0) return;
      if (!first) out << ' ';
      out << r << ':' << format_double(v);
      first = false;
    });
    out << '\n';
  }
}

DataMatrix read_sparse_text(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw IoError("sparse text: empty file");
  std::size_t d = 0;
  std::size_t n = 0;
  {
    const std::string_view header = trim(line);
    const auto d_pos = header.find("#d=");
    const auto n_pos = header.find(" n=");
    if (d_pos != 0 || n_pos == std::string_view::npos) {
      throw IoError("sparse text: header must read '#d=<d> n=<n>'");
    }
    d = parse_int<std::size_t>(trim(header.substr(3, n_pos - 3)), line_no);
    n = parse_int<std::size_t>(trim(header.substr(n_pos + 3)), line_no);
  }
  if (d == 0 || n == 0) throw IoError("sparse text: d and n must be positive");

  std::vector<std::size_t> ptr{0};
  std::vector<std::uint32_t> idx;
  std::vector<double> vals;
  std::size_t columns = 0;
  while (columns < n && std::getline(in, line)) {
    ++line_no;
    std::string_view rest = trim(line);
    while (!rest.empty()) {
      const auto space = rest.find_first_of(" \t");
      const std::string_view token = rest.substr(0, space);
      rest = space == std::string_view::npos ? std::string_view{} : trim(rest.substr(space));
      const auto colon = token.find(':');
      if (colon == std::string_view::npos) {
        throw IoError("line " + std::to_string(line_no) + ": expected index:value, got '" +
                      std::string(token) + "'");
      }
      const auto r = parse_int<std::size_t>(token.substr(0, colon), line_no);
      if (r >= d) {
        throw IoError("line " + std::to_string(line_no) + ": index " + std::to_string(r) +
                      " out of range for d = " + std::to_string(d));
      }
      if (vals.size() > ptr.back() && r <= idx.back()) {
        throw IoError("line " + std::to_string(line_no) + ": indices must be strictly increasing");
      }
      idx.push_back(static_cast<std::uint32_t>(r));
      vals.push_back(parse_double(token.substr(colon + 1), line_no));
    }
    ptr.push_back(vals.size());
    ++columns;
  }
  // Trailing zero columns may be written as missing blank lines.
  while (ptr.size() < n + 1) ptr.push_back(vals.size());
  while (std::getline(in, line)) {
    if (!trim(line).empty()) throw IoError("sparse text: more columns than the header's n");
  }
  return DataMatrix::sparse(d, n, std::move(ptr), std::move(idx), std::move(vals));
}

void write_dense_csv(const DataMatrix& X, std::ostream& out) {
  out << "# d=" << X.dim() << " n=" << X.count() << '\n';
  const auto values = X.dense_values();
  for (std::size_t i = 0; i < X.count(); ++i) {
    for (std::size_t r = 0; r < X.dim(); ++r) {
      if (r) out << ',';
      out << format_double(values[i * X.dim() + r]);
    }
    out << '\n';
  }
}

DataMatrix read_dense_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t d = 0;
  std::size_t n = 0;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty() || row.front() == '#') continue;
    std::size_t fields = 0;
    std::size_t start = 0;
    while (true) {
      const auto comma = row.find(',', start);
      const auto field = trim(row.substr(start, comma == std::string_view::npos ? row.npos
                                                                                : comma - start));
      values.push_back(parse_double(field, line_no));
      ++fields;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (d == 0) d = fields;
    if (fields != d) {
      throw IoError("line " + std::to_string(line_no) + ": expected " + std::to_string(d) +
                    " fields, got " + std::to_string(fields));
    }
    ++n;
  }
  if (n == 0) throw IoError("csv: no data rows");
  return DataMatrix::dense(d, n, std::move(values));
}

void write_dataset(const DataMatrix& X, const std::filesystem::path& path, DatasetFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  switch (format) {
    case DatasetFormat::dense_binary: write_dense_binary(X, out); break;
    case DatasetFormat::sparse_text: write_sparse_text(X, out); break;
    case DatasetFormat::dense_csv: write_dense_csv(X, out); break;
  }
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

DatasetFormat detect_format(const std::filesystem::path& path) {
  auto in = open_in(path);
  char head[4] = {};
  in.read(head, 4);
  if (in.gcount() == 4 && std::memcmp(head, kMagic, 4) == 0) return DatasetFormat::dense_binary;
  if (in.gcount() >= 3 && std::memcmp(head, "#d=", 3) == 0) return DatasetFormat::sparse_text;
  return DatasetFormat::dense_csv;
}

DataMatrix read_dataset(const std::filesystem::path& path) {
  const DatasetFormat format = detect_format(path);
  auto in = open_in(path);
  switch (format) {
    case DatasetFormat::dense_binary: return read_dense_binary(in);
    case DatasetFormat::sparse_text: return read_sparse_text(in);
    case DatasetFormat::dense_csv: return read_dense_csv(in);
  }
  throw IoError("unreachable dataset format");
}

ZeroRowReduction drop_zero_rows(const DataMatrix& X) {
  std::vector<char> used(X.dim(), 0);
  for (std::size_t i = 0; i < X.count(); ++i) {
    X.column(i).for_each_nonzero([&](std::size_t r, double v) {
      if (v != 0.0) used[r] = 1;
    });
  }
  std::vector<std::size_t> kept;
  std::vector<std::uint32_t> remap(X.dim(), 0);
  for (std::size_t r = 0; r < X.dim(); ++r) {
    if (used[r]) {
      remap[r] = static_cast<std::uint32_t>(kept.size());
      kept.push_back(r);
    }
  }
  if (kept.empty()) throw DomainError("drop_zero_rows: matrix is entirely zero");
  if (kept.size() == X.dim()) return {X, std::move(kept)};

  std::vector<std::size_t> ptr{0};
  std::vector<std::uint32_t> idx;
  std::vector<double> vals;
  for (std::size_t i = 0; i < X.count(); ++i) {
    X.column(i).for_each_nonzero([&](std::size_t r, double v) {
      if (v == 0.0) return;
      idx.push_back(remap[r]);
      vals.push_back(v);
    });
    ptr.push_back(vals.size());
  }
  DataMatrix reduced =
      DataMatrix::sparse(kept.size(), X.count(), std::move(ptr), std::move(idx), std::move(vals));
  if (!X.is_sparse()) reduced = reduced.to_dense();
  return {std::move(reduced), std::move(kept)};
}

std::string file_sha256(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw IoError("sha256: digest initialization failed");
  }
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest;
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest.data(), &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int j = 0; j < len; ++j) {
    hex.push_back(kHex[digest[j] >> 4]);
    hex.push_back(kHex[digest[j] & 0xf]);
  }
  return hex;
}

}  // namespace vrpca
