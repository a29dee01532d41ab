#include "qsense/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>

#include "qsense/error.hpp"
#include "qsense/units.hpp"

namespace qsense {

std::string make_csv(const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& rows) {
  if (columns.empty()) throw Error("csv: no columns");
  std::string out;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c].find(',') != std::string::npos)
      throw Error("csv: column name contains a comma");
    out += columns[c];
    out += (c + 1 == columns.size()) ? '\n' : ',';
  }
  for (const auto& row : rows) {
    if (row.size() != columns.size())
      throw Error("csv: row width does not match the header");
    for (std::size_t c = 0; c < row.size(); ++c) {
      out += format_double(row[c]);
      out += (c + 1 == row.size()) ? '\n' : ',';
    }
  }
  return out;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path dir =
      path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  const std::filesystem::path tmp =
      dir / (path.filename().string() + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw Error("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ec2;
    std::filesystem::remove(tmp, ec2);
    throw Error("cannot move " + tmp.string() + " to " + path.string() + ": " +
                ec.message());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (!in.good() && !in.eof()) throw Error("read failed for " + path.string());
  return buf.str();
}

void require_writable_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
      throw Error("cannot create output directory: " + dir.string());
  }
  const std::filesystem::path probe =
      dir / (".probe" + std::to_string(::getpid()));
  std::ofstream out(probe);
  if (!out) throw Error("directory is not writable: " + dir.string());
  out.close();
  std::filesystem::remove(probe, ec);
}

}  // namespace qsense
