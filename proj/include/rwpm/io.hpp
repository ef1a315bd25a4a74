#pragma once

#include <concepts>
#include <cstdint>
#include <string>
#include <vector>

namespace rwpm
{
// 17 significant digits; "nan", "inf", "-inf" for the special values.
std::string format_double(double x);

std::uint64_t fnv1a64(const std::string& s);
std::string hex64(std::uint64_t x);

// Write to a temporary sibling, then rename over the target.
void write_file_atomic(const std::string& path, const std::string& content);

struct Cell
{
    std::string s;
    Cell(double x) : s(format_double(x)) {}
    Cell(bool b) : s(b ? "true" : "false") {}
    Cell(std::integral auto v) : s(std::to_string(v)) {}
    Cell(const char* v) : s(v) {}
    Cell(std::string v) : s(std::move(v)) {}
};

/*!
 * Results table written as CSV: comma separated, LF line ends, header row,
 * and the run's seed and config hash appended to every row.
 */
class CsvTable
{
  public:
    CsvTable(std::string name, std::vector<std::string> columns);

    void add(const std::vector<Cell>& row);

    const std::string& name() const { return name_; }
    const std::vector<std::string>& columns() const { return columns_; }
    std::size_t rows() const { return rows_.size(); }

    std::string render(std::uint64_t seed, const std::string& config_hash) const;

  private:
    std::string name_;
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace rwpm
