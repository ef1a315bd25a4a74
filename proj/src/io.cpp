#include "rwpm/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "rwpm/common.hpp"

namespace rwpm
{
std::string format_double(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::uint64_t fnv1a64(const std::string& s)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s)
    {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex64(std::uint64_t x)
{
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
    return buf;
}

void write_file_atomic(const std::string& path, const std::string& content)
{
    namespace fs = std::filesystem;
    fs::path target(path);
    if (target.has_parent_path())
        fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out)
            throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, target);
}

CsvTable::CsvTable(std::string name, std::vector<std::string> columns)
    : name_(std::move(name)), columns_(std::move(columns))
{
}

void CsvTable::add(const std::vector<Cell>& row)
{
    if (row.size() != columns_.size())
        throw DomainError("csv " + name_ + ": row has " + std::to_string(row.size()) +
                          " cells, header has " + std::to_string(columns_.size()));
    std::vector<std::string> r;
    r.reserve(row.size());
    for (const auto& c : row)
    {
        if (c.s.find_first_of(",\"\n") == std::string::npos)
        {
            r.push_back(c.s);
            continue;
        }
        std::string q = "\"";
        for (char ch : c.s)
            q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        r.push_back(q + "\"");
    }
    rows_.push_back(std::move(r));
}

std::string CsvTable::render(std::uint64_t seed, const std::string& config_hash) const
{
    std::string out;
    for (const auto& c : columns_)
        out += c + ",";
    out += "seed,config_hash\n";
    std::string tail = std::to_string(seed) + "," + config_hash + "\n";
    for (const auto& r : rows_)
    {
        for (const auto& c : r)
            out += c + ",";
        out += tail;
    }
    return out;
}

}  // namespace rwpm
