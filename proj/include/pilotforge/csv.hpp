// SPDX-License-Identifier: Apache-2.0
//
// pilotforge - coordinated uplink pilot design for multicell massive MIMO
// Copyright (C) 2026 pilotforge contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef pilotforge_csv_H
#define pilotforge_csv_H

#include "common.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace pilotforge
{

// Cell values are either text or numbers; numbers are printed with %.17g so
// a round trip through the file reproduces the double exactly.
using CsvCell = std::variant<std::string, double, long long>;

inline std::string csv_format(const CsvCell &cell)
{
    if (std::holds_alternative<std::string>(cell))
    {
        const std::string &s = std::get<std::string>(cell);
        if (s.find_first_of(",\"\n") == std::string::npos)
            return s;
        std::string out = "\"";
        for (char c : s)
        {
            if (c == '"')
                out += '"';
            out += c;
        }
        out += '"';
        return out;
    }
    char buf[64];
    if (std::holds_alternative<double>(cell))
        std::snprintf(buf, sizeof(buf), "%.17g", std::get<double>(cell));
    else
        std::snprintf(buf, sizeof(buf), "%lld", std::get<long long>(cell));
    return buf;
}

class CsvWriter
{
  public:
    CsvWriter(const std::string &path, std::vector<std::string> header) : m_path(path), m_ncols(header.size())
    {
        m_out.open(path);
        if (!m_out)
            throw std::invalid_argument("CsvWriter: cannot open '" + path + "'");
        for (std::size_t i = 0; i < header.size(); i++)
            m_out << (i ? "," : "") << csv_format(header[i]);
        m_out << "\n";
    }

    void row(const std::vector<CsvCell> &cells)
    {
        if (cells.size() != m_ncols)
            throw std::invalid_argument("CsvWriter: row width mismatch in '" + m_path + "'");
        for (std::size_t i = 0; i < cells.size(); i++)
            m_out << (i ? "," : "") << csv_format(cells[i]);
        m_out << "\n";
        if (!m_out)
            throw numerical_error("CsvWriter: write failed for '" + m_path + "'");
    }

    void close()
    {
        if (m_out.is_open())
        {
            m_out.close();
            if (m_out.fail())
                throw numerical_error("CsvWriter: flush failed for '" + m_path + "'");
        }
    }

  private:
    std::string m_path;
    std::size_t m_ncols;
    std::ofstream m_out;
};

struct CsvTable
{
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string &name) const
    {
        for (std::size_t i = 0; i < header.size(); i++)
            if (header[i] == name)
                return i;
        throw std::invalid_argument("CsvTable: no column '" + name + "'");
    }

    double number(std::size_t row, const std::string &name) const
    {
        return std::stod(rows.at(row).at(column(name)));
    }
};

namespace detail
{
inline std::vector<std::string> split_csv_line(const std::string &line)
{
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); i++)
    {
        char c = line[i];
        if (quoted)
        {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"')
            {
                cur += '"';
                i++;
            }
            else if (c == '"')
                quoted = false;
            else
                cur += c;
        }
        else if (c == '"')
            quoted = true;
        else if (c == ',')
        {
            out.push_back(cur);
            cur.clear();
        }
        else
            cur += c;
    }
    out.push_back(cur);
    return out;
}
} // namespace detail

inline CsvTable csv_read(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("csv_read: cannot open '" + path + "'");
    CsvTable table;
    std::string line;
    bool first = true;
    while (std::getline(in, line))
    {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        auto cells = detail::split_csv_line(line);
        if (first)
        {
            table.header = cells;
            first = false;
        }
        else
        {
            if (cells.size() != table.header.size())
                throw std::invalid_argument("csv_read: ragged row in '" + path + "'");
            table.rows.push_back(std::move(cells));
        }
    }
    return table;
}

} // namespace pilotforge

#endif
