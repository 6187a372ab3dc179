#include "shotnoise/table_io.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace shotnoise {

std::vector<double> parse_grid(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("empty grid");
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        double a = 0.0, b = 0.0, step = 1.0;
        std::vector<std::string> parts;
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ':')) parts.push_back(item);
        if (parts.size() != 2 && parts.size() != 3)
            throw std::invalid_argument("grid must be start:stop[:step]");
        a = std::stod(parts[0]);
        b = std::stod(parts[1]);
        if (parts.size() == 3) step = std::stod(parts[2]);
        if (!(step > 0.0) || b < a) throw std::invalid_argument("grid needs stop >= start, step > 0");
        for (int i = 0;; ++i) {
            const double v = a + i * step;
            if (v > b + 1e-12 * std::max(1.0, std::abs(b))) break;
            out.push_back(v);
        }
    } else {
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    }
    if (out.empty()) throw std::invalid_argument("grid produced no points");
    return out;
}

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    q += '"';
    return q;
}

}  // namespace

void Table::write_csv(std::ostream& os) const {
    for (size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << csv_quote(columns[i]);
    os << "\n";
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_g17(row[i]);
        os << "\n";
    }
}

void Table::write_json(std::ostream& os) const {
    nlohmann::ordered_json j;
    j["meta"] = meta;
    j["columns"] = columns;
    auto& jr = j["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : rows) jr.push_back(row);
    os << j.dump(2) << "\n";
}

}  // namespace shotnoise
