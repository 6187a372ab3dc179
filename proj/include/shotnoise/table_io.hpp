#pragma once

// Plot-ready tabular output: CSV (RFC-4180-style quoting, 17-significant-digit
// round-trip numbers) and JSON ({meta, columns, rows}); plus the CLI's
// start:stop:step grid syntax.

#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace shotnoise {

// "a:b:step" (inclusive of a, stops before overshooting b), "a:b" (step 1),
// or a comma-separated list of values.
std::vector<double> parse_grid(const std::string& text);

struct Table {
    std::map<std::string, std::string> meta;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void write_csv(std::ostream& os) const;
    void write_json(std::ostream& os) const;
};

std::string format_g17(double v);

}  // namespace shotnoise
