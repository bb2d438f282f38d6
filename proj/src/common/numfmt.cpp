#include "staug/common/numfmt.hpp"

#include "staug/common/error.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>

namespace staug {

std::string format_sig(double v, int digits)
{
    if (std::isnan(v)) {
        return {};
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

std::string format_exact(double v)
{
    if (std::isnan(v)) {
        return {};
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_cell(const std::string& cell)
{
    std::size_t b = 0;
    std::size_t e = cell.size();
    while (b < e && std::isspace(static_cast<unsigned char>(cell[b]))) {
        ++b;
    }
    while (e > b && std::isspace(static_cast<unsigned char>(cell[e - 1]))) {
        --e;
    }
    const std::string s = cell.substr(b, e - b);
    if (s.empty() || s == "nan" || s == "NaN" || s == "NA") {
        return std::numeric_limits<double>::quiet_NaN();
    }
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) {
        throw FormatError("not a number: '" + cell + "'");
    }
    return v;
}

} // namespace staug
