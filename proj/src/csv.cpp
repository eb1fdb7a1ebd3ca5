#include "gp_pricer/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace gp_pricer {

std::string format_double(double v) {
    if (std::isnan(v)) {
        return {};
    }
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (res.ec != std::errc{}) {
        throw std::runtime_error("failed to format a floating-point value");
    }
    return std::string(buf.data(), res.ptr);
}

CsvWriter::CsvWriter(std::ostream& out, std::initializer_list<std::string_view> header)
    : out_(out), columns_(header.size()) {
    for (std::string_view h : header) {
        field(h);
    }
    end_row();
}

void CsvWriter::separator() {
    if (in_row_ == columns_) {
        throw std::logic_error("too many CSV fields in row");
    }
    if (in_row_ > 0) {
        out_ << ',';
    }
    ++in_row_;
}

CsvWriter& CsvWriter::field(double v) {
    separator();
    out_ << format_double(v);
    return *this;
}

CsvWriter& CsvWriter::field(std::int64_t v) {
    separator();
    out_ << v;
    return *this;
}

CsvWriter& CsvWriter::field(std::string_view v) {
    separator();
    out_ << v;
    return *this;
}

CsvWriter& CsvWriter::empty() {
    separator();
    return *this;
}

void CsvWriter::end_row() {
    if (in_row_ != columns_) {
        throw std::logic_error("CSV row has the wrong number of fields");
    }
    out_ << '\n';
    in_row_ = 0;
}

}  // namespace gp_pricer
