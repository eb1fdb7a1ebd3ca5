#pragma once

#include <cstdint>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>

namespace gp_pricer {

/// Shortest decimal that reads back to the same double; empty for NaN.
std::string format_double(double v);

/// Comma-separated rows with `\n` endings. Fields are numbers or plain
/// identifiers, so no quoting is done.
class CsvWriter {
public:
    CsvWriter(std::ostream& out, std::initializer_list<std::string_view> header);

    CsvWriter& field(double v);
    CsvWriter& field(std::int64_t v);
    CsvWriter& field(int v) { return field(static_cast<std::int64_t>(v)); }
    CsvWriter& field(std::size_t v) { return field(static_cast<std::int64_t>(v)); }
    CsvWriter& field(std::string_view v);
    CsvWriter& empty();
    void end_row();

    std::size_t columns() const noexcept { return columns_; }

private:
    void separator();

    std::ostream& out_;
    std::size_t columns_;
    std::size_t in_row_ = 0;
};

}  // namespace gp_pricer
