#pragma once

#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace aliased_ac {

/// Round-trip decimal text for a double ("%.17g"); "nan", "inf" otherwise.
std::string format_number(double value);

/// Minimal CSV writer with byte-stable number formatting.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void header(std::initializer_list<std::string_view> names);
  void header(const std::vector<std::string>& names);

  CsvWriter& cell(double value);
  CsvWriter& cell(long long value);
  CsvWriter& cell(int value) { return cell(static_cast<long long>(value)); }
  CsvWriter& cell(std::string_view text);
  CsvWriter& empty();
  void end_row();

 private:
  void separator();

  std::ostream& out_;
  bool row_started_ = false;
};

/// Splits one CSV line on commas (no quoting support).
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace aliased_ac
