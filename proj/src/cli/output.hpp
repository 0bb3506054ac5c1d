#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>

#include "json.hpp"

namespace flowseek::cli {

// Shortest representation that parses back to the same double; "nan", "inf"
// and "-inf" for non-finite values.
std::string format_double(double v);

class CsvWriter {
 public:
  // Throws flowseek::Error when the file cannot be created.
  CsvWriter(const std::filesystem::path& path, std::string_view header);
  void row(std::initializer_list<double> values);

 private:
  std::ofstream out_;
  std::string line_;
};

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace flowseek::cli
