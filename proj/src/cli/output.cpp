#include "cli/output.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include "flowseek/errors.hpp"

namespace flowseek::cli {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::string_view header)
    : out_(path, std::ios::binary) {
  if (!out_) throw Error("cannot create " + path.string());
  out_ << header << '\n';
}

void CsvWriter::row(std::initializer_list<double> values) {
  line_.clear();
  bool first = true;
  for (double v : values) {
    if (!first) line_.push_back(',');
    line_ += format_double(v);
    first = false;
  }
  line_.push_back('\n');
  out_ << line_;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot create " + path.string());
  out << doc.dump(2) << '\n';
}

}  // namespace flowseek::cli
