#pragma once

#include <cstdio>
#include <string>
#include <vector>

namespace lzi::cli {

/// Comma-separated, LF-terminated rows; numbers with 17 significant digits so
/// that every double round-trips exactly.
class CsvWriter {
public:
  explicit CsvWriter(const std::vector<std::string>& header) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i > 0) text_ += ',';
      text_ += header[i];
    }
    text_ += '\n';
  }

  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i > 0) text_ += ',';
      text_ += format(values[i]);
    }
    text_ += '\n';
  }

  static std::string format(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
  }

  const std::string& str() const noexcept { return text_; }

private:
  std::string text_;
};

}  // namespace lzi::cli
