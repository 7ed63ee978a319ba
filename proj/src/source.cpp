#include "panverif/source.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "panverif/diagnostic.hpp"

namespace panverif {

SourceFile::SourceFile(std::string path, std::string text)
    : path_(std::make_shared<const std::string>(std::move(path))), text_(std::move(text)) {
  line_starts_.push_back(0);
  for (std::size_t i = 0; i < text_.size(); ++i) {
    if (text_[i] == '\n') line_starts_.push_back(i + 1);
  }
}

SourceFile SourceFile::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return SourceFile(path.string(), buffer.str());
}

std::pair<std::uint32_t, std::uint32_t> SourceFile::location(std::size_t offset) const {
  offset = std::min(offset, text_.size());
  auto it = std::upper_bound(line_starts_.begin(), line_starts_.end(), offset);
  auto line = static_cast<std::size_t>(it - line_starts_.begin());
  auto col = offset - line_starts_[line - 1] + 1;
  return {static_cast<std::uint32_t>(line), static_cast<std::uint32_t>(col)};
}

std::string format(const Diagnostic& d) {
  return d.span.to_string() + ": error[" + d.code + "]: " + d.message;
}

std::string format(const std::vector<Diagnostic>& diagnostics) {
  std::string out;
  for (const auto& d : diagnostics) out += format(d) + "\n";
  return out;
}

}  // namespace panverif
