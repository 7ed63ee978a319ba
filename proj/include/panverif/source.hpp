#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace panverif {

/// Source text plus a line-offset index. The path is shared with every span
/// produced from this file.
class SourceFile {
 public:
  SourceFile(std::string path, std::string text);

  /// Reads a file from disk; throws std::runtime_error if it cannot be read.
  static SourceFile load(const std::filesystem::path& path);

  const std::string& path() const { return *path_; }
  const std::shared_ptr<const std::string>& shared_path() const { return path_; }
  const std::string& text() const { return text_; }

  /// 1-based (line, column) of a byte offset. Offsets past the end map to
  /// the position just after the last byte.
  std::pair<std::uint32_t, std::uint32_t> location(std::size_t offset) const;
  std::size_t line_count() const { return line_starts_.size(); }

 private:
  std::shared_ptr<const std::string> path_;
  std::string text_;
  std::vector<std::size_t> line_starts_;
};

}  // namespace panverif
