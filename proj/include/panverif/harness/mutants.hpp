#pragma once

// Loading the mini-driver and planted-bug variants of it.

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "panverif/ast.hpp"

namespace panverif::harness {

/// Parses and validates driver source; throws std::runtime_error carrying
/// the formatted diagnostics.
Program parse_driver(const std::string& text, const std::string& name = "minidriver.pnk");
Program load_driver(const std::filesystem::path& path);

/// A textual edit script against the driver source, with the checkers
/// expected to notice it.
struct Mutant {
  std::string name;
  std::string description;
  std::vector<std::string> expect;
  std::vector<std::pair<std::string, std::string>> edits;
};

/// Reads a JSON mutant description: {"name", "description", "expect": [...],
/// "edits": [{"from", "to"}, ...]}.
Mutant load_mutant(const std::filesystem::path& path);
std::vector<Mutant> load_mutants(const std::filesystem::path& dir);

/// Applies every edit; each `from` must occur exactly once, otherwise
/// std::runtime_error.
std::string apply_mutant(const std::string& source, const Mutant& m);

}  // namespace panverif::harness
