#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "panverif/ast.hpp"
#include "panverif/verif.hpp"

namespace panverif {

struct ProcessResult {
  bool spawned = false;
  std::string spawn_error;
  bool timed_out = false;
  int exit_code = -1;
  std::string output;  // stdout and stderr, interleaved
  double seconds = 0;
};

/// Runs argv[0] (looked up on PATH) with a wall-clock limit; the child is
/// killed when the limit passes.
ProcessResult run_process(const std::vector<std::string>& argv, double timeout_seconds);

/// Whitespace-separated words; double quotes group.
std::vector<std::string> split_command(const std::string& command);

struct BackendError {
  std::size_t line = 0;  // 0 when the backend gave no line
  std::string message;
  std::optional<Span> span;  // the Pancake location of `line`, if mapped
  std::string raw;
};

enum class Verdict { Verified, Failed, Timeout };
std::string_view to_string(Verdict v);

struct MethodResult {
  std::string method;
  Verdict verdict = Verdict::Verified;
  std::vector<BackendError> errors;
  double seconds = 0;
};

struct BackendResult {
  bool available = true;
  std::string unavailable_reason;
  std::vector<MethodResult> methods;  // sorted by name

  bool verified() const;
  std::string to_text() const;
  nlohmann::json to_json() const;
};

/// Backend protocol: `<command...> <doc-path>` prints `verified` or lines of
/// `error <line> <message>` and exits 0 (verified) or 1.
///
/// `methods` are the methods the document at `doc_path` is responsible for;
/// errors are attributed through the rendered line ranges and mapped to
/// Pancake spans through its source map.
BackendResult run_backend(const std::string& doc_path, const vir::RenderedDoc& rendered,
                          const std::vector<std::string>& methods, double timeout_seconds,
                          const std::string& backend_command);

/// Merges per-document results (e.g. one per `--function`) into one report.
BackendResult merge_results(std::vector<BackendResult> parts);

}  // namespace panverif
