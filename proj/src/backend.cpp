#include "panverif/backend.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <sstream>

extern char** environ;

namespace panverif {

using nlohmann::json;

ProcessResult run_process(const std::vector<std::string>& argv, double timeout_seconds) {
  ProcessResult r;
  if (argv.empty()) {
    r.spawn_error = "empty command";
    return r;
  }
  int fds[2];
  if (pipe(fds) != 0) {
    r.spawn_error = std::strerror(errno);
    return r;
  }
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addclose(&actions, fds[0]);
  posix_spawn_file_actions_adddup2(&actions, fds[1], 1);
  posix_spawn_file_actions_adddup2(&actions, fds[1], 2);
  posix_spawn_file_actions_addclose(&actions, fds[1]);

  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  auto start = std::chrono::steady_clock::now();
  pid_t pid = 0;
  int rc = posix_spawnp(&pid, args[0], &actions, nullptr, args.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  close(fds[1]);
  if (rc != 0) {
    close(fds[0]);
    r.spawn_error = std::string(argv[0]) + ": " + std::strerror(rc);
    return r;
  }
  r.spawned = true;

  auto deadline = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                              std::chrono::duration<double>(timeout_seconds));
  char buf[4096];
  bool open = true;
  while (open) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      r.timed_out = true;
      break;
    }
    pollfd p{fds[0], POLLIN, 0};
    int n = poll(&p, 1, static_cast<int>(std::min<long long>(left.count(), 1000)));
    if (n < 0 && errno != EINTR) break;
    if (n <= 0) continue;
    ssize_t got = read(fds[0], buf, sizeof buf);
    if (got > 0)
      r.output.append(buf, static_cast<std::size_t>(got));
    else if (got == 0 || errno != EINTR)
      open = false;
  }
  close(fds[0]);
  if (r.timed_out) kill(pid, SIGKILL);
  int status = 0;
  while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (!r.timed_out) {
    if (WIFEXITED(status))
      r.exit_code = WEXITSTATUS(status);
    else if (WIFSIGNALED(status))
      r.exit_code = 128 + WTERMSIG(status);
  }
  // a command that exec could not start reports 127 from the child
  if (!r.timed_out && r.exit_code == 127 && r.output.empty()) {
    r.spawned = false;
    r.spawn_error = argv[0] + ": command not found";
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<std::string> split_command(const std::string& command) {
  std::vector<std::string> out;
  std::string cur;
  bool in_word = false, quoted = false;
  for (char c : command) {
    if (c == '"') {
      quoted = !quoted;
      in_word = true;
    } else if (!quoted && std::isspace(static_cast<unsigned char>(c))) {
      if (in_word) out.push_back(cur);
      cur.clear();
      in_word = false;
    } else {
      cur += c;
      in_word = true;
    }
  }
  if (in_word) out.push_back(cur);
  return out;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Verified: return "verified";
    case Verdict::Failed: return "failed";
    case Verdict::Timeout: return "timeout";
  }
  return "?";
}

bool BackendResult::verified() const {
  if (!available) return false;
  return std::all_of(methods.begin(), methods.end(),
                     [](const MethodResult& m) { return m.verdict == Verdict::Verified; });
}

std::string BackendResult::to_text() const {
  std::ostringstream out;
  if (!available) {
    out << "backend unavailable: " << unavailable_reason << "\n";
    return out.str();
  }
  for (const auto& m : methods) {
    out << m.method << ": " << to_string(m.verdict);
    char t[32];
    std::snprintf(t, sizeof t, " (%.2fs)", m.seconds);
    out << t << "\n";
    for (const auto& e : m.errors) {
      if (e.span)
        out << "  " << e.span->to_string() << ": " << e.message << "\n";
      else
        out << "  unmapped: " << e.raw << "\n";
    }
  }
  std::size_t ok = std::count_if(methods.begin(), methods.end(),
                                 [](const MethodResult& m) { return m.verdict == Verdict::Verified; });
  out << ok << "/" << methods.size() << " methods verified\n";
  return out.str();
}

json BackendResult::to_json() const {
  json j{{"available", available}, {"verified", verified()}};
  if (!available) j["reason"] = unavailable_reason;
  json ms = json::array();
  for (const auto& m : methods) {
    json errs = json::array();
    for (const auto& e : m.errors) {
      json je{{"line", e.line}, {"message", e.message}, {"raw", e.raw}};
      if (e.span)
        je["source"] = json{{"file", e.span->file_name()}, {"line", e.span->line}, {"col", e.span->col}};
      else
        je["source"] = nullptr;
      errs.push_back(je);
    }
    ms.push_back(json{{"method", m.method},
                      {"verdict", std::string(to_string(m.verdict))},
                      {"seconds", m.seconds},
                      {"errors", errs}});
  }
  j["methods"] = ms;
  return j;
}

namespace {

std::optional<BackendError> parse_error_line(const std::string& line) {
  std::istringstream in(line);
  std::string word;
  if (!(in >> word) || word != "error") return std::nullopt;
  BackendError e;
  e.raw = line;
  std::string num;
  if (in >> num && !num.empty() && std::all_of(num.begin(), num.end(), ::isdigit)) {
    e.line = std::stoul(num);
    std::getline(in >> std::ws, e.message);
  } else {
    e.message = line.substr(std::min(line.size(), std::size_t{6}));
  }
  return e;
}

std::string owner_of(std::size_t line, const vir::RenderedDoc& rendered, const std::vector<std::string>& methods) {
  for (const auto& m : methods) {
    auto it = rendered.method_lines.find(m);
    if (it != rendered.method_lines.end() && it->second.first <= line && line <= it->second.second) return m;
  }
  return {};
}

}  // namespace

BackendResult run_backend(const std::string& doc_path, const vir::RenderedDoc& rendered,
                          const std::vector<std::string>& methods, double timeout_seconds,
                          const std::string& backend_command) {
  BackendResult result;
  if (methods.empty()) return result;
  auto argv = split_command(backend_command);
  if (argv.empty()) {
    result.available = false;
    result.unavailable_reason = "no backend command configured (set PANVERIF_BACKEND or --backend-cmd)";
    return result;
  }
  argv.push_back(doc_path);
  ProcessResult pr = run_process(argv, timeout_seconds);
  if (!pr.spawned) {
    result.available = false;
    result.unavailable_reason = pr.spawn_error;
    return result;
  }

  std::map<std::string, MethodResult> by_method;
  for (const auto& m : methods) by_method[m] = MethodResult{m, Verdict::Verified, {}, pr.seconds};

  if (pr.timed_out) {
    for (auto& [k, m] : by_method) m.verdict = Verdict::Timeout;
  } else {
    std::vector<BackendError> stray;
    std::istringstream lines(pr.output);
    std::string line;
    while (std::getline(lines, line)) {
      auto e = parse_error_line(line);
      if (!e) continue;
      if (const Span* s = rendered.span_for_line(e->line)) e->span = *s;
      std::string owner = owner_of(e->line, rendered, methods);
      if (owner.empty())
        stray.push_back(*e);
      else
        by_method[owner].errors.push_back(*e);
    }
    if (pr.exit_code != 0 && stray.empty() &&
        std::all_of(by_method.begin(), by_method.end(), [](const auto& kv) { return kv.second.errors.empty(); })) {
      BackendError e;
      e.message = "backend exited with status " + std::to_string(pr.exit_code);
      e.raw = pr.output.empty() ? e.message : pr.output;
      stray.push_back(e);
    }
    for (auto& [k, m] : by_method)
      if (!m.errors.empty()) m.verdict = Verdict::Failed;
    // errors outside any method (preamble, imported models) fail the whole document
    if (!stray.empty()) {
      for (auto& [k, m] : by_method) {
        m.verdict = Verdict::Failed;
        for (const auto& e : stray) m.errors.push_back(e);
      }
    }
  }
  for (auto& [k, m] : by_method) result.methods.push_back(std::move(m));
  return result;
}

BackendResult merge_results(std::vector<BackendResult> parts) {
  BackendResult out;
  for (auto& p : parts) {
    if (!p.available) {
      out.available = false;
      out.unavailable_reason = p.unavailable_reason;
    }
    for (auto& m : p.methods) out.methods.push_back(std::move(m));
  }
  std::sort(out.methods.begin(), out.methods.end(),
            [](const MethodResult& a, const MethodResult& b) { return a.method < b.method; });
  return out;
}

}  // namespace panverif
