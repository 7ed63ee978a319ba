#include "panverif/harness/mutants.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "panverif/diagnostic.hpp"
#include "panverif/parser.hpp"
#include "panverif/source.hpp"
#include "panverif/validate.hpp"

namespace panverif::harness {

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

Program parse_driver(const std::string& text, const std::string& name) {
  ParseResult parsed = parse_program(SourceFile(name, text));
  if (!parsed.ok()) throw std::runtime_error(format(parsed.diagnostics));
  if (auto diags = validate_program(*parsed.program); !diags.empty()) throw std::runtime_error(format(diags));
  return std::move(*parsed.program);
}

Program load_driver(const std::filesystem::path& path) {
  return parse_driver(slurp(path), path.filename().string());
}

Mutant load_mutant(const std::filesystem::path& path) {
  auto j = nlohmann::json::parse(slurp(path));
  Mutant m;
  m.name = j.at("name").get<std::string>();
  m.description = j.value("description", "");
  m.expect = j.value("expect", std::vector<std::string>{});
  for (const auto& e : j.at("edits")) m.edits.emplace_back(e.at("from").get<std::string>(), e.at("to").get<std::string>());
  return m;
}

std::vector<Mutant> load_mutants(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<Mutant> out;
  for (const auto& f : files) out.push_back(load_mutant(f));
  return out;
}

std::string apply_mutant(const std::string& source, const Mutant& m) {
  std::string out = source;
  for (const auto& [from, to] : m.edits) {
    auto at = out.find(from);
    if (at == std::string::npos || out.find(from, at + 1) != std::string::npos)
      throw std::runtime_error("mutant '" + m.name + "': edit must match exactly once: " + from);
    out.replace(at, from.size(), to);
  }
  return out;
}

}  // namespace panverif::harness
