#include "panverif/cli.hpp"

#include <unistd.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>

#include "panverif/ast_json.hpp"
#include "panverif/backend.hpp"
#include "panverif/interp.hpp"
#include "panverif/parser.hpp"
#include "panverif/printer.hpp"
#include "panverif/source.hpp"
#include "panverif/transpile.hpp"
#include "panverif/validate.hpp"

namespace panverif {

namespace fs = std::filesystem;

namespace {

struct TranspileOpts {
  std::string file;
  std::string device_model;
  std::string neighbour_model;
  std::string out;
  unsigned width = 64;
  std::string overflow = "fail";
  bool no_rewrite = false;
};

void add_transpile_flags(CLI::App* cmd, TranspileOpts& o, bool out_required) {
  cmd->add_option("file", o.file, "Pancake source")->required();
  cmd->add_option("--device-model", o.device_model, "device model file referenced by the output")->required();
  cmd->add_option("--neighbour-model", o.neighbour_model, "neighbour model file referenced by the output");
  auto* out = cmd->add_option("--out", o.out, "output document");
  if (out_required) out->required();
  cmd->add_option("--word-width", o.width, "machine word width")->check(CLI::IsMember({32, 64}));
  cmd->add_option("--overflow", o.overflow, "overflow policy")->check(CLI::IsMember({"fail", "wrap"}));
  cmd->add_flag("--no-bitop-rewrite", o.no_rewrite, "leave every bitwise operation to the residual helpers");
}

std::optional<Program> load_program(const std::string& path, unsigned width, std::ostream& err) {
  std::optional<SourceFile> src;
  try {
    src = SourceFile::load(path);
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return std::nullopt;
  }
  auto parsed = parse_program(*src, width);
  if (!parsed.ok()) {
    err << format(parsed.diagnostics);
    return std::nullopt;
  }
  auto diags = validate_program(*parsed.program);
  if (!diags.empty()) {
    err << format(diags);
    return std::nullopt;
  }
  return std::move(parsed.program);
}

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  return std::string(std::istreambuf_iterator<char>(in), {});
}

bool write_file(const fs::path& path, const std::string& text, std::ostream& err) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    err << "cannot write " << path.string() << "\n";
    return false;
  }
  return true;
}

EncodingConfig make_config(const TranspileOpts& o, std::ostream& err) {
  EncodingConfig cfg;
  cfg.word_width = o.width;
  cfg.overflow = o.overflow == "wrap" ? OverflowPolicy::Wrap : OverflowPolicy::Fail;
  cfg.rewrite_bitops = !o.no_rewrite;
  cfg.device_model = o.device_model;
  cfg.neighbour_model = o.neighbour_model;
  ModelMethods models;
  bool any = false;
  for (const auto& path : {o.device_model, o.neighbour_model}) {
    if (path.empty()) continue;
    if (auto text = read_file(path)) {
      models.merge(scan_model_methods(*text));
      any = true;
    } else {
      err << "warning: cannot read model file " << path << "; model methods are not checked\n";
    }
  }
  if (any) cfg.model_methods = std::move(models);
  return cfg;
}

struct Transpiled {
  Program program;
  TranspileResult result;
};

std::optional<Transpiled> transpile_file(const TranspileOpts& o, const EncodingConfig& cfg, std::ostream& err) {
  auto program = load_program(o.file, o.width, err);
  if (!program) return std::nullopt;
  Transpiled t{*program, transpile_program(*program, cfg, fs::path(o.file).filename().string())};
  if (!t.result.ok()) {
    err << format(t.result.diagnostics);
    return std::nullopt;
  }
  return t;
}

bool write_outputs(const fs::path& out, const vir::RenderedDoc& rendered, const ResidualReport* residual,
                   std::ostream& err) {
  if (!write_file(out, rendered.text, err)) return false;
  if (!write_file(out.string() + ".map.json", source_map_json(rendered).dump(2) + "\n", err)) return false;
  if (residual && !write_file(out.string() + ".residual.json", residual->to_json().dump(2) + "\n", err))
    return false;
  return true;
}

int cmd_parse(const std::string& file, unsigned width, bool json, std::ostream& out, std::ostream& err) {
  auto program = load_program(file, width, err);
  if (!program) return kExitUsage;
  if (json)
    out << to_json(*program).dump(2) << "\n";
  else
    out << print_program(*program);
  return kExitOk;
}

int cmd_run(const std::string& file, unsigned width, const std::string& entry, const std::string& oracle,
            std::uint64_t fuel, const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  auto program = load_program(file, width, err);
  if (!program) return kExitUsage;
  auto text = read_file(oracle);
  if (!text) {
    err << "cannot read oracle script " << oracle << "\n";
    return kExitUsage;
  }
  std::vector<ScriptEntry> script;
  try {
    script = parse_script(*text);
  } catch (const std::exception& e) {
    err << oracle << ": " << e.what() << "\n";
    return kExitUsage;
  }
  std::vector<Value> args;
  for (const auto& a : raw_args) {
    try {
      std::size_t used = 0;
      args.push_back(Value::word(std::stoull(a, &used, 0)));
      if (used != a.size()) throw std::invalid_argument(a);
    } catch (const std::exception&) {
      err << "bad --arg value '" << a << "'\n";
      return kExitUsage;
    }
  }
  if (!program->find_function(entry)) {
    err << "no function named '" << entry << "'\n";
    return kExitUsage;
  }
  auto result = replay_script(*program, entry, args, script, fuel);
  if (auto* mismatch = std::get_if<ScriptMismatch>(&result)) {
    err << "script mismatch: " << mismatch->to_string() << "\n";
    return kExitFailed;
  }
  const auto& run = std::get<RunResult>(result);
  for (const auto& ev : run.trace) out << to_string(ev) << "\n";
  out << run.summary() << "\n";
  bool ok = std::holds_alternative<Returned>(run.outcome) || std::holds_alternative<Raised>(run.outcome);
  return ok ? kExitOk : kExitFailed;
}

int cmd_transpile(const TranspileOpts& o, std::ostream& out, std::ostream& err) {
  EncodingConfig cfg = make_config(o, err);
  auto t = transpile_file(o, cfg, err);
  if (!t) return kExitUsage;
  auto rendered = vir::render(t->result.doc);
  if (!write_outputs(o.out, rendered, &t->result.residual, err)) return kExitUsage;
  out << "wrote " << o.out << " (" << t->result.doc.methods.size() << " methods, "
      << t->result.residual.entries.size() << " residual bitops)\n";
  return kExitOk;
}

struct VerifyOpts {
  std::vector<std::string> functions;
  double timeout = 600;
  std::string backend_cmd;
  unsigned jobs = 1;
  bool json = false;
};

int cmd_verify(TranspileOpts o, const VerifyOpts& v, std::ostream& out, std::ostream& err) {
  std::string backend = v.backend_cmd;
  if (backend.empty())
    if (const char* env = std::getenv("PANVERIF_BACKEND")) backend = env;
  if (backend.empty()) {
    err << "no backend command configured (set PANVERIF_BACKEND or --backend-cmd)\n";
    return kExitNoBackend;
  }
  // the document may be written elsewhere, so models are imported by absolute path
  if (!o.device_model.empty()) o.device_model = fs::absolute(o.device_model).string();
  if (!o.neighbour_model.empty()) o.neighbour_model = fs::absolute(o.neighbour_model).string();
  EncodingConfig cfg = make_config(o, err);
  auto t = transpile_file(o, cfg, err);
  if (!t) return kExitUsage;
  const auto& doc = t->result.doc;

  fs::path base;
  if (o.out.empty()) {
    fs::path dir = fs::temp_directory_path() / ("panverif-" + std::to_string(getpid()));
    fs::create_directories(dir);
    base = dir / (fs::path(o.file).stem().string() + ".vpr");
  } else {
    base = o.out;
  }

  std::vector<std::pair<fs::path, std::vector<std::string>>> jobs;
  std::vector<vir::RenderedDoc> renders;
  if (v.functions.empty()) {
    renders.push_back(vir::render(doc));
    if (!write_outputs(base, renders.back(), &t->result.residual, err)) return kExitUsage;
    std::vector<std::string> names;
    for (const auto& m : doc.methods) names.push_back(m.name);
    jobs.push_back({base, names});
  } else {
    for (const auto& fn : v.functions) {
      const vir::VerifMethod* method = nullptr;
      for (std::size_t i = 0; i < t->program.functions.size(); ++i)
        if (t->program.functions[i].name == fn) method = &doc.methods[i];
      if (!method) {
        err << "no function named '" << fn << "'\n";
        return kExitUsage;
      }
      renders.push_back(vir::render(doc, method->name));
      fs::path path = base;
      path.replace_extension("." + fn + ".vpr");
      if (!write_outputs(path, renders.back(), nullptr, err)) return kExitUsage;
      jobs.push_back({path, {method->name}});
    }
  }

  std::vector<BackendResult> parts(jobs.size());
  unsigned width = std::max(1u, v.jobs);
  for (std::size_t start = 0; start < jobs.size(); start += width) {
    std::vector<std::future<BackendResult>> running;
    for (std::size_t i = start; i < std::min(jobs.size(), start + width); ++i)
      running.push_back(std::async(std::launch::async, [&, i] {
        return run_backend(jobs[i].first.string(), renders[i], jobs[i].second, v.timeout, backend);
      }));
    for (std::size_t i = 0; i < running.size(); ++i) parts[start + i] = running[i].get();
  }
  BackendResult report = merge_results(std::move(parts));
  if (v.json)
    out << report.to_json().dump(2) << "\n";
  else
    out << report.to_text();
  if (!report.available) {
    err << "backend unavailable: " << report.unavailable_reason << "\n";
    return kExitNoBackend;
  }
  return report.verified() ? kExitOk : kExitFailed;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Pancake verification front-end", "panverif"};
  app.require_subcommand(1);

  std::string file;
  unsigned width = 64;
  bool json = false;
  auto* parse = app.add_subcommand("parse", "parse and validate, then print the program");
  parse->add_option("file", file, "Pancake source")->required();
  parse->add_flag("--json", json, "print the syntax tree as JSON");
  parse->add_option("--word-width", width, "machine word width")->check(CLI::IsMember({32, 64}));

  std::string entry, oracle;
  std::uint64_t fuel = 0;
  std::vector<std::string> run_args;
  auto* run = app.add_subcommand("run", "run a function against a scripted environment");
  run->add_option("file", file, "Pancake source")->required();
  run->add_option("--entry", entry, "function to run")->required();
  run->add_option("--oracle", oracle, "environment script")->required();
  run->add_option("--fuel", fuel, "step budget")->required();
  run->add_option("--arg", run_args, "word argument (repeatable)");
  run->add_option("--word-width", width, "machine word width")->check(CLI::IsMember({32, 64}));

  TranspileOpts topts;
  auto* transpile = app.add_subcommand("transpile", "emit a verification document");
  add_transpile_flags(transpile, topts, true);

  TranspileOpts vopts;
  VerifyOpts verify_opts;
  auto* verify = app.add_subcommand("verify", "transpile and check with the external backend");
  add_transpile_flags(verify, vopts, false);
  verify->add_option("--function", verify_opts.functions, "verify only this function (repeatable)");
  verify->add_option("--timeout", verify_opts.timeout, "seconds per backend run");
  verify->add_option("--backend-cmd", verify_opts.backend_cmd, "backend command (default: $PANVERIF_BACKEND)");
  verify->add_option("--jobs", verify_opts.jobs, "concurrent backend runs");
  verify->add_flag("--json", verify_opts.json, "machine-readable report");

  std::vector<std::string> storage{"panverif"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*parse) return cmd_parse(file, width, json, out, err);
    if (*run) return cmd_run(file, width, entry, oracle, fuel, run_args, out, err);
    if (*transpile) return cmd_transpile(topts, out, err);
    if (*verify) return cmd_verify(vopts, verify_opts, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

int cli_main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_main(args, std::cout, std::cerr);
}

}  // namespace panverif
