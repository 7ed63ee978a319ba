#include <doctest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "panverif/cli.hpp"

using namespace panverif;
namespace fs = std::filesystem;

namespace {

struct Cli {
  int code = -1;
  std::string out;
  std::string err;
};

Cli cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Cli r;
  r.code = cli_main(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "panverif-cli-tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

const std::string kListing = "samples/corpus/listing1.pnk";
const std::string kDevice = "samples/corpus/listing1_device.vpr";
const std::string kStub = STUB_BACKEND_PATH;

std::vector<std::string> verify_args(const std::string& backend, std::vector<std::string> extra = {}) {
  std::vector<std::string> a{"verify", kListing, "--device-model", kDevice, "--backend-cmd", backend};
  a.insert(a.end(), extra.begin(), extra.end());
  return a;
}

}  // namespace

TEST_CASE("transpile writes the document, source map and residual report") {
  fs::path dir = scratch("transpile");
  fs::path cwd = fs::current_path();
  fs::current_path("samples/corpus");
  auto r = cli({"transpile", "listing1.pnk", "--device-model", "listing1_device.vpr", "--out", (dir / "d.vpr").string()});
  fs::current_path(cwd);
  INFO(r.err);
  REQUIRE(r.code == 0);
  std::string doc = slurp(dir / "d.vpr");
  CHECK(doc == slurp("samples/golden/listing1.vpr"));
  auto map = nlohmann::json::parse(slurp(dir / "d.vpr.map.json"));
  CHECK(map.size() == static_cast<std::size_t>(std::count(doc.begin(), doc.end(), '\n')));
  auto residual = nlohmann::json::parse(slurp(dir / "d.vpr.residual.json"));
  CHECK(residual["count"] == 2);
  CHECK(residual["residual_bitops"][0]["function"] == "handle_irq");
}

TEST_CASE("transpile options") {
  fs::path dir = scratch("options");
  auto r = cli({"transpile", kListing, "--device-model", kDevice, "--out", (dir / "w.vpr").string(), "--word-width",
                "32", "--overflow", "wrap", "--no-bitop-rewrite"});
  INFO(r.err);
  REQUIRE(r.code == 0);
  std::string text = slurp(dir / "w.vpr");
  CHECK(text.find("word width 32, overflow wrap, bitop rewriting off") != std::string::npos);
  CHECK(text.find("bw_and32") != std::string::npos);
  CHECK(cli({"transpile", kListing, "--out", (dir / "x.vpr").string()}).code == 2);
  CHECK(cli({"transpile", kListing, "--device-model", kDevice, "--out", (dir / "x.vpr").string(), "--overflow",
             "saturate"})
            .code == 2);
}

TEST_CASE("transpile diagnostics exit with status 2") {
  fs::path dir = scratch("diag");
  write(dir / "bad.pnk", "fun f() { !st32 0x1234, 1; return 0; }\n");
  auto r = cli({"transpile", (dir / "bad.pnk").string(), "--device-model", kDevice, "--out", (dir / "o.vpr").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("bad.pnk:1:11: error[undeclared-shared-region]") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "o.vpr"));
}

TEST_CASE("parse reports unbalanced annotations with a span") {
  fs::path dir = scratch("parse");
  write(dir / "bad.pnk", "fun f() {\n  /@ assert 1 @/ @/\n  return 0;\n}\n");
  auto r = cli({"parse", (dir / "bad.pnk").string()});
  CHECK(r.code == 2);
  CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
  CHECK(r.err.find("bad.pnk:2:18: error[") != std::string::npos);

  auto ok = cli({"parse", kListing});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("fun handle_irq()") != std::string::npos);
  auto js = cli({"parse", kListing, "--json"});
  CHECK(js.code == 0);
  CHECK(nlohmann::json::parse(js.out)["functions"].size() == 6);
  CHECK(cli({"parse", (dir / "missing.pnk").string()}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);
}

TEST_CASE("run replays an environment script") {
  fs::path dir = scratch("run");
  write(dir / "ok.script",
        "# get_device_EIR then the acknowledgement\n"
        "load 0x30be0004 32 -> 0x0\n"
        "store 0x30be0004 32 0xa000000\n");
  auto r = cli({"run", kListing, "--entry", "handle_irq", "--oracle", (dir / "ok.script").string(), "--fuel", "100"});
  INFO(r.err);
  CHECK(r.code == 0);
  CHECK(r.out.find("returned 0") != std::string::npos);
  write(dir / "bad.script", "load 0x30be0004 32 -> 0x0\nstore 0x30be0004 32 0x0\n");
  auto m = cli({"run", kListing, "--entry", "handle_irq", "--oracle", (dir / "bad.script").string(), "--fuel", "100"});
  CHECK(m.code == 1);
  CHECK(m.err.find("script mismatch") != std::string::npos);
}

TEST_CASE("verify one function against the stub backend") {
  fs::path dir = scratch("verify");
  fs::path log = dir / "calls.log";
  auto r = cli(verify_args(kStub + " --log " + log.string(),
                           {"--function", "handle_irq", "--out", (dir / "l1.vpr").string()}));
  INFO(r.err);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("handle_irq: verified") != std::string::npos);
  CHECK(r.out.find("1/1 methods verified") != std::string::npos);
  CHECK(slurp(log) == (dir / "l1.handle_irq.vpr").string() + "\n");
  std::string doc = slurp(dir / "l1.handle_irq.vpr");
  CHECK(doc.find("store_EIR(device, 817758212, 167772160)") != std::string::npos);
  CHECK(doc.find("method get_device_EIR(heap: IArray, device: Ref) returns (ret: Int)\n  requires valid_device(device)\n  ensures valid_device(device)\n  ensures bounded64(ret)\n\n") !=
        std::string::npos);
}

TEST_CASE("backend errors map back to Pancake lines") {
  auto r = cli(verify_args(kStub + " --error-at \"store_EIR(device\" \"precondition of store_EIR might not hold\"",
                           {"--function", "handle_irq", "--json"}));
  CHECK(r.code == 1);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["verified"] == false);
  const auto& m = j["methods"][0];
  CHECK(m["method"] == "handle_irq");
  CHECK(m["verdict"] == "failed");
  CHECK(m["errors"][0]["source"]["line"] == 29);
  CHECK(m["errors"][0]["source"]["col"] == 5);
  CHECK(m["errors"][0]["message"] == "precondition of store_EIR might not hold");

  auto text = cli(verify_args(kStub + " --error-at \"store_EIR(device\" boom", {"--function", "handle_irq"}));
  CHECK(text.out.find("listing1.pnk:29:5: boom") != std::string::npos);

  auto stray = cli(verify_args(kStub + " --error 1 \"bad header\""));
  CHECK(stray.code == 1);
  CHECK(stray.out.find("unmapped: error 1 bad header") != std::string::npos);
  CHECK(stray.out.find("0/6 methods verified") != std::string::npos);
}

TEST_CASE("whole-document verification attributes errors to methods") {
  auto r = cli(verify_args(kStub + " --fail-on rx_provide --fail-on tx_return"));
  CHECK(r.code == 1);
  CHECK(r.out.find("rx_provide: failed") != std::string::npos);
  CHECK(r.out.find("tx_return: failed") != std::string::npos);
  CHECK(r.out.find("handle_irq: verified") != std::string::npos);
  CHECK(r.out.find("4/6 methods verified") != std::string::npos);
}

TEST_CASE("per-function runs are independent and the report is sorted") {
  fs::path dir = scratch("jobs");
  fs::path log = dir / "calls.log";
  auto r = cli(verify_args(kStub + " --log " + log.string() + " --fail-on tx_provide",
                           {"--function", "tx_provide", "--function", "handle_irq", "--function", "rx_return",
                            "--jobs", "2", "--out", (dir / "p.vpr").string()}));
  CHECK(r.code == 1);
  auto h = r.out.find("handle_irq: verified");
  auto x = r.out.find("rx_return: verified");
  auto t = r.out.find("tx_provide: failed");
  CHECK(h < x);
  CHECK(x < t);
  CHECK(t != std::string::npos);
  std::string calls = slurp(log);
  CHECK(std::count(calls.begin(), calls.end(), '\n') == 3);
  CHECK(cli(verify_args(kStub, {"--function", "nope"})).code == 2);
}

TEST_CASE("a backend that outlives the timeout gets a timeout verdict") {
  auto start = std::chrono::steady_clock::now();
  auto r = cli(verify_args(kStub + " --sleep 5", {"--function", "handle_irq", "--function", "rx_return", "--jobs",
                                                  "2", "--timeout", "1"}));
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(r.code == 1);
  CHECK(r.out.find("handle_irq: timeout") != std::string::npos);
  CHECK(r.out.find("rx_return: timeout") != std::string::npos);
  CHECK(secs < 4);

  auto mixed = cli(verify_args(kStub + " --sleep 0", {"--function", "handle_irq", "--timeout", "5"}));
  CHECK(mixed.code == 0);
}

TEST_CASE("missing backend exits with status 3") {
  auto r = cli(verify_args("/nonexistent/verifier"));
  CHECK(r.code == 3);
  CHECK(r.err.find("backend unavailable") != std::string::npos);
  auto none = cli({"verify", kListing, "--device-model", kDevice});
  if (!std::getenv("PANVERIF_BACKEND")) {
    CHECK(none.code == 3);
    CHECK(none.err.find("PANVERIF_BACKEND") != std::string::npos);
  }
}

TEST_CASE("an empty document verifies trivially") {
  fs::path dir = scratch("empty");
  write(dir / "empty.pnk", "const A = 1;\n");
  fs::path log = dir / "calls.log";
  auto r = cli({"verify", (dir / "empty.pnk").string(), "--device-model", kDevice, "--backend-cmd",
                kStub + " --log " + log.string(), "--json"});
  CHECK(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["verified"] == true);
  CHECK(j["methods"].empty());
  CHECK_FALSE(fs::exists(log));
}
