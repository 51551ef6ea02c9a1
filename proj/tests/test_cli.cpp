#include <filesystem>
#include <sstream>

#include "bifurcate/run.hpp"
#include "doctest.h"

using namespace bifurcate;
namespace fs = std::filesystem;

namespace {
struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / ("bifurcate_test_cli_" + name)) {
    fs::remove_all(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
};

struct Outcome {
  RunResult result;
  std::string log;
  std::string err;
};

Outcome invoke(const std::string& command, const std::string& yaml, const fs::path& out, bool force = false) {
  RunRequest req;
  req.command = command;
  req.config = parse_config(yaml);
  req.force = force;
  req.out = out;
  std::ostringstream log, err;
  Outcome o{run(req, log, err), {}, {}};
  o.log = log.str();
  o.err = err.str();
  return o;
}

const char* kCount = R"(schema: bifurcate.config/1
model: {M: 0.2}
run:
  a: 40
  c: -0.005
  n_starts: 800
)";
}  // namespace

TEST_CASE("count prints and records the number of solutions, byte-reproducibly") {
  Scratch s("count");
  const Outcome first = invoke("count", kCount, s.dir / "a");
  REQUIRE(first.result.status == kExitOk);
  CHECK(first.log.find("count=4\n") != std::string::npos);
  CHECK(first.log.find("indices=0,1,1,2\n") != std::string::npos);
  REQUIRE(first.result.written.size() == 1);
  const io::Json j = io::Json::parse(io::read_text(s.dir / "a" / "count.json"));
  CHECK(j["report"]["count"]["count"] == 4);
  CHECK(j["config_echo"]["run"]["n_starts"] == 800);

  const Outcome second = invoke("count", kCount, s.dir / "b");
  REQUIRE(second.result.status == kExitOk);
  CHECK(io::read_text(s.dir / "a" / "count.json") == io::read_text(s.dir / "b" / "count.json"));
}

TEST_CASE("diagram writes json, csv and svg") {
  Scratch s("diagram");
  const std::string yaml = "schema: bifurcate.config/1\nmodel: {M: 0.2}\nrun: {a: lambda1}\n";
  const Outcome o = invoke("diagram", yaml, s.dir);
  REQUIRE(o.result.status == kExitOk);
  for (const char* f : {"diagram.json", "branches.csv", "diagram.svg", "branch_M_lambda1.csv"}) {
    CHECK(fs::exists(s.dir / f));
  }
  const Outcome again = invoke("diagram", yaml, s.dir / "again");
  for (const char* f : {"diagram.json", "branches.csv", "diagram.svg"}) {
    CHECK(io::read_text(s.dir / f) == io::read_text(s.dir / "again" / f));
  }
}

TEST_CASE("exit statuses") {
  Scratch s("status");
  CHECK(invoke("check-hypotheses", "schema: bifurcate.config/1\n", s.dir).result.status == kExitOk);
  CHECK(fs::exists(s.dir / "hypotheses.json"));

  const std::string sine = "schema: bifurcate.config/1\nmodel: {harvest: first_mode}\nrun: {a: 5, c: 0.1}\n";
  CHECK(invoke("check-hypotheses", sine, s.dir).result.status == kExitVerifyFailed);
  const Outcome gated = invoke("count", sine, s.dir);
  CHECK(gated.result.status == kExitError);
  CHECK(gated.err.find("--force") != std::string::npos);
  CHECK(invoke("count", sine, s.dir, true).result.status == kExitOk);

  // a = 5 is not in the (lambda1, lambda2) regime, so the regime claim fails.
  const std::string wrong = "schema: bifurcate.config/1\nrun: {a: 5, regime: theorem1}\n";
  CHECK(invoke("verify", wrong, s.dir).result.status == kExitVerifyFailed);
  CHECK(fs::exists(s.dir / "verification_report.json"));

  CHECK(invoke("count", "schema: bifurcate.config/1\n", s.dir).result.status == kExitError);
  CHECK(invoke("diagram", "schema: bifurcate.config/1\nrun: {a: lambda3}\n", s.dir).result.status == kExitError);
  CHECK(invoke("launch", kCount, s.dir).result.status == kExitError);
  CHECK(invoke("diagram", "schema: bifurcate.config/1\nrun: {command: count}\n", s.dir).result.status == kExitError);
}

TEST_CASE("curve commands") {
  Scratch s("curves");
  const Outcome fold = invoke("fold-curve",
                              "schema: bifurcate.config/1\nmodel: {M: 0}\nrun: {a: 20, a_values: [12, 20, 30]}\n",
                              s.dir);
  REQUIRE(fold.result.status == kExitOk);
  const std::string csv = io::read_text(s.dir / "fold_curve.csv");
  CHECK(csv.rfind("a,c,residual,kernel_residual,slope_formula,slope_secant,morse_index\n", 0) == 0);
  CHECK(csv.find("\n20,110.714875466,") != std::string::npos);

  const Outcome ds =
      invoke("dsigma-curve", "schema: bifurcate.config/1\nrun: {t_values: [-1, 0, 1]}\n", s.dir);
  REQUIRE(ds.result.status == kExitOk);
  CHECK(fs::exists(s.dir / "dsigma_curve.csv"));

  const Outcome cz =
      invoke("czero-branch", "schema: bifurcate.config/1\nrun: {a_values: [12, 15, 20]}\n", s.dir);
  REQUIRE(cz.result.status == kExitOk);
  const std::string rows = io::read_text(s.dir / "czero_branch.csv");
  CHECK(std::count(rows.begin(), rows.end(), '\n') == 4);

  const Outcome cont = invoke(
      "continue", "schema: bifurcate.config/1\nmodel: {M: 0}\nrun: {a: 20, stop_at_fold: false, c_max: 200}\n", s.dir);
  REQUIRE(cont.result.status == kExitOk);
  const io::Json j = io::Json::parse(io::read_text(s.dir / "continue.json"));
  CHECK(j["degenerate_points"].size() == 1);
}
