#include "bifurcate/run.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace bifurcate {

namespace {

std::string g(Real x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.10Lg", x);
  return buf;
}

class Session {
 public:
  Session(const RunRequest& req, std::ostream& log)
      : req_(req), cfg_(req.config), log_(log), dir_(req.out ? *req.out : req.config.directory), pb_(cfg_.problem()) {}

  int dispatch() {
    const HypothesisReport hyp = check_hypotheses(cfg_.nonlinearity, cfg_.harvest, pb_.domain());
    if (req_.command == "check-hypotheses") return check(hyp);
    if (!hyp.all_pass()) {
      std::string failed;
      for (const auto& c : hyp.checks) {
        if (!c.pass) failed += (failed.empty() ? "" : ", ") + c.tag;
      }
      if (!req_.force) throw ModelError("hypotheses fail (" + failed + "); rerun with --force to proceed anyway");
      log_ << "warning: hypotheses fail (" << failed << "); continuing because of --force\n";
    }
    if (req_.command == "continue") return continue_cmd();
    if (req_.command == "fold-curve") return fold_curve();
    if (req_.command == "dsigma-curve") return dsigma_curve();
    if (req_.command == "czero-branch") return czero_branch();
    if (req_.command == "diagram") return diagram();
    if (req_.command == "verify") return verify();
    if (req_.command == "count") return count();
    throw DomainError("unknown command '" + req_.command + "'");
  }

  std::vector<std::filesystem::path> written;

 private:
  Real a() const {
    if (!cfg_.a) throw DomainError("run.a is required for " + req_.command);
    return resolve_a(*cfg_.a, pb_, cfg_.chart_halfwidth);
  }

  std::vector<Real> a_values() const {
    if (cfg_.a_values.empty()) throw DomainError("run.a_values is required for " + req_.command);
    std::vector<Real> v;
    for (const auto& e : cfg_.a_values) v.push_back(resolve_a(e, pb_, cfg_.chart_halfwidth));
    return v;
  }

  ContinuationOptions continuation() const {
    ContinuationOptions o;
    o.tolerance = cfg_.tolerance;
    o.max_step = cfg_.max_step;
    o.stop_at_fold = cfg_.stop_at_fold;
    return o;
  }

  void emit(const std::string& name, const std::string& text) {
    const auto path = dir_ / name;
    io::write_text(path, text);
    written.push_back(path);
    log_ << "wrote " << path.generic_string() << '\n';
  }

  void emit_json(const std::string& name, const io::Json& j) {
    if (cfg_.wants("json")) emit(name, io::dump(j));
  }

  void emit_branch_csv(const std::string& name, const Branch& b) {
    if (!cfg_.wants("csv") || b.empty()) return;
    std::ostringstream os;
    io::emit_csv(os, pb_, b);
    emit(name, os.str());
  }

  io::Json branches_json(const std::vector<Branch>& bs) const {
    io::Json j = io::Json::array();
    for (const auto& b : bs) j.push_back(io::to_json(b));
    return j;
  }

  io::Json points_json(const std::vector<Branch>& bs) const {
    io::Json j = io::Json::array();
    for (const auto& b : bs) {
      for (const auto& p : b.degenerate) j.push_back(io::to_json(p));
    }
    return j;
  }

  int check(const HypothesisReport& hyp) {
    for (const auto& c : hyp.checks) {
      log_ << (c.pass ? "pass " : "FAIL ") << c.tag << "  " << c.witness << " = " << g(c.value);
      if (!c.note.empty()) log_ << "  (" << c.note << ")";
      log_ << '\n';
    }
    io::Json report;
    report["hypotheses"] = io::to_json(hyp);
    emit_json("hypotheses.json", io::envelope(config_echo(cfg_), "", nullptr, nullptr, report));
    return hyp.all_pass() ? kExitOk : kExitVerifyFailed;
  }

  int continue_cmd() {
    const Real av = a();
    const SolutionPoint start = newton_solve(pb_, pb_.zeros(), av, cfg_.c);
    const CLimits lims{cfg_.c_min, cfg_.c_max};
    std::vector<Branch> bs;
    if (cfg_.direction == 0) {
      bs.push_back(continue_through(pb_, start, lims, continuation(), "branch"));
    } else {
      Branch b = continue_branch(pb_, start, cfg_.direction, lims, continuation());
      b.label = "branch";
      bs.push_back(std::move(b));
    }
    const Branch& b = bs.front();
    log_ << "points=" << b.size() << " end=" << b.end_reason << " folds=" << b.degenerate.size() << '\n';
    io::Json report;
    report["start"] = io::to_json(start);
    emit_json("continue.json", io::envelope(config_echo(cfg_), "", branches_json(bs), points_json(bs), report));
    emit_branch_csv("branch.csv", b);
    return kExitOk;
  }

  int fold_curve() {
    std::vector<Real> targets = a_values();
    std::sort(targets.begin(), targets.end());
    const Real seed_a = cfg_.a ? a() : targets.front();
    if (!(seed_a > pb_.lambda1())) throw DomainError("the fold seed needs a > lambda1");
    const SolutionPoint stable = continue_czero_branch(pb_, CZeroBranch::Dagger, {seed_a}).points.front();
    ContinuationOptions cont = continuation();
    cont.stop_at_fold = true;
    const Branch star = continue_branch(pb_, stable, 1, {cfg_.c_min, std::numeric_limits<Real>::infinity()}, cont);
    if (star.degenerate.empty()) throw NonConvergence("no fold found on the stable branch at a = " + g(seed_a));
    const DegenerateCurve cur = trace_fold_curve(pb_, star.degenerate.front(), targets);
    std::ostringstream csv;
    csv << "a,c,residual,kernel_residual,slope_formula,slope_secant,morse_index\n";
    for (std::size_t i = 0; i < cur.points.size(); ++i) {
      const auto& p = cur.points[i];
      csv << io::format_csv_number(p.a) << ',' << io::format_csv_number(p.c) << ',' << io::format_csv_number(p.residual)
          << ',' << io::format_csv_number(p.kernel_residual) << ',' << io::format_csv_number(cur.slope_formula[i])
          << ',' << io::format_csv_number(cur.slope_secant[i]) << ',' << p.morse_index << '\n';
      log_ << "a=" << g(p.a) << " c_star=" << g(p.c) << '\n';
    }
    io::Json report;
    report["curve"] = io::to_json(cur);
    emit_json("fold_curve.json", io::envelope(config_echo(cfg_), "", nullptr, nullptr, report));
    if (cfg_.wants("csv")) emit("fold_curve.csv", csv.str());
    return kExitOk;
  }

  int dsigma_curve() {
    if (cfg_.t_values.empty()) throw DomainError("run.t_values is required for dsigma-curve");
    const DegenerateCurve cur = trace_index1_degenerate_curve(pb_, cfg_.t_values);
    std::ostringstream csv;
    csv << "t,a,c,residual,kernel_residual,morse_index\n";
    for (std::size_t i = 0; i < cur.points.size(); ++i) {
      const auto& p = cur.points[i];
      csv << io::format_csv_number(cur.values[i]) << ',' << io::format_csv_number(p.a) << ','
          << io::format_csv_number(p.c) << ',' << io::format_csv_number(p.residual) << ','
          << io::format_csv_number(p.kernel_residual) << ',' << p.morse_index << '\n';
      log_ << "t=" << g(cur.values[i]) << " a=" << g(p.a) << " c=" << g(p.c) << '\n';
    }
    io::Json report;
    report["curve"] = io::to_json(cur);
    emit_json("dsigma_curve.json", io::envelope(config_echo(cfg_), "", nullptr, nullptr, report));
    if (cfg_.wants("csv")) emit("dsigma_curve.csv", csv.str());
    return kExitOk;
  }

  int czero_branch() {
    std::vector<Real> as = a_values();
    std::sort(as.begin(), as.end());
    Branch b = continue_czero_branch(pb_, cfg_.czero, as, cfg_.czero_sign);
    b.label = cfg_.czero == CZeroBranch::Dagger ? "C_dagger" : "C_ddagger";
    log_ << b.label << " points=" << b.size() << '\n';
    const std::vector<Branch> bs{b};
    emit_json("czero_branch.json",
              io::envelope(config_echo(cfg_), "", branches_json(bs), points_json(bs), io::Json::object()));
    emit_branch_csv("czero_branch.csv", b);
    return kExitOk;
  }

  BifurcationDiagram assemble() {
    const Real av = a();
    BifurcationDiagram dg = assemble_diagram(pb_, av, cfg_.diagram_options());
    log_ << "regime=" << to_string(dg.regime) << " a=" << g(av) << " branches=" << dg.branches.size()
         << " special_points=" << dg.degenerate_points.size() << '\n';
    for (const auto& p : dg.degenerate_points) log_ << "  " << p.label << " c=" << g(p.c) << '\n';
    return dg;
  }

  int diagram() {
    const BifurcationDiagram dg = assemble();
    emit_json("diagram.json", io::envelope(config_echo(cfg_), dg));
    if (cfg_.wants("csv")) {
      std::ostringstream all;
      all << io::kCsvHeader << '\n';
      for (const auto& b : dg.branches) io::write_csv_rows(all, pb_, b);
      emit("branches.csv", all.str());
      for (const auto& b : dg.branches) emit_branch_csv("branch_" + b.label + ".csv", b);
    }
    if (cfg_.wants("svg")) emit("diagram.svg", io::render_svg(pb_, dg, cfg_.axis));
    return kExitOk;
  }

  int verify() {
    const BifurcationDiagram dg = assemble();
    VerifyOptions vo;
    vo.count = cfg_.count_options();
    vo.expected_regime = cfg_.regime;
    const VerificationReport rep = verify_structure(pb_, dg, vo);
    int failed = 0;
    for (const auto& c : rep.claims) {
      if (!c.pass) {
        ++failed;
        log_ << "FAIL " << c.id << ": expected " << c.expected << ", measured " << c.measured << '\n';
      }
    }
    log_ << "claims=" << rep.claims.size() << " failed=" << failed << '\n';
    emit_json("verification_report.json", io::envelope(config_echo(cfg_), dg, io::to_json(rep)));
    return rep.all_pass() ? kExitOk : kExitVerifyFailed;
  }

  int count() {
    const SolutionSet s = count_solutions(pb_, a(), cfg_.c, cfg_.count_options());
    log_ << "count=" << s.count() << '\n';
    log_ << "indices=";
    for (std::size_t i = 0; i < s.indices().size(); ++i) log_ << (i ? "," : "") << s.indices()[i];
    log_ << '\n';
    io::Json report;
    report["count"] = io::to_json(s);
    emit_json("count.json", io::envelope(config_echo(cfg_), "", nullptr, nullptr, report));
    return kExitOk;
  }

  const RunRequest& req_;
  const RunConfig& cfg_;
  std::ostream& log_;
  std::filesystem::path dir_;
  Problem pb_;
};

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"check-hypotheses", "continue", "fold-curve", "dsigma-curve",
                                                 "czero-branch",     "diagram",  "verify",     "count"};
  return names;
}

RunResult run(const RunRequest& req, std::ostream& log, std::ostream& err) {
  RunResult res;
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), req.command) == names.end()) {
    err << "error: unknown command '" << req.command << "'\n";
    res.status = kExitError;
    return res;
  }
  if (req.config.command && *req.config.command != req.command) {
    err << "error: config run.command is '" << *req.config.command << "' but the command line asks for '"
        << req.command << "'\n";
    res.status = kExitError;
    return res;
  }
  try {
    Session s(req, log);
    res.status = s.dispatch();
    res.written = std::move(s.written);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    res.status = kExitError;
  }
  return res;
}

}  // namespace bifurcate
