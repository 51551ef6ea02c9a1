// Run configuration: a YAML document with a mandatory schema string and the
// blocks grid, model, run, output. Unknown keys are rejected; every error
// carries the line and column it refers to.
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bifurcate/diagram.hpp"
#include "bifurcate/io.hpp"

namespace bifurcate {

inline constexpr const char* kConfigSchema = "bifurcate.config/1";

class ConfigError : public Error {
 public:
  ConfigError(const std::string& message, int line, int column, const std::string& source = {});
  int line() const { return line_; }      // 1-based, 0 when unknown
  int column() const { return column_; }  // 1-based, 0 when unknown
  const std::string& message() const { return message_; }

 private:
  std::string message_;
  int line_;
  int column_;
};

// A value of a: a number, lambda1 / lambda2 / lambda3 with an optional
// "+x" / "-x" offset, or "window" (lambda2 + 0.5 delta_num).
struct AExpr {
  std::string text;
  enum class Base { Number, Lambda1, Lambda2, Lambda3, Window } base = Base::Number;
  Real offset = 0;
};

AExpr parse_a_expression(const std::string& text);
Real resolve_a(const AExpr& e, const Problem& pb, Real chart_halfwidth);

struct RunConfig {
  // grid
  int n_interior = 399;
  Real length = 1;
  // model
  NonlinearitySpec nonlinearity{};
  HarvestSpec harvest{};
  // run
  std::optional<std::string> command;
  std::optional<AExpr> a;
  Real c = 0;
  Real c_min = -10;
  Real c_max = 10;
  std::optional<Regime> regime;
  int n_starts = 400;
  std::uint64_t seed = 20240917;
  Real tolerance = 1e-10L;
  Real dedup_threshold = 1e-4L;
  Real chart_halfwidth = 0.8L;
  Real chart_step = 0.02L;
  Real max_step = 0.4L;
  int direction = 0;  // continue: -1, +1 or 0 for both
  bool stop_at_fold = true;
  std::vector<AExpr> a_values;  // fold-curve, czero-branch
  std::vector<Real> t_values;   // dsigma-curve
  CZeroBranch czero = CZeroBranch::Dagger;
  int czero_sign = 1;
  // output
  std::filesystem::path directory = "out";
  std::vector<std::string> formats{"json", "csv", "svg"};
  io::Axis axis = io::Axis::UMax;

  bool wants(const std::string& format) const;
  Problem problem() const;
  CountOptions count_options() const;
  DiagramOptions diagram_options() const;
};

RunConfig parse_config(const std::string& text, const std::string& source = {});
RunConfig load_config(const std::filesystem::path& path);

// Normalized echo of every field, for the result envelope.
io::Json config_echo(const RunConfig& cfg);

}  // namespace bifurcate
