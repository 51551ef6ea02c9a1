// Serialization of branches and diagrams: the JSON result envelope, CSV
// branch tables and SVG plots. JSON and CSV carry doubles; loading widens
// them back to Real, so load(save(d)) is a fixed point of save.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "bifurcate/diagram.hpp"
#include "json.hpp"

namespace bifurcate::io {

using Json = nlohmann::ordered_json;

inline constexpr const char* kResultSchema = "bifurcate.result/1";

Json to_json(const SolutionPoint& p);
SolutionPoint point_from_json(const Json& j, const Domain& d);

Json to_json(const DegeneratePoint& p);
DegeneratePoint degenerate_from_json(const Json& j, const Domain& d);

Json to_json(const Branch& b);
Branch branch_from_json(const Json& j, const Domain& d);

Json to_json(const DegenerateCurve& c);
Json to_json(const SolutionSet& s);
Json to_json(const VerificationReport& r);
Json to_json(const HypothesisReport& r);

// {schema_version, config_echo, regime, branches, degenerate_points, segment, report}.
// report.diagram holds the scalar metadata; report.verification the claims, if any.
Json envelope(const Json& config_echo, const BifurcationDiagram& dg, const Json& verification = nullptr);
Json envelope(const Json& config_echo, const std::string& regime, const Json& branches, const Json& degenerate_points,
              const Json& report);

BifurcationDiagram diagram_from_json(const Json& j, const Domain& d);

// Field-by-field equality of everything the JSON form persists.
bool same_diagram(const BifurcationDiagram& x, const BifurcationDiagram& y);

// Fixed header s,c,t_proj,u_l2,u_max,u_min,mu1,mu2,morse_index,tag; 12 significant digits.
inline constexpr const char* kCsvHeader = "s,c,t_proj,u_l2,u_max,u_min,mu1,mu2,morse_index,tag";
void write_csv_rows(std::ostream& os, const Problem& pb, const Branch& b);
void emit_csv(std::ostream& os, const Problem& pb, const Branch& b);
std::string format_csv_number(Real x);

enum class Axis { UMax, TProj };
Axis parse_axis(const std::string& s);
std::string render_svg(const Problem& pb, const BifurcationDiagram& dg, Axis axis = Axis::UMax);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);
// Pretty JSON, two-space indent, trailing newline.
std::string dump(const Json& j);

}  // namespace bifurcate::io
