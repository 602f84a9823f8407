#pragma once

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "deltaloop/errors.hpp"
#include "deltaloop/geometry.hpp"

namespace deltaloop::harness {

using Json = nlohmann::ordered_json;

/// Malformed or missing configuration keys.
class ConfigError : public Error {
 public:
  using Error::Error;
};

enum ExitCode : int { kOk = 0, kUsage = 1, kPrecondition = 2, kConvergence = 3 };

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{"geometry", "transverse", "spectrum",    "current",
                                          "bracket",  "solve2d",    "asymptotics", "oracle"};
  return c;
}

/// Curve section of a config:
///   {"preset": "circle", "R": 1} | {"preset": "ellipse", "a": 2, "b": 1}
///   {"preset": "wiggly", "amplitude": 0.3, "lobes": 3}
///   {"samples": [[x, y], ...], "interpolation": "fourier" | "spline"}
///   {"curvature": {"gamma_coeffs": {"mean": m, "cos": [...], "sin": [...]}, "L": L}}
/// plus an optional "M" (default 512).
geometry::LoopCurve curve_from_config(const Json& curve);

/// A number, a list, or {"from", "to", "count"} (count >= 2, endpoints included).
std::vector<double> grid_from_config(const Json& value);

struct RunOptions {
  int jobs = 1;
  /// Overrides the config's "seed" when set.
  bool seed_set = false;
  std::uint64_t seed = 1;
};

/// Rows of formatted cells; empty cells are allowed. Notes become comment lines
/// after the header block.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> notes;
};

/// 17 significant digits; NaN and infinities spelled nan, inf, -inf.
std::string fmt(double v);

Table run_command(const std::string& command, const Json& config, const RunOptions& options = {});

/// Comment block (version, command, config echo), notes, column header, rows.
std::string render(const std::string& command, const Json& config, const Table& table);

/// Runs a command and writes the CSV to out; diagnostics go to log. Returns an
/// ExitCode: configuration problems, precondition violations and numerical
/// non-convergence map to distinct codes.
int execute(const std::string& command, Json config, const RunOptions& options, std::ostream& out,
            std::ostream& log);

}  // namespace deltaloop::harness
