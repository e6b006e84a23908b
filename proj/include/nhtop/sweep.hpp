#pragma once

#include <optional>
#include <string>

#include "nhtop/invariants.hpp"

namespace nhtop {

enum class InvariantKind {
  UhlmannPhase,   // needs a loop embedding; value = unwrapped phase after `windings`
  Chern1,
  Chern1NT,
  DD,
  DDNT,
  Chern2,
  Chern2NT,
};

const char* to_string(InvariantKind k);
InvariantKind invariant_from_string(const std::string& s);

enum class SweepAxis { T, d, R };
const char* to_string(SweepAxis a);
SweepAxis axis_from_string(const std::string& s);

struct SweepConfig {
  ModelSpec model;
  InvariantKind invariant = InvariantKind::UhlmannPhase;
  SweepAxis axis = SweepAxis::T;
  double start = 0.1;
  double stop = 3.0;
  double step = 0.05;
  double temperature = 0.5;  // fixed value when the axis is not T
  QuadratureGrid grid;       // quadrature resolutions (ignored by phase sweeps)
  int loop_samples = 800;    // per winding
  int windings = 2;
  WeightConvention convention = WeightConvention::Abs;
  std::string out;           // output path ("" = stdout)

  void validate() const;
};

struct SweepRecord {
  double axis_value = 0.0;
  double value = 0.0;  // NaN when errored
  double refinement_delta = 0.0;
  long excluded = 0;
  long wall_time_ms = 0;
  std::string error;  // empty on success
};

std::string render_config(const SweepConfig& c);          // JSON
SweepConfig parse_config(const std::string& json_text);   // inverse of render_config

/// One record per axis value, ascending, independent of worker count.
/// Per-point numerical failures become NaN records tagged with the error.
std::vector<SweepRecord> run_sweep(const SweepConfig& config);

/// Axis values where the series crosses the midpoints between consecutive
/// levels (linear interpolation between bracketing records). Throws
/// NoTransition when the series never crosses.
std::vector<double> detect_transitions(const std::vector<SweepRecord>& series,
                                       const std::vector<double>& levels);

/// CSV with header axis,value,refinement_delta,excluded,ms,error; timings
/// are suppressed when include_timings is false so that re-runs are
/// byte-identical.
std::string render_csv(const std::vector<SweepRecord>& records, bool include_timings);

enum class FigureId { Fig1, Fig2, Fig3, Fig4, Fig5, Fig6, FigDD };
FigureId figure_from_string(const std::string& s);

struct FigureOutput {
  std::vector<std::string> files;
};

/// Writes the canonical configuration, deterministic data files and a
/// gnuplot script for the requested figure into out_dir.
FigureOutput emit_figure(FigureId id, const std::string& out_dir);

}  // namespace nhtop
