#include "nhtop/sweep.hpp"

#include "json.hpp"  // vendored nlohmann/json

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace nhtop {

using json = nlohmann::ordered_json;

namespace {
constexpr const char* kVersion = "nhtop 1.0.0";

std::string fmt(double v) {
  char buf[40];
  if (std::isnan(v)) return "nan";
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}
}  // namespace

const char* to_string(InvariantKind k) {
  switch (k) {
    case InvariantKind::UhlmannPhase: return "uhlmann_phase";
    case InvariantKind::Chern1: return "chern1";
    case InvariantKind::Chern1NT: return "chern1_nt";
    case InvariantKind::DD: return "dd";
    case InvariantKind::DDNT: return "dd_nt";
    case InvariantKind::Chern2: return "chern2";
    case InvariantKind::Chern2NT: return "chern2_nt";
  }
  return "?";
}

InvariantKind invariant_from_string(const std::string& s) {
  for (InvariantKind k :
       {InvariantKind::UhlmannPhase, InvariantKind::Chern1, InvariantKind::Chern1NT,
        InvariantKind::DD, InvariantKind::DDNT, InvariantKind::Chern2, InvariantKind::Chern2NT})
    if (s == to_string(k)) return k;
  throw InvalidConfig("unknown invariant: " + s);
}

const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::T: return "T";
    case SweepAxis::d: return "d";
    case SweepAxis::R: return "R";
  }
  return "?";
}

SweepAxis axis_from_string(const std::string& s) {
  if (s == "T" || s == "t") return SweepAxis::T;
  if (s == "d") return SweepAxis::d;
  if (s == "R" || s == "r") return SweepAxis::R;
  throw InvalidConfig("unknown sweep axis: " + s);
}

void SweepConfig::validate() const {
  model.validate();
  if (!(start <= stop)) throw InvalidConfig("sweep start must be <= stop");
  if (!(step > 0.0)) throw InvalidConfig("sweep step must be > 0");
  if (axis != SweepAxis::T && !(temperature > 0.0))
    throw InvalidConfig("fixed temperature must be > 0");
  if (axis == SweepAxis::d &&
      !(model.embedding == Embedding::Loop2D || model.embedding == Embedding::Loop4D))
    throw InvalidConfig("displacement sweeps require a loop embedding");
  if (invariant == InvariantKind::UhlmannPhase) {
    if (model.embedding != Embedding::Loop2D && model.embedding != Embedding::Loop4D)
      throw InvalidConfig("uhlmann_phase requires a loop embedding");
    if (windings != 1 && windings != 2) throw InvalidConfig("windings must be 1 or 2");
    if (loop_samples < 16) throw InvalidConfig("loop_samples too small");
  } else {
    if (model.embedding == Embedding::Loop2D || model.embedding == Embedding::Loop4D)
      throw InvalidConfig("quadrature invariants require a sphere embedding");
    grid.validate(model.embedding_dim());
  }
}

std::string render_config(const SweepConfig& c) {
  json j;
  j["model"] = {{"family", to_string(c.model.family)},
                {"embedding", to_string(c.model.embedding)},
                {"gamma", c.model.gamma},
                {"r", c.model.r},
                {"d", c.model.d},
                {"R", c.model.R}};
  j["invariant"] = to_string(c.invariant);
  j["axis"] = {{"name", to_string(c.axis)}, {"start", c.start}, {"stop", c.stop},
               {"step", c.step}};
  j["temperature"] = c.temperature;
  j["grid"] = {{"dims", c.grid.dims},
               {"rule", c.grid.rule == Rule::Simpson ? "simpson" : "trapezoid"}};
  j["loop_samples"] = c.loop_samples;
  j["windings"] = c.windings;
  j["weight_convention"] = to_string(c.convention);
  j["out"] = c.out;
  return j.dump(2) + "\n";
}

SweepConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw InvalidConfig(std::string("config parse error: ") + e.what());
  }
  SweepConfig c;
  try {
    const auto& m = j.at("model");
    c.model.family = family_from_string(m.at("family").get<std::string>());
    c.model.embedding = embedding_from_string(m.at("embedding").get<std::string>());
    c.model.gamma = m.value("gamma", 1.0);
    c.model.r = m.value("r", 2.0);
    c.model.d = m.value("d", 2.5);
    c.model.R = m.value("R", 2.0);
    c.invariant = invariant_from_string(j.at("invariant").get<std::string>());
    const auto& a = j.at("axis");
    c.axis = axis_from_string(a.at("name").get<std::string>());
    c.start = a.at("start").get<double>();
    c.stop = a.at("stop").get<double>();
    c.step = a.at("step").get<double>();
    c.temperature = j.value("temperature", 0.5);
    if (j.contains("grid")) {
      c.grid.dims = j["grid"].value("dims", std::vector<int>{});
      c.grid.rule =
          j["grid"].value("rule", std::string("trapezoid")) == "simpson" ? Rule::Simpson
                                                                         : Rule::Trapezoid;
    }
    if (c.grid.dims.empty()) c.grid = default_grid(c.model.embedding);
    c.loop_samples = j.value("loop_samples", 800);
    c.windings = j.value("windings", 2);
    c.convention = weight_convention_from_string(j.value("weight_convention", std::string("abs")));
    c.out = j.value("out", std::string());
  } catch (const json::exception& e) {
    throw InvalidConfig(std::string("config field error: ") + e.what());
  }
  c.validate();
  return c;
}

namespace {

SweepRecord evaluate_point(const SweepConfig& c, double v) {
  SweepRecord rec;
  rec.axis_value = v;
  ModelSpec m = c.model;
  double T = c.temperature;
  switch (c.axis) {
    case SweepAxis::T: T = v; break;
    case SweepAxis::d: m.d = v; break;
    case SweepAxis::R: m.R = v; break;
  }
  const auto t0 = std::chrono::steady_clock::now();
  try {
    switch (c.invariant) {
      case InvariantKind::UhlmannPhase: {
        const Holonomy h = uhlmann_phase(m, c.windings, T, c.loop_samples, c.convention);
        rec.value = std::abs(h.unwrapped_phase);
        break;
      }
      case InvariantKind::Chern1: {
        const InvariantResult r = thermal_chern_2d(m, T, c.grid, c.convention);
        rec.value = r.value;
        rec.refinement_delta = r.refinement_delta;
        rec.excluded = r.excluded_points;
        break;
      }
      case InvariantKind::Chern1NT: {
        const InvariantResult r = nt_chern_2d(m, T, c.grid, c.convention);
        rec.value = r.value;
        rec.refinement_delta = r.refinement_delta;
        rec.excluded = r.excluded_points;
        break;
      }
      case InvariantKind::DD:
      case InvariantKind::DDNT: {
        const InvariantResult r =
            dd_invariant(m, T, c.grid, c.invariant == InvariantKind::DD, c.convention);
        rec.value = r.value;
        rec.refinement_delta = r.refinement_delta;
        rec.excluded = r.excluded_points;
        break;
      }
      case InvariantKind::Chern2:
      case InvariantKind::Chern2NT: {
        const InvariantResult r =
            second_chern(m, T, c.grid, c.invariant == InvariantKind::Chern2, c.convention);
        rec.value = r.value;
        rec.refinement_delta = r.refinement_delta;
        rec.excluded = r.excluded_points;
        break;
      }
    }
  } catch (const Error& e) {
    rec.value = std::numeric_limits<double>::quiet_NaN();
    rec.error = e.what();
  }
  rec.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
  return rec;
}

}  // namespace

std::vector<SweepRecord> run_sweep(const SweepConfig& config) {
  config.validate();
  std::vector<double> axis;
  for (double v = config.start; v <= config.stop + 0.5 * config.step; v += config.step)
    axis.push_back(v);
  if (axis.empty()) axis.push_back(config.start);

  std::vector<SweepRecord> records(axis.size());
  for (size_t i = 0; i < axis.size(); ++i) records[i] = evaluate_point(config, axis[i]);
  return records;
}

std::vector<double> detect_transitions(const std::vector<SweepRecord>& series,
                                       const std::vector<double>& levels) {
  if (levels.size() < 2) throw InvalidConfig("detect_transitions: need at least two levels");
  std::vector<double> sorted_levels = levels;
  std::sort(sorted_levels.begin(), sorted_levels.end());
  std::vector<double> crossings;
  for (size_t l = 0; l + 1 < sorted_levels.size(); ++l) {
    const double mid = 0.5 * (sorted_levels[l] + sorted_levels[l + 1]);
    const SweepRecord* prev = nullptr;
    for (const SweepRecord& r : series) {
      if (std::isnan(r.value)) continue;
      if (prev) {
        const double a = prev->value - mid, b = r.value - mid;
        if (a == 0.0) {
          crossings.push_back(prev->axis_value);
        } else if (a * b < 0.0) {
          const double t = a / (a - b);
          crossings.push_back(prev->axis_value + t * (r.axis_value - prev->axis_value));
        }
      }
      prev = &r;
    }
  }
  if (crossings.empty()) throw NoTransition("series never crosses the given levels");
  std::sort(crossings.begin(), crossings.end());
  return crossings;
}

std::string render_csv(const std::vector<SweepRecord>& records, bool include_timings) {
  std::string out = include_timings ? "axis,value,refinement_delta,excluded,ms,error\n"
                                    : "axis,value,refinement_delta,excluded,error\n";
  for (const SweepRecord& r : records) {
    out += fmt(r.axis_value);
    out += ',';
    out += fmt(r.value);
    out += ',';
    out += fmt(r.refinement_delta);
    out += ',';
    out += std::to_string(r.excluded);
    if (include_timings) {
      out += ',';
      out += std::to_string(r.wall_time_ms);
    }
    out += ',';
    out += r.error;
    out += '\n';
  }
  return out;
}

FigureId figure_from_string(const std::string& s) {
  if (s == "fig1") return FigureId::Fig1;
  if (s == "fig2") return FigureId::Fig2;
  if (s == "fig3") return FigureId::Fig3;
  if (s == "fig4") return FigureId::Fig4;
  if (s == "fig5") return FigureId::Fig5;
  if (s == "fig6") return FigureId::Fig6;
  if (s == "figDD" || s == "figdd") return FigureId::FigDD;
  throw InvalidConfig("unknown figure id: " + s);
}

namespace {

SweepConfig base_phase_config(Family fam, Embedding emb) {
  SweepConfig c;
  c.model = make_spec(fam, emb);
  c.invariant = InvariantKind::UhlmannPhase;
  c.windings = 2;
  c.loop_samples = 800;
  return c;
}

void write_file(const std::string& path, const std::string& content,
                std::vector<std::string>& files) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path);
  os << content;
  files.push_back(path);
}

void write_series(const std::string& dir, const std::string& name, const SweepConfig& c,
                  std::vector<std::string>& files) {
  const std::vector<SweepRecord> recs = run_sweep(c);
  write_file(dir + "/" + name + ".csv", render_csv(recs, false), files);
  json manifest;
  manifest["version"] = kVersion;
  manifest["config"] = json::parse(render_config(c));
  write_file(dir + "/" + name + "_manifest.json", manifest.dump(2) + "\n", files);
}

const char* kPlotScript =
    "# gnuplot script: plot every CSV series in this directory\n"
    "set datafile separator ','\n"
    "set key autotitle columnhead\n"
    "set xlabel 'axis'\n"
    "set ylabel 'value'\n"
    "plot for [f in system('ls *.csv')] f using 1:2 with linespoints title f\n";

}  // namespace

FigureOutput emit_figure(FigureId id, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  FigureOutput out;

  switch (id) {
    case FigureId::Fig1: {
      SweepConfig c = base_phase_config(Family::NH2, Embedding::Loop2D);
      c.axis = SweepAxis::T;
      c.start = 0.1;
      c.stop = 3.0;
      c.step = 0.05;
      write_series(out_dir, "fig1_phase_vs_T", c, out.files);
      break;
    }
    case FigureId::Fig2: {
      SweepConfig c = base_phase_config(Family::NH2, Embedding::Loop2D);
      c.axis = SweepAxis::d;
      c.start = 0.0;
      c.stop = 4.0;
      c.step = 0.05;
      c.temperature = 0.5;
      write_series(out_dir, "fig2_phase_vs_d", c, out.files);
      break;
    }
    case FigureId::Fig3: {
      SweepConfig c;
      c.model = make_spec(Family::NH2, Embedding::Sphere2D);
      c.grid = default_grid(Embedding::Sphere2D);
      c.axis = SweepAxis::T;
      c.start = 0.1;
      c.stop = 3.0;
      c.step = 0.05;
      c.invariant = InvariantKind::Chern1;
      write_series(out_dir, "fig3_cu_vs_T", c, out.files);
      c.invariant = InvariantKind::Chern1NT;
      write_series(out_dir, "fig3_cunt_vs_T", c, out.files);
      break;
    }
    case FigureId::Fig4: {
      SweepConfig c;
      c.model = make_spec(Family::NH2, Embedding::Sphere2D);
      c.grid = default_grid(Embedding::Sphere2D);
      c.axis = SweepAxis::R;
      c.start = 0.2;
      c.stop = 3.0;
      c.step = 0.05;
      c.temperature = 0.5;
      c.invariant = InvariantKind::Chern1;
      write_series(out_dir, "fig4_cu_vs_R", c, out.files);
      c.invariant = InvariantKind::Chern1NT;
      write_series(out_dir, "fig4_cunt_vs_R", c, out.files);
      // fine scan across the transition
      c.invariant = InvariantKind::Chern1;
      c.start = 0.85;
      c.stop = 1.15;
      c.step = 0.02;
      write_series(out_dir, "fig4_cu_vs_R_fine", c, out.files);
      break;
    }
    case FigureId::Fig5: {
      SweepConfig c = base_phase_config(Family::NH4, Embedding::Loop4D);
      c.axis = SweepAxis::T;
      c.start = 0.1;
      c.stop = 3.0;
      c.step = 0.05;
      write_series(out_dir, "fig5_phase_vs_T", c, out.files);
      c.axis = SweepAxis::d;
      c.start = 0.0;
      c.stop = 4.0;
      c.step = 0.05;
      c.temperature = 0.5;
      write_series(out_dir, "fig5_phase_vs_d", c, out.files);
      break;
    }
    case FigureId::Fig6: {
      SweepConfig c;
      c.model = make_spec(Family::NH4, Embedding::S4);
      c.grid = default_grid(Embedding::S4);
      c.invariant = InvariantKind::Chern2NT;
      c.axis = SweepAxis::R;
      c.start = 0.2;
      c.stop = 3.0;
      c.step = 0.2;
      // one radius series per temperature row
      for (double T : {0.2, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0}) {
        c.temperature = T;
        char name[64];
        std::snprintf(name, sizeof(name), "fig6_cu2nt_vs_R_T%03d", int(T * 100 + 0.5));
        write_series(out_dir, name, c, out.files);
      }
      break;
    }
    case FigureId::FigDD: {
      SweepConfig c;
      c.model = make_spec(Family::NH3, Embedding::S3);
      c.grid = default_grid(Embedding::S3);
      c.convention = WeightConvention::Re;
      c.axis = SweepAxis::T;
      c.start = 0.2;
      c.stop = 3.0;
      c.step = 0.2;
      c.invariant = InvariantKind::DDNT;
      c.model.R = 2.0;
      write_series(out_dir, "figdd_nt_enclosing", c, out.files);
      c.model.R = 0.5;
      write_series(out_dir, "figdd_nt_not_enclosing", c, out.files);
      c.model = make_spec(Family::Hermitian3, Embedding::S3);
      c.model.R = 2.0;
      c.invariant = InvariantKind::DD;
      write_series(out_dir, "figdd_hermitian_weighted", c, out.files);
      c.invariant = InvariantKind::DDNT;
      write_series(out_dir, "figdd_hermitian_nt", c, out.files);
      break;
    }
  }

  write_file(out_dir + "/plot.gp", kPlotScript, out.files);
  return out;
}

}  // namespace nhtop
