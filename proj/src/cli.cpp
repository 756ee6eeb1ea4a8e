#include "mosaic/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mosaic/config.hpp"
#include "mosaic/error.hpp"
#include "mosaic/harness.hpp"
#include "mosaic/io.hpp"

namespace mosaic {

namespace fs = std::filesystem;

namespace {

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".pgm" || ext == ".ppm" || ext == ".pnm" || ext == ".png";
}

bool wildcard_match(std::string_view pattern, std::string_view name) {
  std::size_t p = 0, n = 0, star = std::string_view::npos, mark = 0;
  while (n < name.size()) {
    if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == name[n])) {
      ++p;
      ++n;
    } else if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      mark = n;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      n = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

const char* detector_name(DetectorKind d) { return d == DetectorKind::Sift ? "sift" : "orb"; }

// Usage problems map to exit 1, everything else raised while running to 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string with_suffix(const std::string& out_path, const std::string& suffix) {
  fs::path p(out_path);
  return (p.parent_path() / (p.stem().string() + suffix)).string();
}

// ---------------------------------------------------------------------------

struct BuildArgs {
  std::string input, out, timing, transforms, config, snapshot_dir;
  // Pipeline flags kept as text so they can be layered over a config file.
  std::vector<std::pair<std::string, std::string>> settings;
};

int cmd_build(const BuildArgs& a, std::ostream& out, std::ostream& err) {
  PipelineConfig cfg;
  try {
    if (!a.config.empty()) cfg = load_config_file(a.config);
    for (const auto& [k, v] : a.settings) apply_setting(cfg, k, v);
    cfg.validate();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Io) throw;
    throw UsageError(e.what());
  }

  const auto files = list_frames(a.input);
  if (files.empty()) throw Error(ErrorKind::EmptyInput, "no image files found in " + a.input);

  std::size_t next = 0;
  FrameSource source = [&]() -> std::optional<Image> {
    if (next >= files.size()) return std::nullopt;
    return read_image(files[next++]);
  };
  const std::string snap_base = a.snapshot_dir.empty() ? fs::path(a.out).parent_path().string() : a.snapshot_dir;
  SnapshotSink sink = [&](const MosaicState& s, int index) {
    char name[64];
    std::snprintf(name, sizeof(name), "%s.snapshot_%04d.ppm", fs::path(a.out).stem().string().c_str(), index);
    if (!snap_base.empty()) fs::create_directories(snap_base);
    write_image((fs::path(snap_base) / name).string(), render_mosaic(s));
  };

  const MosaicState state = run_sequence(source, cfg, sink);
  const Image mosaic = render_mosaic(state);
  if (mosaic.pixel_count() == 0) throw Error(ErrorKind::EmptyCanvas, "mosaic has no written pixels");
  if (fs::path(a.out).has_parent_path()) fs::create_directories(fs::path(a.out).parent_path());
  write_image(a.out, mosaic);
  write_text_file(a.transforms.empty() ? with_suffix(a.out, ".transforms.txt") : a.transforms,
                  transforms_text(state.reports));
  if (!a.timing.empty()) write_text_file(a.timing, timing_csv(state.reports));

  for (const auto& r : state.reports) {
    if (r.status == FrameStatus::Rejected) {
      err << "frame " << r.frame_index << " (" << files[static_cast<std::size_t>(r.frame_index)]
          << "): " << status_string(r) << '\n';
    }
  }
  out << "stitched " << state.frames_stitched << " of " << state.frames_seen << " frames into "
      << mosaic.width << 'x' << mosaic.height << " mosaic " << a.out << '\n';
  return kExitOk;
}

// Defaults describe the reference flight: mild pose jitter and sensor noise.
SequenceParams default_flight() {
  SequenceParams p;
  p.rot_jitter = 3.0;
  p.scale_jitter = 0.05;
  p.noise_sigma = 2.0;
  return p;
}

struct SynthArgs {
  std::string out;
  std::string size = "800x600";
  SequenceParams params = default_flight();
};

int cmd_synth(SynthArgs a, std::ostream& out) {
  int w = 0, h = 0;
  char tail = 0;
  if (std::sscanf(a.size.c_str(), "%dx%d%c", &w, &h, &tail) != 2 || w < 64 || h < 64) {
    throw UsageError("--size must be WxH with both sides >= 64");
  }
  a.params.frame_width = w;
  a.params.frame_height = h;
  if (a.params.n_frames < 1) throw UsageError("--frames must be >= 1");
  if (!(a.params.overlap >= 0.0 && a.params.overlap < 1.0)) throw UsageError("--overlap must lie in [0, 1)");
  if (a.params.columns < 1) throw UsageError("--columns must be >= 1");
  if (a.params.rot_jitter < 0 || a.params.scale_jitter < 0 || a.params.scale_jitter >= 0.5 ||
      a.params.noise_sigma < 0 || a.params.photometric_jitter < 0) {
    throw UsageError("jitter and noise values must be non-negative (scale jitter < 0.5)");
  }
  const auto [sw, sh] = required_source_size(a.params);
  const Image src = make_source(sw, sh, a.params.seed);
  const GroundTruthSequence seq = generate_sequence(src, a.params);
  write_sequence(a.out, seq);
  out << "wrote " << seq.frames.size() << " frames (" << w << 'x' << h << ") and gt.txt to " << a.out << '\n';
  return kExitOk;
}

struct EvalArgs {
  std::vector<std::string> run;
  std::string gt, report;
};

// Sums t_total from a timing CSV.
std::pair<double, int> read_timing_totals(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::string line;
  std::getline(in, line);
  double total = 0;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    try {
      total += std::stod(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw Error(ErrorKind::ParseError, path + ": bad t_total in row " + std::to_string(rows + 1));
    }
    ++rows;
  }
  return {total, rows};
}

bool looks_like_timing_csv(const std::string& path) {
  std::ifstream in(path);
  std::string first;
  std::getline(in, first);
  return first.rfind("frame,status", 0) == 0;
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  std::string transforms_path, timing_path;
  for (const auto& p : a.run) {
    if (looks_like_timing_csv(p)) {
      timing_path = p;
    } else {
      transforms_path = p;
    }
  }
  if (transforms_path.empty()) throw UsageError("--mosaic-run needs a transforms file");

  std::ifstream gt_in(a.gt);
  if (!gt_in) throw Error(ErrorKind::Io, "cannot open " + a.gt);
  const GtFile gt = read_gt(gt_in);
  if (gt.gt.empty()) throw Error(ErrorKind::EmptyInput, a.gt + " holds no frames");
  if (gt.frame_width <= 0 || gt.frame_height <= 0) {
    throw Error(ErrorKind::ParseError, a.gt + " lacks the '# frame WxH' header");
  }
  std::ifstream tr_in(transforms_path);
  if (!tr_in) throw Error(ErrorKind::Io, "cannot open " + transforms_path);
  auto est = read_transforms(tr_in);
  if (est.size() > gt.gt.size()) {
    throw Error(ErrorKind::IndexOutOfRange, transforms_path + " has frames beyond the ground truth");
  }
  est.resize(gt.gt.size());
  EvalReport r = evaluate(est, gt.gt, gt.frame_width, gt.frame_height);
  if (!timing_path.empty()) {
    const auto [total, rows] = read_timing_totals(timing_path);
    r.total_time = total;
    r.mean_frame_time = rows ? total / rows : 0.0;
  }
  const std::string csv = eval_csv(r);
  if (a.report.empty()) {
    out << csv;
  } else {
    write_text_file(a.report, csv);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "stitched %d, rejected %d, mean %.3f px, max %.3f px, drift %.3f px\n",
                  r.stitched, r.rejected, r.mean_error, r.max_error, r.drift);
    out << buf;
  }
  return kExitOk;
}

struct BenchArgs {
  std::string input, report, scales = "1.0,0.5,0.25", detectors = "sift,orb";
  int repeats = 3;
  std::vector<std::pair<std::string, std::string>> settings;
};

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  std::vector<double> scales;
  std::vector<DetectorKind> detectors;
  PipelineConfig base;
  try {
    for (const auto& s : split_list(a.scales)) {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size() || !(v > 0.0 && v <= 1.0)) throw UsageError("scales must lie in (0, 1]");
      scales.push_back(v);
    }
    for (const auto& d : split_list(a.detectors)) {
      if (d == "sift") {
        detectors.push_back(DetectorKind::Sift);
      } else if (d == "orb") {
        detectors.push_back(DetectorKind::Orb);
      } else {
        throw UsageError("unknown detector '" + d + "'");
      }
    }
    for (const auto& [k, v] : a.settings) apply_setting(base, k, v);
    base.validate();
  } catch (const std::invalid_argument&) {
    throw UsageError("bad --scales list '" + a.scales + "'");
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (scales.empty() || detectors.empty()) throw UsageError("--scales and --detectors must be nonempty");
  if (a.repeats < 1) throw UsageError("--repeats must be >= 1");

  const auto files = list_frames(a.input);
  if (files.size() < 2) throw Error(ErrorKind::EmptyInput, "bench needs at least two frames in " + a.input);
  const Image first = read_image(files[0]);
  const Image second = read_image(files[1]);
  const auto rows = bench_first_stitch(first, second, scales, detectors, base, a.repeats);
  const std::string csv = bench_csv(rows);
  if (a.report.empty()) {
    out << csv;
  } else {
    write_text_file(a.report, csv);
    out << "wrote " << rows.size() << " rows to " << a.report << '\n';
  }
  return kExitOk;
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<std::string> list_frames(const std::string& dir_or_glob) {
  std::vector<std::string> out;
  std::error_code ec;
  if (fs::is_directory(dir_or_glob, ec)) {
    for (const auto& e : fs::directory_iterator(dir_or_glob)) {
      if (e.is_regular_file() && is_image_file(e.path())) out.push_back(e.path().string());
    }
  } else {
    const fs::path p(dir_or_glob);
    const fs::path dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
    const std::string pattern = p.filename().string();
    if (fs::is_directory(dir, ec)) {
      for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && wildcard_match(pattern, e.path().filename().string())) {
          out.push_back(e.path().string());
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<BenchRow> bench_first_stitch(const Image& first, const Image& second,
                                         const std::vector<double>& scales,
                                         const std::vector<DetectorKind>& detectors,
                                         const PipelineConfig& base, int repeats) {
  std::vector<BenchRow> rows;
  for (const DetectorKind d : detectors) {
    for (const double scale : scales) {
      PipelineConfig cfg = base;
      cfg.detector = d;
      cfg.scale = scale;
      BenchRow row;
      row.detector = d;
      row.scale = scale;
      std::vector<double> fe, ma, ra, wa, bl, to;
      for (int i = 0; i < std::max(1, repeats); ++i) {
        MosaicState s = init(first, cfg);
        const FrameReport r = stitch_next(s, second);
        row.keypoints_frame = r.keypoints_frame;
        row.keypoints_roi = r.keypoints_roi;
        row.inliers = r.inliers;
        row.stitched = r.status == FrameStatus::Stitched;
        fe.push_back(r.timings.feature_extraction);
        ma.push_back(r.timings.matching);
        ra.push_back(r.timings.ransac);
        wa.push_back(r.timings.warping);
        bl.push_back(r.timings.blending);
        to.push_back(r.timings.total);
      }
      row.timings = {median(fe), median(ma), median(ra), median(wa), median(bl), median(to)};
      rows.push_back(row);
    }
  }
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::string out =
      "detector,scale,status,keypoints_frame,keypoints_roi,inliers,"
      "t_features,t_matching,t_ransac,t_warp,t_blend,t_total\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%.4g,%s,%d,%d,%d,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                  detector_name(r.detector), r.scale, r.stitched ? "stitched" : "rejected",
                  r.keypoints_frame, r.keypoints_roi, r.inliers, r.timings.feature_extraction,
                  r.timings.matching, r.timings.ransac, r.timings.warping, r.timings.blending,
                  r.timings.total);
    out += buf;
  }
  return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Incremental aerial image mosaicking"};
  app.require_subcommand(1);

  // build
  BuildArgs build;
  auto* b = app.add_subcommand("build", "Stitch a frame sequence into a mosaic");
  b->add_option("--input", build.input, "Frame directory or filename pattern")->required();
  b->add_option("--out", build.out, "Mosaic output (.ppm/.pgm/.png)")->required();
  b->add_option("--timing", build.timing, "Per-frame timing CSV");
  b->add_option("--transforms", build.transforms, "Frame-to-mosaic transforms (default <out>.transforms.txt)");
  b->add_option("--config", build.config, "key=value configuration file; flags override it");
  b->add_option("--snapshot-dir", build.snapshot_dir, "Directory for intermediate mosaics");
  struct FlagText {
    const char* name;
    const char* help;
    std::string value;
  };
  std::vector<FlagText> build_values = {
      {"detector", "sift|orb", {}},         {"scale", "Frame downscale factor", {}},
      {"ratio", "Ratio test threshold", {}}, {"ransac-thresh", "Inlier threshold in px", {}},
      {"ransac-iters", "RANSAC iteration cap", {}}, {"min-inliers", "Minimum RANSAC inliers", {}},
      {"roi-factor", "ROI size relative to the last frame", {}},
      {"feather", "Feather radius in px", {}}, {"edge-boost", "Blend weight boost on edges", {}},
      {"seed", "RANSAC seed", {}},           {"snapshot-every", "Write a snapshot every n frames", {}},
      {"canvas-limit", "Maximum canvas side in px", {}},
  };
  std::vector<CLI::Option*> build_opts;
  for (auto& f : build_values) build_opts.push_back(b->add_option("--" + std::string(f.name), f.value, f.help));
  auto* no_roi = b->add_flag("--no-roi", "Match against the whole canvas");
  auto* no_blend = b->add_flag("--no-blend", "Hard-cut composite");
  auto* cross = b->add_flag("--cross-check", "Keep mutual nearest neighbours only");

  // synth
  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic lawnmower sequence with ground truth");
  s->add_option("--out", synth.out, "Output directory")->required();
  s->add_option("--frames", synth.params.n_frames, "Number of frames");
  s->add_option("--size", synth.size, "Frame size WxH");
  s->add_option("--overlap", synth.params.overlap, "Overlap between neighbouring frames");
  s->add_option("--columns", synth.params.columns, "Frames per lawnmower row");
  s->add_option("--rot-jitter", synth.params.rot_jitter, "Rotation jitter in degrees");
  s->add_option("--scale-jitter", synth.params.scale_jitter, "Scale jitter fraction");
  s->add_option("--photometric", synth.params.photometric_jitter, "Brightness offset jitter");
  s->add_option("--noise", synth.params.noise_sigma, "Gaussian noise sigma");
  s->add_flag("--projective", synth.params.projective, "Add a small perspective term");
  s->add_option("--seed", synth.params.seed, "Generator seed");

  // eval
  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Score estimated transforms against ground truth");
  e->add_option("--mosaic-run", ev.run, "Transforms file, optionally with the timing CSV")
      ->required()
      ->expected(1, 2);
  e->add_option("--gt", ev.gt, "Ground-truth file")->required();
  e->add_option("--report", ev.report, "Report CSV (stdout when omitted)");

  // bench
  BenchArgs bench;
  auto* be = app.add_subcommand("bench", "First-stitch timings per detector and scale");
  be->add_option("--input", bench.input, "Frame directory or pattern; the first two frames are used")->required();
  be->add_option("--scales", bench.scales, "Comma-separated scale factors");
  be->add_option("--detectors", bench.detectors, "Comma-separated detectors");
  be->add_option("--repeats", bench.repeats, "Repeats per cell (median reported)");
  be->add_option("--report", bench.report, "Report CSV (stdout when omitted)");
  std::string bench_seed;
  auto* bench_seed_opt = be->add_option("--seed", bench_seed, "RANSAC seed");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& pe) {
    return app.exit(pe, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (b->parsed()) {
      for (std::size_t i = 0; i < build_values.size(); ++i) {
        if (build_opts[i]->count()) build.settings.emplace_back(build_values[i].name, build_values[i].value);
      }
      if (no_roi->count()) build.settings.emplace_back("roi", "false");
      if (no_blend->count()) build.settings.emplace_back("blend", "false");
      if (cross->count()) build.settings.emplace_back("cross-check", "true");
      return cmd_build(build, out, err);
    }
    if (s->parsed()) return cmd_synth(synth, out);
    if (e->parsed()) return cmd_eval(ev, out);
    if (be->parsed()) {
      if (bench_seed_opt->count()) bench.settings.emplace_back("seed", bench_seed);
      return cmd_bench(bench, out);
    }
  } catch (const UsageError& ue) {
    err << "usage error: " << ue.what() << '\n';
    return kExitUsage;
  } catch (const Error& de) {
    err << "error (" << to_string(de.kind()) << "): " << de.what() << '\n';
    return kExitData;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace mosaic
