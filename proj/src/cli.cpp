#include "gsr/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "gsr/errors.hpp"
#include "gsr/metrics.hpp"
#include "gsr/projection.hpp"

namespace gsr {

namespace {

std::mutex log_mutex;

template <typename... Args>
void progress(fmt::format_string<Args...> f, Args&&... args) {
  std::lock_guard lock(log_mutex);
  fmt::print(stderr, "{}\n", fmt::format(f, std::forward<Args>(args)...));
}

struct Stopwatch {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

// Per-clip outcome; failures are collected rather than thrown so the other
// clips still run.
template <typename T>
struct Outcome {
  std::optional<T> value;
  std::string error;
  bool schema = false;
};

template <typename T, typename F>
std::vector<Outcome<T>> run_pool(const std::vector<fs::path>& items, int jobs, F work) {
  std::vector<Outcome<T>> out(items.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < items.size();) {
      try {
        out[i].value = work(items[i]);
      } catch (const SchemaViolation& e) {
        out[i].error = fmt::format("{} at '{}'", e.what(), e.path());
        out[i].schema = true;
      } catch (const std::exception& e) {
        out[i].error = e.what();
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(items.size())));
  std::vector<std::jthread> threads;
  for (int k = 1; k < n; ++k) threads.emplace_back(worker);
  worker();
  return out;
}

template <typename T>
int collect_failures(const std::vector<fs::path>& items, const std::vector<Outcome<T>>& outcomes,
                     Json& summary) {
  int status = 0;
  Json failures = Json::array();
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (outcomes[i].value) continue;
    progress("error: {}: {}", items[i].filename().string(), outcomes[i].error);
    failures.push_back({{"clip", items[i].filename().string()}, {"error", outcomes[i].error}});
    status = outcomes[i].schema ? 2 : std::max(status, 1);
  }
  summary["failures"] = failures;
  return status;
}

void warn_issues(const fs::path& clip, const ClipAnnotation& c) {
  std::size_t count = 0;
  std::string first;
  for (const auto& [idx, f] : c.frames) {
    auto issues = validate_frame(f, c.size);
    if (!issues.empty() && first.empty()) first = fmt::format("/frames/{}{}: {}", idx, issues[0].path, issues[0].message);
    count += issues.size();
  }
  if (count) progress("warning: {}: {} validation issue(s), first {}", clip.filename().string(), count, first);
}

ClipAnnotation load_clip(const fs::path& p) {
  ClipAnnotation c = read_clip_file(p);
  warn_issues(p, c);
  return c;
}

std::vector<KeypointObservation> keypoints_of(const FrameAnnotation& f) {
  std::vector<KeypointObservation> out;
  for (const auto& [id, k] : f.keypoints) out.push_back({id, k.x, k.y, k.p});
  return out;
}

std::vector<LineObservation> lines_of(const FrameAnnotation& f) {
  std::vector<LineObservation> out;
  for (const auto& [name, pts] : f.lines) out.push_back({name, pts});
  return out;
}

fs::path summary_path(const RunConfig& cfg) {
  if (cfg.summary) return *cfg.summary;
  return cfg.output.empty() ? fs::path() : cfg.output / "summary.json";
}

void finish(const RunConfig& cfg, CommandResult& r) {
  const fs::path p = summary_path(cfg);
  if (!p.empty()) write_text_file(p, r.summary.dump(2) + "\n");
}

std::string summary_table(const Json& j) {
  std::string out;
  for (const auto& [k, v] : j.items()) {
    if (v.is_array() && v.empty()) continue;
    out += fmt::format("{:<16}{}\n", k, v.is_string() ? v.get<std::string>() : v.dump());
  }
  return out;
}

std::string render(const RunConfig& cfg, const Json& j) {
  return cfg.format == "table" ? summary_table(j) : j.dump(2) + "\n";
}

// Athletes of a clip as frame-indexed detection lists, with embeddings when
// a sidecar is present.
struct ClipDetections {
  int frameCount = 0;
  std::vector<std::vector<AthleteDetection>> frames;
};

ClipDetections clip_detections(const ClipAnnotation& clip, const std::optional<EmbeddingSidecar>& emb) {
  ClipDetections out;
  out.frameCount = clip.frames.empty() ? 0 : clip.frames.rbegin()->first + 1;
  out.frames.resize(out.frameCount);
  for (const auto& [idx, f] : clip.frames) {
    const std::vector<Eigen::VectorXf>* e = nullptr;
    if (emb && idx < static_cast<int>(emb->frames.size())) {
      e = &emb->frames[idx];
      if (e->size() != f.athletes.size())
        throw Error(fmt::format("frame {}: {} embeddings for {} athletes", idx, e->size(), f.athletes.size()));
    }
    out.frames[idx] = detections_from_frame(f, e);
  }
  return out;
}

std::optional<EmbeddingSidecar> load_sidecar(const fs::path& clip) {
  auto p = sidecar_for(clip);
  if (!p) return std::nullopt;
  return read_embeddings_file(*p);
}

// Calibration scoring of predicted clips against the matching ground-truth
// files.
struct CalibScore {
  std::map<double, JaccardCounts> counts;
  int frames = 0;
  int produced = 0;
};

CalibScore score_clip(const ClipAnnotation& pred, const ClipAnnotation& gt, const PitchModel& pitch,
                      const RunConfig& cfg) {
  CalibScore s;
  for (const auto& [idx, g] : gt.frames) {
    std::optional<CameraParams> cam;
    if (auto it = pred.frames.find(idx); it != pred.frames.end() && it->second.validCamParams && it->second.camera)
      cam = it->second.camera;
    ++s.frames;
    if (cam) ++s.produced;
    for (double gamma : cfg.gammas) {
      JaccardCounts c;
      if (g.camera) {
        c = jaccard_calibration(cam, *g.camera, pitch, gt.size, gamma, cfg.metricSpacing);
      } else {
        std::map<std::string, std::vector<Vec2>> px;
        for (const auto& [name, pts] : g.lines)
          for (const auto& q : pts) px[name].emplace_back(q.x() * gt.size.width, q.y() * gt.size.height);
        c = jaccard_from_annotations(cam, px, pitch, gt.size, gamma, cfg.metricSpacing);
      }
      c.elements.clear();
      s.counts[gamma] += c;
    }
  }
  return s;
}

CalibrationEvalReport aggregate(const std::vector<CalibScore>& parts) {
  std::map<double, JaccardCounts> counts;
  int frames = 0, produced = 0;
  for (const auto& p : parts) {
    for (const auto& [g, c] : p.counts) counts[g] += c;
    frames += p.frames;
    produced += p.produced;
  }
  if (frames == 0) throw EmptyDataset("no ground-truth frames to evaluate");
  std::map<double, double> jac;
  for (const auto& [g, c] : counts) jac[g] = c.jaccard();
  return make_calibration_report(std::move(jac), static_cast<double>(produced) / frames, frames);
}

Json report_json(const CalibrationEvalReport& r) { return Json::parse(to_json(r)); }

}  // namespace

std::vector<fs::path> list_clips(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto& p = e.path();
    const std::string name = p.filename().string();
    if (!e.is_regular_file() || p.extension() != ".json") continue;
    if (name == "summary.json" || name.ends_with(".emb.json")) continue;
    out.push_back(p);
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

// Embeddings travel with their clip through every stage.
void carry_sidecar(const fs::path& clip, const fs::path& outDir) {
  auto s = sidecar_for(clip);
  if (!s) return;
  const fs::path dst = outDir / s->filename();
  if (fs::exists(dst) && fs::equivalent(*s, dst)) return;
  fs::copy_file(*s, dst, fs::copy_options::overwrite_existing);
}

}  // namespace

std::optional<fs::path> sidecar_for(const fs::path& clip) {
  for (const char* ext : {".emb", ".emb.json"}) {
    fs::path p = clip.parent_path() / (clip.stem().string() + ext);
    if (fs::exists(p)) return p;
  }
  return std::nullopt;
}

void validate(const RunConfig& cfg, const std::string& command) {
  validate(cfg.dims);
  if (cfg.jobs < 1) throw Error("--jobs must be at least 1");
  if (cfg.format != "json" && cfg.format != "table") throw Error("--format must be json or table");
  for (double g : cfg.gammas)
    if (!(g > 0.0)) throw Error("gamma values must be positive");
  const bool needs_input = command != "synth" && !(command == "eval" && cfg.scores);
  if (needs_input && !fs::is_directory(cfg.input)) throw Error("input directory not found: " + cfg.input.string());
  if (command != "eval" && cfg.output.empty()) throw Error("--out is required");
  if (command == "eval" && !cfg.scores && !(cfg.groundTruth && fs::is_directory(*cfg.groundTruth)))
    throw Error("eval needs --gt pointing to a directory");
  if (cfg.evalMode != "calibration" && cfg.evalMode != "tracking") throw Error("--mode must be calibration or tracking");
  if (command == "synth") {
    validate(cfg.noise);
    if (cfg.clips < 1 || cfg.frames < 1 || cfg.players < 0 || cfg.referees < 0 || !(cfg.fps > 0))
      throw Error("synth sizes must be positive");
  }
  validate(cfg.tracker);
}

// -------------------------------------------------------------------- synth

CommandResult cmd_synth(const RunConfig& cfg) {
  validate(cfg, "synth");
  Stopwatch sw;
  std::vector<fs::path> names;
  for (int c = 0; c < cfg.clips; ++c) names.emplace_back(fmt::format("clip_{:03d}.json", c));

  auto outcomes = run_pool<int>(names, cfg.jobs, [&](const fs::path& name) {
    const int c = std::stoi(name.stem().string().substr(5));
    Rng rng(cfg.seed * 1000003ULL + static_cast<std::uint64_t>(c));
    SimulationConfig sim;
    sim.nPlayers = cfg.players;
    sim.nReferees = cfg.referees;
    sim.nFrames = cfg.frames;
    sim.dt = 1.0 / cfg.fps;
    sim.dims = cfg.dims;
    sim.size = cfg.size;
    sim.moveCamera = cfg.moveCamera;
    const SyntheticScene scene = simulate_match(rng, sim);
    const auto obs = render_observations(scene, cfg.noise, rng);

    ClipAnnotation observed, truth;
    observed.size = truth.size = cfg.size;
    EmbeddingSidecar emb;
    emb.dims = sim.embeddingDims;
    for (int f = 0; f < scene.frames(); ++f) {
      observed.frames[f] = observation_annotation(obs[f], cfg.size);
      truth.frames[f] = obs[f].groundTruth;
      std::vector<Eigen::VectorXf> e;
      for (const auto& d : obs[f].detections) e.push_back(d.embedding->cast<float>());
      emb.frames.push_back(std::move(e));
    }
    write_text_file(cfg.output / "observations" / name, write_clip(observed));
    write_embeddings_file(cfg.output / "observations" / (name.stem().string() + ".emb"), emb);
    write_text_file(cfg.output / "gt" / name, write_clip(truth));
    progress("synth: {} ({} frames)", name.string(), scene.frames());
    return scene.frames();
  });

  CommandResult r;
  int frames = 0;
  for (const auto& o : outcomes) frames += o.value.value_or(0);
  r.summary["command"] = "synth";
  r.summary["clips"] = cfg.clips;
  r.summary["frames"] = frames;
  r.summary["seed"] = cfg.seed;
  r.status = collect_failures(names, outcomes, r.summary);
  progress("synth: done in {:.2f} s", sw.seconds());
  finish(cfg, r);
  r.report = render(cfg, r.summary);
  return r;
}

// ---------------------------------------------------------------- calibrate

CommandResult cmd_calibrate(const RunConfig& cfg) {
  validate(cfg, "calibrate");
  Stopwatch sw;
  const PitchModel pitch = build_pitch(cfg.dims);
  const auto clips = list_clips(cfg.input);

  struct Done {
    int frames = 0;
    int calibrated = 0;
    std::optional<CalibScore> score;
  };
  auto outcomes = run_pool<Done>(clips, cfg.jobs, [&](const fs::path& p) {
    ClipAnnotation clip = load_clip(p);
    Done d;
    for (auto& [idx, f] : clip.frames) {
      const auto kps = keypoints_of(f);
      const auto lines = lines_of(f);
      auto res = calibrate_frame(kps, lines, pitch, clip.size, cfg.calibration);
      ++d.frames;
      if (res) {
        f.camera = res->params;
        f.validCamParams = true;
        ++d.calibrated;
      } else {
        f.camera.reset();
        f.validCamParams = false;
      }
    }
    write_text_file(cfg.output / p.filename(), write_clip(clip));
    carry_sidecar(p, cfg.output);
    if (cfg.groundTruth) {
      const fs::path g = *cfg.groundTruth / p.filename();
      if (fs::exists(g)) d.score = score_clip(parse_clip(write_clip(clip)), read_clip_file(g), pitch, cfg);
    }
    progress("calibrate: {} {}/{} frames", p.filename().string(), d.calibrated, d.frames);
    return d;
  });

  CommandResult r;
  int frames = 0, calibrated = 0;
  std::vector<CalibScore> scores;
  for (const auto& o : outcomes) {
    if (!o.value) continue;
    frames += o.value->frames;
    calibrated += o.value->calibrated;
    if (o.value->score) scores.push_back(*o.value->score);
  }
  r.summary["command"] = "calibrate";
  r.summary["clips"] = clips.size();
  r.summary["frames"] = frames;
  r.summary["calibrated"] = calibrated;
  r.summary["cr"] = frames ? 100.0 * calibrated / frames : 0.0;
  if (!scores.empty()) {
    const auto rep = aggregate(scores);
    r.summary["jac"] = report_json(rep)["jac"];
    r.summary["fs"] = rep.fs;
  }
  r.status = collect_failures(clips, outcomes, r.summary);
  progress("calibrate: done in {:.2f} s", sw.seconds());
  finish(cfg, r);
  r.report = render(cfg, r.summary);
  return r;
}

// ----------------------------------------------------------------- annotate

CommandResult cmd_annotate(const RunConfig& cfg) {
  validate(cfg, "annotate");
  Stopwatch sw;
  const PitchModel pitch = build_pitch(cfg.dims);
  const auto clips = list_clips(cfg.input);
  auto outcomes = run_pool<int>(clips, cfg.jobs, [&](const fs::path& p) {
    ClipAnnotation clip = load_clip(p);
    int n = 0;
    for (auto& [idx, f] : clip.frames) {
      if (!f.validCamParams || !f.camera) continue;
      const auto proj = project_pitch(*f.camera, pitch, clip.size, cfg.annotateSpacing);
      f.keypoints.clear();
      for (const auto& [id, q] : proj.keypoints) f.keypoints[id] = {q.x(), q.y(), 1.0};
      f.lines = proj.lines;
      ++n;
    }
    write_text_file(cfg.output / p.filename(), write_clip(clip));
    carry_sidecar(p, cfg.output);
    progress("annotate: {} {} frames", p.filename().string(), n);
    return n;
  });
  CommandResult r;
  int n = 0;
  for (const auto& o : outcomes) n += o.value.value_or(0);
  r.summary["command"] = "annotate";
  r.summary["clips"] = clips.size();
  r.summary["annotated_frames"] = n;
  r.status = collect_failures(clips, outcomes, r.summary);
  progress("annotate: done in {:.2f} s", sw.seconds());
  finish(cfg, r);
  r.report = render(cfg, r.summary);
  return r;
}

// -------------------------------------------------------------------- track

CommandResult cmd_track(const RunConfig& cfg) {
  validate(cfg, "track");
  Stopwatch sw;
  const auto clips = list_clips(cfg.input);
  auto outcomes = run_pool<int>(clips, cfg.jobs, [&](const fs::path& p) {
    ClipAnnotation clip = load_clip(p);
    const auto emb = load_sidecar(p);
    const auto dets = clip_detections(clip, emb);
    const auto tracklets = run_sequence(dets.frames, cfg.tracker);
    for (const auto& tl : tracklets)
      for (const auto& e : tl.entries) clip.frames.at(e.frame).athletes[e.detectionIndex].trackId = tl.trackId;
    write_text_file(cfg.output / p.filename(), write_clip(clip));
    carry_sidecar(p, cfg.output);
    progress("track: {} {} tracks", p.filename().string(), tracklets.size());
    return static_cast<int>(tracklets.size());
  });
  CommandResult r;
  int n = 0;
  for (const auto& o : outcomes) n += o.value.value_or(0);
  r.summary["command"] = "track";
  r.summary["clips"] = clips.size();
  r.summary["tracks"] = n;
  r.status = collect_failures(clips, outcomes, r.summary);
  progress("track: done in {:.2f} s", sw.seconds());
  finish(cfg, r);
  r.report = render(cfg, r.summary);
  return r;
}

// -------------------------------------------------------------- postprocess

CommandResult cmd_postprocess(const RunConfig& cfg) {
  validate(cfg, "postprocess");
  Stopwatch sw;
  const auto clips = list_clips(cfg.input);
  struct Done {
    int before = 0;
    int after = 0;
    bool teams = false;
  };
  auto outcomes = run_pool<Done>(clips, cfg.jobs, [&](const fs::path& p) {
    ClipAnnotation clip = load_clip(p);
    const auto emb = load_sidecar(p);
    const auto dets = clip_detections(clip, emb);

    std::map<int, Tracklet> by_id;
    for (const auto& [idx, f] : clip.frames)
      for (std::size_t i = 0; i < f.athletes.size(); ++i) {
        const auto& id = f.athletes[i].trackId;
        if (!id) continue;
        Tracklet& tl = by_id[*id];
        tl.trackId = *id;
        tl.entries.push_back({idx, static_cast<int>(i), dets.frames[idx][i]});
      }
    std::vector<Tracklet> tracklets;
    for (auto& [id, tl] : by_id) {
      for (auto& e : tl.entries)
        e.detection = filter_legibility({e.detection})[0];
      refresh_attributes(tl);
      tracklets.push_back(std::move(tl));
    }
    Done d;
    d.before = static_cast<int>(tracklets.size());
    tracklets = merge_tracklets(std::move(tracklets), cfg.merge);
    d.after = static_cast<int>(tracklets.size());

    std::map<int, CameraParams> cams;
    const ClipAnnotation* calib = &clip;
    ClipAnnotation external;
    if (cfg.calibrations) {
      external = read_clip_file(*cfg.calibrations / p.filename());
      calib = &external;
    }
    for (const auto& [idx, f] : calib->frames)
      if (f.validCamParams && f.camera) cams[idx] = *f.camera;
    try {
      TeamConfig tc = cfg.team;
      tc.seed = cfg.seed;
      tracklets = assign_teams(std::move(tracklets), cams, tc);
      d.teams = true;
    } catch (const InsufficientData& e) {
      progress("postprocess: {}: no team split ({})", p.filename().string(), e.what());
    }

    for (const auto& tl : tracklets)
      for (const auto& e : tl.entries) {
        auto& rec = clip.frames.at(e.frame).athletes[e.detectionIndex];
        rec.trackId = tl.trackId;
        rec.jerseyNumber = tl.votedJersey;
        if (tl.votedRole != Role::unknown) rec.role = std::string(to_string(tl.votedRole));
        rec.team = tl.team;
      }
    write_text_file(cfg.output / p.filename(), write_clip(clip));
    carry_sidecar(p, cfg.output);
    progress("postprocess: {} {} -> {} tracklets", p.filename().string(), d.before, d.after);
    return d;
  });
  CommandResult r;
  int before = 0, after = 0;
  for (const auto& o : outcomes)
    if (o.value) {
      before += o.value->before;
      after += o.value->after;
    }
  r.summary["command"] = "postprocess";
  r.summary["clips"] = clips.size();
  r.summary["tracklets_in"] = before;
  r.summary["tracklets_out"] = after;
  r.status = collect_failures(clips, outcomes, r.summary);
  progress("postprocess: done in {:.2f} s", sw.seconds());
  finish(cfg, r);
  r.report = render(cfg, r.summary);
  return r;
}

// --------------------------------------------------------------------- eval

namespace {

TrackingData tracking_data(const ClipAnnotation& clip, int idOffset, int frameCount) {
  TrackingData d(frameCount);
  for (const auto& [idx, f] : clip.frames) {
    if (idx >= frameCount) continue;
    for (const auto& a : f.athletes) {
      if (!a.trackId) continue;
      d[idx].ids.push_back(*a.trackId + idOffset);
      d[idx].boxes.push_back(a.bbox);
    }
  }
  return d;
}

int frame_count(const ClipAnnotation& c) { return c.frames.empty() ? 0 : c.frames.rbegin()->first + 1; }

}  // namespace

CommandResult cmd_eval(const RunConfig& cfg) {
  validate(cfg, "eval");
  Stopwatch sw;
  CommandResult r;

  if (cfg.scores) {
    const Json j = Json::parse(read_text_file(*cfg.scores));
    std::map<double, double> jac;
    for (const auto& [k, v] : j.at("jac").items()) jac[std::stod(k)] = v.get<double>() / 100.0;
    const auto rep = make_calibration_report(jac, j.at("cr").get<double>() / 100.0, j.value("frames", 0));
    r.summary = report_json(rep);
    r.summary["mode"] = "calibration";
    r.report = cfg.format == "table" ? to_table(rep) : to_json(rep) + "\n";
    finish(cfg, r);
    return r;
  }

  const auto gts = list_clips(*cfg.groundTruth);
  if (cfg.evalMode == "calibration") {
    const PitchModel pitch = build_pitch(cfg.dims);
    auto outcomes = run_pool<CalibScore>(gts, cfg.jobs, [&](const fs::path& g) {
      const ClipAnnotation gt = read_clip_file(g);
      const fs::path p = cfg.input / g.filename();
      ClipAnnotation pred;
      pred.size = gt.size;
      if (fs::exists(p)) pred = load_clip(p);
      else progress("eval: {} has no prediction", g.filename().string());
      return score_clip(pred, gt, pitch, cfg);
    });
    std::vector<CalibScore> parts;
    for (const auto& o : outcomes)
      if (o.value) parts.push_back(*o.value);
    r.status = collect_failures(gts, outcomes, r.summary);
    if (!parts.empty()) {
      const auto rep = aggregate(parts);
      Json failures = r.summary["failures"];
      r.summary = report_json(rep);
      r.summary["failures"] = failures;
      r.report = cfg.format == "table" ? to_table(rep) : to_json(rep) + "\n";
    }
  } else {
    TrackingData gt_all, pred_all;
    for (std::size_t i = 0; i < gts.size(); ++i) {
      try {
        const ClipAnnotation gt = read_clip_file(gts[i]);
        const fs::path p = cfg.input / gts[i].filename();
        ClipAnnotation pred;
        if (fs::exists(p)) pred = load_clip(p);
        const int n = std::max(frame_count(gt), frame_count(pred));
        // Clips are concatenated with disjoint id ranges.
        const int offset = static_cast<int>(i) * 1000000;
        auto g = tracking_data(gt, offset, n);
        auto q = tracking_data(pred, offset, n);
        gt_all.insert(gt_all.end(), g.begin(), g.end());
        pred_all.insert(pred_all.end(), q.begin(), q.end());
      } catch (const SchemaViolation& e) {
        progress("error: {}: {} at '{}'", gts[i].filename().string(), e.what(), e.path());
        r.status = 2;
      }
    }
    const auto rep = evaluate_tracking(gt_all, pred_all);
    r.summary = Json::parse(to_json(rep));
    r.report = cfg.format == "table" ? to_table(rep) : to_json(rep) + "\n";
  }
  r.summary["mode"] = cfg.evalMode;
  progress("eval: done in {:.2f} s", sw.seconds());
  finish(cfg, r);
  if (r.report.empty()) r.report = render(cfg, r.summary);
  return r;
}

}  // namespace gsr
