#include <future>
#include <iostream>
#include <map>

#include "clients.hpp"
#include "commands.hpp"
#include "etho/behavior/timeline.hpp"
#include "etho/error.hpp"
#include "etho/perception/live.hpp"
#include "etho/util/text.hpp"
#include "run_state.hpp"

namespace etho::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct BehaviorArgs {
  std::string config;
  std::string features;
  std::string output;
  int k = 0;
  long long seed = -1;
  double min_duration = -1.0;
  int workers = 1;
  long long max_clips = -1;
  bool fresh = false;
  std::string table;
  std::string document;
};

struct BehaviorJob {
  fs::path base_dir;
  fs::path features;
  fs::path output;
  behavior::DecConfig dec;
  double min_duration = 0.5;
  behavior::CaptionConfig caption;
  behavior::MergeConfig merge;
  json client = json::object();
  json effective;
};

// The config file is optional; flags fill in or override its values.
BehaviorJob load_behavior_job(const BehaviorArgs& args) {
  json doc = json::object();
  BehaviorJob job;
  if (!args.config.empty()) {
    doc = read_json_file(args.config);
    job.base_dir = fs::path(args.config).parent_path();
  }
  const ConfigNode root(doc, "");
  root.allow_only({"features", "output", "dec", "min_duration_s", "caption", "merge", "client"});

  if (!args.features.empty()) {
    job.features = args.features;
  } else if (root.has("features")) {
    job.features = resolve_path(job.base_dir, root.str("features"));
  } else {
    throw ConfigError("config key 'features' is required (or pass --features)");
  }
  job.output = !args.output.empty() ? fs::path(args.output) : resolve_path(job.base_dir, root.str("output", "behavior"));

  const auto dec = root.child("dec");
  dec.allow_only({"k", "epochs", "target_interval", "alpha", "initial_step", "kmeans_iterations", "max_reinit",
                  "tolerance", "seed"});
  auto& d = job.dec;
  d.k = static_cast<int>(args.k > 0 ? args.k : dec.integer("k", d.k));
  d.epochs = static_cast<int>(dec.integer("epochs", d.epochs));
  d.target_interval = static_cast<int>(dec.integer("target_interval", d.target_interval));
  d.alpha = dec.num("alpha", d.alpha);
  d.initial_step = dec.num("initial_step", d.initial_step);
  d.kmeans_iterations = static_cast<int>(dec.integer("kmeans_iterations", d.kmeans_iterations));
  d.max_reinit = static_cast<int>(dec.integer("max_reinit", d.max_reinit));
  d.tolerance = dec.num("tolerance", d.tolerance);
  d.seed = static_cast<std::uint64_t>(args.seed >= 0 ? args.seed : dec.integer("seed", 0));
  d.validate();

  job.min_duration = args.min_duration >= 0.0 ? args.min_duration : root.num("min_duration_s", job.min_duration);
  if (job.min_duration < 0.0) throw ConfigError("config key 'min_duration_s' must be >= 0");

  const auto cap = root.child("caption");
  cap.allow_only({"fps", "frames"});
  job.caption.fps = cap.num("fps", job.caption.fps);
  job.caption.frame_template = cap.str("frames", "");
  if (!job.caption.frame_template.empty()) {
    job.caption.frame_template = resolve_path(job.base_dir, job.caption.frame_template).string();
  }
  const auto merge = root.child("merge");
  merge.allow_only({"epoch_seconds"});
  job.merge.epoch_seconds = merge.num("epoch_seconds", job.merge.epoch_seconds);

  job.client = root.child("client").raw();
  const auto retries = ConfigNode(job.client, "client").integer("max_retries", 2);
  job.caption.max_retries = static_cast<int>(retries);
  job.merge.max_retries = static_cast<int>(retries);
  job.caption.validate();
  job.merge.validate();

  job.effective = {{"features", args.features.empty() ? root.str("features") : args.features},
                   {"dec",
                    {{"k", d.k},
                     {"epochs", d.epochs},
                     {"target_interval", d.target_interval},
                     {"alpha", d.alpha},
                     {"initial_step", d.initial_step},
                     {"kmeans_iterations", d.kmeans_iterations},
                     {"max_reinit", d.max_reinit},
                     {"tolerance", d.tolerance},
                     {"seed", d.seed}}},
                   {"min_duration_s", job.min_duration},
                   {"caption", {{"fps", job.caption.fps}, {"frames", cap.str("frames", "")}}},
                   {"merge", {{"epoch_seconds", job.merge.epoch_seconds}}},
                   {"client", job.client},
                   {"prompt_version", behavior::kBehaviorPromptVersion}};
  job.effective["client"]["max_retries"] = retries;
  if (!job.effective["client"].contains("kind")) job.effective["client"]["kind"] = "oracle";
  return job;
}

struct Session {
  std::vector<behavior::FeatureSequence> sequences;
  double fps = 10.0;
  long long frames = 0;
};

Session load_session(const BehaviorJob& job) {
  Session s;
  s.sequences = behavior::read_features(job.features);
  behavior::validate_session(s.sequences);
  s.fps = s.sequences.front().fps;
  s.frames = s.sequences.front().frames();
  return s;
}

void echo_config(const BehaviorJob& job, std::string_view step) {
  write_atomic(job.output / ("effective_config." + std::string(step) + ".json"), job.effective.dump(2) + "\n");
}

int behavior_cluster(const BehaviorArgs& args) {
  const auto job = load_behavior_job(args);
  const auto session = load_session(job);
  const auto model = behavior::dec_fit(session.sequences, job.dec);

  std::string rows(behavior::kSegmentsHeader);
  rows += "\n";
  std::size_t n_segments = 0;
  for (const auto& seq : session.sequences) {
    const auto segs = behavior::segment_extract(seq, model, job.min_duration);
    behavior::validate_partition(segs, seq.frames());
    rows += behavior::segment_rows(segs);
    n_segments += segs.size();
  }

  json centroids = json::array();
  for (Eigen::Index j = 0; j < model.centroids.rows(); ++j) {
    json row = json::array();
    for (Eigen::Index c = 0; c < model.centroids.cols(); ++c) row.push_back(model.centroids(j, c));
    centroids.push_back(row);
  }
  const json model_doc = {{"k", model.k},
                          {"alpha", model.alpha},
                          {"seed", model.seed},
                          {"reinitializations", model.reinitializations},
                          {"centroids", centroids},
                          {"trace", model.trace}};
  fs::create_directories(job.output);
  echo_config(job, "cluster");
  write_atomic(job.output / "segments.csv", rows);
  write_atomic(job.output / "dec_model.json", model_doc.dump(2) + "\n");
  std::cout << "behavior cluster: k=" << model.k << ", " << n_segments << " clips over " << session.sequences.size()
            << " animals, final loss " << util::fmt_double(model.trace.empty() ? 0.0 : model.trace.back()) << "\n";
  return 0;
}

// Clips in caption order: animals as listed in the table, clip ids per animal.
std::vector<std::pair<behavior::ClipSegment, int>> clip_order(const fs::path& segments, double fps) {
  std::vector<std::pair<behavior::ClipSegment, int>> out;
  std::map<std::string, int> next;
  for (auto& s : behavior::read_segments(segments, fps)) {
    const int id = next[s.animal]++;
    out.emplace_back(std::move(s), id);
  }
  return out;
}

int behavior_caption(const BehaviorArgs& args) {
  const auto job = load_behavior_job(args);
  const auto session = load_session(job);
  const fs::path segments = job.output / "segments.csv";
  const auto clips = clip_order(segments, session.fps);
  auto client = make_client(ConfigNode(job.client, "client"), job.base_dir);

  json digest_src = job.effective;
  digest_src.erase("merge");
  digest_src["segments_sha256"] = perception::sha256_hex(util::read_file(segments));
  ResumableRun run(job.output, perception::sha256_hex(digest_src.dump()), {{"captions.jsonl", ""}}, args.fresh);
  echo_config(job, "caption");

  auto caption_cfg = job.caption;
  caption_cfg.max_retries = client.max_retries;
  long long done = run.completed();
  long long uncaptioned = run.state().value("uncaptioned", 0LL);
  const auto total = static_cast<long long>(clips.size());
  const auto batch = static_cast<long long>(std::max(1, args.workers));
  long long captioned_now = 0;
  while (done < total) {
    if (args.max_clips >= 0 && captioned_now >= args.max_clips) {
      std::cout << "stopped after " << captioned_now << " clips (" << done << "/" << total
                << " done); rerun to resume\n";
      return 0;
    }
    long long end = std::min(total, done + batch);
    if (args.max_clips >= 0) end = std::min(end, done + args.max_clips - captioned_now);
    std::vector<std::future<behavior::ClipCaption>> pending;
    for (long long i = done; i < end; ++i) {
      pending.push_back(std::async(batch > 1 ? std::launch::async : std::launch::deferred, [&, i] {
        const auto& c = clips[static_cast<std::size_t>(i)];
        return behavior::caption_clip(c.first, c.second, session.fps, caption_cfg, *client.client);
      }));
    }
    // Completed captions are committed in order; a failure stops at the
    // first clip that did not finish.
    for (long long i = done; i < end; ++i) {
      const auto cap = pending[static_cast<std::size_t>(i - done)].get();
      uncaptioned += cap.uncaptioned ? 1 : 0;
      run.append("captions.jsonl", behavior::to_json(cap).dump() + "\n");
      run.commit(i + 1, {{"uncaptioned", uncaptioned}});
    }
    captioned_now += end - done;
    done = end;
  }
  std::cout << "behavior caption: " << total << " clips, " << uncaptioned << " uncaptioned\n";
  return 0;
}

std::map<std::string, std::vector<behavior::ClipCaption>> read_captions(const fs::path& path, double fps) {
  std::map<std::string, std::vector<behavior::ClipCaption>> out;
  const auto text = util::read_file(path);
  for (const auto& line : util::split(text, '\n')) {
    if (line.empty()) continue;
    auto c = behavior::caption_from_json(json::parse(line), fps);
    out[c.clip.animal].push_back(std::move(c));
  }
  return out;
}

int behavior_merge(const BehaviorArgs& args) {
  const auto job = load_behavior_job(args);
  const auto session = load_session(job);
  auto captions = read_captions(job.output / "captions.jsonl", session.fps);
  const auto expected = clip_order(job.output / "segments.csv", session.fps).size();
  std::size_t have = 0;
  for (const auto& [a, cs] : captions) have += cs.size();
  if (have != expected) {
    throw ValidationError("captions.jsonl holds " + std::to_string(have) + " of " + std::to_string(expected) +
                          " clips; finish 'behavior caption' first");
  }
  auto client = make_client(ConfigNode(job.client, "client"), job.base_dir);
  auto merge_cfg = job.merge;
  merge_cfg.max_retries = client.max_retries;

  std::map<std::string, behavior::AnimalTimeline> animals;
  behavior::MergeReport report;
  for (auto& [animal, cs] : captions) {
    behavior::AnimalTimeline at;
    at.frames = cs.back().clip.end;
    at.segments = behavior::merge_segments(cs, session.fps, merge_cfg, *client.client, &report);
    at.clips = std::move(cs);
    animals[animal] = std::move(at);
  }
  const json metadata = {{"features", job.effective["features"]},
                         {"k", job.dec.k},
                         {"dec_seed", job.dec.seed},
                         {"min_duration_s", job.min_duration},
                         {"epoch_seconds", job.merge.epoch_seconds},
                         {"prompt_version", behavior::kBehaviorPromptVersion},
                         {"merge_calls", report.calls},
                         {"merge_fallbacks", report.fallbacks}};
  const auto timeline = behavior::build_timeline(std::move(animals), session.fps, metadata);
  echo_config(job, "merge");
  behavior::write_timeline(job.output / "timeline.json", timeline);
  std::size_t segments = 0;
  for (const auto& [a, at] : timeline.animals) segments += at.segments.size();
  std::cout << "behavior merge: " << segments << " merged segments, " << report.fallbacks << " fallback epochs\n";
  if (report.calls > 0 && report.unavailable == report.calls) {
    std::cerr << "etho: error: perception client unavailable for every merge call (label-equality fallback used)\n";
    return 3;
  }
  return 0;
}

int behavior_export(const BehaviorArgs& args) {
  fs::path dir = args.output;
  if (dir.empty()) dir = load_behavior_job(args).output;
  const auto timeline = behavior::read_timeline(dir / "timeline.json");
  timeline.validate();
  const fs::path table = args.table.empty() ? dir / "timeline.csv" : fs::path(args.table);
  const fs::path document = args.document.empty() ? dir / "timeline_export.json" : fs::path(args.document);
  write_atomic(table, behavior::timeline_table(timeline));
  write_atomic(document, behavior::to_json(timeline).dump(2) + "\n");
  std::cout << "behavior export: " << table.string() << ", " << document.string() << "\n";
  return 0;
}

void common_options(CLI::App* cmd, BehaviorArgs& a) {
  cmd->add_option("--config", a.config, "Behavior configuration (JSON)")->check(CLI::ExistingFile);
  cmd->add_option("--features", a.features, "Feature file (overrides config)");
  cmd->add_option("--output", a.output, "Output directory (overrides config)");
}

}  // namespace

void add_behavior_commands(CLI::App& app, Action& action) {
  auto* beh = app.add_subcommand("behavior", "Behavior segmentation, captioning and merging");
  beh->require_subcommand(1);

  auto cl = std::make_shared<BehaviorArgs>();
  auto* cluster = beh->add_subcommand("cluster", "Fit DEC and cut per-animal clips");
  common_options(cluster, *cl);
  cluster->add_option("--k", cl->k, "Number of clusters")->check(CLI::Range(2, 100000));
  cluster->add_option("--seed", cl->seed, "Clustering seed")->check(CLI::NonNegativeNumber);
  cluster->add_option("--min-duration", cl->min_duration, "Shortest clip in seconds")->check(CLI::NonNegativeNumber);
  cluster->final_callback([&action, cl] { action = [cl] { return behavior_cluster(*cl); }; });

  auto ca = std::make_shared<BehaviorArgs>();
  auto* caption = beh->add_subcommand("caption", "Caption every clip (resumable)");
  common_options(caption, *ca);
  caption->add_option("--workers", ca->workers, "Concurrent caption requests")->check(CLI::Range(1, 256));
  caption->add_option("--max-clips", ca->max_clips, "Stop after this many clips; rerun to resume")
      ->check(CLI::NonNegativeNumber);
  caption->add_flag("--fresh", ca->fresh, "Discard captions from an earlier run");
  caption->final_callback([&action, ca] { action = [ca] { return behavior_caption(*ca); }; });

  auto me = std::make_shared<BehaviorArgs>();
  auto* merge = beh->add_subcommand("merge", "Merge captioned clips into a timeline");
  common_options(merge, *me);
  merge->final_callback([&action, me] { action = [me] { return behavior_merge(*me); }; });

  auto ex = std::make_shared<BehaviorArgs>();
  auto* exp = beh->add_subcommand("export", "Write the flat table and the timeline document");
  common_options(exp, *ex);
  exp->add_option("--table", ex->table, "Table path (default: <output>/timeline.csv)");
  exp->add_option("--document", ex->document, "Document path (default: <output>/timeline_export.json)");
  exp->final_callback([&action, ex] { action = [ex] { return behavior_export(*ex); }; });
}

}  // namespace etho::cli
