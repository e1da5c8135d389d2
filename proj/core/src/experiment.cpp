#include "freqlab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "freqlab/rng.hpp"
#include "freqlab/svg.hpp"

namespace freqlab {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt_double(double v, const char* spec = "%.6f") {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::string fmt_freq(double f) { return fmt_double(f, "%g"); }

std::uint64_t noise_seed_of(const ExperimentConfig& config) {
  return Rng::derive(config.world.seed, {Rng::hash_string("noise")});
}

void run_parallel(std::vector<std::function<void()>>& jobs, int threads) {
  if (threads < 1) threads = 1;
  threads = std::min<int>(threads, static_cast<int>(jobs.size()));
  if (threads <= 1) {
    for (auto& job : jobs) job();
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= jobs.size()) break;
        try {
          jobs[i]();
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::sweep: return "sweep";
    case Mode::capacity_sweep: return "capacity_sweep";
    case Mode::matched_pair: return "matched_pair";
  }
  return "sweep";
}

void ExperimentConfig::validate() const {
  world.validate();
  render.validate();
  noise.validate();
  sample.validate();
  grid.validate();
  train.validate();
  if (grid.max() > world.native_frequency + 1e-9)
    throw ConfigError("grid max exceeds the native frequency");
  if (seeds.empty()) throw ConfigError("seeds must be nonempty");
  if (widths.empty()) throw ConfigError("widths must be nonempty");
  if (num_val_scenes < 1) throw ConfigError("num_val_scenes must be >= 1");
}

ModelConfig ExperimentConfig::model_config(int width) const {
  ModelConfig mc;
  mc.width = width;
  mc.image_size = render.image_size;
  mc.input_channels =
      static_cast<int>(sample.bev_frame_offsets.size()) * kBevChannels;
  mc.history_dim = sample.num_history_samples() * 5;
  mc.num_waypoints = sample.num_waypoints();
  return mc;
}

ExperimentConfig desk_profile() {
  ExperimentConfig c;
  c.world.num_scenes = 40;
  c.world.scene_duration = 12.0;
  c.world.native_frequency = 10.0;
  c.world.speed_range = {5.0, 15.0};
  c.world.curvature_range = {-0.05, 0.05};
  c.world.num_agents_range = {2, 5};
  c.world.map_density = 6;
  c.world.seed = 42;
  c.num_val_scenes = 10;
  c.render.image_size = 32;
  c.render.meters_per_pixel = 1.0;
  c.noise.background_sigma = 0.5;
  c.noise.jitter_max = 2;
  c.noise.enabled = true;
  c.sample.history_window = 1.0;
  c.sample.history_rate = 10.0;
  c.sample.bev_frame_offsets = {-0.5, 0.0};
  c.sample.horizon = 3.0;
  c.sample.spacing = 0.5;
  c.grid.frequencies = {2.0, 4.0, 6.0, 8.0, 10.0};
  c.widths = {4, 16};
  c.seeds = {42, 43, 44};
  c.train.learning_rate = 2e-2;
  c.train.batch_size = 32;
  c.train.epochs = 3;
  c.train.seed = 42;
  c.train.optimizer = OptKind::adam;
  c.train.shuffle = true;
  c.pair = {6.0, 10.0, 3};
  return c;
}

ExperimentConfig full_profile() {
  ExperimentConfig c = desk_profile();
  c.world.num_scenes = 200;
  c.world.scene_duration = 20.0;
  c.num_val_scenes = 40;
  c.grid.frequencies = {2.0, 4.0, 6.0, 7.0, 8.0, 9.0, 10.0};
  c.widths = {16, 48, 64};
  c.train.epochs = 10;
  return c;
}

namespace {

template <typename T>
void maybe(const ordered_json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void parse_pair_d(const ordered_json& j, const char* key,
                  std::pair<double, double>& out) {
  if (j.contains(key)) {
    const auto& a = j.at(key);
    out = {a.at(0).get<double>(), a.at(1).get<double>()};
  }
}

}  // namespace

ExperimentConfig load_config(const std::string& path,
                             const ExperimentConfig& base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  ExperimentConfig c = base;
  if (j.contains("world")) {
    const auto& w = j.at("world");
    maybe(w, "num_scenes", c.world.num_scenes);
    maybe(w, "scene_duration", c.world.scene_duration);
    maybe(w, "native_frequency", c.world.native_frequency);
    parse_pair_d(w, "speed_range", c.world.speed_range);
    parse_pair_d(w, "curvature_range", c.world.curvature_range);
    if (w.contains("num_agents_range")) {
      const auto& a = w.at("num_agents_range");
      c.world.num_agents_range = {a.at(0).get<int>(), a.at(1).get<int>()};
    }
    maybe(w, "map_density", c.world.map_density);
    maybe(w, "seed", c.world.seed);
  }
  maybe(j, "num_val_scenes", c.num_val_scenes);
  if (j.contains("render")) {
    const auto& r = j.at("render");
    maybe(r, "image_size", c.render.image_size);
    maybe(r, "meters_per_pixel", c.render.meters_per_pixel);
    if (r.contains("ego_anchor_pixel")) {
      const auto& a = r.at("ego_anchor_pixel");
      c.render.ego_anchor_pixel = {a.at(0).get<int>(), a.at(1).get<int>()};
    }
  }
  if (j.contains("noise")) {
    const auto& n = j.at("noise");
    maybe(n, "background_sigma", c.noise.background_sigma);
    maybe(n, "jitter_max", c.noise.jitter_max);
    maybe(n, "enabled", c.noise.enabled);
  }
  if (j.contains("sample")) {
    const auto& s = j.at("sample");
    maybe(s, "history_window", c.sample.history_window);
    maybe(s, "history_rate", c.sample.history_rate);
    maybe(s, "bev_frame_offsets", c.sample.bev_frame_offsets);
    maybe(s, "horizon", c.sample.horizon);
    maybe(s, "spacing", c.sample.spacing);
  }
  maybe(j, "grid", c.grid.frequencies);
  maybe(j, "widths", c.widths);
  maybe(j, "seeds", c.seeds);
  if (j.contains("train")) {
    const auto& t = j.at("train");
    maybe(t, "learning_rate", c.train.learning_rate);
    maybe(t, "batch_size", c.train.batch_size);
    maybe(t, "epochs", c.train.epochs);
    maybe(t, "seed", c.train.seed);
    if (t.contains("optimizer")) {
      const std::string kind = t.at("optimizer").get<std::string>();
      if (kind == "sgd") c.train.optimizer = OptKind::sgd;
      else if (kind == "adam") c.train.optimizer = OptKind::adam;
      else throw ConfigError("unknown optimizer: " + kind);
    }
    maybe(t, "shuffle", c.train.shuffle);
  }
  if (j.contains("mode")) {
    const std::string m = j.at("mode").get<std::string>();
    if (m == "sweep") c.mode = Mode::sweep;
    else if (m == "capacity_sweep" || m == "capacity-sweep")
      c.mode = Mode::capacity_sweep;
    else if (m == "matched_pair" || m == "matched-pair")
      c.mode = Mode::matched_pair;
    else throw ConfigError("unknown mode: " + m);
  }
  maybe(j, "output_dir", c.output_dir);
  if (j.contains("pair")) {
    const auto& p = j.at("pair");
    maybe(p, "f_low", c.pair.f_low);
    maybe(p, "f_high", c.pair.f_high);
    maybe(p, "epochs_high", c.pair.epochs_high);
  }
  maybe(j, "timing", c.timing);
  c.validate();
  return c;
}

FrequencyResponse ResultsTable::response_for_width(int width) const {
  FrequencyResponse response;
  for (const AggRow& row : aggregate) {
    if (row.width != width) continue;
    FrequencyEntry entry;
    entry.ade_mean = row.ade_mean;
    entry.ade_std = row.ade_std;
    entry.fde_mean = row.fde_mean;
    entry.fde_std = row.fde_std;
    for (const RawRow& raw : this->raw) {
      if (raw.width == width && raw.frequency == row.frequency &&
          !raw.excluded) {
        entry.ade_seeds.push_back(raw.ade);
        entry.fde_seeds.push_back(raw.fde);
      }
    }
    response.entries[row.frequency] = entry;
  }
  return response;
}

ResultsTable run_sweep(const ExperimentConfig& config, int threads) {
  config.validate();
  const std::uint64_t noise_seed = noise_seed_of(config);

  const SceneSet train_scenes = generate_scene_set(config.world, Role::train);
  WorldConfig val_world = config.world;
  val_world.num_scenes = config.num_val_scenes;
  const SceneSet val_scenes = generate_scene_set(val_world, Role::validation);
  const FrequencyDataset valset = build_validation_set(
      val_scenes, config.grid, config.sample, config.render, config.noise,
      noise_seed);

  ResultsTable table;
  for (double f : config.grid.frequencies) {
    const FrequencyDataset dataset = build_training_set(
        train_scenes, f, config.sample, config.render, config.noise,
        noise_seed);
    const std::size_t base = table.raw.size();
    table.raw.resize(base + config.widths.size() * config.seeds.size());

    std::vector<std::function<void()>> jobs;
    std::size_t slot = base;
    for (int width : config.widths) {
      for (std::uint64_t seed : config.seeds) {
        RawRow* row = &table.raw[slot++];
        jobs.push_back([&, width, seed, f, row] {
          const auto f_key =
              static_cast<std::uint64_t>(std::llround(f * 1000.0));
          ModelConfig mc = config.model_config(width);
          mc.seed = Rng::derive(
              seed, {Rng::hash_string("model"),
                     static_cast<std::uint64_t>(width), f_key});
          TrainConfig tc = config.train;
          tc.seed = Rng::derive(
              seed, {Rng::hash_string("train"),
                     static_cast<std::uint64_t>(width), f_key});
          row->mode = mode_name(config.mode);
          row->frequency = f;
          row->width = width;
          row->seed = seed;
          row->epochs = tc.epochs;
          try {
            ToyPredictor model(mc);
            const RunRecord record = train(model, dataset, tc);
            const MetricResult metrics = evaluate(model, valset);
            row->total_steps = record.total_steps;
            row->ade = metrics.ade;
            row->fde = metrics.fde;
            row->wall_time = config.timing ? record.wall_time : 0.0;
          } catch (const DivergenceError&) {
            row->excluded = true;
            row->ade = std::numeric_limits<double>::quiet_NaN();
            row->fde = std::numeric_limits<double>::quiet_NaN();
          }
        });
      }
    }
    run_parallel(jobs, threads);
  }

  std::sort(table.raw.begin(), table.raw.end(),
            [](const RawRow& a, const RawRow& b) {
              return std::tie(a.width, a.frequency, a.seed) <
                     std::tie(b.width, b.frequency, b.seed);
            });

  // Aggregates from non-excluded raw rows, then mark f* per width.
  for (int width : config.widths) {
    std::vector<AggRow> width_rows;
    for (double f : config.grid.frequencies) {
      std::vector<MetricResult> per_seed;
      for (const RawRow& raw : table.raw) {
        if (raw.width == width && raw.frequency == f && !raw.excluded)
          per_seed.push_back({raw.ade, raw.fde, 0});
      }
      AggRow agg;
      agg.frequency = f;
      agg.width = width;
      if (!per_seed.empty()) {
        const SeedAggregate sa = aggregate_seeds(per_seed);
        agg.ade_mean = sa.ade_mean;
        agg.ade_std = sa.ade_std;
        agg.fde_mean = sa.fde_mean;
        agg.fde_std = sa.fde_std;
      } else {
        agg.ade_mean = agg.fde_mean = std::numeric_limits<double>::quiet_NaN();
        agg.ade_std = agg.fde_std = std::numeric_limits<double>::quiet_NaN();
      }
      width_rows.push_back(agg);
    }
    std::size_t best = width_rows.size();
    for (std::size_t i = 0; i < width_rows.size(); ++i) {
      if (std::isnan(width_rows[i].ade_mean)) continue;
      if (best == width_rows.size() ||
          width_rows[i].ade_mean < width_rows[best].ade_mean)
        best = i;
    }
    if (best < width_rows.size()) width_rows[best].f_star = true;
    table.aggregate.insert(table.aggregate.end(), width_rows.begin(),
                           width_rows.end());
  }
  return table;
}

CapacityResult run_capacity_sweep(const ExperimentConfig& config,
                                  int threads) {
  if (config.widths.size() < 2)
    throw ConfigError("capacity sweep needs at least 2 widths");
  CapacityResult result;
  result.table = run_sweep(config, threads);
  for (int width : config.widths) {
    const BestFrequency best =
        best_frequency(result.table.response_for_width(width));
    result.f_star_per_width.emplace_back(width, best.f_star);
  }
  return result;
}

MatchedPairRow run_matched_pair_experiment(const ExperimentConfig& config) {
  config.validate();
  const std::uint64_t noise_seed = noise_seed_of(config);
  const SceneSet train_scenes = generate_scene_set(config.world, Role::train);
  WorldConfig val_world = config.world;
  val_world.num_scenes = config.num_val_scenes;
  const SceneSet val_scenes = generate_scene_set(val_world, Role::validation);
  const FrequencyDataset valset = build_validation_set(
      val_scenes, config.grid, config.sample, config.render, config.noise,
      noise_seed);

  ModelConfig mc = config.model_config(config.widths.front());
  mc.seed = Rng::derive(config.seeds.front(), {Rng::hash_string("model")});
  TrainConfig tc = config.train;
  tc.seed = Rng::derive(config.seeds.front(), {Rng::hash_string("train")});

  const MatchedPairResult pair = run_matched_pair(
      train_scenes, valset, config.pair.f_low, config.pair.f_high,
      config.pair.epochs_high, config.sample, config.render, config.noise,
      noise_seed, mc, tc);

  MatchedPairRow row;
  row.f_low = config.pair.f_low;
  row.f_high = config.pair.f_high;
  row.epochs_low = pair.epochs_low;
  row.epochs_high = pair.epochs_high;
  row.ade_low = pair.low_metrics.ade;
  row.fde_low = pair.low_metrics.fde;
  row.ade_high = pair.high_metrics.ade;
  row.fde_high = pair.high_metrics.fde;
  row.delta_ade_pct = pair.delta_ade_pct;
  return row;
}

void write_raw_csv(const ResultsTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "mode,frequency_hz,width,seed,epochs,total_steps,ade_m,fde_m,"
         "wall_time_s,excluded\n";
  for (const RawRow& r : table.raw) {
    out << r.mode << "," << fmt_freq(r.frequency) << "," << r.width << ","
        << r.seed << "," << r.epochs << "," << r.total_steps << ","
        << fmt_double(r.ade) << "," << fmt_double(r.fde) << ","
        << fmt_double(r.wall_time, "%.3f") << "," << (r.excluded ? 1 : 0)
        << "\n";
  }
}

void write_aggregate_csv(const ResultsTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "frequency_hz,width,ade_mean,ade_std,fde_mean,fde_std,f_star_flag\n";
  for (const AggRow& r : table.aggregate) {
    out << fmt_freq(r.frequency) << "," << r.width << ","
        << fmt_double(r.ade_mean) << "," << fmt_double(r.ade_std) << ","
        << fmt_double(r.fde_mean) << "," << fmt_double(r.fde_std) << ","
        << (r.f_star ? 1 : 0) << "\n";
  }
}

void write_census_csv(
    const std::vector<std::pair<double, std::size_t>>& census,
    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "frequency_hz,sample_count\n";
  for (const auto& [f, count] : census)
    out << fmt_freq(f) << "," << count << "\n";
}

std::string format_signed_pct(double pct) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%+.2f%%", pct);
  // Keep the conventional bare minus, plus sign for increases.
  std::string s = buf;
  if (!s.empty() && s[0] == '+') return s;
  return s;
}

void write_matched_pair_csv(const MatchedPairRow& row,
                            const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "f_low_hz,epochs_low,ade_low_m,fde_low_m,f_high_hz,epochs_high,"
         "ade_high_m,fde_high_m,delta_ade_pct\n";
  out << fmt_freq(row.f_low) << "," << row.epochs_low << ","
      << fmt_double(row.ade_low) << "," << fmt_double(row.fde_low) << ","
      << fmt_freq(row.f_high) << "," << row.epochs_high << ","
      << fmt_double(row.ade_high) << "," << fmt_double(row.fde_high) << ","
      << format_signed_pct(row.delta_ade_pct) << "\n";
}

void write_fstar_csv(const std::vector<std::pair<int, double>>& f_star,
                     const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "width,f_star_hz\n";
  for (const auto& [w, f] : f_star) out << w << "," << fmt_freq(f) << "\n";
}

void write_manifest_json(const ExperimentConfig& config,
                         const std::string& path) {
  ordered_json j;
  j["world"] = {
      {"num_scenes", config.world.num_scenes},
      {"scene_duration", config.world.scene_duration},
      {"native_frequency", config.world.native_frequency},
      {"speed_range", {config.world.speed_range.first, config.world.speed_range.second}},
      {"curvature_range",
       {config.world.curvature_range.first, config.world.curvature_range.second}},
      {"num_agents_range",
       {config.world.num_agents_range.first, config.world.num_agents_range.second}},
      {"map_density", config.world.map_density},
      {"seed", config.world.seed},
  };
  j["num_val_scenes"] = config.num_val_scenes;
  j["render"] = {
      {"image_size", config.render.image_size},
      {"meters_per_pixel", config.render.meters_per_pixel},
      {"ego_anchor_pixel",
       {config.render.anchor_pixel()[0], config.render.anchor_pixel()[1]}},
  };
  j["noise"] = {
      {"background_sigma", config.noise.background_sigma},
      {"jitter_max", config.noise.jitter_max},
      {"enabled", config.noise.enabled},
  };
  j["sample"] = {
      {"history_window", config.sample.history_window},
      {"history_rate", config.sample.history_rate},
      {"bev_frame_offsets", config.sample.bev_frame_offsets},
      {"horizon", config.sample.horizon},
      {"spacing", config.sample.spacing},
  };
  j["grid"] = config.grid.frequencies;
  j["widths"] = config.widths;
  j["seeds"] = config.seeds;
  j["train"] = {
      {"learning_rate", config.train.learning_rate},
      {"batch_size", config.train.batch_size},
      {"epochs", config.train.epochs},
      {"seed", config.train.seed},
      {"optimizer", config.train.optimizer == OptKind::adam ? "adam" : "sgd"},
      {"shuffle", config.train.shuffle},
  };
  j["mode"] = mode_name(config.mode);
  j["output_dir"] = config.output_dir;
  j["pair"] = {
      {"f_low", config.pair.f_low},
      {"f_high", config.pair.f_high},
      {"epochs_high", config.pair.epochs_high},
  };
  j["timing"] = config.timing;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << "\n";
}

void emit_response_plot(const ResultsTable& table, const std::string& path) {
  std::vector<int> widths;
  for (const AggRow& r : table.aggregate) {
    if (std::find(widths.begin(), widths.end(), r.width) == widths.end())
      widths.push_back(r.width);
  }
  std::vector<PlotSeries> series;
  for (int width : widths) {
    PlotSeries s;
    s.label = "W=" + std::to_string(width);
    for (const AggRow& r : table.aggregate) {
      if (r.width != width || std::isnan(r.ade_mean)) continue;
      s.x.push_back(r.frequency);
      s.y.push_back(r.ade_mean);
      s.yerr.push_back(r.ade_std);
      if (r.f_star) s.marker_x = r.frequency;
    }
    series.push_back(std::move(s));
  }
  emit_plot_svg(series, "frequency (Hz)", "ADE (m)", path);
}

void emit_fstar_plot(const std::vector<std::pair<int, double>>& f_star,
                     const std::string& path) {
  PlotSeries s;
  s.label = "f*";
  for (const auto& [w, f] : f_star) {
    s.x.push_back(static_cast<double>(w));
    s.y.push_back(f);
  }
  emit_plot_svg({s}, "width W", "best frequency f* (Hz)", path);
}

ResultsTable read_aggregate_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  ResultsTable table;
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty aggregate csv: " + path);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    AggRow row;
    std::getline(ss, field, ',');
    row.frequency = std::stod(field);
    std::getline(ss, field, ',');
    row.width = std::stoi(field);
    std::getline(ss, field, ',');
    row.ade_mean = std::stod(field);
    std::getline(ss, field, ',');
    row.ade_std = std::stod(field);
    std::getline(ss, field, ',');
    row.fde_mean = std::stod(field);
    std::getline(ss, field, ',');
    row.fde_std = std::stod(field);
    std::getline(ss, field, ',');
    row.f_star = field == "1";
    table.aggregate.push_back(row);
  }
  return table;
}

}  // namespace freqlab
