#include "cli.hpp"

#include <glob.h>

#include <algorithm>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "vstkit/consistency.hpp"
#include "vstkit/http_server.hpp"
#include "vstkit/observer.hpp"
#include "vstkit/parallel.hpp"
#include "vstkit/service.hpp"
#include "vstkit/session_store.hpp"

namespace vstkit::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("VSTKIT_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return "vstkit-data";
}

std::map<std::string, double> parse_pairs(const std::string& text, const std::string& what) {
  std::map<std::string, double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError(what + ": expected key=value, got '" + item + "'");
    try {
      std::size_t used = 0;
      const std::string value = item.substr(eq + 1);
      out[item.substr(0, eq)] = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw UsageError(what + ": bad number in '" + item + "'");
    }
  }
  return out;
}

ObserverModel parse_observer(const std::string& text) {
  ObserverModel m = ObserverModel::validation_default();
  for (const auto& [key, value] : parse_pairs(text, "--observer")) {
    if (key == "mu") m.mu = value;
    else if (key == "sigma") m.sigma = value;
    else if (key == "guess") m.guess_rate = value;
    else if (key == "lapse") m.lapse_rate = value;
    else if (key == "latency") m.latency_mean = value;
    else if (key == "jitter") m.latency_jitter = value;
    else throw UsageError("--observer: unknown key '" + key + "'");
  }
  if (m.sigma == 0.0) m.deterministic = true;
  try {
    validate(m);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return m;
}

StaircaseConfig parse_config(const std::string& text) {
  Json j = Json::object();
  if (!text.empty() && text.front() == '@') {
    std::ifstream in(text.substr(1));
    if (!in) throw UsageError("--config: cannot open " + text.substr(1));
    try {
      j = Json::parse(in);
    } catch (const std::exception& e) {
      throw UsageError(std::string("--config: ") + e.what());
    }
  } else {
    for (const auto& [key, value] : parse_pairs(text, "--config")) {
      const bool integral = key == "target_reversals" || key == "max_trials" || key == "rng_seed";
      if (integral) {
        j[key] = static_cast<long long>(value);
      } else {
        j[key] = value;
      }
    }
  }
  try {
    return config_from_json(j);
  } catch (const ConfigError& e) {
    throw UsageError(std::string("--config: ") + e.what());
  }
}

std::vector<std::string> expand_glob(const std::string& pattern) {
  glob_t g{};
  std::vector<std::string> out;
  if (::glob(pattern.c_str(), 0, nullptr, &g) == 0) {
    for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
  }
  globfree(&g);
  std::sort(out.begin(), out.end());
  return out;
}

ChannelSelect parse_channel(const std::string& c) {
  if (c == "x") return ChannelSelect::Axis(0);
  if (c == "y") return ChannelSelect::Axis(1);
  if (c == "z") return ChannelSelect::Axis(2);
  if (c == "mag") return ChannelSelect::Magnitude();
  throw UsageError("--channel must be x, y, z or mag");
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw Error(Errc::InvalidArgument, "cannot write " + path.string());
}

struct PipelineFlags {
  std::string band = "50,500";
  int order = 4;
  std::string window = "hann";
  std::string channel = "x";
  bool no_interp = false;

  void add_to(CLI::App* app) {
    app->add_option("--band", band, "Band-pass and peak-search band, low,high in Hz");
    app->add_option("--order", order, "Band-pass order (2, 4, 6 or 8)");
    app->add_option("--window", window, "FFT window: hann or rect");
    app->add_option("--channel", channel, "Channel: x, y, z or mag");
    app->add_flag("--no-interp", no_interp, "Disable parabolic peak interpolation");
  }

  PipelineParams params() const {
    PipelineParams p;
    try {
      std::tie(p.band_low, p.band_high) = parse_band(band);
      p.window = parse_window(window);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    p.order = order;
    p.channel = parse_channel(channel);
    p.interpolate = !no_interp;
    return p;
  }
};

volatile std::sig_atomic_t g_stop = 0;

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Vibration sensitivity test toolkit: staircase simulation, vibration analysis, live sessions",
               "vstkit"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Run one simulated staircase session");
  std::string sim_observer;
  std::string sim_config;
  std::uint64_t sim_seed = 1;
  std::string sim_out;
  simulate->add_option("--observer", sim_observer,
                       "Observer: mu=,sigma=,guess=,lapse=,latency=,jitter= (sigma=0 is deterministic)")
      ->required();
  simulate->add_option("--config", sim_config,
                       "Staircase config as field=value pairs or @file.json (defaults: start 0.5, step 0.05, 8 reversals)");
  simulate->add_option("--seed", sim_seed, "Session seed");
  simulate->add_option("--out", sim_out, "Data directory (default $VSTKIT_DATA_DIR or ./vstkit-data)");

  // batch
  auto* batch = app.add_subcommand("batch", "Run independent simulated sessions and report precision");
  int batch_n = 10;
  std::string batch_observer = "mu=0.348,sigma=0.02,guess=0.02,lapse=0.02";
  std::string batch_config;
  std::uint64_t batch_seed = 1;
  int batch_threads = 0;
  bool batch_serial = false;
  std::string batch_json;
  batch->add_option("--n", batch_n, "Number of sessions (>= 2)")->check(CLI::Range(2, 1000000));
  batch->add_option("--observer", batch_observer, "Observer: mu=,sigma=,guess=,lapse=,latency=,jitter=");
  batch->add_option("--config", batch_config, "Staircase config as field=value pairs or @file.json");
  batch->add_option("--seed", batch_seed, "Batch seed; session i uses seed XOR i");
  batch->add_option("--threads", batch_threads, "OpenMP threads (0 = runtime default)");
  batch->add_flag("--serial", batch_serial, "Use the serial reference loop");
  batch->add_option("--json", batch_json, "Also write the batch statistics as JSON");

  // analyze
  auto* analyze_cmd = app.add_subcommand("analyze", "Spectrum and peak frequency of one waveform CSV");
  std::string an_input;
  std::string an_out;
  std::string an_json;
  PipelineFlags an_flags;
  std::string synth_kind;
  int synth_count = 10;
  std::string synth_out = "corpus";
  double synth_freq = 0.0;
  double synth_rate = 2000.0;
  std::uint64_t synth_seed = 1;
  analyze_cmd->add_option("--input", an_input, "Waveform CSV (t,ax[,ay,az])");
  an_flags.add_to(analyze_cmd);
  analyze_cmd->add_option("--out", an_out, "Write the spectrum as freq_hz,amplitude_g CSV");
  analyze_cmd->add_option("--json", an_json, "Write the spectrum document as JSON");
  analyze_cmd->add_option("--synth", synth_kind, "fork | phone | tone")->group("");
  analyze_cmd->add_option("--synth-count", synth_count, "")->group("");
  analyze_cmd->add_option("--synth-out", synth_out, "")->group("");
  analyze_cmd->add_option("--synth-freq", synth_freq, "")->group("");
  analyze_cmd->add_option("--synth-rate", synth_rate, "")->group("");
  analyze_cmd->add_option("--seed", synth_seed, "")->group("");

  // compare
  auto* compare = app.add_subcommand("compare", "Compare cross-trial consistency of two instruments");
  std::string group_a;
  std::string group_b;
  std::string label_a = "group-a";
  std::string label_b = "group-b";
  std::string cmp_json;
  PipelineFlags cmp_flags;
  compare->add_option("--group-a", group_a, "Glob of trial CSVs for instrument A")->required();
  compare->add_option("--group-b", group_b, "Glob of trial CSVs for instrument B")->required();
  compare->add_option("--label-a", label_a, "Label for group A");
  compare->add_option("--label-b", label_b, "Label for group B");
  cmp_flags.add_to(compare);
  compare->add_option("--json", cmp_json, "Write both reports and the verdict as JSON");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP session service");
  int port = 8080;
  std::string host = "127.0.0.1";
  std::string data_dir;
  bool test_clock = false;
  serve->add_option("--port", port, "TCP port");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--data-dir", data_dir, "Session storage (default $VSTKIT_DATA_DIR or ./vstkit-data)");
  serve->add_flag("--test-clock", test_clock, "Simulated clock driven by POST /v1/test/clock");

  // export
  auto* export_cmd = app.add_subcommand("export", "Export a result document's trials as CSV");
  std::string export_result;
  std::string export_out;
  export_cmd->add_option("--result", export_result, "Path to <id>.result.json")->required();
  export_cmd->add_option("--out", export_out, "Output CSV (default stdout)");

  // replay
  auto* replay_cmd = app.add_subcommand("replay", "Replay a session log and check it against the stored result");
  std::string replay_log;
  std::string replay_result;
  replay_cmd->add_option("--log", replay_log, "Path to sessions/<id>.jsonl")->required();
  replay_cmd->add_option("--result", replay_result, "Stored result (default: <id>.result.json next to the log)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    CLI::App* target = &app;
    for (auto* sub : app.get_subcommands()) target = sub;
    out << target->help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (simulate->parsed()) {
      const ObserverModel observer = parse_observer(sim_observer);
      const StaircaseConfig config = parse_config(sim_config);
      const std::filesystem::path dir = sim_out.empty() ? default_data_dir() : std::filesystem::path(sim_out);
      Json key{{"config", to_json(config)}, {"observer", sim_observer}, {"seed", sim_seed}};
      Rng id_rng(fnv1a(key.dump()));
      const std::string id = make_uuid(id_rng);
      const auto log_file = log_path(dir, id);
      std::filesystem::remove(log_file);

      StaircaseConfig seeded = config;
      seeded.rng_seed = sim_seed;
      RecordedSession session(id, seeded, log_file);
      Rng rng(mix_seed(sim_seed));
      drive_session(session, observer, rng);
      const SessionResult r = session.result();
      write_result_file(result_path(dir, id), r, id);
      const auto csv_file = sessions_dir(dir) / (id + ".trials.csv");
      write_text(csv_file, export_trials_csv(r));

      out << "threshold=" << fmt(r.threshold_mean) << " sd=" << fmt(r.threshold_sd)
          << " reversals=" << r.reversal_indices.size() << " fp=" << r.false_positive_count << "\n";
      out << "termination=" << to_string(r.termination) << " trials=" << r.trials.size() << "\n";
      out << "session=" << id << "\n";
      out << "log=" << log_file.string() << "\n";
      out << "result=" << result_path(dir, id).string() << "\n";
      out << "trials_csv=" << csv_file.string() << "\n";
      return 0;
    }

    if (batch->parsed()) {
      const ObserverModel observer = parse_observer(batch_observer);
      const StaircaseConfig config = parse_config(batch_config);
      set_threads(batch_threads);
      const BatchStats stats = batch_serial ? batch_precision_serial(config, observer, batch_n, batch_seed)
                                            : batch_precision(config, observer, batch_n, batch_seed);
      out << "session,estimate\n";
      for (std::size_t i = 0; i < stats.per_session_estimates.size(); ++i) {
        out << i << "," << fmt(stats.per_session_estimates[i]) << "\n";
      }
      out << "mean=" << fmt(stats.mean) << " sd=" << fmt(stats.sample_sd) << " n=" << batch_n << "\n";
      out << "sd_below_step=" << (stats.sample_sd < config.step_size ? "yes" : "no")
          << " step=" << fmt(config.step_size) << "\n";
      if (!batch_json.empty()) write_text(batch_json, to_json(stats).dump(2) + "\n");
      return 0;
    }

    if (analyze_cmd->parsed()) {
      if (!synth_kind.empty()) {
        std::vector<WaveformRecord> corpus;
        if (synth_kind == "fork") {
          corpus = synthesize_corpus(Instrument::Fork, synth_count, synth_seed);
        } else if (synth_kind == "phone") {
          corpus = synthesize_corpus(Instrument::Phone, synth_count, synth_seed);
        } else if (synth_kind == "tone") {
          for (int i = 0; i < synth_count; ++i) {
            SynthSpec s;
            s.freq = synth_freq > 0.0 ? synth_freq : 230.0;
            s.duration = 2.0;
            s.sample_rate = synth_rate;
            s.noise_sd = 0.01;
            s.seed = mix_seed(synth_seed + static_cast<std::uint64_t>(i));
            s.label = "tone_" + std::to_string(i);
            corpus.push_back(synthesize(s));
          }
        } else {
          throw UsageError("--synth must be fork, phone or tone");
        }
        for (const auto& w : corpus) {
          std::ostringstream csv;
          write_waveform_csv(csv, w);
          const auto path = std::filesystem::path(synth_out) / (w.label + ".csv");
          write_text(path, csv.str());
          out << "wrote " << path.string() << "\n";
        }
        return 0;
      }
      if (an_input.empty()) throw UsageError("analyze: --input is required");
      const PipelineParams params = an_flags.params();
      if (!std::filesystem::exists(an_input)) throw Error(Errc::InvalidArgument, "no such file " + an_input);
      const WaveformRecord w = load_waveform_file(an_input);
      const TrialAnalysis a = analyze(w, params);
      out << "peak_hz=" << fmt(a.spectrum.peak_frequency) << " peak_amp=" << fmt(a.spectrum.peak_amplitude)
          << " rms=" << fmt(a.rms) << "\n";
      out << "sample_rate=" << fmt(w.sample_rate) << " n_fft=" << a.spectrum.n_fft
          << " resolution_hz=" << fmt(a.spectrum.resolution) << "\n";
      if (!an_out.empty()) write_text(an_out, spectrum_csv(a.spectrum));
      if (!an_json.empty()) {
        Json doc = to_json(a.spectrum);
        doc["rms"] = a.rms;
        doc["label"] = w.label;
        write_text(an_json, doc.dump(2) + "\n");
      }
      return 0;
    }

    if (compare->parsed()) {
      const PipelineParams params = cmp_flags.params();
      auto load_group = [&](const std::string& pattern, const std::string& flag) {
        const auto files = expand_glob(pattern);
        if (files.size() < 2) {
          throw UsageError(flag + " matched " + std::to_string(files.size()) + " file(s); need at least 2");
        }
        std::vector<WaveformRecord> trials;
        for (const auto& f : files) trials.push_back(load_waveform_file(f));
        return trials;
      };
      const auto trials_a = load_group(group_a, "--group-a");
      const auto trials_b = load_group(group_b, "--group-b");
      const ConsistencyReport ra = consistency_report(trials_a, params, label_a);
      const ConsistencyReport rb = consistency_report(trials_b, params, label_b);
      const ComparisonSummary cmp = compare_instruments(ra, rb);
      for (const auto* r : {&ra, &rb}) {
        out << "[" << r->label << "] n=" << r->n_trials << " cv_peak_amplitude=" << fmt(r->cv_peak_amplitude)
            << " cv_rms=" << fmt(r->cv_rms) << " peak_frequency_spread_hz=" << fmt(r->peak_frequency_spread)
            << " mean_peak_hz=" << fmt(r->mean_peak_frequency) << " mean_peak_amp=" << fmt(r->mean_peak_amplitude)
            << "\n";
      }
      out << "ratio_cv_peak_amplitude=" << fmt(cmp.ratio_cv_peak_amplitude) << "\n";
      out << "verdict="
          << (cmp.verdict == Verdict::A ? label_a : cmp.verdict == Verdict::B ? label_b : std::string("tie"))
          << "\n";
      if (!cmp_json.empty()) {
        write_text(cmp_json, Json{{"a", to_json(ra)}, {"b", to_json(rb)}, {"comparison", to_json(cmp)}}.dump(2) + "\n");
      }
      return 0;
    }

    if (serve->parsed()) {
      const std::filesystem::path dir = data_dir.empty() ? default_data_dir() : std::filesystem::path(data_dir);
      SteadyClock steady;
      ManualClock manual;
      Clock& clock = test_clock ? static_cast<Clock&>(manual) : steady;
      SessionManager manager(clock, dir);
      HttpServer server(manager, test_clock ? &manual : nullptr);
      if (!server.bind(host, port)) throw Error(Errc::InvalidArgument, "cannot bind " + host + ":" + std::to_string(port));
      if (!test_clock) manager.start_scheduler();
      out << "listening on http://" << host << ":" << port << (test_clock ? " (test clock)" : "") << std::endl;
      std::signal(SIGINT, [](int) { g_stop = 1; });
      std::signal(SIGTERM, [](int) { g_stop = 1; });
      std::thread watcher([&] {
        while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
        server.stop();
      });
      server.listen_after_bind();
      g_stop = 1;
      watcher.join();
      manager.stop_scheduler();
      return 0;
    }

    if (export_cmd->parsed()) {
      const SessionResult r = read_result_file(export_result);
      const std::string csv = export_trials_csv(r);
      if (export_out.empty()) {
        out << csv;
      } else {
        write_text(export_out, csv);
      }
      return 0;
    }

    if (replay_cmd->parsed()) {
      std::vector<std::string> warnings;
      const auto events = read_events_file(replay_log, &warnings);
      for (const auto& w : warnings) err << "warning: " << w << "\n";
      SessionResult replayed;
      try {
        replayed = replay(events);
      } catch (const CorruptLogError& e) {
        err << "replay failed: " << e.what() << "\n";
        return 2;
      }
      out << "threshold=" << fmt(replayed.threshold_mean) << " sd=" << fmt(replayed.threshold_sd)
          << " reversals=" << replayed.reversal_indices.size() << " fp=" << replayed.false_positive_count << "\n";
      std::filesystem::path stored = replay_result;
      if (stored.empty()) {
        std::string name = std::filesystem::path(replay_log).filename().string();
        if (name.ends_with(".jsonl")) name.resize(name.size() - 6);
        stored = std::filesystem::path(replay_log).parent_path() / (name + ".result.json");
      }
      if (std::filesystem::exists(stored)) {
        const auto differences = diff(read_result_file(stored), replayed);
        if (!differences.empty()) {
          err << "replay does not match " << stored.string() << ":\n";
          for (const auto& d : differences) err << "  " << d << "\n";
          return 2;
        }
        out << "match=" << stored.string() << "\n";
      } else if (!replay_result.empty()) {
        throw Error(Errc::InvalidArgument, "no such file " + replay_result);
      }
      return 0;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace vstkit::cli
