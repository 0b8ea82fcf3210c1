#include "risdoa/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace risdoa {

namespace {

constexpr double kPi = EIGEN_PI;

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

[[noreturn]] void fail(int line, const std::string& what) {
  throw std::runtime_error("line " + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& v, int line) {
  try {
    size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) fail(line, "trailing characters in number '" + v + "'");
    return x;
  } catch (const std::logic_error&) {
    fail(line, "not a number: '" + v + "'");
  }
}

long long parse_int(const std::string& v, int line) {
  try {
    size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (used != v.size()) fail(line, "trailing characters in integer '" + v + "'");
    return x;
  } catch (const std::logic_error&) {
    fail(line, "not an integer: '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string& v, int line) {
  try {
    size_t used = 0;
    const unsigned long long x = std::stoull(v, &used);
    if (used != v.size()) fail(line, "trailing characters in integer '" + v + "'");
    return x;
  } catch (const std::logic_error&) {
    fail(line, "not an unsigned integer: '" + v + "'");
  }
}

bool parse_bool(const std::string& v, int line) {
  if (v == "0" || v == "false") return false;
  if (v == "1" || v == "true") return true;
  fail(line, "not a boolean (use 0/1/true/false): '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

std::vector<double> parse_double_list(const std::string& v, int line) {
  std::vector<double> out;
  for (const auto& item : split_list(v)) out.push_back(parse_double(item, line));
  return out;
}

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += fmt_double(v[i]);
  }
  return out;
}

// Shared key=value reader: returns (line number, key, value) triples and
// enforces the leading format line.
std::vector<std::tuple<int, std::string, std::string>> read_kv(const std::string& text,
                                                               size_t* data_line = nullptr) {
  std::vector<std::tuple<int, std::string, std::string>> out;
  std::stringstream ss(text);
  std::string raw;
  int line = 0;
  bool saw_format = false;
  while (std::getline(ss, raw)) {
    ++line;
    const std::string stripped = trim(raw.substr(0, raw.find('#')));
    if (stripped.empty()) continue;
    if (data_line && stripped == "data") {
      *data_line = static_cast<size_t>(line);
      break;
    }
    const size_t eq = stripped.find('=');
    if (eq == std::string::npos) fail(line, "expected key=value, got '" + stripped + "'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (!saw_format) {
      if (key != "format") fail(line, "first entry must be format=1");
      if (value != "1") fail(line, "unsupported format version '" + value + "'");
      saw_format = true;
      continue;
    }
    out.emplace_back(line, key, value);
  }
  if (!saw_format) throw std::runtime_error("line 1: missing format=1 header");
  return out;
}

}  // namespace

SceneConfig parse_config(const std::string& text) {
  SceneConfig cfg;
  bool amplitudes_set = false;

  using Handler = std::function<void(const std::string&, int)>;
  const std::map<std::string, Handler> handlers = {
      {"n_elements", [&](const std::string& v, int l) { cfg.n_elements = static_cast<int>(parse_int(v, l)); }},
      {"n_slots", [&](const std::string& v, int l) { cfg.n_slots = static_cast<int>(parse_int(v, l)); }},
      {"spacing_wavelengths", [&](const std::string& v, int l) { cfg.spacing_wavelengths = parse_double(v, l); }},
      {"psi_deg", [&](const std::string& v, int l) { cfg.psi_deg = parse_double(v, l); }},
      {"angles_deg", [&](const std::string& v, int l) { cfg.angles_deg = parse_double_list(v, l); }},
      {"signal_amplitudes",
       [&](const std::string& v, int l) {
         cfg.signal_amplitudes = parse_double_list(v, l);
         amplitudes_set = true;
       }},
      {"perturbation_model",
       [&](const std::string& v, int l) {
         cfg.perturbation_model = v;
         if (v == "none") {
           cfg.perturbation_half_width = 0.0;
         } else if (v == "uniform") {
           cfg.perturbation_half_width = 1.0 / 16.0;
         } else if (v.rfind("uniform:", 0) == 0) {
           cfg.perturbation_half_width = parse_double(v.substr(8), l);
           if (!(cfg.perturbation_half_width > 0.0)) fail(l, "perturbation half-width must be positive");
         } else {
           fail(l, "unknown perturbation_model '" + v + "'");
         }
       }},
      {"snr_db", [&](const std::string& v, int l) { cfg.snr_db = parse_double(v, l); }},
      {"seed", [&](const std::string& v, int l) { cfg.seed = parse_u64(v, l); }},
      {"sweep_axis", [&](const std::string& v, int l) {
         if (v != "snr_db" && v != "n_elements" && v != "n_slots" && v != "psi_deg")
           fail(l, "unknown sweep_axis '" + v + "'");
         cfg.sweep_axis = v;
       }},
      {"sweep_values", [&](const std::string& v, int l) { cfg.sweep_values = parse_double_list(v, l); }},
      {"n_trials", [&](const std::string& v, int l) { cfg.n_trials = static_cast<int>(parse_int(v, l)); }},
      {"methods",
       [&](const std::string& v, int l) {
         cfg.methods = split_list(v);
         for (const auto& mth : cfg.methods)
           if (mth != "adpp" && mth != "anm" && mth != "omp" && mth != "fft" && mth != "crb")
             fail(l, "unknown method '" + mth + "'");
       }},
      {"threads", [&](const std::string& v, int l) { cfg.threads = static_cast<int>(parse_int(v, l)); }},
      {"fix_schedule", [&](const std::string& v, int l) { cfg.fix_schedule = parse_bool(v, l); }},
      {"timings", [&](const std::string& v, int l) { cfg.timings = parse_bool(v, l); }},
      {"t_param", [&](const std::string& v, int l) { cfg.t_param = parse_double(v, l); }},
      {"beta", [&](const std::string& v, int l) { cfg.beta = parse_double(v, l); }},
      {"detection_range_deg",
       [&](const std::string& v, int l) {
         const auto lim = parse_double_list(v, l);
         if (lim.size() != 2 || !(lim[0] < lim[1])) fail(l, "detection_range_deg needs lo,hi with lo < hi");
         cfg.detection_lo_deg = lim[0];
         cfg.detection_hi_deg = lim[1];
       }},
      {"eval_grid_size", [&](const std::string& v, int l) { cfg.eval_grid_size = static_cast<int>(parse_int(v, l)); }},
      {"transform_oversampling",
       [&](const std::string& v, int l) { cfg.transform_oversampling = static_cast<int>(parse_int(v, l)); }},
      {"omp_grid_size", [&](const std::string& v, int l) { cfg.omp_grid_size = static_cast<int>(parse_int(v, l)); }},
      {"fft_grid_size", [&](const std::string& v, int l) { cfg.fft_grid_size = static_cast<int>(parse_int(v, l)); }},
      {"relative_threshold", [&](const std::string& v, int l) { cfg.relative_threshold = parse_double(v, l); }},
      {"min_separation_deg", [&](const std::string& v, int l) { cfg.min_separation_deg = parse_double(v, l); }},
      {"outer_iters", [&](const std::string& v, int l) { cfg.outer_iters = static_cast<int>(parse_int(v, l)); }},
      {"inner_iters", [&](const std::string& v, int l) { cfg.inner_iters = static_cast<int>(parse_int(v, l)); }},
      {"step_d", [&](const std::string& v, int l) { cfg.step_d = parse_double(v, l); }},
      {"step_theta", [&](const std::string& v, int l) { cfg.step_theta = parse_double(v, l); }},
      {"use_refined_theta", [&](const std::string& v, int l) { cfg.use_refined_theta = parse_bool(v, l); }},
      {"sdp_max_iter", [&](const std::string& v, int l) { cfg.sdp_max_iter = static_cast<int>(parse_int(v, l)); }},
      {"output_path", [&](const std::string& v, int) { cfg.output_path = v; }},
  };

  for (const auto& [line, key, value] : read_kv(text)) {
    const auto it = handlers.find(key);
    if (it == handlers.end()) fail(line, "unknown key '" + key + "'");
    it->second(value, line);
  }

  if (cfg.n_elements <= 0) throw std::runtime_error("config: n_elements must be positive");
  if (cfg.n_slots <= 0) throw std::runtime_error("config: n_slots must be positive");
  if (!(cfg.spacing_wavelengths > 0.0)) throw std::runtime_error("config: spacing must be positive");
  if (cfg.angles_deg.empty()) throw std::runtime_error("config: angles_deg must be non-empty");
  if (!amplitudes_set) cfg.signal_amplitudes.assign(cfg.angles_deg.size(), 1.0);
  if (cfg.signal_amplitudes.size() != cfg.angles_deg.size())
    throw std::runtime_error("config: signal_amplitudes and angles_deg lengths differ");
  if (cfg.n_trials <= 0) throw std::runtime_error("config: n_trials must be positive");
  if (cfg.methods.empty()) throw std::runtime_error("config: methods must be non-empty");
  return cfg;
}

SceneConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void save_snapshot(const std::string& path, const SnapshotRecord& record) {
  if (record.received.size() != static_cast<Eigen::Index>(record.n_slots))
    throw std::runtime_error("save_snapshot: sample count does not match n_slots");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
  out << "format=1\n";
  out << "n_elements=" << record.n_elements << "\n";
  out << "n_slots=" << record.n_slots << "\n";
  out << "spacing_wavelengths=" << fmt_double(record.spacing_wavelengths) << "\n";
  out << "psi_deg=" << fmt_double(record.psi_deg) << "\n";
  out << "schedule_seed=" << record.schedule_seed << "\n";
  out << "amplitude=" << fmt_double(record.amplitude) << "\n";
  out << "phase_set=" << join(record.phase_set) << "\n";
  out << "noise_variance=" << fmt_double(record.noise_variance) << "\n";
  out << "snr_db=" << fmt_double(record.snr_db) << "\n";
  if (record.has_truth) {
    out << "true_angles_deg=" << join(record.true_angles_deg) << "\n";
    out << "true_perturbations_wl=" << join(record.true_perturbations_wl) << "\n";
  }
  out << "data\n";
  for (Eigen::Index m = 0; m < record.received.size(); ++m)
    out << fmt_double(record.received[m].real()) << ','
        << fmt_double(record.received[m].imag()) << "\n";
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

SnapshotRecord load_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open snapshot file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();

  SnapshotRecord rec;
  bool truth_angles = false, truth_offsets = false;
  size_t data_line = 0;
  for (const auto& [line, key, value] : read_kv(text, &data_line)) {
    if (key == "n_elements") rec.n_elements = static_cast<int>(parse_int(value, line));
    else if (key == "n_slots") rec.n_slots = static_cast<int>(parse_int(value, line));
    else if (key == "spacing_wavelengths") rec.spacing_wavelengths = parse_double(value, line);
    else if (key == "psi_deg") rec.psi_deg = parse_double(value, line);
    else if (key == "schedule_seed") rec.schedule_seed = parse_u64(value, line);
    else if (key == "amplitude") rec.amplitude = parse_double(value, line);
    else if (key == "phase_set") rec.phase_set = parse_double_list(value, line);
    else if (key == "noise_variance") rec.noise_variance = parse_double(value, line);
    else if (key == "snr_db") rec.snr_db = parse_double(value, line);
    else if (key == "true_angles_deg") { rec.true_angles_deg = parse_double_list(value, line); truth_angles = true; }
    else if (key == "true_perturbations_wl") { rec.true_perturbations_wl = parse_double_list(value, line); truth_offsets = true; }
    else fail(line, "unknown key '" + key + "'");
  }
  if (data_line == 0) throw std::runtime_error("snapshot: missing data section");
  rec.has_truth = truth_angles && truth_offsets;

  // Samples follow the header, one per line.
  std::stringstream body(text);
  std::string raw;
  for (size_t i = 0; i < data_line; ++i) std::getline(body, raw);
  std::vector<cd> samples;
  int line_no = static_cast<int>(data_line);
  while (std::getline(body, raw)) {
    ++line_no;
    const std::string stripped = trim(raw.substr(0, raw.find('#')));
    if (stripped.empty()) continue;
    const auto parts = split_list(stripped);
    if (parts.size() != 2) fail(line_no, "expected re,im");
    samples.emplace_back(parse_double(parts[0], line_no), parse_double(parts[1], line_no));
  }
  if (static_cast<int>(samples.size()) != rec.n_slots)
    throw std::runtime_error("snapshot: expected " + std::to_string(rec.n_slots) +
                             " samples, found " + std::to_string(samples.size()));
  rec.received.resize(rec.n_slots);
  for (int i = 0; i < rec.n_slots; ++i) rec.received[i] = samples[i];
  if (rec.n_elements <= 0) throw std::runtime_error("snapshot: n_elements must be positive");
  return rec;
}

ArrayGeometry record_geometry(const SnapshotRecord& record) {
  ArrayGeometry g = make_uniform_geometry(record.n_elements, record.spacing_wavelengths);
  if (record.has_truth &&
      static_cast<int>(record.true_perturbations_wl.size()) == record.n_elements) {
    for (int n = 0; n < record.n_elements; ++n)
      g.perturbations[n] = record.true_perturbations_wl[n];
  }
  return g;
}

RisSchedule record_schedule(const SnapshotRecord& record) {
  const ArrayGeometry g = make_uniform_geometry(record.n_elements, record.spacing_wavelengths);
  return make_ris_schedule(g, record.n_slots, record.psi_deg * kPi / 180.0, record.phase_set,
                           record.amplitude, record.schedule_seed);
}

Snapshot record_snapshot(const SnapshotRecord& record) {
  Snapshot s;
  s.received = record.received;
  s.noise_variance = record.noise_variance;
  s.snr_db = record.snr_db;
  s.has_truth = record.has_truth;
  if (record.has_truth) {
    s.true_angles_rad.resize(record.true_angles_deg.size());
    for (size_t i = 0; i < record.true_angles_deg.size(); ++i)
      s.true_angles_rad[static_cast<Eigen::Index>(i)] = record.true_angles_deg[i] * kPi / 180.0;
    s.true_perturbations.resize(record.true_perturbations_wl.size());
    for (size_t i = 0; i < record.true_perturbations_wl.size(); ++i)
      s.true_perturbations[static_cast<Eigen::Index>(i)] = record.true_perturbations_wl[i];
  }
  return s;
}

}  // namespace risdoa
