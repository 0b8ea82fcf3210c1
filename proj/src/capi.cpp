#include "risdoa/risdoa.h"

#include "risdoa/anm.hpp"
#include "risdoa/harness.hpp"
#include "risdoa/io.hpp"
#include "risdoa/perturb.hpp"
#include "risdoa/transform.hpp"
#include "risdoa/types.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace {

using namespace risdoa;

constexpr std::uint64_t kConfigMagic = 0x52445f434f4e4647ULL;
constexpr std::uint64_t kSnapshotMagic = 0x52445f534e415053ULL;
constexpr std::uint64_t kResultMagic = 0x52445f5245534c54ULL;

thread_local std::string g_last_error;

void set_last_error(const char* what) { g_last_error = what ? what : ""; }

bool starts_with(const std::string& s, const char* prefix) {
  return s.rfind(prefix, 0) == 0;
}

// Runs the body and folds exceptions into error codes. Runtime errors about
// files map to the io code, other runtime errors to the code given by the
// caller (parsing and numerics raise runtime_error in the core library).
template <typename F>
int guarded(int runtime_code, F&& body) {
  try {
    set_last_error("");
    return body();
  } catch (const std::invalid_argument& e) {
    set_last_error(e.what());
    return RISDOA_ERR_INVALID_ARGUMENT;
  } catch (const std::runtime_error& e) {
    set_last_error(e.what());
    const std::string msg = e.what();
    if (starts_with(msg, "cannot open") || starts_with(msg, "failed writing"))
      return RISDOA_ERR_IO;
    return runtime_code;
  } catch (const std::exception& e) {
    set_last_error(e.what());
    return RISDOA_ERR_INTERNAL;
  } catch (...) {
    set_last_error("unknown error");
    return RISDOA_ERR_INTERNAL;
  }
}

// Output-buffer convention shared by every array accessor.
int copy_out(double* buf, size_t* count, const double* src, size_t n) {
  if (!count) return RISDOA_ERR_NULL_POINTER;
  if (!buf) {
    *count = n;
    return RISDOA_OK;
  }
  if (*count < n) {
    *count = n;
    set_last_error("output buffer too small");
    return RISDOA_ERR_BUFFER_TOO_SMALL;
  }
  std::memcpy(buf, src, n * sizeof(double));
  *count = n;
  return RISDOA_OK;
}

std::string fmt_num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string join_num(const std::vector<double>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += fmt_num(v[i]);
  }
  return out;
}

}  // namespace

struct risdoa_config_struct {
  std::uint64_t magic = kConfigMagic;
  // The configuration is kept in source form; set() appends an override
  // line and the effective SceneConfig is parsed on demand, which keeps the
  // validation rules in exactly one place.
  std::string base_text = "format=1\n";
  std::vector<std::pair<std::string, std::string>> overrides;
};

struct risdoa_snapshot_struct {
  std::uint64_t magic = kSnapshotMagic;
  risdoa::SnapshotRecord rec;
};

struct risdoa_result_struct {
  std::uint64_t magic = kResultMagic;
  risdoa::MethodRun run;
};

namespace {

risdoa_config_struct* checked(risdoa_config_t h) {
  return (h && h->magic == kConfigMagic) ? h : nullptr;
}
risdoa_snapshot_struct* checked(risdoa_snapshot_t h) {
  return (h && h->magic == kSnapshotMagic) ? h : nullptr;
}
risdoa_result_struct* checked(risdoa_result_t h) {
  return (h && h->magic == kResultMagic) ? h : nullptr;
}

SceneConfig build_config(const risdoa_config_struct* c) {
  std::string text = c->base_text;
  if (!text.empty() && text.back() != '\n') text += '\n';
  for (const auto& [key, value] : c->overrides) text += key + "=" + value + "\n";
  return parse_config(text);
}

std::string config_value(const SceneConfig& c, const std::string& key) {
  if (key == "n_elements") return std::to_string(c.n_elements);
  if (key == "n_slots") return std::to_string(c.n_slots);
  if (key == "spacing_wavelengths") return fmt_num(c.spacing_wavelengths);
  if (key == "psi_deg") return fmt_num(c.psi_deg);
  if (key == "angles_deg") return join_num(c.angles_deg);
  if (key == "signal_amplitudes") return join_num(c.signal_amplitudes);
  if (key == "perturbation_model") return c.perturbation_model;
  if (key == "snr_db") return fmt_num(c.snr_db);
  if (key == "seed") return std::to_string(c.seed);
  if (key == "sweep_axis") return c.sweep_axis;
  if (key == "sweep_values") return join_num(c.sweep_values);
  if (key == "n_trials") return std::to_string(c.n_trials);
  if (key == "methods") {
    std::string out;
    for (size_t i = 0; i < c.methods.size(); ++i) {
      if (i) out += ',';
      out += c.methods[i];
    }
    return out;
  }
  if (key == "threads") return std::to_string(c.threads);
  if (key == "fix_schedule") return c.fix_schedule ? "1" : "0";
  if (key == "timings") return c.timings ? "1" : "0";
  if (key == "t_param") return fmt_num(c.t_param);
  if (key == "beta") return fmt_num(c.beta);
  if (key == "detection_range_deg")
    return fmt_num(c.detection_lo_deg) + "," + fmt_num(c.detection_hi_deg);
  if (key == "eval_grid_size") return std::to_string(c.eval_grid_size);
  if (key == "transform_oversampling") return std::to_string(c.transform_oversampling);
  if (key == "omp_grid_size") return std::to_string(c.omp_grid_size);
  if (key == "fft_grid_size") return std::to_string(c.fft_grid_size);
  if (key == "relative_threshold") return fmt_num(c.relative_threshold);
  if (key == "min_separation_deg") return fmt_num(c.min_separation_deg);
  if (key == "outer_iters") return std::to_string(c.outer_iters);
  if (key == "inner_iters") return std::to_string(c.inner_iters);
  if (key == "step_d") return fmt_num(c.step_d);
  if (key == "step_theta") return fmt_num(c.step_theta);
  if (key == "use_refined_theta") return c.use_refined_theta ? "1" : "0";
  if (key == "sdp_max_iter") return std::to_string(c.sdp_max_iter);
  if (key == "output_path") return c.output_path;
  throw std::invalid_argument("unknown config key '" + key + "'");
}

}  // namespace

extern "C" {

const char* risdoa_version(void) { return RISDOA_VERSION_STRING; }

const char* risdoa_strerror(int err) {
  switch (err) {
    case RISDOA_OK: return "ok";
    case RISDOA_ERR_INVALID_ARGUMENT: return "invalid argument";
    case RISDOA_ERR_BAD_HANDLE: return "bad handle";
    case RISDOA_ERR_PARSE: return "parse error";
    case RISDOA_ERR_IO: return "i/o error";
    case RISDOA_ERR_NUMERIC: return "numerical failure";
    case RISDOA_ERR_UNKNOWN_METHOD: return "unknown method";
    case RISDOA_ERR_BUFFER_TOO_SMALL: return "buffer too small";
    case RISDOA_ERR_NULL_POINTER: return "null pointer";
    case RISDOA_ERR_INTERNAL: return "internal error";
    default: return "unknown error code";
  }
}

const char* risdoa_last_error(void) { return g_last_error.c_str(); }

int risdoa_config_create(risdoa_config_t* cfg) {
  if (!cfg) return RISDOA_ERR_NULL_POINTER;
  return guarded(RISDOA_ERR_INTERNAL, [&] {
    *cfg = new risdoa_config_struct;
    return RISDOA_OK;
  });
}

int risdoa_config_load(risdoa_config_t* cfg, const char* path) {
  if (!cfg || !path) return RISDOA_ERR_NULL_POINTER;
  return guarded(RISDOA_ERR_PARSE, [&] {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(std::string("cannot open config file '") + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    auto handle = std::make_unique<risdoa_config_struct>();
    handle->base_text = ss.str();
    build_config(handle.get());
    *cfg = handle.release();
    return RISDOA_OK;
  });
}

int risdoa_config_parse(risdoa_config_t* cfg, const char* text) {
  if (!cfg || !text) return RISDOA_ERR_NULL_POINTER;
  return guarded(RISDOA_ERR_PARSE, [&] {
    auto handle = std::make_unique<risdoa_config_struct>();
    handle->base_text = text;
    build_config(handle.get());
    *cfg = handle.release();
    return RISDOA_OK;
  });
}

int risdoa_config_set(risdoa_config_t cfg, const char* key, const char* value) {
  auto* c = checked(cfg);
  if (!c) return RISDOA_ERR_BAD_HANDLE;
  if (!key || !value) return RISDOA_ERR_NULL_POINTER;
  return guarded(RISDOA_ERR_PARSE, [&] {
    const std::string k = key, v = value;
    if (k.find_first_of("=\n#") != std::string::npos ||
        v.find('\n') != std::string::npos)
      throw std::invalid_argument("key or value contains forbidden characters");
    c->overrides.emplace_back(k, v);
    try {
      build_config(c);
    } catch (...) {
      c->overrides.pop_back();
      throw;
    }
    return RISDOA_OK;
  });
}

int risdoa_config_get(risdoa_config_t cfg, const char* key, char* value, size_t* value_len) {
  auto* c = checked(cfg);
  if (!c) return RISDOA_ERR_BAD_HANDLE;
  if (!key || !value_len) return RISDOA_ERR_NULL_POINTER;
  return guarded(RISDOA_ERR_PARSE, [&] {
    const std::string out = config_value(build_config(c), key);
    const size_t needed = out.size() + 1;
    if (!value) {
      *value_len = needed;
      return RISDOA_OK;
    }
    if (*value_len < needed) {
      *value_len = needed;
      set_last_error("output buffer too small");
      return RISDOA_ERR_BUFFER_TOO_SMALL;
    }
    std::memcpy(value, out.c_str(), needed);
    *value_len = needed;
    return RISDOA_OK;
  });
}

int risdoa_config_free(risdoa_config_t cfg) {
  if (!cfg) return RISDOA_OK;
  auto* c = checked(cfg);
  if (!c) return RISDOA_ERR_BAD_HANDLE;
  c->magic = 0;
  delete c;
  return RISDOA_OK;
}

int risdoa_synthesize(risdoa_snapshot_t* snap, risdoa_config_t cfg) {
  auto* c = checked(cfg);
  if (!c) return RISDOA_ERR_BAD_HANDLE;
  if (!snap) return RISDOA_ERR_NULL_POINTER;
  return guarded(RISDOA_ERR_NUMERIC, [&] {
    auto handle = std::make_unique<risdoa_snapshot_struct>();
    handle->rec = make_snapshot_record(build_config(c));
    *snap = handle.release();
    return RISDOA_OK;
  });
}

int risdoa_snapshot_load(risdoa_snapshot_t* snap, const char* path) {
  if (!snap || !path) return RISDOA_ERR_NULL_POINTER;
  return guarded(RISDOA_ERR_PARSE, [&] {
    auto handle = std::make_unique<risdoa_snapshot_struct>();
    handle->rec = load_snapshot(path);
    *snap = handle.release();
    return RISDOA_OK;
  });
}

int risdoa_snapshot_save(risdoa_snapshot_t snap, const char* path) {
  auto* s = checked(snap);
  if (!s) return RISDOA_ERR_BAD_HANDLE;
  if (!path) return RISDOA_ERR_NULL_POINTER;
  return guarded(RISDOA_ERR_IO, [&] {
    save_snapshot(path, s->rec);
    return RISDOA_OK;
  });
}

int risdoa_snapshot_n_elements(risdoa_snapshot_t snap, int* n) {
  auto* s = checked(snap);
  if (!s) return RISDOA_ERR_BAD_HANDLE;
  if (!n) return RISDOA_ERR_NULL_POINTER;
  *n = s->rec.n_elements;
  return RISDOA_OK;
}

int risdoa_snapshot_n_slots(risdoa_snapshot_t snap, int* m) {
  auto* s = checked(snap);
  if (!s) return RISDOA_ERR_BAD_HANDLE;
  if (!m) return RISDOA_ERR_NULL_POINTER;
  *m = s->rec.n_slots;
  return RISDOA_OK;
}

int risdoa_snapshot_noise_variance(risdoa_snapshot_t snap, double* variance) {
  auto* s = checked(snap);
  if (!s) return RISDOA_ERR_BAD_HANDLE;
  if (!variance) return RISDOA_ERR_NULL_POINTER;
  *variance = s->rec.noise_variance;
  return RISDOA_OK;
}

int risdoa_snapshot_has_truth(risdoa_snapshot_t snap, int* flag) {
  auto* s = checked(snap);
  if (!s) return RISDOA_ERR_BAD_HANDLE;
  if (!flag) return RISDOA_ERR_NULL_POINTER;
  *flag = s->rec.has_truth ? 1 : 0;
  return RISDOA_OK;
}

int risdoa_snapshot_true_angles_deg(risdoa_snapshot_t snap, double* angles, size_t* count) {
  auto* s = checked(snap);
  if (!s) return RISDOA_ERR_BAD_HANDLE;
  return copy_out(angles, count, s->rec.true_angles_deg.data(),
                  s->rec.true_angles_deg.size());
}

int risdoa_snapshot_received(risdoa_snapshot_t snap, double* re_im, size_t* count) {
  auto* s = checked(snap);
  if (!s) return RISDOA_ERR_BAD_HANDLE;
  // std::complex<double> is layout compatible with double[2].
  return copy_out(re_im, count,
                  reinterpret_cast<const double*>(s->rec.received.data()),
                  static_cast<size_t>(s->rec.received.size()) * 2);
}

int risdoa_snapshot_free(risdoa_snapshot_t snap) {
  if (!snap) return RISDOA_OK;
  auto* s = checked(snap);
  if (!s) return RISDOA_ERR_BAD_HANDLE;
  s->magic = 0;
  delete s;
  return RISDOA_OK;
}

int risdoa_estimate(risdoa_result_t* result, risdoa_config_t cfg, risdoa_snapshot_t snap,
                    const char* method) {
  auto* c = checked(cfg);
  auto* s = checked(snap);
  if (!c || !s) return RISDOA_ERR_BAD_HANDLE;
  if (!result || !method) return RISDOA_ERR_NULL_POINTER;
  const std::string m = method;
  if (m != "adpp" && m != "anm" && m != "omp" && m != "fft") {
    set_last_error(("unknown method '" + m + "'").c_str());
    return RISDOA_ERR_UNKNOWN_METHOD;
  }
  return guarded(RISDOA_ERR_NUMERIC, [&] {
    const SceneConfig scene_cfg = build_config(c);
    const ArrayGeometry geometry = record_geometry(s->rec);
    const RisSchedule schedule = record_schedule(s->rec);
    const Snapshot snapshot = record_snapshot(s->rec);
    const int k_max = s->rec.has_truth ? static_cast<int>(s->rec.true_angles_deg.size())
                                       : static_cast<int>(scene_cfg.angles_deg.size());
    auto handle = std::make_unique<risdoa_result_struct>();
    handle->run = run_method(m, scene_cfg, geometry, snapshot, schedule, k_max);
    *result = handle.release();
    return RISDOA_OK;
  });
}

int risdoa_result_k_detected(risdoa_result_t result, int* k) {
  auto* r = checked(result);
  if (!r) return RISDOA_ERR_BAD_HANDLE;
  if (!k) return RISDOA_ERR_NULL_POINTER;
  *k = r->run.k_detected;
  return RISDOA_OK;
}

int risdoa_result_angles_deg(risdoa_result_t result, double* angles, size_t* count) {
  auto* r = checked(result);
  if (!r) return RISDOA_ERR_BAD_HANDLE;
  const RVec deg = r->run.angles_rad * (180.0 / EIGEN_PI);
  return copy_out(angles, count, deg.data(), static_cast<size_t>(deg.size()));
}

int risdoa_result_peak_heights(risdoa_result_t result, double* heights, size_t* count) {
  auto* r = checked(result);
  if (!r) return RISDOA_ERR_BAD_HANDLE;
  return copy_out(heights, count, r->run.peak_heights.data(),
                  static_cast<size_t>(r->run.peak_heights.size()));
}

int risdoa_result_offsets(risdoa_result_t result, double* offsets, size_t* count) {
  auto* r = checked(result);
  if (!r) return RISDOA_ERR_BAD_HANDLE;
  return copy_out(offsets, count, r->run.d_offsets.data(),
                  static_cast<size_t>(r->run.d_offsets.size()));
}

int risdoa_result_free(risdoa_result_t result) {
  if (!result) return RISDOA_OK;
  auto* r = checked(result);
  if (!r) return RISDOA_ERR_BAD_HANDLE;
  r->magic = 0;
  delete r;
  return RISDOA_OK;
}

int risdoa_sweep_csv(risdoa_config_t cfg, const char* path) {
  auto* c = checked(cfg);
  if (!c) return RISDOA_ERR_BAD_HANDLE;
  if (!path) return RISDOA_ERR_NULL_POINTER;
  return guarded(RISDOA_ERR_NUMERIC, [&] {
    write_sweep_csv(path, run_sweep(build_config(c)));
    return RISDOA_OK;
  });
}

int risdoa_crb_csv(risdoa_config_t cfg, const char* path) {
  auto* c = checked(cfg);
  if (!c) return RISDOA_ERR_BAD_HANDLE;
  if (!path) return RISDOA_ERR_NULL_POINTER;
  return guarded(RISDOA_ERR_NUMERIC, [&] {
    write_crb_csv(path, crb_curve(build_config(c)));
    return RISDOA_OK;
  });
}

int risdoa_dual_poly_csv(risdoa_config_t cfg, risdoa_snapshot_t snap, int perturbation_mode,
                         const char* path) {
  auto* c = checked(cfg);
  auto* s = checked(snap);
  if (!c || !s) return RISDOA_ERR_BAD_HANDLE;
  if (!path) return RISDOA_ERR_NULL_POINTER;
  if (perturbation_mode < 0 || perturbation_mode > 2) {
    set_last_error("perturbation_mode must be 0, 1 or 2");
    return RISDOA_ERR_INVALID_ARGUMENT;
  }
  return guarded(RISDOA_ERR_NUMERIC, [&] {
    const SceneConfig scene_cfg = build_config(c);
    const ArrayGeometry geometry = record_geometry(s->rec);
    const RisSchedule schedule = record_schedule(s->rec);
    const Snapshot snapshot = record_snapshot(s->rec);

    RVec offsets = RVec::Zero(geometry.n_elements);
    if (perturbation_mode == 1) {
      if (!s->rec.has_truth)
        throw std::invalid_argument("snapshot carries no ground truth offsets");
      offsets = geometry.perturbations;
    } else if (perturbation_mode == 2) {
      offsets = run_adpp(geometry, snapshot, schedule, adpp_options(scene_cfg)).d_offsets;
    }

    const EstimateOptions opts = estimate_options(scene_cfg);
    AnmDiagnostics diag;
    estimate_doa(geometry, snapshot, schedule, offsets, opts, &diag);
    const RVec grid =
        make_angle_grid(opts.range_lo_rad, opts.range_hi_rad, opts.eval_grid_size);
    write_dual_poly_csv(path, dual_polynomial(diag.solution, diag.problem, grid));
    return RISDOA_OK;
  });
}

}  // extern "C"
