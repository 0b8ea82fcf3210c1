// Command line front end. Everything goes through the shared library's C
// interface; this file knows nothing about the solver internals.

#include "risdoa/risdoa.h"

#include "CLI11.hpp"

#include <cstdio>
#include <string>
#include <vector>

namespace {

int fail(int code) {
  const char* msg = risdoa_last_error();
  if (!msg || !*msg) msg = risdoa_strerror(code);
  std::fprintf(stderr, "error: %s\n", msg);
  return 1;
}

struct ConfigHandle {
  risdoa_config_t h = nullptr;
  ~ConfigHandle() { risdoa_config_free(h); }
};

struct SnapshotHandle {
  risdoa_snapshot_t h = nullptr;
  ~SnapshotHandle() { risdoa_snapshot_free(h); }
};

struct ResultHandle {
  risdoa_result_t h = nullptr;
  ~ResultHandle() { risdoa_result_free(h); }
};

int open_config(ConfigHandle& cfg, const std::string& path, const std::string& seed) {
  int rc = path.empty() ? risdoa_config_create(&cfg.h)
                        : risdoa_config_load(&cfg.h, path.c_str());
  if (rc == RISDOA_OK && !seed.empty())
    rc = risdoa_config_set(cfg.h, "seed", seed.c_str());
  return rc;
}

// --out wins; otherwise the config's output_path is used.
int resolve_out(ConfigHandle& cfg, std::string& out) {
  if (!out.empty()) return RISDOA_OK;
  size_t len = 0;
  int rc = risdoa_config_get(cfg.h, "output_path", nullptr, &len);
  if (rc != RISDOA_OK) return rc;
  std::string buf(len, '\0');
  rc = risdoa_config_get(cfg.h, "output_path", buf.data(), &len);
  if (rc != RISDOA_OK) return rc;
  buf.resize(len - 1);
  out = buf;
  if (out.empty()) {
    std::fprintf(stderr, "error: no output path (pass --out or set output_path)\n");
    return RISDOA_ERR_INVALID_ARGUMENT;
  }
  return RISDOA_OK;
}

int fetch_angles(risdoa_result_t result, std::vector<double>& angles) {
  size_t count = 0;
  int rc = risdoa_result_angles_deg(result, nullptr, &count);
  if (rc != RISDOA_OK) return rc;
  angles.resize(count);
  return count ? risdoa_result_angles_deg(result, angles.data(), &count) : RISDOA_OK;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gridless direction estimation for a reflective single-channel receiver"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(risdoa_version()));

  std::string config_path, out_path, seed, method = "adpp", snapshot_path;
  std::string perturbation = "zero";

  auto add_common = [&](CLI::App* sub, bool with_out) {
    sub->add_option("--config", config_path, "configuration file");
    sub->add_option("--seed", seed, "override the base seed");
    if (with_out) sub->add_option("--out", out_path, "output file");
  };

  CLI::App* synth = app.add_subcommand("synth", "synthesize one observation window");
  add_common(synth, true);

  CLI::App* estimate = app.add_subcommand("estimate", "estimate directions from a snapshot");
  estimate->add_option("snapshot", snapshot_path, "snapshot file")->required();
  estimate->add_option("--method", method, "adpp | anm | omp | fft")
      ->check(CLI::IsMember({"adpp", "anm", "omp", "fft"}));
  add_common(estimate, true);

  CLI::App* crb = app.add_subcommand("crb", "write the direction bound curve");
  add_common(crb, true);

  CLI::App* sweep = app.add_subcommand("sweep", "run a Monte Carlo sweep");
  add_common(sweep, true);

  CLI::App* dual = app.add_subcommand("dual-poly", "write the dual polynomial of one solve");
  dual->add_option("snapshot", snapshot_path, "snapshot file")->required();
  dual->add_option("--perturbation", perturbation, "offsets fed to the solver")
      ->check(CLI::IsMember({"zero", "true", "estimate"}));
  add_common(dual, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    std::fprintf(stderr, "run with --help for usage\n");
    return 2;
  }

  ConfigHandle cfg;
  if (int rc = open_config(cfg, config_path, seed); rc != RISDOA_OK) return fail(rc);

  if (synth->parsed()) {
    if (int rc = resolve_out(cfg, out_path); rc != RISDOA_OK) return 1;
    SnapshotHandle snap;
    if (int rc = risdoa_synthesize(&snap.h, cfg.h); rc != RISDOA_OK) return fail(rc);
    if (int rc = risdoa_snapshot_save(snap.h, out_path.c_str()); rc != RISDOA_OK)
      return fail(rc);
    return 0;
  }

  if (estimate->parsed()) {
    SnapshotHandle snap;
    if (int rc = risdoa_snapshot_load(&snap.h, snapshot_path.c_str()); rc != RISDOA_OK)
      return fail(rc);
    ResultHandle result;
    if (int rc = risdoa_estimate(&result.h, cfg.h, snap.h, method.c_str()); rc != RISDOA_OK)
      return fail(rc);
    std::vector<double> angles;
    if (int rc = fetch_angles(result.h, angles); rc != RISDOA_OK) return fail(rc);
    std::string text;
    char line[48];
    for (const double a : angles) {
      std::snprintf(line, sizeof line, "%.10g\n", a);
      text += line;
    }
    std::fputs(text.c_str(), stdout);
    if (!out_path.empty()) {
      std::FILE* f = std::fopen(out_path.c_str(), "wb");
      if (!f || std::fwrite(text.data(), 1, text.size(), f) != text.size()) {
        if (f) std::fclose(f);
        std::fprintf(stderr, "error: cannot write '%s'\n", out_path.c_str());
        return 1;
      }
      std::fclose(f);
    }
    return 0;
  }

  if (crb->parsed()) {
    if (int rc = resolve_out(cfg, out_path); rc != RISDOA_OK) return 1;
    if (int rc = risdoa_crb_csv(cfg.h, out_path.c_str()); rc != RISDOA_OK) return fail(rc);
    return 0;
  }

  if (sweep->parsed()) {
    if (int rc = resolve_out(cfg, out_path); rc != RISDOA_OK) return 1;
    if (int rc = risdoa_sweep_csv(cfg.h, out_path.c_str()); rc != RISDOA_OK) return fail(rc);
    return 0;
  }

  if (dual->parsed()) {
    if (int rc = resolve_out(cfg, out_path); rc != RISDOA_OK) return 1;
    SnapshotHandle snap;
    if (int rc = risdoa_snapshot_load(&snap.h, snapshot_path.c_str()); rc != RISDOA_OK)
      return fail(rc);
    const int mode = perturbation == "zero" ? 0 : perturbation == "true" ? 1 : 2;
    if (int rc = risdoa_dual_poly_csv(cfg.h, snap.h, mode, out_path.c_str());
        rc != RISDOA_OK)
      return fail(rc);
    return 0;
  }

  return 2;
}
