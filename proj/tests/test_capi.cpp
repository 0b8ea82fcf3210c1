#include "risdoa/risdoa.h"

#include "doctest.h"
#include "risdoa/harness.hpp"
#include "risdoa/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

namespace {

std::string temp_path(const char* stem) {
  const auto dir = std::filesystem::temp_directory_path();
  return (dir / (std::string(stem) + "_" + std::to_string(::getpid()) + ".txt")).string();
}

struct FileGuard {
  std::string path;
  ~FileGuard() {
    std::error_code ec;
    std::filesystem::remove(path, ec);
  }
};

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// The small scene shared by the snapshot and estimation cases.
const char* kSmallScene =
    "format=1\n"
    "n_elements=8\n"
    "n_slots=8\n"
    "seed=7\n"
    "t_param=25\n"
    "eval_grid_size=512\n"
    "fft_grid_size=512\n"
    "omp_grid_size=128\n";

}  // namespace

TEST_CASE("version and error strings are stable") {
  CHECK(std::string(risdoa_version()) == RISDOA_VERSION_STRING);
  CHECK(std::string(risdoa_strerror(RISDOA_OK)) == "ok");
  CHECK(std::string(risdoa_strerror(RISDOA_ERR_BAD_HANDLE)) == "bad handle");
  CHECK(std::string(risdoa_strerror(RISDOA_ERR_BUFFER_TOO_SMALL)) == "buffer too small");
  CHECK(std::string(risdoa_strerror(12345)) == "unknown error code");
}

TEST_CASE("configuration handles follow the buffer and rollback rules") {
  risdoa_config_t cfg = nullptr;
  REQUIRE(risdoa_config_create(&cfg) == RISDOA_OK);

  // Size query, short buffer, then exact read of a default value.
  size_t len = 0;
  CHECK(risdoa_config_get(cfg, "n_elements", nullptr, &len) == RISDOA_OK);
  CHECK(len == 3);
  char tiny[2];
  len = sizeof tiny;
  CHECK(risdoa_config_get(cfg, "n_elements", tiny, &len) == RISDOA_ERR_BUFFER_TOO_SMALL);
  CHECK(len == 3);
  char buf[64];
  len = sizeof buf;
  REQUIRE(risdoa_config_get(cfg, "n_elements", buf, &len) == RISDOA_OK);
  CHECK(std::string(buf) == "32");
  CHECK(len == 3);

  // A successful set is visible; a failing set rolls back.
  REQUIRE(risdoa_config_set(cfg, "n_elements", "8") == RISDOA_OK);
  len = sizeof buf;
  REQUIRE(risdoa_config_get(cfg, "n_elements", buf, &len) == RISDOA_OK);
  CHECK(std::string(buf) == "8");
  CHECK(risdoa_config_set(cfg, "n_elements", "abc") == RISDOA_ERR_PARSE);
  CHECK(std::string(risdoa_last_error()).find("integer") != std::string::npos);
  len = sizeof buf;
  REQUIRE(risdoa_config_get(cfg, "n_elements", buf, &len) == RISDOA_OK);
  CHECK(std::string(buf) == "8");

  CHECK(risdoa_config_set(cfg, "bogus_key", "1") == RISDOA_ERR_PARSE);
  CHECK(risdoa_config_set(cfg, "n=elements", "1") == RISDOA_ERR_INVALID_ARGUMENT);
  CHECK(risdoa_config_set(cfg, nullptr, "1") == RISDOA_ERR_NULL_POINTER);
  CHECK(risdoa_config_get(cfg, "not_a_key", buf, &len) == RISDOA_ERR_INVALID_ARGUMENT);

  // List values serialize back in file syntax.
  REQUIRE(risdoa_config_set(cfg, "angles_deg", "-5, 9") == RISDOA_OK);
  len = sizeof buf;
  REQUIRE(risdoa_config_get(cfg, "angles_deg", buf, &len) == RISDOA_OK);
  CHECK(std::string(buf) == "-5,9");
  len = sizeof buf;
  REQUIRE(risdoa_config_get(cfg, "detection_range_deg", buf, &len) == RISDOA_OK);
  CHECK(std::string(buf) == "-45,45");

  REQUIRE(risdoa_config_free(cfg) == RISDOA_OK);
  CHECK(risdoa_config_get(cfg, "n_elements", buf, &len) == RISDOA_ERR_BAD_HANDLE);
  CHECK(risdoa_config_free(nullptr) == RISDOA_OK);
}

TEST_CASE("config parsing and loading report the right error classes") {
  risdoa_config_t cfg = nullptr;
  CHECK(risdoa_config_parse(&cfg, "no format line\n") == RISDOA_ERR_PARSE);
  CHECK(risdoa_config_load(&cfg, "/nonexistent/risdoa.cfg") == RISDOA_ERR_IO);
  CHECK(risdoa_config_parse(nullptr, "format=1\n") == RISDOA_ERR_NULL_POINTER);

  REQUIRE(risdoa_config_parse(&cfg, "format=1\nn_slots=12\n") == RISDOA_OK);
  char buf[16];
  size_t len = sizeof buf;
  REQUIRE(risdoa_config_get(cfg, "n_slots", buf, &len) == RISDOA_OK);
  CHECK(std::string(buf) == "12");
  risdoa_config_free(cfg);
}

TEST_CASE("synthesized snapshots expose the scene through accessors") {
  risdoa_config_t cfg = nullptr;
  REQUIRE(risdoa_config_parse(&cfg, kSmallScene) == RISDOA_OK);
  risdoa_snapshot_t snap = nullptr;
  REQUIRE(risdoa_synthesize(&snap, cfg) == RISDOA_OK);

  int n = 0, m = 0, truth = 0;
  double variance = 0.0;
  CHECK(risdoa_snapshot_n_elements(snap, &n) == RISDOA_OK);
  CHECK(n == 8);
  CHECK(risdoa_snapshot_n_slots(snap, &m) == RISDOA_OK);
  CHECK(m == 8);
  CHECK(risdoa_snapshot_noise_variance(snap, &variance) == RISDOA_OK);
  CHECK(variance > 0.0);
  CHECK(risdoa_snapshot_has_truth(snap, &truth) == RISDOA_OK);
  CHECK(truth == 1);

  size_t count = 0;
  CHECK(risdoa_snapshot_true_angles_deg(snap, nullptr, &count) == RISDOA_OK);
  REQUIRE(count == 2);
  double angles[2];
  CHECK(risdoa_snapshot_true_angles_deg(snap, angles, &count) == RISDOA_OK);
  CHECK(angles[0] == -18.4228);
  CHECK(angles[1] == 16.2385);

  // The interleaved samples equal the library pipeline run directly.
  count = 0;
  CHECK(risdoa_snapshot_received(snap, nullptr, &count) == RISDOA_OK);
  REQUIRE(count == 16);
  double re_im[16];
  REQUIRE(risdoa_snapshot_received(snap, re_im, &count) == RISDOA_OK);
  const risdoa::SnapshotRecord rec =
      risdoa::make_snapshot_record(risdoa::parse_config(kSmallScene));
  for (int i = 0; i < 8; ++i) {
    CHECK(re_im[2 * i] == rec.received[i].real());
    CHECK(re_im[2 * i + 1] == rec.received[i].imag());
  }

  SUBCASE("snapshots survive a save and load round trip") {
    FileGuard tmp{temp_path("risdoa_capi_snap")};
    REQUIRE(risdoa_snapshot_save(snap, tmp.path.c_str()) == RISDOA_OK);
    risdoa_snapshot_t back = nullptr;
    REQUIRE(risdoa_snapshot_load(&back, tmp.path.c_str()) == RISDOA_OK);
    double again[16];
    size_t cnt = 16;
    REQUIRE(risdoa_snapshot_received(back, again, &cnt) == RISDOA_OK);
    for (int i = 0; i < 16; ++i) CHECK(again[i] == re_im[i]);
    int t2 = 0;
    CHECK(risdoa_snapshot_has_truth(back, &t2) == RISDOA_OK);
    CHECK(t2 == 1);
    risdoa_snapshot_free(back);
  }

  SUBCASE("loading a missing snapshot is an i/o error") {
    risdoa_snapshot_t missing = nullptr;
    CHECK(risdoa_snapshot_load(&missing, "/nonexistent/snap.txt") == RISDOA_ERR_IO);
  }

  risdoa_snapshot_free(snap);
  CHECK(risdoa_snapshot_n_slots(snap, &m) == RISDOA_ERR_BAD_HANDLE);
  CHECK(risdoa_snapshot_free(nullptr) == RISDOA_OK);
  risdoa_config_free(cfg);
}

TEST_CASE("estimation runs a named method against a snapshot") {
  risdoa_config_t cfg = nullptr;
  REQUIRE(risdoa_config_parse(&cfg, kSmallScene) == RISDOA_OK);
  risdoa_snapshot_t snap = nullptr;
  REQUIRE(risdoa_synthesize(&snap, cfg) == RISDOA_OK);

  risdoa_result_t result = nullptr;
  REQUIRE(risdoa_estimate(&result, cfg, snap, "fft") == RISDOA_OK);
  int k = -1;
  REQUIRE(risdoa_result_k_detected(result, &k) == RISDOA_OK);
  REQUIRE(k >= 1);
  CHECK(k <= 2);

  size_t count = 0;
  CHECK(risdoa_result_angles_deg(result, nullptr, &count) == RISDOA_OK);
  REQUIRE(count == static_cast<size_t>(k));
  std::vector<double> angles(count);
  CHECK(risdoa_result_angles_deg(result, angles.data(), &count) == RISDOA_OK);
  for (const double a : angles) CHECK(std::abs(a) <= 45.0);

  count = 0;
  CHECK(risdoa_result_peak_heights(result, nullptr, &count) == RISDOA_OK);
  CHECK(count == static_cast<size_t>(k));

  // Matched filtering carries no offset estimate.
  count = 99;
  double unused[4];
  CHECK(risdoa_result_offsets(result, unused, &count) == RISDOA_OK);
  CHECK(count == 0);

  CHECK(risdoa_estimate(&result, cfg, snap, "music") == RISDOA_ERR_UNKNOWN_METHOD);
  CHECK(std::string(risdoa_last_error()).find("music") != std::string::npos);
  CHECK(risdoa_estimate(&result, cfg, snap, nullptr) == RISDOA_ERR_NULL_POINTER);

  risdoa_result_free(result);
  CHECK(risdoa_result_k_detected(result, &k) == RISDOA_ERR_BAD_HANDLE);
  CHECK(risdoa_result_free(nullptr) == RISDOA_OK);

  risdoa_snapshot_free(snap);
  risdoa_config_free(cfg);
}

TEST_CASE("batch csv entry points write the documented files") {
  risdoa_config_t cfg = nullptr;
  REQUIRE(risdoa_config_parse(&cfg, kSmallScene) == RISDOA_OK);
  REQUIRE(risdoa_config_set(cfg, "methods", "omp,fft") == RISDOA_OK);
  REQUIRE(risdoa_config_set(cfg, "n_trials", "2") == RISDOA_OK);
  REQUIRE(risdoa_config_set(cfg, "sweep_values", "10,20") == RISDOA_OK);
  REQUIRE(risdoa_config_set(cfg, "threads", "1") == RISDOA_OK);

  SUBCASE("sweep") {
    FileGuard tmp{temp_path("risdoa_capi_sweep")};
    REQUIRE(risdoa_sweep_csv(cfg, tmp.path.c_str()) == RISDOA_OK);
    const std::string text = read_text(tmp.path);
    CHECK(text.rfind("axis_value,method,rmse_deg,n_trials,mean_runtime_s\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 5);
    CHECK(risdoa_sweep_csv(cfg, nullptr) == RISDOA_ERR_NULL_POINTER);
    CHECK(risdoa_sweep_csv(nullptr, tmp.path.c_str()) == RISDOA_ERR_BAD_HANDLE);
  }

  SUBCASE("bound curve") {
    FileGuard tmp{temp_path("risdoa_capi_crb")};
    REQUIRE(risdoa_crb_csv(cfg, tmp.path.c_str()) == RISDOA_OK);
    const std::string text = read_text(tmp.path);
    CHECK(text.rfind("snr_db,crb_theta_deg_0,crb_theta_deg_1\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
  }

  SUBCASE("dual polynomial") {
    risdoa_snapshot_t snap = nullptr;
    REQUIRE(risdoa_synthesize(&snap, cfg) == RISDOA_OK);
    REQUIRE(risdoa_config_set(cfg, "outer_iters", "1") == RISDOA_OK);
    REQUIRE(risdoa_config_set(cfg, "inner_iters", "50") == RISDOA_OK);

    FileGuard ideal{temp_path("risdoa_capi_poly0")};
    FileGuard truth{temp_path("risdoa_capi_poly1")};
    FileGuard fitted{temp_path("risdoa_capi_poly2")};
    REQUIRE(risdoa_dual_poly_csv(cfg, snap, 0, ideal.path.c_str()) == RISDOA_OK);
    REQUIRE(risdoa_dual_poly_csv(cfg, snap, 1, truth.path.c_str()) == RISDOA_OK);
    REQUIRE(risdoa_dual_poly_csv(cfg, snap, 2, fitted.path.c_str()) == RISDOA_OK);
    for (const auto* g : {&ideal, &truth, &fitted}) {
      const std::string text = read_text(g->path);
      CHECK(text.rfind("angle_deg,f_value,beta\n", 0) == 0);
      CHECK(std::count(text.begin(), text.end(), '\n') == 513);
    }
    CHECK(risdoa_dual_poly_csv(cfg, snap, 3, ideal.path.c_str()) ==
          RISDOA_ERR_INVALID_ARGUMENT);

    risdoa_snapshot_free(snap);
  }

  risdoa_config_free(cfg);
}
