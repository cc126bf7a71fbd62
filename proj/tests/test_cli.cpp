// Exit-code contract of the nlwave binary: 0 success, 1 I/O, 2
// non-convergence, 3 configuration.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

namespace {

std::filesystem::path tmpdir() {
  auto p = std::filesystem::temp_directory_path() / "nlwave_test_cli";
  std::filesystem::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(NLWAVE_BIN) + " " + args + " > " +
                    (tmpdir() / "out.txt").string() + " 2> " +
                    (tmpdir() / "err.txt").string();
  int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string write_file(const std::string& name, const std::string& body) {
  auto path = (tmpdir() / name).string();
  std::ofstream out(path);
  out << body;
  return path;
}

std::string stderr_text() {
  std::ifstream in(tmpdir() / "err.txt");
  return std::string(std::istreambuf_iterator<char>(in), {});
}

const std::string kTinyRun =
    "scenario = prototype_null\n"
    "grid_n = 32\n"
    "half_width = 6\n"
    "dt = 0.05\n"
    "t_end = 0.5\n"
    "amplitude = 0.05\n"
    "data_width = 1.0\n";

}  // namespace

TEST_CASE("exit 0: successful run, check-tensor, transform, fit") {
  auto cfg = write_file("ok.cfg", kTinyRun + "output_path = " +
                                      (tmpdir() / "ok.csv").string() + "\n");
  CHECK(run_cli("run " + cfg + " --quiet") == 0);
  CHECK(std::filesystem::exists(tmpdir() / "ok.csv"));

  auto tensor = write_file("p.tensor", "0 0 0 0 1\n0 1 0 1 -1\n0 2 0 2 -1\n");
  CHECK(run_cli("check-tensor " + tensor) == 0);

  auto quasi = write_file("m.quasi", "A: 1 0 0\n1 0 0\n0 -1 0\n0 0 -1\n");
  CHECK(run_cli("transform " + quasi + " --case b --n 32 --half-width 6 --output " +
                (tmpdir() / "tr").string()) == 0);
  CHECK(std::filesystem::exists(tmpdir() / "tr_phi.csv"));
  CHECK(std::filesystem::exists(tmpdir() / "tr.tensor"));

  // a longer run so the fit window has enough samples
  auto cfg2 = write_file("fitrun.cfg", kTinyRun + "t_end = 2.5\nreport_every = 1\n" +
                                           "output_path = " +
                                           (tmpdir() / "fit.csv").string() + "\n");
  CHECK(run_cli("run " + cfg2 + " --quiet") == 0);
  CHECK(run_cli("fit " + (tmpdir() / "fit.csv").string() + " --column E2 --t0 1") == 0);
}

TEST_CASE("exit 1: I/O failures") {
  CHECK(run_cli("run /nonexistent/nope.cfg") == 1);
  CHECK(run_cli("check-tensor /nonexistent/nope.tensor") == 1);
  auto cfg = write_file("badout.cfg",
                        kTinyRun + "output_path = /nonexistent-dir/out.csv\n");
  CHECK(run_cli("run " + cfg + " --quiet") == 1);
}

TEST_CASE("exit 2: solver non-convergence surfaces the failure time") {
  auto cfg = write_file("hot.cfg",
                        "scenario = nonnull_contrast\n"
                        "grid_n = 32\n"
                        "half_width = 4\n"
                        "dt = 0.05\n"
                        "t_end = 2\n"
                        "amplitude = 2.0\n"
                        "data_width = 1.0\n"
                        "output_path = " + (tmpdir() / "hot.csv").string() + "\n");
  CHECK(run_cli("run " + cfg + " --quiet") == 2);
}

TEST_CASE("exit 3: configuration errors") {
  auto bad_key = write_file("badkey.cfg", "scenario = linear\nwibble = 1\n");
  CHECK(run_cli("run " + bad_key) == 3);
  CHECK(stderr_text().find("line 2") != std::string::npos);

  auto bad_guard = write_file("guard.cfg", "scenario = linear\nhalf_width = 8\nt_end = 9\n");
  CHECK(run_cli("run " + bad_guard) == 3);

  auto no_tensor = write_file("custom.cfg", "scenario = custom\n");
  CHECK(run_cli("run " + no_tensor) == 3);

  auto quasi = write_file("m2.quasi", "A: 1 0 0\n1 0 0\n0 -1 0\n0 0 -1\n");
  CHECK(run_cli("transform " + quasi + " --case q") == 3);

  // fit with too few usable samples is a usage error
  auto short_csv = write_file(
      "short.csv",
      "t,E1,E2,ghost_E,ghost_G,ks_ratio,good_deriv_ratio,lemma31_ratio,picard_max_iters\n"
      "1,1,1,0,0,0,0,0,1\n2,1,1,0,0,0,0,0,1\n");
  CHECK(run_cli("fit " + short_csv + " --t0 1") == 3);
}

TEST_CASE("degenerate quasi direction warns before the case dispatch rejects it") {
  auto quasi = write_file("degenerate.quasi", "A: 0 0 0\n1 0 0\n0 -1 0\n0 0 -1\n");
  CHECK(run_cli("transform " + quasi + " --case b --n 32 --half-width 6") == 3);
  CHECK(stderr_text().find("degenerates") != std::string::npos);
}
