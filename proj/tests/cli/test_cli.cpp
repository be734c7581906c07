#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "pat/csv.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kExe = PAT_EXE;
const fs::path kConfigs = PAT_CONFIG_DIR;

fs::path work_dir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "pat_cli_tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Run {
  int code = -1;
  std::string out;
};

Run run_pat(const std::string& args) {
  static int counter = 0;
  const fs::path log = work_dir() / fmt::format("log_{}.txt", counter++);
  const std::string cmd = fmt::format("{} {} > {} 2>&1", kExe.string(), args, log.string());
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(log);
  return r;
}

std::string smoke() { return fmt::format("--config {}", (kConfigs / "smoke.conf").string()); }

std::string out_dir(const std::string& name) { return fmt::format("--out-dir {}", (work_dir() / name).string()); }

const fs::path& trained_weights() {
  static const fs::path w = [] {
    const Run r = run_pat(fmt::format("train {} {} --seed 3", smoke(), out_dir("train_a")));
    REQUIRE_MESSAGE(r.code == 0, r.out);
    return work_dir() / "train_a" / "weights.patw";
  }();
  return w;
}

std::string weights_arg() { return fmt::format("--weights {}", trained_weights().string()); }

}  // namespace

TEST_CASE("gradcheck passes and reports three composites") {
  const Run r = run_pat(fmt::format("gradcheck {}", out_dir("gradcheck")));
  CHECK_MESSAGE(r.code == 0, r.out);
  const pat::CsvTable t = pat::read_csv(work_dir() / "gradcheck" / "gradcheck.csv");
  CHECK(t.rows.size() == 3);
}

TEST_CASE("ablate --list prints the 11 presets") {
  const Run r = run_pat("ablate --list");
  CHECK(r.code == 0);
  int lines = 0;
  std::istringstream in(r.out);
  for (std::string line; std::getline(in, line);) lines += line.empty() ? 0 : 1;
  CHECK(lines == 11);
  CHECK(r.out.find("-target_pose") != std::string::npos);
}

TEST_CASE("unknown preset fails and names the known presets") {
  const Run r = run_pat(fmt::format("ablate {} {} --preset +everything {}", smoke(), weights_arg(), out_dir("bad_preset")));
  CHECK(r.code != 0);
  CHECK(r.out.find("small_poster") != std::string::npos);
}

TEST_CASE("training is reproducible from the seed and from the manifest") {
  const fs::path a = trained_weights();
  REQUIRE(run_pat(fmt::format("train {} {} --seed 3", smoke(), out_dir("train_b"))).code == 0);
  CHECK(slurp(a) == slurp(work_dir() / "train_b" / "weights.patw"));
  const Run rerun = run_pat(fmt::format("train --config {} {}", (work_dir() / "train_a" / "manifest.txt").string(),
                                    out_dir("train_c")));
  REQUIRE_MESSAGE(rerun.code == 0, rerun.out);
  CHECK(slurp(a) == slurp(work_dir() / "train_c" / "weights.patw"));
  REQUIRE(run_pat(fmt::format("train {} {} --seed 4", smoke(), out_dir("train_d"))).code == 0);
  CHECK_FALSE(slurp(a) == slurp(work_dir() / "train_d" / "weights.patw"));
}

TEST_CASE("a config missing required keys exits 2 and lists them") {
  const fs::path cfg = work_dir() / "partial.conf";
  std::ofstream(cfg) << "train.capacity = Sm-lite\n";
  const Run r = run_pat(fmt::format("train --config {} {}", cfg.string(), out_dir("partial")));
  CHECK(r.code == 2);
  CHECK(r.out.find("train.iterations") != std::string::npos);
  CHECK(r.out.find("train.batch_size") != std::string::npos);
  CHECK(r.out.find("train.learning_rate") != std::string::npos);
}

TEST_CASE("an unknown key is a config error") {
  const Run r = run_pat(fmt::format("preview --set attack.iteratons=3 {}", out_dir("typo")));
  CHECK(r.code == 2);
  CHECK(r.out.find("attack.iteratons") != std::string::npos);
}

TEST_CASE("evaluating the source against itself gives zero on every pair") {
  const fs::path src = work_dir() / "source.png";
  REQUIRE(run_pat(fmt::format("preview {} {}", smoke(), out_dir("preview"))).code == 0);
  fs::copy_file(work_dir() / "preview" / "texture.png", src, fs::copy_options::overwrite_existing);
  const Run r = run_pat(fmt::format("eval {} {} --texture {} --source {} --pairs 20 {}", smoke(), weights_arg(), src.string(),
                                src.string(), out_dir("eval_same")));
  REQUIRE_MESSAGE(r.code == 0, r.out);
  const pat::CsvTable t = pat::read_csv(work_dir() / "eval_same" / "report.csv");
  CHECK(t.rows.size() == 20);
  for (std::size_t i = 0; i < t.rows.size(); ++i) CHECK(t.number(i, "mu_ioud") == 0.0);
}

TEST_CASE("an unreadable texture fails cleanly") {
  const fs::path bogus = work_dir() / "not_a.png";
  std::ofstream(bogus) << "plain text";
  const Run r = run_pat(fmt::format("eval {} {} --texture {} --source pattern:gray {}", smoke(), weights_arg(), bogus.string(),
                                out_dir("eval_bogus")));
  CHECK(r.code != 0);
  CHECK(r.out.find("not_a.png") != std::string::npos);
}

TEST_CASE("servo with zero gains keeps the camera still") {
  const Run r = run_pat(fmt::format("servo {} {} --zero-gains --steps 9 {}", smoke(), weights_arg(), out_dir("servo_zero")));
  REQUIRE_MESSAGE(r.code == 0, r.out);
  const pat::CsvTable t = pat::read_csv(work_dir() / "servo_zero" / "trajectory.csv");
  REQUIRE(t.rows.size() == 9);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    CHECK(t.number(i, "camera_x") == t.number(0, "camera_x"));
    CHECK(t.number(i, "camera_y") == t.number(0, "camera_y"));
    CHECK(t.number(i, "camera_z") == t.number(0, "camera_z"));
  }
}

TEST_CASE("attack runs with pure, hybrid and imitation losses") {
  const Run nt = run_pat(fmt::format("attack {} {} {}", smoke(), weights_arg(), out_dir("attack_nt")));
  REQUIRE_MESSAGE(nt.code == 0, nt.out);
  const pat::CsvTable h = pat::read_csv(work_dir() / "attack_nt" / "history.csv");
  CHECK(h.rows.size() == 3);
  CHECK(fs::exists(work_dir() / "attack_nt" / "texture.png"));
  CHECK(fs::exists(work_dir() / "attack_nt" / "snapshots" / "iter_00003.png"));

  const Run hybrid = run_pat(fmt::format("attack {} {} --loss nt:1,t=:1 {}", smoke(), weights_arg(), out_dir("attack_hybrid")));
  CHECK_MESSAGE(hybrid.code == 0, hybrid.out);

  const Run imitation = run_pat(fmt::format("attack {} {} --w-ps 0.6 --source {} --set attack.init=image --set attack.init_image={} {}",
                                        smoke(), weights_arg(), (work_dir() / "attack_nt" / "texture_initial.png").string(),
                                        (work_dir() / "attack_nt" / "texture_initial.png").string(), out_dir("attack_ps")));
  CHECK_MESSAGE(imitation.code == 0, imitation.out);
  const std::string manifest = slurp(work_dir() / "attack_ps" / "manifest.txt");
  CHECK(manifest.find("config.loss.w_ps=0.6") != std::string::npos);
}

TEST_CASE("w_ps without a source is rejected") {
  const Run r = run_pat(fmt::format("attack {} {} --w-ps 0.6 {}", smoke(), weights_arg(), out_dir("attack_nosrc")));
  CHECK(r.code == 2);
}
