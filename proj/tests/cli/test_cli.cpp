#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "adtg/heightfield.hpp"
#include "adtg/learner.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Result run(const adtg::test::TempDir& dir, const std::string& args, const std::string& env = "") {
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const std::string cmd = "cd '" + dir.path().string() + "' && env -u ADTG_SEED " + env + " '" ADTG_CLI_PATH "' " +
                          args + " >'" + out.string() + "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

const std::string kQuick = "--set epochs=6 --set heldout_size=4 --set heldout_pairs=8 --set population=8 "
                           "--set elite=2 --set eval_pairs=8 --set success_pairs=8 --set eval_every=3";

}  // namespace

TEST_CASE("schedule prints K rows with decreasing alpha_bar") {
  adtg::test::TempDir dir("cli_schedule");
  const auto r = run(dir, "schedule --K 64");
  REQUIRE(r.code == 0);
  const auto rows = lines(r.out);
  REQUIRE(rows.size() == 65);
  CHECK(rows[0] == "k,beta,alpha,alpha_bar");
  double last = 1.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double ab = std::stod(rows[i].substr(rows[i].rfind(',') + 1));
    CHECK(ab < last);
    last = ab;
  }
  CHECK(last < 0.01);
}

TEST_CASE("synthesize from an empty directory fails with exit code 2") {
  adtg::test::TempDir dir("cli_empty");
  fs::create_directories(dir / "data");
  const auto r = run(dir, "synthesize --dataset data --output out.ahf");
  CHECK(r.code == 2);
  CHECK(r.err.find("empty dataset") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out.ahf"));
}

TEST_CASE("usage and config errors exit with code 2") {
  adtg::test::TempDir dir("cli_errors");
  CHECK(run(dir, "").code == 2);
  CHECK(run(dir, "frobnicate").code == 2);
  CHECK(run(dir, "schedule --bogus 3").code == 2);
  CHECK(run(dir, "train --mode ppo").code == 2);
  std::ofstream(dir / "bad.cfg") << "epochs=3\nwarp_speed=9\n";
  const auto r = run(dir, "train --config bad.cfg");
  CHECK(r.code == 2);
  CHECK(r.err.find("warp_speed") != std::string::npos);
  CHECK(run(dir, "train --set epochs=-1").code == 2);
  CHECK(run(dir, "train --seed 3", "ADTG_SEED=abc").code == 2);
}

TEST_CASE("help documents config defaults") {
  adtg::test::TempDir dir("cli_help");
  const auto r = run(dir, "train --help");
  CHECK(r.code == 0);
  CHECK(r.out.find("epochs=150") != std::string::npos);
  CHECK(r.out.find("target_difficulty=0.725") != std::string::npos);
  CHECK(r.out.find("ADTG_SEED") != std::string::npos);
}

TEST_CASE("train writes the run artifacts and is repeatable") {
  adtg::test::TempDir dir("cli_train");
  const auto a = run(dir, "train --mode adtg --seed 7 --out a --jobs 1 " + kQuick);
  REQUIRE(a.code == 0);
  const auto b = run(dir, "train --mode adtg --seed 7 --out b --jobs 3 " + kQuick);
  REQUIRE(b.code == 0);
  const auto metrics = slurp(dir / "a/metrics.csv");
  CHECK(metrics == slurp(dir / "b/metrics.csv"));
  CHECK(lines(metrics)[0] == "epoch,phase,env_id,success_rate,lambda_var,k,heldout_return,heldout_success,wall_ms");
  CHECK(fs::exists(dir / "a/run_manifest"));
  CHECK(fs::exists(dir / "a/policy.csv"));
  CHECK(fs::exists(dir / "a/state"));
  CHECK(fs::exists(dir / "a/terrains/0000.ahf"));
  CHECK_NOTHROW(adtg::read_heightmap(dir / "a/terrains/0000.ahf"));
  CHECK_NOTHROW(adtg::read_policy_csv(dir / "a/policy.csv"));
  const auto manifest = slurp(dir / "a/run_manifest");
  CHECK(manifest.find("seed=7") != std::string::npos);
  CHECK(manifest.find("artifact_version=") != std::string::npos);

  // The manifest alone reproduces the run.
  const auto c = run(dir, "train --config a/run_manifest --out c");
  REQUIRE(c.code == 0);
  CHECK(slurp(dir / "c/metrics.csv") == metrics);

  const auto d = run(dir, "train --mode adtg --seed 8 --out d " + kQuick);
  REQUIRE(d.code == 0);
  CHECK(slurp(dir / "d/metrics.csv") != metrics);
}

TEST_CASE("seed precedence: config file, then ADTG_SEED, then --seed") {
  adtg::test::TempDir dir("cli_seed");
  std::ofstream(dir / "run.cfg") << "seed=5\nepochs=1\nheldout_size=2\nheldout_pairs=4\npopulation=4\nelite=2\n"
                                    "eval_pairs=4\nsuccess_pairs=4\n";
  REQUIRE(run(dir, "train --config run.cfg --out f").code == 0);
  CHECK(slurp(dir / "f/run_manifest").find("\nseed=5\n") != std::string::npos);
  REQUIRE(run(dir, "train --config run.cfg --out e", "ADTG_SEED=11").code == 0);
  CHECK(slurp(dir / "e/run_manifest").find("\nseed=11\n") != std::string::npos);
  REQUIRE(run(dir, "train --config run.cfg --seed 12 --out s", "ADTG_SEED=11").code == 0);
  CHECK(slurp(dir / "s/run_manifest").find("\nseed=12\n") != std::string::npos);
}

TEST_CASE("resume continues a finished run") {
  adtg::test::TempDir dir("cli_resume");
  REQUIRE(run(dir, "train --mode pg --seed 3 --out full " + kQuick).code == 0);
  const std::string half = kQuick + " --set epochs=3";
  REQUIRE(run(dir, "train --mode pg --seed 3 --out part " + half).code == 0);
  REQUIRE(run(dir, "train --mode pg --resume part --out rest " + kQuick).code == 0);
  CHECK(slurp(dir / "rest/metrics.csv") == slurp(dir / "full/metrics.csv"));
  CHECK(slurp(dir / "rest/policy.csv") == slurp(dir / "full/policy.csv"));
}

TEST_CASE("eval scores a saved policy") {
  adtg::test::TempDir dir("cli_eval");
  REQUIRE(run(dir, "train --mode n_at --seed 2 --out run " + kQuick).code == 0);
  const auto r = run(dir, "eval --out run --set heldout_size=4 --set heldout_pairs=8 --per-terrain per.csv");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("heldout_success=") != std::string::npos);
  CHECK(lines(slurp(dir / "per.csv")).size() == 5);
  // matches the last evaluation row of the run
  const auto rows = lines(slurp(dir / "run/metrics.csv"));
  const auto& last = rows.back();
  const auto ret = r.out.substr(r.out.find("heldout_return=") + 15);
  CHECK(last.find(ret.substr(0, ret.find('\n'))) != std::string::npos);
  CHECK(run(dir, "eval --policy missing.csv").code == 2);
}

TEST_CASE("terrain subcommands") {
  adtg::test::TempDir dir("cli_terrain");
  REQUIRE(run(dir, "sample-prior --count 5 --out prior --seed 4").code == 0);
  CHECK(fs::exists(dir / "prior/0004.ahf"));

  const auto v = run(dir, "variability --dataset prior");
  REQUIRE(v.code == 0);
  CHECK(v.out.find("lambda_var=") != std::string::npos);

  REQUIRE(run(dir, "gen-proc --kind slope --grade 0.2 --output slope.ahf --csv slope.csv").code == 0);
  CHECK(adtg::compute_stats(adtg::read_heightmap(dir / "slope.ahf")).roughness == doctest::Approx(0.2));
  CHECK(run(dir, "gen-proc --kind wave --count 4 --amplitude 1.1 --output w.ahf").code == 2);
  REQUIRE(run(dir, "gen-proc --kind discrete_obstacles --random --seed 3 --output o.ahf").code == 0);

  REQUIRE(run(dir, "diffuse --input prior/0000.ahf -k 10 --output back.ahf").code == 0);
  CHECK(fs::exists(dir / "back.ahf"));

  std::ofstream(dir / "prior/success.csv") << "name,success_rate\n0000,0.1\n0001,0.9\n0002,0.7\n0003,0.65\n0004,0.3\n";
  const auto s = run(dir, "synthesize --dataset prior --k 8 --output syn.ahf --seed 1");
  REQUIRE(s.code == 0);
  CHECK(s.out.find("predicted_success=") != std::string::npos);
  CHECK(adtg::read_heightmap(dir / "syn.ahf").width() == 32);
  std::ofstream(dir / "prior/success.csv") << "0000,1.5\n";
  CHECK(run(dir, "synthesize --dataset prior --k 8 --output syn2.ahf").code == 2);
}

TEST_CASE("consistency and predictor training") {
  adtg::test::TempDir dir("cli_consistency");
  const auto c = run(dir, "consistency --syntheses 6 --dataset-size 10 --out cons --seed 2");
  REQUIRE(c.code == 0);
  CHECK(lines(slurp(dir / "cons/consistency.csv")).size() == 7);
  const auto t = run(dir, "train-predictor --samples 16 --iterations 20 --hidden 8 --output model.bin");
  REQUIRE(t.code == 0);
  REQUIRE(fs::exists(dir / "model.bin"));
  CHECK(run(dir, "diffuse --input model.bin -k 3 --output x.ahf").code == 2);
}
