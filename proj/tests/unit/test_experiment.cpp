#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "coevolve/error.hpp"
#include "coevolve/meanfield.hpp"
#include "coevolve/transport.hpp"
#include "coevolve/experiment/artifacts.hpp"
#include "coevolve/experiment/config.hpp"
#include "coevolve/experiment/runner.hpp"
#include "coevolve/experiment/study.hpp"
#include "coevolve/experiment/svg.hpp"
#include "coevolve/experiment/verify.hpp"

using namespace coevolve;
using namespace coevolve::experiment;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

ExperimentConfig config(const std::string& text) { return parse_config(text, "inline.toml"); }

int cli(const std::string& args) {
  const int status = std::system((std::string(COEVOLVE_CLI) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string cli_output(const std::string& args) {
  const fs::path out = fs::absolute("cli_output.txt");
  (void)!std::system((std::string(COEVOLVE_CLI) + " " + args + " > " + out.string() + " 2>/dev/null").c_str());
  return slurp(out);
}

void check_manifest_complete(const fs::path& manifest_path) {
  const auto m = nlohmann::json::parse(slurp(manifest_path));
  CHECK(m["generator"] == "splitmix64-counter");
  CHECK(m.contains("integrator"));
  for (const auto& a : m["artifacts"]) {
    const fs::path p = manifest_path.parent_path() / a["path"].get<std::string>();
    REQUIRE(fs::exists(p));
    CHECK(sha256_file(p) == a["sha256"].get<std::string>());
  }
}

}  // namespace

TEST_CASE("sha256") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("config parsing") {
  const ExperimentConfig c = config(R"(
seed = 3
[system]
kernel = "flow:kuramoto:linear:1:cos"
graphon = "product"
[grid]
T = 0.5
steps = 50
[sizes]
N = [4, 8]
[output]
directory = "somewhere"
)");
  CHECK(c.seed == 3);
  CHECK(c.t_end == 0.5);
  CHECK(c.grid().steps() == 50);
  CHECK(c.sizes == std::vector<std::size_t>{4, 8});
  CHECK(c.output_dir == fs::path("somewhere"));
  CHECK(c.kernel().kind() == MemoryKernel::Kind::flow);
  CHECK(c.wants("svg"));

  // The hash depends on content, not on the order of tables or keys.
  const ExperimentConfig reordered = config(R"(
seed = 3
[output]
directory = "somewhere"
[sizes]
N = [4, 8]
[grid]
steps = 50
T = 0.5
[system]
graphon = "product"
kernel = "flow:kuramoto:linear:1:cos"
)");
  CHECK(reordered.config_hash == c.config_hash);
  CHECK(c.config_hash.size() == 64);
  const ExperimentConfig other = config(R"(
seed = 4
[output]
directory = "somewhere"
[sizes]
N = [4, 8]
[grid]
steps = 50
T = 0.5
[system]
graphon = "product"
kernel = "flow:kuramoto:linear:1:cos"
)");
  CHECK(other.config_hash != c.config_hash);
  // A key after a table header belongs to that table.
  CHECK_THROWS_AS(config("[system]\nkernel = \"zero\"\n[grid]\nT = 1\nseed = 3\n"), ConfigError);
}

TEST_CASE("config errors carry line numbers") {
  const auto message = [](const std::string& text) {
    try {
      config(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("[system]\nkernel = \"zero\"\ncolour = 1\n").find("inline.toml:3") != std::string::npos);
  CHECK(message("[system]\nkernel = \"warp:9\"\n").find("inline.toml:2") != std::string::npos);
  CHECK(message("[system]\nkernel = \"zero\"\n[grid]\nT = -1\n").find("inline.toml:4") != std::string::npos);
  CHECK(message("[system\nkernel = 1\n").find("inline.toml:1") != std::string::npos);
  CHECK(message("[grid]\nT = 1\n").find("[system]") != std::string::npos);
  CHECK(message("[system]\nkernel = \"zero\"\n[verify]\nlipschitz_graphons = [\"threshold:0.2\"]\n")
            .find("inline.toml:4") != std::string::npos);
  CHECK(message("[system]\nkernel = \"zero\"\n[sizes]\nN = [0]\n").find("inline.toml:4") != std::string::npos);
}

TEST_CASE("svg rendering") {
  const std::string two = "x,y\n1,2\n10,20\n";
  const std::string svg = render_svg(read_plot_csv(two), PlotKind::loglog, "t");
  std::size_t polylines = 0;
  for (std::size_t p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1))
    ++polylines;
  CHECK(polylines == 1);
  CHECK(svg == render_svg(read_plot_csv(two), PlotKind::loglog, "t"));
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK_THROWS_AS(read_plot_csv("x,y\n"), ValidationError);
  CHECK_THROWS_AS(read_plot_csv(""), ValidationError);
  CHECK_THROWS_AS(read_plot_csv("x,y\na,2\n"), ValidationError);
  CHECK_THROWS_AS(render_svg(read_plot_csv("x,y\n0,1\n1,2\n"), PlotKind::loglog, "t"), ValidationError);
  CHECK_NOTHROW(render_svg(read_plot_csv("x,y\n0,1\n1,2\n"), PlotKind::series, "t"));
  const auto series = read_plot_csv("N,a,b,label\n8,1,,ref\n16,0.5,0.25,ref\n");
  REQUIRE(series.size() == 2);
  CHECK(series[1].x.size() == 1);
  CHECK_THROWS_AS(parse_plot_kind("bar"), ConfigError);

  const fs::path csv = write_file(fs::absolute("svg_case/table.csv"), two);
  const fs::path out = emit_svg(csv, PlotKind::series);
  CHECK(out.extension() == ".svg");
  const std::string first = slurp(out);
  emit_svg(csv, PlotKind::series);
  CHECK(slurp(out) == first);
}

TEST_CASE("run pipeline") {
  const std::string text = R"(
seed = 1
[system]
kernel = "zero"
[initial]
profile = "poly:0,1"
[grid]
T = 1
steps = 10
[sizes]
N = [2]
[output]
directory = "run_case"
)";
  fs::remove_all("run_case");
  const RunOutcome out = run_experiment(config(text));
  check_manifest_complete(out.manifest_path);
  const std::string csv = slurp("run_case/trajectories_N2.csv");
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "t,particle,x_label,v0");
  while (std::getline(lines, line)) {
    const std::string value = line.substr(line.rfind(',') + 1);
    const std::string particle = line.substr(line.find(',') + 1, 1);
    CHECK(value == (particle == "0" ? "0.25" : "0.75"));
  }

  // Repeated runs reproduce every artifact byte for byte.
  const auto first = nlohmann::json::parse(slurp(out.manifest_path))["artifacts"];
  const auto again = nlohmann::json::parse(slurp(run_experiment(config(text)).manifest_path))["artifacts"];
  REQUIRE(first.size() == again.size());
  for (std::size_t k = 0; k < first.size(); ++k) CHECK(first[k]["sha256"] == again[k]["sha256"]);

  fs::remove_all("sampled_case");
  const RunOutcome sampled = run_experiment(config(R"(
seed = 4
[system]
kernel = "flow:kuramoto:linear:1:cos"
graphon = "threshold:0.3"
[initial]
mode = "sampled"
family = "uniform"
first = "constant:-0.5"
second = "constant:0.5"
[grid]
T = 0.5
steps = 50
[sizes]
blocks = [[2, 3]]
[output]
directory = "sampled_case"
)"));
  check_manifest_complete(sampled.manifest_path);
  const auto fibers = nlohmann::json::parse(slurp("sampled_case/fibers_n2_m3.json"));
  CHECK(fibers["fibers"][1]["particles"] == nlohmann::json({3, 4, 5}));
  CHECK(fibers["fibers"][1]["lower"] == 0.5);
}

TEST_CASE("cli exit codes") {
  const fs::path bad = write_file(fs::absolute("cli_case/bad.toml"), "[system\nkernel=\n");
  fs::remove_all("cli_case/out");
  CHECK(cli("run " + bad.string()) == 2);
  CHECK_FALSE(fs::exists("cli_case/out"));
  CHECK(cli("run " + fs::absolute("cli_case/missing.toml").string()) == 2);
  CHECK(cli("frobnicate") == 2);
  CHECK(std::stod(cli_output("bound dobrushin --lk 1 --lw 2 --d0 1 --t 1")) ==
        doctest::Approx(4.0 * std::sqrt(2.0) * std::exp(2.0)).epsilon(1e-12));
  CHECK(std::stod(cli_output("bound nonlip --lk 1 --di0 0.1 --wl1 0.2 --t 1")) ==
        doctest::Approx(2.11672).epsilon(1e-5));
  CHECK(std::stod(cli_output("bound flow --lk 1 --lw 1 --dzeta 0 --dx 1 --t 1")) ==
        doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-12));
  CHECK(cli("bound dobrushin --lk -1 --lw 2 --d0 1 --t 1") == 2);

  const fs::path blow = write_file(fs::absolute("cli_case/blow.toml"), R"(
[system]
kernel = "constant:1e308"
[initial]
profile = "constant:1e308"
[grid]
T = 1
steps = 1
[sizes]
N = [1]
[output]
directory = "cli_case/out_blow"
)");
  CHECK(cli("run " + blow.string()) == 3);

  const fs::path csv = write_file(fs::absolute("cli_case/plot.csv"), "N,d\n8,0.5\n16,0.25\n");
  CHECK(cli("plot " + csv.string() + " --kind loglog") == 0);
  CHECK(fs::exists(fs::absolute("cli_case/plot.svg")));
  CHECK(cli("plot " + csv.string() + " --kind pie") == 2);

  // The halved-constant control violates the shipped suite.
  const fs::path suite = fs::path(COEVOLVE_SOURCE_DIR) / "configs/verify_suite.toml";
  CHECK(cli("verify " + suite.string() + " --override L_K_scale=0.5") == 4);
  CHECK(cli("verify " + suite.string() + " --override L_W=1") == 2);
}

TEST_CASE("grid convergence study") {
  // With no dynamics every distance is the quantization error of the
  // initial data.
  const ExperimentConfig still = config(R"(
[system]
kernel = "zero"
graphon = "product"
[initial]
profile = "sin:1:1"
[grid]
T = 1
steps = 20
[sizes]
N = [4, 8, 16]
[study]
reference_n = 64
)");
  const StudyResult s = convergence_study(still);
  REQUIRE(s.rows.size() == 3);
  const auto initial = [](std::size_t n) {
    std::vector<double> atoms;
    for (double x : uniform_nodes(n)) atoms.push_back(std::sin(2.0 * M_PI * x));
    return LabeledPointMeasure::uniform(1, atoms, uniform_nodes(n));
  };
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(s.rows[k].dist_to_limit ==
          doctest::Approx(wasserstein1_exact(initial(s.rows[k].size), initial(64)).distance)
              .epsilon(1e-12));
    if (k > 0) CHECK(s.rows[k].dist_to_limit < s.rows[k - 1].dist_to_limit);
  }
  CHECK(std::isnan(s.rows[0].dist_successive));
  CHECK(s.reference == "continuum:n_x=64");
  CHECK_THROWS_AS(convergence_study(config("[system]\nkernel = \"zero\"\n[sizes]\nN = [4, 8]\n")), ConfigError);
  CHECK_THROWS_AS(convergence_study(config("[system]\nkernel = \"zero\"\n[sizes]\nN = [4, 16, 8]\n")), ConfigError);

  fs::remove_all("study_case");
  const ExperimentConfig kuramoto = config(R"(
[system]
kernel = "flow:kuramoto:linear:1:cos"
graphon = "product"
[initial]
profile = "sin:1:1"
[grid]
T = 1
steps = 200
[sizes]
N = [8, 16, 32, 64]
[study]
reference = "self"
[output]
directory = "study_case"
)");
  StudyResult r;
  const RunOutcome out = run_study(kuramoto, &r);
  check_manifest_complete(out.manifest_path);
  CHECK(fs::exists("study_case/study.svg"));
  CHECK(std::isnan(r.rows.back().dist_to_limit));
  CHECK(r.rows[1].dist_to_limit < r.rows[0].dist_to_limit);
  CHECK(r.rows[2].dist_to_limit < r.rows[1].dist_to_limit);
  for (std::size_t k = 2; k < r.rows.size(); ++k) {
    const double ratio = r.rows[k].dist_successive / r.rows[k - 1].dist_successive;
    CHECK(ratio >= 0.2);
    CHECK(ratio <= 0.8);
  }
  CHECK(r.table_csv().rfind("N,dist_to_limit,dist_successive,reference\n8,", 0) == 0);
}

TEST_CASE("linear initial data converges under the Kuramoto flow kernel") {
  const ExperimentConfig c = config(R"(
[system]
kernel = "flow:kuramoto:linear:1:cos"
graphon = "product"
[initial]
profile = "poly:0,3.141592653589793"
[grid]
T = 1
steps = 200
[sizes]
N = [8, 16, 32, 64, 128]
[study]
reference_n = 256
)");
  const StudyResult s = convergence_study(c);
  for (std::size_t k = 1; k < s.rows.size(); ++k) CHECK(s.rows[k].dist_to_limit < s.rows[k - 1].dist_to_limit);
}

TEST_CASE("shipped run config is reproducible") {
  ExperimentConfig c = load_config(fs::path(COEVOLVE_SOURCE_DIR) / "configs/kuramoto_flow.toml");
  c.output_dir = "shipped_a";
  const auto a = nlohmann::json::parse(slurp(run_experiment(c).manifest_path));
  c.output_dir = "shipped_b";
  const auto b = nlohmann::json::parse(slurp(run_experiment(c).manifest_path));
  CHECK(a["config_hash"] == b["config_hash"]);
  REQUIRE(a["artifacts"].size() == b["artifacts"].size());
  for (std::size_t k = 0; k < a["artifacts"].size(); ++k)
    CHECK(a["artifacts"][k]["sha256"] == b["artifacts"][k]["sha256"]);
}

TEST_CASE("sampled convergence study") {
  const ExperimentConfig c = config(R"(
seed = 5
[system]
kernel = "flow:kuramoto:linear:1:cos"
graphon = "product"
[initial]
mode = "sampled"
family = "dirac"
first = "sin:1:1"
[grid]
T = 1
steps = 100
[sizes]
blocks = [[2, 2], [4, 4], [8, 8]]
[study]
reference_n = 64
)");
  const StudyResult s = convergence_study(c);
  REQUIRE(s.rows.size() == 3);
  CHECK(s.sampled);
  CHECK(s.rows[2].blocks == 8);
  CHECK(s.rows[2].dist_to_limit < s.rows[0].dist_to_limit);
  CHECK(s.table_csv().rfind("N,dist_fibered,", 0) == 0);
  const ExperimentConfig gauss = config(R"(
[system]
kernel = "zero"
[initial]
mode = "sampled"
family = "gaussian"
first = "constant:0"
second = "constant:1"
[sizes]
blocks = [[2, 2], [4, 4], [8, 8]]
)");
  CHECK_THROWS_AS(convergence_study(gauss), ConfigError);
}

TEST_CASE("overrides") {
  ConstantOverride o;
  parse_override("L_K=2.5", o);
  CHECK(o.apply(10.0) == 2.5);
  parse_override("L_K_scale=0.5", o);
  CHECK(o.apply(10.0) == 1.25);
  ConstantOverride s;
  parse_override("L_K_scale=0.5", s);
  CHECK(s.apply(3.0) == 1.5);
  CHECK(s.active());
  CHECK_FALSE(ConstantOverride{}.active());
  CHECK_THROWS_AS(parse_override("L_W=1", o), ConfigError);
  CHECK_THROWS_AS(parse_override("L_K", o), ConfigError);
  CHECK_THROWS_AS(parse_override("L_K=-1", o), ConfigError);
}

TEST_CASE("verify pipeline") {
  const std::string base = R"(
[system]
kernel = "zero"
[grid]
T = 1
steps = 1000
[verify]
epsilons = [0.0]
nonlip_epsilons = [0.0]
nonlip_graphon = "threshold:0.3"
nonlip_approximation = "threshold:0.3"
lemma_pairs = 5
[output]
directory = "verify_case"
)";
  fs::remove_all("verify_case");
  VerifyReport zero;
  const RunOutcome out = run_verify(config(base), {}, &zero);
  check_manifest_complete(out.manifest_path);
  CHECK(zero.trials.size() == 2 * 3 + 2);
  for (const TrialResult& t : zero.trials) {
    CHECK(t.measured == 0.0);
    CHECK(t.pass);
  }
  CHECK(zero.lemmas.size() == 2);
  CHECK(zero.violations() == 0);
  const auto report = nlohmann::json::parse(slurp("verify_case/verify.json"));
  CHECK(report["pass"] == true);

  const fs::path shipped = fs::path(COEVOLVE_SOURCE_DIR) / "configs/verify_suite.toml";
  ExperimentConfig suite = load_config(shipped);
  suite.verify.lemma_pairs = 0;
  const VerifyReport ok = verify_bounds(suite, {});
  CHECK(ok.trials.size() == 24);
  CHECK(ok.violations() == 0);
  CHECK(ok.min_margin() > 0.0);
  ConstantOverride halved;
  halved.l_k_scale = 0.5;
  CHECK(verify_bounds(suite, halved).violations() >= 1);
}
