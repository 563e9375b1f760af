#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "sfpca/csv.hpp"
#include "sfpca/linalg.hpp"

namespace fs = std::filesystem;
using sfpca::DenseMatrix;

namespace {

std::string cli_path() {
  const char* env = std::getenv("SFPCA_CLI");
  return env == nullptr ? std::string() : std::string(env);
}

int run_cli(const std::string& args) {
  const std::string cmd = cli_path() + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  if (status == -1 || !WIFEXITED(status)) return -1;
  return WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

nlohmann::json load_json(const fs::path& path) {
  return nlohmann::json::parse(slurp(path));
}

DenseMatrix small_input() {
  DenseMatrix x(12, 8);
  for (int i = 0; i < 12; ++i) {
    for (int j = 0; j < 8; ++j) {
      x(i, j) = std::sin(0.7 * i + 1.3 * j) + 0.1 * i - 0.05 * j;
    }
  }
  x(0, 0) += 6.0;  // pronounced leading direction
  return x;
}

}  // namespace

TEST_CASE("cli: simulate writes the scenario deterministically") {
  REQUIRE_FALSE(cli_path().empty());
  const fs::path a = fresh_dir("sfpca_cli_sim_a");
  const fs::path b = fresh_dir("sfpca_cli_sim_b");
  CHECK(run_cli("simulate --scenario 2 --seed 5 --out " + a.string()) == 0);
  CHECK(run_cli("simulate --scenario 2 --seed 5 --out " + b.string()) == 0);

  const DenseMatrix x = sfpca::read_matrix_csv((a / "x.csv").string());
  CHECK(x.rows() == 100);
  CHECK(x.cols() == 100);
  const DenseMatrix u = sfpca::read_matrix_csv((a / "u_star.csv").string());
  CHECK(u.rows() == 100);
  CHECK(u.cols() == 3);

  const auto meta = load_json(a / "meta.json");
  CHECK(meta["schema_version"].get<int>() == 1);
  CHECK(meta["snr_realized"].get<double>() == doctest::Approx(1.7));

  CHECK(slurp(a / "x.csv") == slurp(b / "x.csv"));
  CHECK(slurp(a / "meta.json") == slurp(b / "meta.json"));

  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("cli: usage violations exit with the usage code") {
  REQUIRE_FALSE(cli_path().empty());
  const fs::path dir = fresh_dir("sfpca_cli_usage");
  const fs::path xcsv = dir / "x.csv";
  sfpca::write_matrix_csv(xcsv.string(), small_input());

  CHECK(run_cli("simulate --scenario 3 --out " + dir.string()) == 2);
  // Manifold engines own their multi-rank structure: no deflation allowed.
  CHECK(run_cli("fit --input " + xcsv.string() +
                " --method madmm --deflation schur --out " + dir.string()) == 2);
  // Multi-rank rank1 requires an explicit scheme choice.
  CHECK(run_cli("fit --input " + xcsv.string() +
                " --method rank1 --rank 2 --out " + dir.string()) == 2);
  // Unreadable input is a parse failure.
  CHECK(run_cli("fit --input " + (dir / "nope.csv").string() +
                " --method rank1 --deflation schur --out " + dir.string()) == 2);
  CHECK(run_cli("bench --scenario 2 --methods wat --out " + dir.string()) == 2);

  fs::remove_all(dir);
}

TEST_CASE("cli: rank1 fit with schur deflation writes the full bundle") {
  REQUIRE_FALSE(cli_path().empty());
  const fs::path dir = fresh_dir("sfpca_cli_fit");
  const fs::path xcsv = dir / "x.csv";
  sfpca::write_matrix_csv(xcsv.string(), small_input());

  const int code = run_cli("fit --input " + xcsv.string() +
                           " --method rank1 --rank 2 --deflation schur"
                           " --lambda-u 0.1 --lambda-v 0.1 --out " +
                           dir.string());
  REQUIRE((code == 0 || code == 3));

  const DenseMatrix uh = sfpca::read_matrix_csv((dir / "u_hat.csv").string());
  CHECK(uh.rows() == 12);
  CHECK(uh.cols() == 2);
  const DenseMatrix vh = sfpca::read_matrix_csv((dir / "v_hat.csv").string());
  CHECK(vh.rows() == 8);
  CHECK(vh.cols() == 2);
  const DenseMatrix dh = sfpca::read_matrix_csv((dir / "d_hat.csv").string());
  CHECK(dh.size() == 2);

  const auto report = load_json(dir / "report.json");
  CHECK(report["schema_version"].get<int>() == 1);
  CHECK(report["method"].get<std::string>() == "rank1");
  CHECK(report["deflation"].get<std::string>() == "schur");
  CHECK(report["converged"].get<bool>() == (code == 0));
  CHECK(report["objective_trace"].size() == 2);
  CHECK(report["feasibility"]["u"].get<double>() <= 1e-6);

  fs::remove_all(dir);
}

TEST_CASE("cli: manifold fit reports engine effort") {
  REQUIRE_FALSE(cli_path().empty());
  const fs::path dir = fresh_dir("sfpca_cli_fit_man");
  const fs::path xcsv = dir / "x.csv";
  sfpca::write_matrix_csv(xcsv.string(), small_input());

  const int code = run_cli("fit --input " + xcsv.string() +
                           " --method amanpg --rank 2 --lambda-u 0.05"
                           " --lambda-v 0.05 --out " +
                           dir.string());
  REQUIRE((code == 0 || code == 3));
  const auto report = load_json(dir / "report.json");
  CHECK(report["method"].get<std::string>() == "amanpg");
  CHECK(report["engine_stats"]["descent_solves"].get<long>() >= 1);
  CHECK(report["converged"].get<bool>() == (code == 0));

  fs::remove_all(dir);
}

TEST_CASE("cli: deflate applies the scheme and certifies orthogonality") {
  REQUIRE_FALSE(cli_path().empty());
  const fs::path dir = fresh_dir("sfpca_cli_deflate");
  DenseMatrix x(3, 2);
  x << 2.0, -4.0 / 3.0, 2.0, 2.0 / 3.0, 1.0, 4.0 / 3.0;
  DenseMatrix u(3, 1), v(2, 1);
  u << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0), 0.0;
  v << 1.0, 0.0;
  sfpca::write_matrix_csv((dir / "x.csv").string(), x);
  sfpca::write_matrix_csv((dir / "u.csv").string(), u);
  sfpca::write_matrix_csv((dir / "v.csv").string(), v);

  CHECK(run_cli("deflate --input " + (dir / "x.csv").string() + " --u " +
                (dir / "u.csv").string() + " --v " + (dir / "v.csv").string() +
                " --scheme projection --mode vector --out " + dir.string()) == 0);

  const DenseMatrix got =
      sfpca::read_matrix_csv((dir / "x_deflated.csv").string());
  DenseMatrix want(3, 2);
  want << 0.0, -1.0, 0.0, 1.0, 0.0, 4.0 / 3.0;
  CHECK((got - want).norm() <= 1e-9);

  const auto cert = load_json(dir / "orthogonality.json");
  CHECK(cert["entries"].size() == 1);
  CHECK(cert["max_two_way"].get<double>() <= 1e-9);

  fs::remove_all(dir);
}

TEST_CASE("cli: bench writes parseable outputs with an svd anchor") {
  REQUIRE_FALSE(cli_path().empty());
  const fs::path dir = fresh_dir("sfpca_cli_bench");
  CHECK(run_cli("bench --scenario 2 --seed 1 --replicates 1 --methods svd"
                " --out " +
                dir.string()) == 0);
  const auto bench = load_json(dir / "bench.json");
  CHECK(bench["schema_version"].get<int>() == 1);
  CHECK(bench["aggregates"][0]["method"].get<std::string>() == "svd");
  CHECK(bench["aggregates"][0]["rss_u_mean"].get<double>() ==
        doctest::Approx(1.0).epsilon(1e-6));
  CHECK_FALSE(slurp(dir / "bench.csv").empty());

  fs::remove_all(dir);
}
