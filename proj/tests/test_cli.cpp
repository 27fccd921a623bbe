#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sliceeig/eigensolvers.hpp"
#include "sliceeig/laplacian.hpp"
#include "sliceeig/matrix_market.hpp"
#include "test_util.hpp"

using namespace sliceeig;
using njson = nlohmann::json;

namespace {

struct RunResult {
  int status = -1;
  std::string out;
};

// Run the pipeline binary with the given arguments, capturing stdout.
RunResult run_cli(const std::string& args, bool merge_stderr = false) {
  std::string cmd = std::string(SLICEEIG_CLI_PATH) + " " + args;
  cmd += merge_stderr ? " 2>&1" : " 2>/dev/null";
  FILE* f = popen(cmd.c_str(), "r");
  REQUIRE(f != nullptr);
  RunResult r;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, f)) > 0) r.out.append(buf, got);
  const int rc = pclose(f);
  r.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  return r;
}

std::string fresh_dir(const std::string& stem) {
  std::string d = testutil::temp_path(stem);
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

njson parse(const RunResult& r) {
  REQUIRE(r.status == 0);
  return njson::parse(r.out);
}

// Timing fields vary run to run; everything else must be reproducible.
void strip_times(njson& j) {
  if (j.is_object()) {
    j.erase("times");
    j.erase("timings");
    for (auto& [k, v] : j.items()) strip_times(v);
  } else if (j.is_array()) {
    for (auto& v : j) strip_times(v);
  }
}

Vec collect_union(const njson& report) {
  Vec all;
  for (const auto& s : report.at("slices")) {
    if (!s.contains("eigenvalues")) continue;
    for (double v : s.at("eigenvalues")) all.push_back(v);
  }
  std::sort(all.begin(), all.end());
  return all;
}

Vec oracle_in(const Vec& sorted_all, double xi, double eta) {
  Vec out;
  for (double v : sorted_all)
    if (v >= xi && v <= eta) out.push_back(v);
  return out;
}

}  // namespace

TEST_CASE("cli gen: writes a Laplacian that reads back identically") {
  std::string dir = fresh_dir("cli_gen");

  njson small = parse(run_cli("gen --dims 2 --out " + dir));
  CHECK(small.at("schema") == 1);
  CHECK(small.at("n") == 2);
  CsrMatrix back = read_matrix_market(small.at("path").get<std::string>());
  CsrMatrix ref = gen_laplacian({2});
  REQUIRE(back.n() == 2);
  REQUIRE(back.to_triplets().size() == ref.to_triplets().size());

  njson rep = parse(run_cli("gen --dims 12,12 --out " + dir));
  CHECK(rep.at("n") == 144);
  CHECK(rep.at("nnz") == 672);
  CsrMatrix grid = read_matrix_market(rep.at("path").get<std::string>());
  CsrMatrix gref = gen_laplacian({12, 12});
  auto ta = grid.to_triplets(), tb = gref.to_triplets();
  REQUIRE(ta.size() == tb.size());
  for (std::size_t i = 0; i < ta.size(); ++i) {
    CHECK(ta[i].row == tb[i].row);
    CHECK(ta[i].col == tb[i].col);
    CHECK(ta[i].val == tb[i].val);
  }
}

TEST_CASE("cli bounds: encloses the analytic spectrum without gross padding") {
  std::string dir = fresh_dir("cli_bounds");
  njson rep = parse(run_cli("bounds --dims 20,20"));
  Vec all = laplacian_analytic_eigs({20, 20});
  const double lmin = rep.at("lmin"), lmax = rep.at("lmax");
  CHECK(lmin <= all.front() + 1e-10);
  CHECK(lmax >= all.back() - 1e-10);
  const double spread = all.back() - all.front();
  CHECK(lmin >= all.front() - 0.2 * spread);
  CHECK(lmax <= all.back() + 0.2 * spread);
}

TEST_CASE("cli dos: count estimates track the analytic counts") {
  std::string dir = fresh_dir("cli_dos");

  // Whole-spectrum estimate: every eigenvalue of the 60x60 grid.
  njson whole = parse(run_cli("dos --dims 60,60 --interval 0,8 --out " + dir));
  CHECK(std::abs(whole.at("nev_est").get<double>() - 3600.0) <= 0.10 * 3600.0);
  CHECK(std::filesystem::exists(dir + "/dos_curve.csv"));

  // Partial window, both estimators.
  Vec all = laplacian_analytic_eigs({20, 20});
  const double truth = (double)oracle_in(all, 0.0, 2.0).size();
  for (const char* method : {"kpm", "lanczos"}) {
    njson rep = parse(run_cli(std::string("dos --dims 20,20 --interval 0,2 --method ") + method +
                              " --out " + dir));
    CHECK(std::abs(rep.at("nev_est").get<double>() - truth) <= 0.15 * truth);
  }

  // CSV format streams the curve itself.
  RunResult csv = run_cli("dos --dims 8,8 --format csv --out " + dir);
  REQUIRE(csv.status == 0);
  CHECK(csv.out.rfind("t,phi\n", 0) == 0);
}

TEST_CASE("cli slice: single slice passes through, multi-slice balances counts") {
  std::string dir = fresh_dir("cli_slice");

  njson one = parse(run_cli("slice --dims 10,10 --interval 0.3,0.9 --slices 1 --out " + dir));
  REQUIRE(one.at("slices").size() == 1);
  CHECK(one.at("slices")[0].at("lo").get<double>() == 0.3);
  CHECK(one.at("slices")[0].at("hi").get<double>() == 0.9);

  njson rep = parse(run_cli("slice --dims 20,20 --interval 0,2 --slices 4 --out " + dir));
  REQUIRE(rep.at("slices").size() == 4);
  Vec all = laplacian_analytic_eigs({20, 20});
  std::vector<double> counts;
  double prev_hi = 0.0;
  for (const auto& s : rep.at("slices")) {
    const double lo = s.at("lo"), hi = s.at("hi");
    CHECK(lo == prev_hi);
    prev_hi = hi;
    double c = 0;
    for (double v : all)
      if (v > lo && v <= hi) ++c;
    counts.push_back(c);
  }
  CHECK(prev_hi == 2.0);
  const double mean = (counts[0] + counts[1] + counts[2] + counts[3]) / 4.0;
  for (double c : counts) CHECK(std::abs(c - mean) <= 0.25 * mean);
}

TEST_CASE("cli solve: oracle set, filter agreement, seams, determinism") {
  std::string dir = fresh_dir("cli_solve");
  Vec all = laplacian_analytic_eigs({30, 30});
  Vec oracle = oracle_in(all, 0.4, 0.6);
  REQUIRE(oracle.size() == 13);
  const std::string base = "solve --dims 30,30 --interval 0.4,0.6";

  njson poly = parse(run_cli(base + " --out " + dir + "/p"));
  CHECK(poly.at("converged") == true);
  Vec vp = collect_union(poly);
  REQUIRE(vp.size() == oracle.size());
  for (std::size_t i = 0; i < oracle.size(); ++i) CHECK(std::abs(vp[i] - oracle[i]) <= 1e-8);
  for (const auto& s : poly.at("slices"))
    for (double r : s.at("residuals")) CHECK(r <= 1e-8);

  njson rat = parse(run_cli(base + " --filter rat --out " + dir + "/r"));
  Vec vr = collect_union(rat);
  REQUIRE(vr.size() == vp.size());
  for (std::size_t i = 0; i < vp.size(); ++i) CHECK(std::abs(vr[i] - vp[i]) <= 1e-8);
  CHECK(rat.at("totals").at("counters").at("n_shift_solve").get<long>() > 0);

  // Union across slices equals the single-slice set, with nothing duplicated
  // or dropped at the seams; a thread pool must not change the answer.
  for (const char* extra : {" --slices 4", " --slices 4 --jobs 4"}) {
    njson sliced = parse(run_cli(base + extra + " --out " + dir + "/s"));
    CHECK(sliced.at("totals").at("found").get<long>() == (long)oracle.size());
    Vec vs = collect_union(sliced);
    REQUIRE(vs.size() == oracle.size());
    for (std::size_t i = 0; i < oracle.size(); ++i) CHECK(std::abs(vs[i] - oracle[i]) <= 1e-8);
  }

  // Fixed seed, fixed arguments: identical reports up to timing fields.
  njson again = parse(run_cli(base + " --out " + dir + "/p"));
  strip_times(poly);
  strip_times(again);
  CHECK(poly == again);

  // The thick-restart and subspace-iteration drivers agree on the values.
  njson tr = parse(run_cli(base + " --solver tr --out " + dir + "/tr"));
  Vec vt = collect_union(tr);
  REQUIRE(vt.size() == oracle.size());
  for (std::size_t i = 0; i < oracle.size(); ++i) CHECK(std::abs(vt[i] - oracle[i]) <= 1e-8);
  njson si = parse(run_cli(base + " --solver si --out " + dir + "/si"));
  Vec vsi = collect_union(si);
  REQUIRE(vsi.size() == oracle.size());
  for (std::size_t i = 0; i < oracle.size(); ++i) CHECK(std::abs(vsi[i] - oracle[i]) <= 1e-7);
}

TEST_CASE("cli solve: generalized pencil via matrix files") {
  std::string dir = fresh_dir("cli_pencil");
  const int n = 120;
  CsrMatrix a = CsrMatrix::tridiag_toeplitz(n, -1.0, 2.0);
  CsrMatrix b = CsrMatrix::tridiag_toeplitz(n, 1.0 / 6.0, 2.0 / 3.0);
  write_matrix_market(a, dir + "/a.mtx");
  write_matrix_market(b, dir + "/b.mtx");

  Vec oracle(n);
  const double pi = 3.14159265358979323846;
  for (int k = 1; k <= n; ++k) {
    const double c = std::cos(k * pi / (n + 1));
    oracle[k - 1] = 6.0 * (1.0 - c) / (2.0 + c);
  }
  std::sort(oracle.begin(), oracle.end());
  const double xi = oracle[0] * 0.5, eta = 0.5 * (oracle[7] + oracle[8]);

  char iv[64];
  std::snprintf(iv, sizeof iv, "%.17g,%.17g", xi, eta);
  njson rep = parse(run_cli("solve --matrix " + dir + "/a.mtx --bmatrix " + dir +
                            "/b.mtx --method lanczos --interval " + iv + " --out " + dir));
  CHECK(rep.at("converged") == true);
  Vec v = collect_union(rep);
  REQUIRE(v.size() == 8);
  for (int i = 0; i < 8; ++i) CHECK(std::abs(v[i] - oracle[i]) <= 1e-8);
  CHECK(rep.at("totals").at("counters").at("n_B_solve").get<long>() > 0);
}

TEST_CASE("cli solve: eigenvector block round-trips through the sidecar") {
  std::string dir = fresh_dir("cli_vecs");
  njson rep = parse(run_cli("solve --dims 10,10 --interval 0.5,0.7 --vectors --out " + dir));
  const auto& s0 = rep.at("slices")[0];
  REQUIRE(s0.contains("vectors"));
  const auto& side = s0.at("vectors");
  const int n = side.at("n"), count = side.at("count");
  REQUIRE(count == (int)s0.at("eigenvalues").size());
  const std::string bin = dir + "/" + side.at("file").get<std::string>();
  REQUIRE(std::filesystem::exists(bin));
  REQUIRE((long)std::filesystem::file_size(bin) == (long)n * count * 8);

  std::ifstream is(bin, std::ios::binary);
  Vec u(n);
  is.read(reinterpret_cast<char*>(u.data()), (std::streamsize)(n * 8));
  REQUIRE(is.good());
  CsrMatrix a = gen_laplacian({10, 10});
  auto [lam, res] = rayleigh_and_residual(a, nullptr, u);
  CHECK(std::abs(lam - s0.at("eigenvalues")[0].get<double>()) <= 1e-10);
  CHECK(res <= 1e-8);
  CHECK(std::abs(nrm2(u) - 1.0) <= 1e-10);
}

TEST_CASE("cli filter-dump: curve files and headers for both kinds") {
  std::string dir = fresh_dir("cli_fd");
  njson poly = parse(
      run_cli("filter-dump --dims 10,10 --interval 0.4,0.6 --filter poly --out " + dir));
  CHECK(poly.at("degree").get<int>() > 0);
  CHECK(poly.at("bar").get<double>() > 0.0);
  std::ifstream is(dir + "/filter_curve.csv");
  std::string header;
  std::getline(is, header);
  CHECK(header == "t,rho");
  int lines = 0;
  for (std::string line; std::getline(is, line);) ++lines;
  CHECK(lines == 1000);

  njson rat = parse(run_cli("filter-dump --dims 10,10 --interval 0.4,0.6 --filter rat --out " +
                            dir));
  REQUIRE(rat.at("poles").size() == 1);
  CHECK(rat.at("multiplicities")[0] == 2);
  CHECK(std::abs(rat.at("poles")[0][0].get<double>() - 0.5) <= 1e-12);
  CHECK(std::abs(rat.at("poles")[0][1].get<double>() - 0.1) <= 1e-12);
  CHECK(rat.at("bar").get<double>() == 0.5);
}

TEST_CASE("cli errors: bad invocations fail with a nonzero status") {
  std::string dir = fresh_dir("cli_err");
  // no input source
  CHECK(run_cli("bounds").status != 0);
  // two input sources
  CHECK(run_cli("bounds --dims 4 --matrix nosuch.mtx").status != 0);
  // missing file
  CHECK(run_cli("bounds --matrix nosuch.mtx").status != 0);
  // rational subspace iteration is not a thing
  RunResult r = run_cli("solve --dims 6,6 --interval 0.4,0.6 --filter rat --solver si --out " +
                            dir,
                        true);
  CHECK(r.status != 0);
  // interval entirely outside the spectrum
  CHECK(run_cli("solve --dims 6,6 --interval 50,60 --out " + dir).status != 0);
  // malformed interval
  CHECK(run_cli("solve --dims 6,6 --interval 0.6,0.4 --out " + dir).status != 0);
}
