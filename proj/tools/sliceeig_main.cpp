// Command-line front end: generate or load matrices, estimate spectral
// bounds and densities, partition an interval into balanced slices, dump
// filter curves, and run the slice eigensolvers — emitting JSON (or CSV)
// reports plus optional binary eigenvector blocks.
//
// Exit status is 0 only when every requested slice converged.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sliceeig/dos.hpp"
#include "sliceeig/eigensolvers.hpp"
#include "sliceeig/laplacian.hpp"
#include "sliceeig/matrix_market.hpp"
#include "sliceeig/slicer.hpp"

using json = nlohmann::ordered_json;
using namespace sliceeig;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// Manifest: everything a run needs, assembled from the command line.

struct Manifest {
  // input (exactly one of matrix_path / dims)
  std::string matrix_path;
  std::vector<int> dims;
  std::string bmatrix_path;

  std::vector<double> interval;  // LO,HI
  int slices = 1;
  std::string filter = "poly";    // poly | rat
  std::string damping = "sigma";  // sigma | jackson | none
  int poles = 1;                  // rational: distinct poles
  int repeats = 2;                // rational: multiplicity per pole
  std::string solver = "nr";      // nr | tr | si
  std::string method = "kpm";     // density estimator: kpm | lanczos
  double tol = 1e-8;
  unsigned long seed = 1234;
  int jobs = 1;
  std::string out_dir = ".";
  std::string format = "json";  // json | csv
  bool write_vectors = false;

  // density estimator tuning
  int dos_deg = 60;
  int dos_vecs = 40;
  int dos_npts = 300;

  void require_one_input() const {
    if (matrix_path.empty() == dims.empty())
      throw CLI::ValidationError("input", "exactly one of --matrix and --dims is required");
  }
  void require_interval() const {
    if (interval.size() != 2 || !(interval[0] < interval[1]))
      throw CLI::ValidationError("--interval", "expected LO,HI with LO < HI");
  }

  json input_json() const {
    json j;
    if (!dims.empty())
      j["dims"] = dims;
    else
      j["matrix"] = matrix_path;
    if (!bmatrix_path.empty()) j["bmatrix"] = bmatrix_path;
    return j;
  }
};

void add_input_flags(CLI::App* cmd, Manifest& m) {
  cmd->add_option("--matrix", m.matrix_path, "MatrixMarket file holding A");
  cmd->add_option("--dims", m.dims, "grid dimensions d1[,d2[,d3]] of a generated Laplacian")
      ->delimiter(',');
  cmd->add_option("--bmatrix", m.bmatrix_path, "MatrixMarket file holding SPD B (pencil mode)");
}

void add_output_flags(CLI::App* cmd, Manifest& m) {
  cmd->add_option("--out", m.out_dir, "output directory for generated files");
  cmd->add_option("--format", m.format, "report format on stdout")
      ->check(CLI::IsMember({"json", "csv"}));
}

void add_dos_flags(CLI::App* cmd, Manifest& m) {
  cmd->add_option("--method", m.method, "density estimator")
      ->check(CLI::IsMember({"kpm", "lanczos"}));
  cmd->add_option("--deg", m.dos_deg, "estimator degree / step count");
  cmd->add_option("--vecs", m.dos_vecs, "number of random probe vectors");
  cmd->add_option("--npts", m.dos_npts, "density grid size");
}

// ---------------------------------------------------------------------------
// Input loading and shared pipeline stages.

struct Problem {
  CsrMatrix a;
  std::optional<CsrMatrix> b;
};

Problem load_problem(const Manifest& m) {
  m.require_one_input();
  Problem p;
  p.a = m.dims.empty() ? read_matrix_market(m.matrix_path) : gen_laplacian(m.dims);
  if (!m.bmatrix_path.empty()) {
    p.b = read_matrix_market(m.bmatrix_path);
    if (p.b->n() != p.a.n()) throw std::invalid_argument("A and B sizes differ");
  }
  return p;
}

SpectralBounds estimate_bounds(const Problem& p, unsigned long seed) {
  Operator opa = make_operator(p.a);
  if (!p.b) return lan_tr_bounds(opa, InnerProduct{}, 1e-4, 60, 40, seed);
  Operator opb = make_operator(*p.b);
  SpdFactor bf = SpdFactor::factor(*p.b);
  Operator bsolve{p.a.n(), [&](const Vec& x, Vec& y) { y = bf.solve(x); }};
  InnerProduct ip{&opb, &bsolve};
  return lan_tr_bounds(opa, ip, 1e-4, 60, 40, seed);
}

DosCurve estimate_dos(const Problem& p, const SpectralBounds& bounds, const Manifest& m) {
  DosConfig cfg;
  cfg.method = m.method == "kpm" ? DosMethod::Kpm : DosMethod::Lanczos;
  cfg.m = m.dos_deg;
  cfg.n_vec = m.dos_vecs;
  cfg.npts = m.dos_npts;
  cfg.seed = m.seed;
  Operator opa = make_operator(p.a);
  if (!p.b) {
    return cfg.method == DosMethod::Kpm ? kpm_dos(opa, bounds, cfg) : lan_dos(opa, bounds, cfg);
  }
  if (cfg.method == DosMethod::Kpm)
    throw std::invalid_argument("kpm density estimation handles standard problems only; "
                                "use --method lanczos for a pencil");
  Operator opb = make_operator(*p.b);
  SpdFactor bf = SpdFactor::factor(*p.b);
  Operator bsolve{p.a.n(), [&](const Vec& x, Vec& y) { y = bf.solve(x); }};
  Operator bhalf{p.a.n(), [&](const Vec& x, Vec& y) { y = bf.solve_gt(x); }};
  return dos_generalized(opa, bsolve, bhalf, opb, bounds, cfg);
}

void write_text(const std::string& path, const std::string& body) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << body;
  if (!os) throw std::runtime_error("write failed: " + path);
}

std::string curve_csv(const DosCurve& c) {
  std::ostringstream os;
  os.precision(17);
  os << "t,phi\n";
  for (std::size_t i = 0; i < c.xdos.size(); ++i) os << c.xdos[i] << "," << c.ydos[i] << "\n";
  return os.str();
}

std::filesystem::path prepare_out_dir(const Manifest& m) {
  std::filesystem::path dir(m.out_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// The density curve is sampled on [lmin, lmax] only; a request poking past
// the spectrum carries no mass there, so density queries run on the overlap.
struct Overlap {
  double lo = 0.0, hi = 0.0;
  bool empty = true;
};

Overlap clip_to_curve(const DosCurve& c, double lo, double hi) {
  Overlap o;
  o.lo = std::max(lo, c.xdos.front());
  o.hi = std::min(hi, c.xdos.back());
  o.empty = !(o.lo < o.hi);
  return o;
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

// ---------------------------------------------------------------------------
// gen

int cmd_gen(Manifest& m) {
  if (m.dims.empty()) throw CLI::ValidationError("--dims", "gen requires grid dimensions");
  CsrMatrix a = gen_laplacian(m.dims);
  std::filesystem::path dir = prepare_out_dir(m);
  std::string name = "laplacian_";
  for (std::size_t i = 0; i < m.dims.size(); ++i)
    name += (i ? "x" : "") + std::to_string(m.dims[i]);
  std::filesystem::path path = dir / (name + ".mtx");
  write_matrix_market(a, path.string());

  json rep{{"schema", 1},
           {"command", "gen"},
           {"path", path.string()},
           {"n", a.n()},
           {"nnz", a.nnz()}};
  emit(rep);
  return 0;
}

// ---------------------------------------------------------------------------
// bounds

int cmd_bounds(Manifest& m) {
  Problem p = load_problem(m);
  SpectralBounds b = estimate_bounds(p, m.seed);
  json rep{{"schema", 1},
           {"command", "bounds"},
           {"input", m.input_json()},
           {"lmin", b.lmin},
           {"lmax", b.lmax}};
  emit(rep);
  return 0;
}

// ---------------------------------------------------------------------------
// dos

int cmd_dos(Manifest& m) {
  Problem p = load_problem(m);
  SpectralBounds b = estimate_bounds(p, m.seed);
  DosCurve curve = estimate_dos(p, b, m);

  double nev = curve.nev_est;
  if (m.interval.size() == 2) {
    m.require_interval();
    Overlap o = clip_to_curve(curve, m.interval[0], m.interval[1]);
    nev = o.empty ? 0.0 : dos_count(curve, o.lo, o.hi);
  }

  std::filesystem::path dir = prepare_out_dir(m);
  std::filesystem::path curve_path = dir / "dos_curve.csv";
  write_text(curve_path.string(), curve_csv(curve));

  json rep{{"schema", 1},       {"command", "dos"},
           {"input", m.input_json()},
           {"method", m.method},
           {"lmin", b.lmin},    {"lmax", b.lmax},
           {"nev_est", nev},    {"curve_file", curve_path.string()}};
  if (m.format == "csv")
    std::cout << curve_csv(curve);
  else
    emit(rep);
  return 0;
}

// ---------------------------------------------------------------------------
// slice

// Breakpoints come from the clipped interval; the outer edges stretch back
// to the user's endpoints so the slices tile the request exactly.
SliceSet slice_clipped(const DosCurve& curve, double xi, double eta, int ns) {
  Overlap o = clip_to_curve(curve, xi, eta);
  if (o.empty)
    throw std::invalid_argument("requested interval does not meet the sampled spectrum");
  SliceSet s = slice_spectrum(curve, o.lo, o.hi, ns);
  s.breakpoints.front() = xi;
  s.breakpoints.back() = eta;
  return s;
}

int cmd_slice(Manifest& m) {
  m.require_interval();
  Problem p = load_problem(m);
  SpectralBounds b = estimate_bounds(p, m.seed);
  DosCurve curve = estimate_dos(p, b, m);
  SliceSet s = slice_clipped(curve, m.interval[0], m.interval[1], m.slices);

  json arr = json::array();
  for (int i = 0; i < s.ns(); ++i)
    arr.push_back(json{{"lo", s.breakpoints[i]},
                       {"hi", s.breakpoints[i + 1]},
                       {"est_count", s.est_counts[i]}});
  json rep{{"schema", 1},   {"command", "slice"},     {"input", m.input_json()},
           {"method", m.method}, {"interval", m.interval}, {"slices", arr}};

  std::filesystem::path dir = prepare_out_dir(m);
  write_text((dir / "slices.json").string(), rep.dump(2) + "\n");

  if (m.format == "csv") {
    std::ostringstream os;
    os.precision(17);
    os << "lo,hi,est_count\n";
    for (int i = 0; i < s.ns(); ++i)
      os << s.breakpoints[i] << "," << s.breakpoints[i + 1] << "," << s.est_counts[i] << "\n";
    std::cout << os.str();
  } else {
    emit(rep);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// filter-dump

Damping parse_damping(const std::string& s) {
  if (s == "sigma") return Damping::LanczosSigma;
  if (s == "jackson") return Damping::Jackson;
  return Damping::None;
}

int cmd_filter_dump(Manifest& m) {
  m.require_interval();
  Problem p = load_problem(m);
  SpectralBounds b = estimate_bounds(p, m.seed);
  const double lo = m.interval[0], hi = m.interval[1];
  const int npts = 1000;

  json head{{"schema", 1}, {"command", "filter-dump"}, {"kind", m.filter},
            {"interval", m.interval}, {"lmin", b.lmin}, {"lmax", b.lmax}};
  Vec xs(npts), ys(npts);

  if (m.filter == "poly") {
    PolyOpts po;
    po.damping = parse_damping(m.damping);
    PolynomialFilter f = find_pol(lo, hi, b, po);
    head["degree"] = f.k;
    head["bar"] = f.bar;
    head["center"] = f.map.c + f.map.d * f.gamma;
    head["damping"] = m.damping;
    for (int i = 0; i < npts; ++i) {
      xs[i] = b.lmin + (b.lmax - b.lmin) * i / (npts - 1);
      const double t = std::clamp(f.map.to_ref(xs[i]), -1.0, 1.0);
      ys[i] = eval_pol(f, t);
    }
  } else {
    RatOpts ro;
    ro.p = m.poles;
    ro.repeats = m.repeats;
    RationalFilter f = find_ratf(lo, hi, ro);
    json poles = json::array(), mult = json::array();
    for (int j = 0; j < f.p; ++j) {
      const auto s = f.shift(j);
      poles.push_back(json::array({s.real(), s.imag()}));
      mult.push_back(f.mult[j]);
    }
    head["poles"] = poles;
    head["multiplicities"] = mult;
    head["bar"] = f.bar;
    for (int i = 0; i < npts; ++i) {
      xs[i] = b.lmin + (b.lmax - b.lmin) * i / (npts - 1);
      ys[i] = eval_rat(f, f.map.to_ref(xs[i]));
    }
  }

  std::ostringstream os;
  os.precision(17);
  os << "t,rho\n";
  for (int i = 0; i < npts; ++i) os << xs[i] << "," << ys[i] << "\n";

  std::filesystem::path dir = prepare_out_dir(m);
  write_text((dir / "filter_curve.csv").string(), os.str());

  if (m.format == "csv")
    std::cout << os.str();
  else
    emit(head);
  return 0;
}

// ---------------------------------------------------------------------------
// solve

struct SliceTask {
  int index = 0;
  double lo = 0.0, hi = 0.0;
  double est = 0.0;
};

struct SliceOutcome {
  EigenResults res;
  std::string error;
  bool ok = false;
};

EigenResults run_slice(const Problem& p, const SpectralBounds& bounds, const SliceTask& t,
                       const Manifest& m) {
  SolverConfig cfg;
  cfg.res_tol = m.tol;
  cfg.seed = m.seed;
  cfg.est_count = std::max(1, (int)std::lround(std::ceil(t.est)));

  const CsrMatrix* b = p.b ? &*p.b : nullptr;
  if (m.filter == "poly") {
    PolyOpts po;
    po.damping = parse_damping(m.damping);
    PolynomialFilter f = find_pol(t.lo, t.hi, bounds, po);
    if (m.solver == "nr") return cheb_lan_nr(p.a, b, f, t.lo, t.hi, cfg);
    if (m.solver == "tr") return cheb_lan_tr(p.a, b, f, t.lo, t.hi, cfg);
    return cheb_si(p.a, b, f, t.lo, t.hi, cfg.est_count, cfg);
  }
  RatOpts ro;
  ro.p = m.poles;
  ro.repeats = m.repeats;
  RationalFilter f = find_ratf(t.lo, t.hi, ro);
  if (m.solver == "si")
    throw std::invalid_argument("subspace iteration runs with polynomial filters only");
  if (m.solver == "nr") return rat_lan_nr(p.a, b, f, t.lo, t.hi, cfg);
  return rat_lan_tr(p.a, b, f, t.lo, t.hi, cfg);
}

// Seam attribution: an eigenvalue within delta of an interior breakpoint
// belongs to the slice below it, so the union over slices has no duplicates.
void trim_to_slice(EigenResults& r, const SliceTask& t, int ns, double delta) {
  std::vector<int> keep;
  for (int i = 0; i < (int)r.eigenvalues.size(); ++i) {
    const double v = r.eigenvalues[i];
    if (t.index > 0 && v <= t.lo + delta) continue;
    if (t.index + 1 < ns && v > t.hi + delta) continue;
    keep.push_back(i);
  }
  if ((int)keep.size() == (int)r.eigenvalues.size()) return;
  EigenResults out;
  out.niter = r.niter;
  out.counters = r.counters;
  out.hit_max_its = r.hit_max_its;
  out.vectors = DenseMat(r.vectors.rows(), 0);
  for (int i : keep) {
    out.eigenvalues.push_back(r.eigenvalues[i]);
    out.residuals.push_back(r.residuals[i]);
    out.vectors.push_col(r.vectors.col_vec(i));
  }
  r = std::move(out);
}

json counters_json(const Counters& c) {
  return json{{"n_A_matvec", c.n_A_matvec},
              {"n_B_matvec", c.n_B_matvec},
              {"n_B_solve", c.n_B_solve},
              {"n_shift_solve", c.n_shift_solve}};
}

json times_json(const Counters& c) {
  return json{{"t_mv", c.t_mv}, {"t_orth", c.t_orth}, {"t_sv", c.t_sv}, {"t_total", c.t_total}};
}

int resolve_jobs(int requested, int ntasks) {
  int cap = std::numeric_limits<int>::max();
  if (const char* env = std::getenv("SLICEEIG_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) cap = v;
  }
  return std::clamp(requested, 1, std::max(1, std::min(cap, ntasks)));
}

int cmd_solve(Manifest& m) {
  const auto t_start = std::chrono::steady_clock::now();
  m.require_interval();
  const double xi = m.interval[0], eta = m.interval[1];

  Problem p = load_problem(m);
  const double t_load = seconds_since(t_start);

  const auto t_b0 = std::chrono::steady_clock::now();
  SpectralBounds bounds = estimate_bounds(p, m.seed);
  const double t_bounds = seconds_since(t_b0);

  // Density pass: slice breakpoints (when ns > 1) and per-slice count
  // estimates feeding the solver configuration.
  const auto t_d0 = std::chrono::steady_clock::now();
  DosCurve curve = estimate_dos(p, bounds, m);
  std::vector<SliceTask> tasks;
  if (m.slices <= 1) {
    Overlap o = clip_to_curve(curve, xi, eta);
    tasks.push_back({0, xi, eta, o.empty ? 0.0 : dos_count(curve, o.lo, o.hi)});
  } else {
    SliceSet s = slice_clipped(curve, xi, eta, m.slices);
    for (int i = 0; i < s.ns(); ++i)
      tasks.push_back({i, s.breakpoints[i], s.breakpoints[i + 1], s.est_counts[i]});
  }
  const double t_dos = seconds_since(t_d0);

  std::filesystem::path dir = prepare_out_dir(m);
  write_text((dir / "dos_curve.csv").string(), curve_csv(curve));

  // Slice solves, optionally on a thread pool.  Everything shared is
  // read-only; each task builds its own filter and factorizations.
  const int ns = (int)tasks.size();
  const double delta = 1e-10 * (bounds.lmax - bounds.lmin);
  const int jobs = resolve_jobs(m.jobs, ns);
  std::vector<SliceOutcome> outcomes(ns);
  const auto t_s0 = std::chrono::steady_clock::now();
  std::atomic<int> cursor{0};
  auto worker = [&]() {
    for (;;) {
      const int i = cursor.fetch_add(1);
      if (i >= ns) return;
      try {
        EigenResults r = run_slice(p, bounds, tasks[i], m);
        trim_to_slice(r, tasks[i], ns, delta);
        outcomes[i].res = std::move(r);
        outcomes[i].ok = !outcomes[i].res.hit_max_its;
      } catch (const std::exception& e) {
        outcomes[i].error = e.what();
        outcomes[i].ok = false;
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  const double t_solve = seconds_since(t_s0);

  // Per-slice reports, written individually and merged into the run report.
  json slices = json::array();
  Counters total_cnt;
  long total_found = 0, total_niter = 0;
  bool all_ok = true;
  for (int i = 0; i < ns; ++i) {
    const SliceOutcome& oc = outcomes[i];
    json sj{{"schema", 1},
            {"slice", i},
            {"lo", tasks[i].lo},
            {"hi", tasks[i].hi},
            {"est_count", tasks[i].est}};
    if (!oc.error.empty()) {
      sj["error"] = oc.error;
      sj["converged"] = false;
    } else {
      const EigenResults& r = oc.res;
      sj["found"] = r.eigenvalues.size();
      sj["eigenvalues"] = r.eigenvalues;
      sj["residuals"] = r.residuals;
      sj["niter"] = r.niter;
      sj["converged"] = !r.hit_max_its;
      sj["counters"] = counters_json(r.counters);
      sj["times"] = times_json(r.counters);
      if (m.write_vectors) {
        const std::string bin = "vectors_" + std::to_string(i) + ".bin";
        std::ofstream os(dir / bin, std::ios::binary);
        for (int jcol = 0; jcol < r.vectors.cols(); ++jcol) {
          Vec col = r.vectors.col_vec(jcol);
          os.write(reinterpret_cast<const char*>(col.data()),
                   (std::streamsize)(col.size() * sizeof(double)));
        }
        if (!os) throw std::runtime_error("cannot write " + (dir / bin).string());
        sj["vectors"] = json{{"file", bin},
                             {"n", r.vectors.rows()},
                             {"count", r.vectors.cols()},
                             {"element", "float64"},
                             {"byte_order", "little-endian"},
                             {"layout", "column-major"}};
      }
      total_found += (long)r.eigenvalues.size();
      total_niter += r.niter;
      total_cnt += r.counters;
    }
    all_ok = all_ok && oc.ok;
    write_text((dir / ("slice_" + std::to_string(i) + ".json")).string(), sj.dump(2) + "\n");
    slices.push_back(std::move(sj));
  }

  json rep{{"schema", 1}, {"command", "solve"}};
  rep["config"] = json{{"input", m.input_json()},
                       {"interval", m.interval},
                       {"slices", m.slices},
                       {"filter", m.filter},
                       {"damping", m.damping},
                       {"poles", m.poles},
                       {"repeats", m.repeats},
                       {"solver", m.solver},
                       {"method", m.method},
                       {"tol", m.tol},
                       {"seed", m.seed},
                       {"jobs_requested", m.jobs},
                       {"jobs", jobs}};
  rep["bounds"] = json{{"lmin", bounds.lmin}, {"lmax", bounds.lmax}};
  rep["dos"] = json{{"method", m.method}, {"curve_file", (dir / "dos_curve.csv").string()}};
  rep["slices"] = slices;
  rep["totals"] = json{{"found", total_found},
                       {"niter", total_niter},
                       {"counters", counters_json(total_cnt)},
                       {"times", times_json(total_cnt)}};
  rep["converged"] = all_ok;
  rep["timings"] = json{{"t_load", t_load},
                        {"t_bounds", t_bounds},
                        {"t_dos", t_dos},
                        {"t_solve", t_solve},
                        {"t_total", seconds_since(t_start)}};
  write_text((dir / "report.json").string(), rep.dump(2) + "\n");

  if (m.format == "csv") {
    std::ostringstream os;
    os.precision(17);
    os << "slice,index,eigenvalue,residual\n";
    for (int i = 0; i < ns; ++i) {
      if (!outcomes[i].error.empty()) continue;
      const EigenResults& r = outcomes[i].res;
      for (std::size_t k = 0; k < r.eigenvalues.size(); ++k)
        os << i << "," << k << "," << r.eigenvalues[k] << "," << r.residuals[k] << "\n";
    }
    std::cout << os.str();
  } else {
    emit(rep);
  }
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectrum-slicing eigensolver pipeline"};
  app.require_subcommand(1);
  Manifest m;

  CLI::App* gen = app.add_subcommand("gen", "write a grid Laplacian as a MatrixMarket file");
  gen->add_option("--dims", m.dims, "grid dimensions d1[,d2[,d3]]")->required()->delimiter(',');
  gen->add_option("--out", m.out_dir, "output directory");

  CLI::App* bounds = app.add_subcommand("bounds", "estimate the spectral interval of A (or the pencil)");
  add_input_flags(bounds, m);
  bounds->add_option("--seed", m.seed, "random seed");

  CLI::App* dos = app.add_subcommand("dos", "estimate the spectral density and eigenvalue counts");
  add_input_flags(dos, m);
  add_dos_flags(dos, m);
  add_output_flags(dos, m);
  dos->add_option("--interval", m.interval, "count eigenvalues in LO,HI instead of the full range")
      ->delimiter(',');
  dos->add_option("--seed", m.seed, "random seed");

  CLI::App* slc = app.add_subcommand("slice", "partition an interval into balanced slices");
  add_input_flags(slc, m);
  add_dos_flags(slc, m);
  add_output_flags(slc, m);
  slc->add_option("--interval", m.interval, "target interval LO,HI")->required()->delimiter(',');
  slc->add_option("--slices", m.slices, "number of slices")->check(CLI::PositiveNumber);
  slc->add_option("--seed", m.seed, "random seed");

  CLI::App* fd = app.add_subcommand("filter-dump", "tabulate a filter curve over the spectrum");
  add_input_flags(fd, m);
  add_output_flags(fd, m);
  fd->add_option("--interval", m.interval, "target interval LO,HI")->required()->delimiter(',');
  fd->add_option("--filter", m.filter, "filter kind")->check(CLI::IsMember({"poly", "rat"}));
  fd->add_option("--damping", m.damping, "polynomial damping")
      ->check(CLI::IsMember({"sigma", "jackson", "none"}));
  fd->add_option("--poles", m.poles, "rational: distinct poles")->check(CLI::PositiveNumber);
  fd->add_option("--repeats", m.repeats, "rational: multiplicity per pole")
      ->check(CLI::PositiveNumber);
  fd->add_option("--seed", m.seed, "random seed");

  CLI::App* sol = app.add_subcommand("solve", "compute all eigenpairs in an interval");
  add_input_flags(sol, m);
  add_dos_flags(sol, m);
  add_output_flags(sol, m);
  sol->add_option("--interval", m.interval, "target interval LO,HI")->required()->delimiter(',');
  sol->add_option("--slices", m.slices, "number of slices")->check(CLI::PositiveNumber);
  sol->add_option("--filter", m.filter, "filter kind")->check(CLI::IsMember({"poly", "rat"}));
  sol->add_option("--damping", m.damping, "polynomial damping")
      ->check(CLI::IsMember({"sigma", "jackson", "none"}));
  sol->add_option("--poles", m.poles, "rational: distinct poles")->check(CLI::PositiveNumber);
  sol->add_option("--repeats", m.repeats, "rational: multiplicity per pole")
      ->check(CLI::PositiveNumber);
  sol->add_option("--solver", m.solver, "driver: non-restarted, thick-restart, or subspace iteration")
      ->check(CLI::IsMember({"nr", "tr", "si"}));
  sol->add_option("--tol", m.tol, "residual tolerance")->check(CLI::PositiveNumber);
  sol->add_option("--seed", m.seed, "random seed");
  sol->add_option("--jobs", m.jobs, "concurrent slice solves")->check(CLI::PositiveNumber);
  sol->add_flag("--vectors", m.write_vectors, "write eigenvectors as binary column blocks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(m);
    if (bounds->parsed()) return cmd_bounds(m);
    if (dos->parsed()) return cmd_dos(m);
    if (slc->parsed()) return cmd_slice(m);
    if (fd->parsed()) return cmd_filter_dump(m);
    return cmd_solve(m);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
