// Acceptance gate: end-to-end checks of the convergence rates, robustness,
// equivalence, and algebraic-identity guarantees this library makes.  Each
// criterion prints one [PASS]/[FAIL] line with the measured quantities; the
// exit code is the number of failed criteria.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "tdnns/assembly.hpp"
#include "tdnns/postprocess.hpp"
#include "tdnns/presets.hpp"

using namespace tdnns;

namespace {

int g_failures = 0;

void report(int idx, const std::string& name, bool pass, const std::string& detail) {
  std::printf("[%s] %d. %s: %s\n", pass ? "PASS" : "FAIL", idx, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(const char* pattern, ...) {
  va_list args;
  va_start(args, pattern);
  char buf[512];
  std::vsnprintf(buf, sizeof(buf), pattern, args);
  va_end(args);
  return buf;
}

/// One condensed solve of the clamped square benchmark with full diagnostics.
struct SolveRecord {
  int n = 0;
  double h = 0.0;
  double err_w = 0.0;
  double err_t = 0.0;
  bool pivots_positive = false;
  double shear_rel = 0.0;  ///< shear identity residual / problem scale
};

const TriMesh& cached_mesh(int n) {
  static std::map<int, TriMesh> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, unit_square_mesh(n)).first;
  return it->second;
}

SolveRecord run_clamped(int n, int k, double thickness) {
  ClampedSquareCase c;
  c.thickness = thickness;
  const TriMesh& mesh = cached_mesh(n);
  PlateProblem problem = c.problem(mesh, k, /*hybrid=*/true);
  problem.threads = 1;

  const CondensedSystem sys = condense(problem);
  SolveRecord rec;
  rec.n = n;
  rec.h = mesh.max_edge_length();
  rec.pivots_positive = cholesky_pivots_positive(sys.matrix);
  SolutionFields fields = solve_condensed(problem, sys);
  fields.shear = recover_shear(problem, fields);
  const ShearResidual r = shear_residual(problem, fields);
  rec.shear_rel = r.residual / r.scale;

  const Spaces spaces = make_spaces(mesh, k, true);
  rec.err_w = l2_error(spaces.deflection, fields.deflection, c.exact_deflection());
  rec.err_t = l2_error(spaces.rotation, fields.rotation, c.exact_rotation());
  return rec;
}

double final_rate_w(const std::vector<SolveRecord>& recs) {
  const SolveRecord& a = recs[recs.size() - 2];
  const SolveRecord& b = recs.back();
  return convergence_rate(a.err_w, b.err_w, a.h, b.h);
}

double final_rate_t(const std::vector<SolveRecord>& recs) {
  const SolveRecord& a = recs[recs.size() - 2];
  const SolveRecord& b = recs.back();
  return convergence_rate(a.err_t, b.err_t, a.h, b.h);
}

std::vector<double> random_coeffs(int n, std::mt19937& gen) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<double> c(n);
  for (double& v : c) v = unif(gen);
  return c;
}

}  // namespace

int main() {
  using clock = std::chrono::steady_clock;
  const auto seconds_since = [](clock::time_point start) {
    return std::chrono::duration<double>(clock::now() - start).count();
  };

  // Shared solve sweeps (criteria 1-3; reused by 5 and 7).
  std::vector<SolveRecord> all_records;

  // ---- Criterion 1: convergence at k=1, t=1e-3, n = 4..64, single thread.
  const auto t1_start = clock::now();
  std::vector<SolveRecord> k1;
  for (int n : {4, 8, 16, 32, 64}) k1.push_back(run_clamped(n, 1, 1e-3));
  const double t1_elapsed = seconds_since(t1_start);
  {
    const double rw = final_rate_w(k1), rt = final_rate_t(k1);
    const bool pass = rw >= 2.7 && rw <= 3.3 && rt >= 1.7 && rt <= 2.3 && t1_elapsed < 120.0;
    report(1, "convergence k=1",
           pass,
           fmt("rate_w=%.3f (want [2.7,3.3]), rate_theta=%.3f (want [1.7,2.3]), %.1fs < 120s",
               rw, rt, t1_elapsed));
    all_records.insert(all_records.end(), k1.begin(), k1.end());
  }

  // ---- Criterion 2: convergence at k=2, t=1e-3, n = 4..32.
  const auto t2_start = clock::now();
  std::vector<SolveRecord> k2;
  for (int n : {4, 8, 16, 32}) k2.push_back(run_clamped(n, 2, 1e-3));
  const double t2_elapsed = seconds_since(t2_start);
  {
    const double rw = final_rate_w(k2), rt = final_rate_t(k2);
    const bool pass = rw >= 3.6 && rw <= 4.4 && rt >= 2.7 && rt <= 3.3 && t2_elapsed < 180.0;
    report(2, "convergence k=2",
           pass,
           fmt("rate_w=%.3f (want [3.6,4.4]), rate_theta=%.3f (want [2.7,3.3]), %.1fs < 180s",
               rw, rt, t2_elapsed));
    all_records.insert(all_records.end(), k2.begin(), k2.end());
  }

  // ---- Criterion 3: locking-freeness across thicknesses at k=1, n = 4..32.
  {
    std::map<double, std::vector<SolveRecord>> sweeps;
    sweeps[1e-3] = {k1.begin(), k1.begin() + 4};  // reuse n = 4..32 from criterion 1
    for (double t : {1e-1, 1e-5}) {
      for (int n : {4, 8, 16, 32}) sweeps[t].push_back(run_clamped(n, 1, t));
      all_records.insert(all_records.end(), sweeps[t].begin(), sweeps[t].end());
    }
    bool rates_ok = true;
    std::string rates;
    for (const auto& [t, recs] : sweeps) {
      const double rw = final_rate_w(recs);
      rates_ok = rates_ok && rw >= 2.7 && rw <= 3.3;
      rates += fmt("%st=%.0e:%.3f", rates.empty() ? "" : " ", t, rw);
    }
    double emin = 1e300, emax = 0.0;
    for (const auto& [t, recs] : sweeps) {
      emin = std::min(emin, recs.back().err_w);
      emax = std::max(emax, recs.back().err_w);
    }
    const double spread = emax / emin;
    const bool pass = rates_ok && spread <= 3.0;
    report(3, "locking-freeness",
           pass,
           fmt("rate_w per thickness {%s} all in [2.7,3.3]; n=32 error spread %.3f <= 3",
               rates.c_str(), spread));
  }

  // ---- Criterion 4: hybrid and monolithic coefficient vectors agree.
  {
    bool pass = true;
    double worst = 0.0;
    for (int k : {1, 2}) {
      for (int n : {2, 4}) {
        ClampedSquareCase c;
        const TriMesh& mesh = cached_mesh(n);
        PlateProblem mono = c.problem(mesh, k, false);
        PlateProblem hyb = c.problem(mesh, k, true);
        mono.threads = hyb.threads = 1;
        const SolutionFields fm = solve_monolithic(mono);
        const SolutionFields fh = solve_condensed(hyb);
        double d2 = 0.0, n2 = 0.0;
        for (size_t i = 0; i < fm.rotation.size(); ++i) {
          d2 += (fm.rotation[i] - fh.rotation[i]) * (fm.rotation[i] - fh.rotation[i]);
          n2 += fm.rotation[i] * fm.rotation[i];
        }
        for (size_t i = 0; i < fm.deflection.size(); ++i) {
          d2 += (fm.deflection[i] - fh.deflection[i]) * (fm.deflection[i] - fh.deflection[i]);
          n2 += fm.deflection[i] * fm.deflection[i];
        }
        const double rel = std::sqrt(d2 / n2);
        worst = std::max(worst, rel);
        pass = pass && rel <= 1e-8;
      }
    }
    report(4, "hybrid/monolithic equivalence", pass,
           fmt("worst relative (theta,w) difference %.3e <= 1e-8 over k in {1,2}, n in {2,4}",
               worst));
  }

  // ---- Criterion 5: SPD certificate of the condensed systems.
  {
    bool pivots = true;
    for (const SolveRecord& r : all_records) pivots = pivots && r.pivots_positive;
    ClampedSquareCase c;
    PlateProblem small = c.problem(cached_mesh(2), 1, true);
    small.threads = 1;
    const double lambda_min = smallest_eigenvalue_dense(condense(small).matrix);
    const bool pass = pivots && lambda_min > 0.0;
    report(5, "SPD certificate", pass,
           fmt("all pivots positive in %zu condensed solves; lambda_min(n=2,k=1)=%.3e > 0",
               all_records.size(), lambda_min));
  }

  // ---- Criterion 6: duality product evaluated by both formulas.
  {
    std::mt19937 gen(2024);
    bool pass = true;
    double worst = 0.0;
    for (int n : {2, 4}) {
      for (int k : {1, 2}) {
        const TriMesh& mesh = cached_mesh(n);
        const FESpace msp = build_space(mesh, SpaceKind::Moment, k);
        const FESpace tsp = build_space(mesh, SpaceKind::Rotation, k);
        std::vector<ElementShapes> msh, tsh;
        for (int t = 0; t < mesh.num_triangles(); ++t) {
          msh.push_back(element_shapes(msp, t, 2 * k + 2, 2 * k + 2));
          tsh.push_back(element_shapes(tsp, t, 2 * k + 2, 2 * k + 2));
        }
        for (int trial = 0; trial < 100; ++trial) {
          const std::vector<double> tau = random_coeffs(msp.ndof, gen);
          const std::vector<double> eta = random_coeffs(tsp.ndof, gen);
          double f1 = 0.0, f2 = 0.0;
          for (int t = 0; t < mesh.num_triangles(); ++t) {
            std::vector<double> tl(msh[t].nloc), el(tsh[t].nloc);
            for (int i = 0; i < msh[t].nloc; ++i) tl[i] = tau[msh[t].dofs[i]];
            for (int i = 0; i < tsh[t].nloc; ++i) el[i] = eta[tsh[t].dofs[i]];
            f1 += duality_product_element(msh[t], tsh[t], tl, el);
            f2 += duality_product_element_divform(msh[t], tsh[t], tl, el);
          }
          const double rel = std::abs(f1 - f2) / std::max(std::abs(f1), std::abs(f2));
          worst = std::max(worst, rel);
          pass = pass && rel <= 1e-12;
        }
      }
    }
    report(6, "duality-product oracle", pass,
           fmt("worst relative gap %.3e <= 1e-12 over 100 pairs x {n,k} in {2,4}x{1,2}", worst));
  }

  // ---- Criterion 7: shear constitutive identity for every sweep solve.
  {
    double worst = 0.0;
    for (const SolveRecord& r : all_records) worst = std::max(worst, r.shear_rel);
    report(7, "shear identity", worst <= 1e-12,
           fmt("worst residual/scale %.3e <= 1e-12 over %zu solves", worst,
               all_records.size()));
  }

  // ---- Criterion 8: gradient inclusion grad W_h subset Theta_h.
  {
    std::mt19937 gen(4096);
    bool pass = true;
    double worst = 0.0;
    for (int n : {2, 4}) {
      for (int k = 1; k <= 4; ++k) {
        const TriMesh& mesh = cached_mesh(n);
        const FESpace wsp = build_space(mesh, SpaceKind::Deflection, k + 1);
        const FESpace tsp = build_space(mesh, SpaceKind::Rotation, k);
        std::vector<ElementShapes> wsh, tsh;
        for (int t = 0; t < mesh.num_triangles(); ++t) {
          wsh.push_back(element_shapes(wsp, t, 2 * k + 2, 2 * k + 2));
          tsh.push_back(element_shapes(tsp, t, 2 * k + 2, 2 * k + 2));
        }
        for (int trial = 0; trial < 100; ++trial) {
          const std::vector<double> wc = random_coeffs(wsp.ndof, gen);
          const std::vector<double> gc = interpolate_gradient(wsp, tsp, wc);
          double residual = 0.0, scale = 1e-300;
          for (int t = 0; t < mesh.num_triangles(); ++t) {
            for (size_t q = 0; q < wsh[t].points.size(); ++q) {
              Vec2 grad{0.0, 0.0}, val{0.0, 0.0};
              for (int i = 0; i < wsh[t].nloc; ++i)
                grad += wc[wsh[t].dofs[i]] * wsh[t].grad(q, i);
              for (int j = 0; j < tsh[t].nloc; ++j)
                val += gc[tsh[t].dofs[j]] * Vec2{tsh[t].value(q, j, 0), tsh[t].value(q, j, 1)};
              residual =
                  std::max({residual, std::abs(grad.x - val.x), std::abs(grad.y - val.y)});
              scale = std::max({scale, std::abs(grad.x), std::abs(grad.y)});
            }
          }
          const double rel = residual / scale;
          worst = std::max(worst, rel);
          pass = pass && rel <= 1e-12;
        }
      }
    }
    report(8, "gradient inclusion", pass,
           fmt("worst relative residual %.3e <= 1e-12 over 100 fields x {n,k} in {2,4}x{1..4}",
               worst));
  }

  // ---- Criterion 9: exact-solution spot values.
  {
    bool pass = true;
    std::string detail;
    for (double t : {1e-3, 1e-1, 1.0}) {
      ClampedSquareCase c;
      c.thickness = t;
      const double got = c.exact_deflection()({0.5, 0.5});
      const double want = 1.0 / 12288.0 + t * t / 1280.0;  // = 8.138020833e-5 + 7.8125e-4 t^2
      const Vec2 th = c.exact_rotation()({0.5, 0.5});
      const bool ok = std::abs(got - want) <= 1e-12 * std::abs(want) && th.x == 0.0;
      pass = pass && ok;
      if (t == 1e-3)
        detail = fmt("theta1(0.5,0.5)=%g (exact 0), w(0.5,0.5) rel err %.3e <= 1e-12", th.x,
                     std::abs(got - want) / std::abs(want));
    }
    report(9, "exact-solution spot checks", pass, detail);
  }

  std::printf("%d of 9 criteria passed\n", 9 - g_failures);
  return g_failures;
}
