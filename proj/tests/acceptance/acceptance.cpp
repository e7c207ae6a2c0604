// Acceptance checks. Prints one PASS/FAIL line per criterion, preceded by
// indented detail lines. `acceptance N` runs criterion N only; no argument
// runs all of them. The exit status is nonzero when any selected criterion
// fails.

#include "bottleneck/cli.hpp"
#include "bottleneck/critical.hpp"
#include "bottleneck/dual_solver.hpp"
#include "bottleneck/error_exp.hpp"
#include "bottleneck/expfam.hpp"
#include "bottleneck/problem_io.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace bottleneck;
namespace fs = std::filesystem;

namespace {

const GridSpec kD1Grid{0.25, 64.0, 400, Spacing::Log};

#ifndef ACCEPTANCE_DATA_DIR
#define ACCEPTANCE_DATA_DIR "data"
#endif

class Report {
 public:
  void detail(const std::string& line) { std::cout << "    " << line << "\n"; }
  // Records a sub-check and prints it.
  bool check(bool ok, const std::string& what) {
    detail(std::string(ok ? "ok   " : "FAIL ") + what);
    all_ &= ok;
    return ok;
  }
  bool passed() const { return all_; }

 private:
  bool all_ = true;
};

std::string fmt(double v, int precision = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

const JointDistribution& d1() {
  static const JointDistribution j = test_support::table_d1();
  return j;
}

const SweepResult& d1_sweep(Framework fw) {
  static std::map<Framework, SweepResult> cache;
  auto it = cache.find(fw);
  if (it == cache.end()) it = cache.emplace(fw, sweep(d1(), fw, kD1Grid)).first;
  return it->second;
}

const CriticalPointReport& d1_critical(Framework fw) {
  static std::map<Framework, CriticalPointReport> cache;
  auto it = cache.find(fw);
  if (it == cache.end()) {
    it = cache.emplace(fw, find_critical_points(d1(), d1_sweep(fw), kD1Grid.betas())).first;
  }
  return it->second;
}

std::string betas_of(const CriticalPointReport& r) {
  std::string s;
  for (const auto& p : r.points) s += (s.empty() ? "" : ", ") + fmt(p.beta_c, 7);
  return s.empty() ? "none" : s;
}

// ---------------------------------------------------------------------------

bool criterion1(Report& rep) {
  const Framework fws[] = {Framework::IB, Framework::DualIB};
  for (Framework fw : fws) {
    const AnnealTrace& t = d1_sweep(fw).trace;
    std::vector<std::size_t> counts;
    bool nondecreasing = true;
    for (const auto& r : t.records) {
      if (!counts.empty() && r.effective_clusters < counts.back()) nondecreasing = false;
      if (counts.empty() || r.effective_clusters != counts.back()) counts.push_back(r.effective_clusters);
    }
    std::string seq;
    for (auto c : counts) seq += (seq.empty() ? "" : "->") + std::to_string(c);
    rep.check(nondecreasing && counts.front() == 1 && counts.back() == 5,
              std::string("(a) ") + std::string(to_string(fw)) + " cluster count " + seq);
  }

  {
    const AnnealRecord& last = d1_sweep(Framework::IB).trace.records.back();
    double worst = std::numeric_limits<double>::infinity();
    if (last.decoder.rows() == 5) {
      // canonical order is ascending in p(y0|xhat), as is the table
      worst = 0.0;
      for (Index k = 0; k < 5; ++k) {
        worst = std::max(worst, std::abs(last.decoder(k, 0) - golden::kTableY0[k]));
      }
    }
    std::string rows;
    for (Index k = 0; k < last.decoder.rows(); ++k) rows += (rows.empty() ? "" : ", ") + fmt(last.decoder(k, 0), 5);
    rep.detail("IB p(y0|xhat) at beta = 64: " + rows);
    {
      // diagnostic: carry the anneal on to beta = 128 on the same log spacing
      const SweepResult& sw = d1_sweep(Framework::IB);
      const std::vector<double> grid = kD1Grid.betas();
      const double ratio = grid[grid.size() - 1] / grid[grid.size() - 2];
      BottleneckState state = sw.states.back();
      double beta = grid.back();
      std::size_t step = grid.size();
      while (beta < 128.0) {
        beta = std::min(128.0, beta * ratio);
        state = anneal_step(d1(), Framework::IB, beta, state, SplitConfig{}, step_seed(0, step++),
                            {1e-10, 200000, false})
                    .merged;
      }
      double dev = std::numeric_limits<double>::infinity();
      if (state.live_clusters() == 5) {
        dev = 0.0;
        for (Index k = 0; k < 5; ++k) dev = std::max(dev, std::abs(state.decoder(k, 0) - golden::kTableY0[k]));
      }
      rep.detail("continuing the IB anneal to beta = 128 gives max deviation " + fmt(dev, 3));
    }
    rep.check(worst <= 1e-3, "(b) IB decoder rows at beta_max within 1e-3 of the table: max deviation " + fmt(worst, 3));
  }

  const CriticalPointReport& ib = d1_critical(Framework::IB);
  const CriticalPointReport& du = d1_critical(Framework::DualIB);
  rep.detail("IB critical points:   " + betas_of(ib));
  rep.detail("dual critical points: " + betas_of(du));
  const std::size_t pairs = std::min(ib.points.size(), du.points.size());
  bool below = pairs > 0, interleave = pairs > 0;
  for (std::size_t i = 0; i < pairs; ++i) {
    const double b_dual = du.points[i].beta_c, b_ib = ib.points[i].beta_c;
    if (!(b_dual < b_ib)) {
      below = false;
      rep.detail("pair " + std::to_string(i + 1) + ": dual " + fmt(b_dual, 7) + " is not below IB " + fmt(b_ib, 7));
    }
    if (!(b_dual <= b_ib)) interleave = false;
    if (i + 1 < du.points.size() && !(b_ib <= du.points[i + 1].beta_c)) interleave = false;
  }
  rep.check(below, "(c) every detected dual critical point lies strictly below its IB partner");
  rep.check(interleave, "(c) dual_i <= IB_i <= dual_{i+1} for all detected pairs");
  return rep.passed();
}

// ---------------------------------------------------------------------------

struct SuiteState {
  JointDistribution joint;
  BottleneckState ib;
  BottleneckState dual;
};

const std::vector<SuiteState>& suite2_states() {
  static std::vector<SuiteState> states = [] {
    std::vector<SuiteState> out;
    std::mt19937_64 rng(20240601);
    std::uniform_int_distribution<int> nx(2, 8), ny(2, 4);
    std::uniform_real_distribution<double> logb(std::log(0.5), std::log(40.0));
    for (int p = 0; p < 50; ++p) {
      const Index n_x = nx(rng), n_y = ny(rng);
      const JointDistribution j = test_support::random_joint(1000 + static_cast<std::uint64_t>(p), n_x, n_y);
      const double beta = std::exp(logb(rng));
      const std::uint64_t seed = rng();
      const SolveReport ib = ib_solve(j, beta, random_state(j, Framework::IB, beta, n_x, seed), {1e-12, 200000, false});
      const SolveReport du =
          dual_solve(j, beta, random_state(j, Framework::DualIB, beta, n_x, seed), {1e-12, 200000, false});
      out.push_back({j, ib.state, du.state});
    }
    return out;
  }();
  return states;
}

bool criterion2(Report& rep) {
  double ib_err = 0.0, decomp_err = 0.0, min_term_b = std::numeric_limits<double>::infinity(), logz_err = 0.0;
  for (const auto& s : suite2_states()) {
    const double lhs = expected_ib_distortion(s.ib, s.joint);
    const double rhs = s.joint.mutual_information() - label_information(s.joint, s.ib.encoder.rows());
    ib_err = std::max(ib_err, std::abs(lhs - rhs));
    const DualDecomposition d = dual_decomposition(s.dual, s.joint);
    decomp_err = std::max(decomp_err, std::abs(d.expected_distortion - (d.term_a + d.term_b)));
    min_term_b = std::min(min_term_b, d.term_b);
    const Vector logz = decoder_log_partition(s.dual, s.joint);
    logz_err = std::max(logz_err, std::abs(expected_dual_distortion(s.dual, s.joint) + s.dual.marginal.dot(logz)));
  }
  rep.detail("50 problems, n_x in [2, 8], n_y in [2, 4], beta log-uniform in [0.5, 40]");
  rep.check(ib_err <= 1e-9, "E[d_IB] = I(X;Y) - I(Y;Xhat): max error " + fmt(ib_err, 3));
  rep.check(decomp_err <= 1e-9, "E[d_dual] = term_a + term_b: max error " + fmt(decomp_err, 3));
  rep.check(min_term_b >= -1e-12, "term_b >= -1e-12: min " + fmt(min_term_b, 3));
  rep.check(logz_err <= 1e-9, "E[d_dual] = -E[log Z_{y|xhat}] at dual fixed points: max error " + fmt(logz_err, 3));
  return rep.passed();
}

// ---------------------------------------------------------------------------

// Largest distance from a nonzero eigenvalue of one spectrum to the nearest
// eigenvalue of the other, both directions.
double nonzero_spectrum_gap(const Spectrum& a, const Spectrum& b, double zero) {
  auto one_way = [zero](const Spectrum& from, const Spectrum& to) {
    double worst = 0.0;
    for (const auto& e : from.eigenvalues) {
      if (std::abs(e) <= zero) continue;
      double best = std::numeric_limits<double>::infinity();
      for (const auto& f : to.eigenvalues) best = std::min(best, std::abs(e - f));
      worst = std::max(worst, best / std::max(1.0, std::abs(e)));
    }
    return worst;
  };
  return std::max(one_way(a, b), one_way(b, a));
}

bool criterion3(Report& rep) {
  double lambda1 = 0.0, spectra = 0.0, binary = 0.0;
  std::size_t clusters = 0, binary_clusters = 0;
  for (const auto& s : suite2_states()) {
    for (const BottleneckState* st : {&s.ib, &s.dual}) {
      for (Index k = 0; k < st->clusters(); ++k) {
        const auto m = build_matrices(*st, s.joint, k);
        if (!m) continue;
        ++clusters;
        const Spectrum sy = spectrum(m->c_yy);
        const Spectrum sx = spectrum(m->c_xx);
        lambda1 = std::max(lambda1, std::abs(sy.lambda1));
        spectra = std::max(spectra, nonzero_spectrum_gap(sx, sy, 1e-7));
        if (st->framework == Framework::DualIB && s.joint.n_y() == 2) {
          const auto b = build_dual_matrices_binary(*st, s.joint, k);
          binary = std::max({binary, (b->c_xx - m->c_xx).cwiseAbs().maxCoeff(),
                             (b->c_yy - m->c_yy).cwiseAbs().maxCoeff()});
          ++binary_clusters;
        }
      }
    }
  }
  rep.detail(std::to_string(clusters) + " live clusters, " + std::to_string(binary_clusters) + " binary dual clusters");
  rep.check(lambda1 <= 1e-8, "lambda1 = 0: max |lambda1| " + fmt(lambda1, 3));
  rep.check(spectra <= 1e-8, "C_xx and C_yy nonzero spectra agree: max gap " + fmt(spectra, 3));
  rep.check(binary_clusters > 0 && binary <= 1e-10,
            "binary simplified dual matrices equal the general ones: max diff " + fmt(binary, 3));
  return rep.passed();
}

// ---------------------------------------------------------------------------

bool criterion4(Report& rep) {
  constexpr double kDelta = 0.02;
  const SplitConfig split{};
  const SolveOptions options{1e-10, 200000, false};
  for (Framework fw : {Framework::IB, Framework::DualIB}) {
    const std::string name(to_string(fw));
    const SweepResult& sw = d1_sweep(fw);
    const CriticalPointReport& cr = d1_critical(fw);
    std::vector<std::size_t> iters;
    for (const auto& r : sw.trace.records) iters.push_back(r.iterations);
    std::nth_element(iters.begin(), iters.begin() + static_cast<long>(iters.size() / 2), iters.end());
    const double median = static_cast<double>(iters[iters.size() / 2]);
    rep.detail(name + ": sweep median iterations " + fmt(median));
    rep.check(!cr.points.empty(), name + ": critical points detected (" + std::to_string(cr.points.size()) + ")");
    for (const auto& p : cr.points) {
      const std::string tag = name + " beta_c = " + fmt(p.beta_c, 8);
      rep.check(std::abs(p.beta_c * p.lambda2 - 1.0) <= 1e-6,
                tag + ": |beta_c lambda2 - 1| = " + fmt(std::abs(p.beta_c * p.lambda2 - 1.0), 3));
      const std::size_t at = sw.trace.records[p.grid_index].iterations;
      rep.check(static_cast<double>(at) >= 3.0 * median,
                tag + ": iterations at nearest grid beta " + std::to_string(at) + " vs 3 x median");
      // anneal from the last sweep state at or below beta_c (1 - delta)
      const double lo = p.beta_c * (1.0 - kDelta), hi = p.beta_c * (1.0 + kDelta);
      const std::vector<double>& grid = d1_critical(fw).grid;
      std::size_t start = 0;
      while (start + 1 < grid.size() && grid[start + 1] <= lo) ++start;
      const AnnealStep below = anneal_step(d1(), fw, lo, sw.states[start], split, step_seed(split.seed, 100000), options);
      const AnnealStep above = anneal_step(d1(), fw, hi, below.merged, split, step_seed(split.seed, 100001), options);
      const Index c_lo = below.merged.live_clusters(), c_hi = above.merged.live_clusters();
      rep.check(c_lo != c_hi, tag + ": clusters " + std::to_string(c_lo) + " at beta_c(1-0.02), " +
                                  std::to_string(c_hi) + " at beta_c(1+0.02)");
    }
  }
  return rep.passed();
}

// ---------------------------------------------------------------------------

struct Curve {
  std::vector<double> beta, i_x, i_y;
};

Curve curve_of(const AnnealTrace& t) {
  Curve c;
  for (const auto& r : t.records) {
    c.beta.push_back(r.beta);
    c.i_x.push_back(r.i_x);
    c.i_y.push_back(r.i_y);
  }
  return c;
}

struct SecantResult {
  double violation = 0.0;
  std::size_t worst = 0;  // record index of the worst point
};

// Worst violation of "every point lies on or above the chord between any two
// points bracketing it in I_x".
SecantResult secant_violation(const Curve& c) {
  std::vector<std::size_t> idx(c.i_x.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return c.i_x[a] < c.i_x[b]; });
  SecantResult r;
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = a + 2; b < idx.size(); ++b) {
      const double x0 = c.i_x[idx[a]], x1 = c.i_x[idx[b]];
      if (x1 - x0 <= 0.0) continue;
      const double y0 = c.i_y[idx[a]], y1 = c.i_y[idx[b]];
      for (std::size_t m = a + 1; m < b; ++m) {
        const double t = (c.i_x[idx[m]] - x0) / (x1 - x0);
        const double v = y0 + t * (y1 - y0) - c.i_y[idx[m]];
        if (v > r.violation) {
          r.violation = v;
          r.worst = idx[m];
        }
      }
    }
  }
  return r;
}

bool criterion5(Report& rep) {
  std::vector<std::pair<std::string, AnnealTrace>> sweeps;
  for (Framework fw : {Framework::IB, Framework::DualIB}) {
    sweeps.emplace_back("D1 " + std::string(to_string(fw)), d1_sweep(fw).trace);
  }
  for (std::uint64_t seed : {1, 2, 3}) {
    const JointDistribution j = test_support::random_joint(500 + seed, 6, 3);
    for (Framework fw : {Framework::IB, Framework::DualIB}) {
      sweeps.emplace_back("random#" + std::to_string(seed) + " " + std::string(to_string(fw)),
                          sweep(j, fw, GridSpec{0.25, 64.0, 150, Spacing::Log}).trace);
    }
  }
  double mono = 0.0;
  for (const auto& [name, t] : sweeps) {
    const Curve c = curve_of(t);
    for (std::size_t i = 1; i < c.beta.size(); ++i) {
      mono = std::max({mono, c.i_x[i - 1] - c.i_x[i], c.i_y[i - 1] - c.i_y[i]});
    }
    if (t.framework == Framework::IB && name.rfind("D1", 0) != 0) {
      rep.detail(name + ": secant violation " + fmt(secant_violation(c).violation, 3) + " (not gated)");
    }
  }
  rep.detail(std::to_string(sweeps.size()) + " sweeps (D1 on 400 points, three random 6x3 rules on 150)");
  rep.check(mono <= 1e-9, "I_x, I_y non-decreasing in beta: worst drop " + fmt(mono, 3));

  const SweepResult& ib_sweep = d1_sweep(Framework::IB);
  const SecantResult sec = secant_violation(curve_of(ib_sweep.trace));
  if (sec.violation > 1e-7 && sec.worst + 1 < ib_sweep.states.size()) {
    // Is the annealed point the optimum? Re-solve at the same beta from the
    // next record, which may carry more clusters.
    const AnnealRecord& at = ib_sweep.trace.records[sec.worst];
    const SolveReport back = solve(d1(), Framework::IB, at.beta, ib_sweep.states[sec.worst + 1], {1e-13, 2000000, false});
    const BottleneckState merged = merge_clusters(back.state, d1(), 1e-4);
    rep.detail("worst point beta = " + fmt(at.beta, 7) + " (" + std::to_string(at.effective_clusters) +
               " clusters, F = " + fmt(at.functional, 12) + "); solving there from the next record gives " +
               std::to_string(merged.live_clusters()) + " clusters, F = " + fmt(ib_functional(back.state, d1()), 12));
  }
  rep.check(sec.violation <= 1e-7, "D1 IB information curve passes the secant test: worst violation " +
                                       fmt(sec.violation, 3));

  // dual under IB on the shared D1 grid
  const Curve ib = curve_of(d1_sweep(Framework::IB).trace);
  const Curve du = curve_of(d1_sweep(Framework::DualIB).trace);
  double envelope = 0.0, pointwise = 0.0;
  std::size_t pointwise_bad = 0;
  for (std::size_t i = 0; i < du.beta.size(); ++i) {
    // tangent lines of the concave IB curve have slope 1 / beta
    double bound = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < ib.beta.size(); ++k) {
      bound = std::min(bound, ib.i_y[k] + (du.i_x[i] - ib.i_x[k]) / ib.beta[k]);
    }
    envelope = std::max(envelope, du.i_y[i] - bound);
    const double diff = du.i_y[i] - ib.i_y[i];
    pointwise = std::max(pointwise, diff);
    if (diff > 1e-9) ++pointwise_bad;
  }
  rep.detail("same-beta comparison: dual I_y exceeds IB I_y at " + std::to_string(pointwise_bad) +
             " grid points, by at most " + fmt(pointwise, 3));
  rep.check(envelope <= 1e-9, "dual (I_x, I_y) on or below the IB curve's upper envelope: worst excess " +
                                  fmt(envelope, 3));

  std::vector<double> gap(ib.beta.size());
  for (std::size_t i = 0; i < gap.size(); ++i) gap[i] = std::abs(ib.i_y[i] - du.i_y[i]);
  const CriticalPointReport& dc = d1_critical(Framework::DualIB);
  std::size_t minima = 0, unmatched = 0;
  for (std::size_t i = 1; i + 1 < gap.size(); ++i) {
    if (!(gap[i] < gap[i - 1] - 1e-12 && gap[i] < gap[i + 1] - 1e-12)) continue;
    ++minima;
    bool near = false;
    for (const auto& p : dc.points) near |= p.beta_c >= ib.beta[i - 1] && p.beta_c <= ib.beta[i + 1];
    if (!near) {
      ++unmatched;
      rep.detail("gap minimum at beta = " + fmt(ib.beta[i], 6) + " (gap " + fmt(gap[i], 3) +
                 ") has no dual critical point within one grid step");
    }
  }
  rep.check(minima > 0 && unmatched == 0, "each local gap minimum is within one grid step of a dual critical point (" +
                                              std::to_string(minima) + " minima, " + std::to_string(unmatched) +
                                              " unmatched)");
  double rise = 0.0;
  double rise_at = 0.0;
  for (std::size_t i = 1; i < gap.size(); ++i) {
    if (ib.beta[i - 1] < 6.4) continue;
    if (gap[i] - gap[i - 1] > rise) {
      rise = gap[i] - gap[i - 1];
      rise_at = ib.beta[i];
    }
  }
  rep.check(rise <= 1e-12, "gap shrinks monotonically over beta in [6.4, 64]: largest rise " + fmt(rise, 3) +
                               (rise > 0.0 ? " at beta = " + fmt(rise_at, 6) : std::string()));
  return rep.passed();
}

// ---------------------------------------------------------------------------

bool criterion6(Report& rep) {
  std::vector<std::pair<std::string, JointDistribution>> problems{{"D1", d1()}};
  for (std::uint64_t s = 0; s < 20; ++s) {
    problems.emplace_back("binary#" + std::to_string(s), test_support::random_joint(7000 + s, 3 + s % 6, 2));
  }
  const std::vector<double> grid = GridSpec{0.25, 64.0, 50, Spacing::Log}.betas();
  const SolveOptions options{1e-12, 200000, false};
  double worst = 0.0, ix_closed = 0.0, idec_closed = 0.0;
  std::size_t unconverged = 0;
  for (const auto& [name, joint] : problems) {
    const ExpFamilyModel model = from_conditional(joint);
    const JointDistribution rebuilt = model.to_joint();
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Matrix init = random_state(rebuilt, Framework::DualIB, grid[i], rebuilt.n_x(), 31 + i).encoder.rows();
      const ExpSolveReport e = exp_solve(model, grid[i], init, options);
      const SolveReport d = dual_solve(rebuilt, grid[i], make_state(rebuilt, Framework::DualIB, grid[i], init), options);
      if (!e.converged || !d.converged) ++unconverged;
      worst = std::max({worst, std::abs(e.i_x - d.i_x), std::abs(e.i_y - d.i_y)});
      const ExpInformation info = exp_information(e.state, model);
      ix_closed = std::max(ix_closed, std::abs(info.i_x_closed - info.i_x_direct));
      idec_closed = std::max(idec_closed, std::abs(info.i_dec_closed - info.i_dec_direct));
    }
  }
  rep.detail(std::to_string(problems.size()) + " problems x 50 beta values, " + std::to_string(unconverged) +
             " unconverged solves");
  rep.check(worst <= 1e-6, "exp_solve matches dual_solve in (I_x, I_y): max diff " + fmt(worst, 3));
  rep.check(ix_closed <= 1e-8, "closed-form I(X;Xhat): max diff " + fmt(ix_closed, 3));
  rep.check(idec_closed <= 1e-8, "closed-form decoder information: max diff " + fmt(idec_closed, 3));
  return rep.passed();
}

// ---------------------------------------------------------------------------

bool criterion7(Report& rep) {
  std::mt19937_64 rng(77);
  std::gamma_distribution<double> gamma(1.0, 1.0);
  std::uniform_int_distribution<int> dim(2, 10);
  double grid_gap = 0.0, equidistance = 0.0, better = 0.0;
  for (int p = 0; p < 100; ++p) {
    const int n = dim(rng);
    Vector p0(n), p1(n);
    for (int i = 0; i < n; ++i) {
      p0(i) = gamma(rng) + 1e-3;
      p1(i) = gamma(rng) + 1e-3;
    }
    p0 /= p0.sum();
    p1 /= p1.sum();
    const ChernoffResult c = chernoff_information(p0, p1);
    double grid_best = 0.0;
    for (int k = 1; k <= 999; ++k) {
      const double lam = k / 1000.0;
      const double g = std::log((p0.array().pow(lam) * p1.array().pow(1.0 - lam)).sum());
      grid_best = std::max(grid_best, -g);
    }
    grid_gap = std::max(grid_gap, std::abs(c.exponent - grid_best));
    better = std::max(better, grid_best - c.exponent);
    const Vector pl = geometric_interpolation(p0, p1, c.lambda_star);
    equidistance = std::max(equidistance, std::abs(kl_divergence(pl, p0) - kl_divergence(pl, p1)));
  }
  rep.check(grid_gap <= 1e-6, "golden section vs 999-point grid: max diff " + fmt(grid_gap, 3));
  rep.check(better <= 1e-12, "golden section is never worse than the grid: worst " + fmt(better, 3));
  rep.check(equidistance <= 1e-5, "D[p* || p0] = D[p* || p1]: max diff " + fmt(equidistance, 3));
  double sym = 0.0;
  for (double a : {0.01, 0.1, 0.2, 0.3, 0.45, 0.49}) {
    Vector p0(2), p1(2);
    p0 << a, 1.0 - a;
    p1 << 1.0 - a, a;
    sym = std::max(sym, std::abs(chernoff_information(p0, p1).exponent + std::log(2.0 * std::sqrt(a * (1.0 - a)))));
  }
  rep.check(sym <= 1e-9, "symmetric pairs match -log(2 sqrt(a(1-a))): max diff " + fmt(sym, 3));
  return rep.passed();
}

// ---------------------------------------------------------------------------

double r_squared(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxx > 0.0 && syy > 0.0 ? sxy * sxy / (sxx * syy) : 0.0;
}

bool criterion8(Report& rep) {
  const Problem loaded = load_problem(fs::path(ACCEPTANCE_DATA_DIR) / "m8.json");
  const ClassificationProblem& problem = std::get<ClassificationProblem>(loaded);
  ExperimentConfig cfg;
  cfg.seed = 7;
  const ExperimentResult res = run_prediction_experiment(problem, cfg);
  const std::size_t nb = cfg.betas.size(), nn = cfg.n_values.size();
  auto curve = [&](Framework fw, std::size_t b) -> const ErrorCurve& {
    return res.curves[(fw == Framework::IB ? 0 : nb) + b];
  };

  std::ostringstream table;
  table << "n    mean p_err IB / dual";
  rep.detail(table.str());
  bool ordered = true;
  for (std::size_t s = 0; s < nn; ++s) {
    double m_ib = 0.0, m_du = 0.0, h_ib = 0.0, h_du = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      m_ib += curve(Framework::IB, b).p_err[s] / static_cast<double>(nb);
      m_du += curve(Framework::DualIB, b).p_err[s] / static_cast<double>(nb);
      h_ib += curve(Framework::IB, b).ci_halfwidth[s] / static_cast<double>(nb);
      h_du += curve(Framework::DualIB, b).ci_halfwidth[s] / static_cast<double>(nb);
    }
    const bool ok = m_du <= m_ib + h_ib + h_du;
    ordered &= ok;
    rep.detail(std::to_string(cfg.n_values[s]) + "    " + fmt(m_ib, 4) + " / " + fmt(m_du, 4) + (ok ? "" : "  <-"));
  }
  rep.check(ordered, "mean-over-beta p_err(dual) <= p_err(IB) within CI overlap at every n");

  bool coincide = true;
  for (std::size_t s = 0; s < nn; ++s) {
    const ErrorCurve& a = curve(Framework::IB, nb - 1);
    const ErrorCurve& b = curve(Framework::DualIB, nb - 1);
    coincide &= std::abs(a.p_err[s] - b.p_err[s]) <= a.ci_halfwidth[s] + b.ci_halfwidth[s];
  }
  rep.check(coincide, "at log2 beta = 6 the two curves coincide within CI");

  const std::size_t top = nn / 2;  // top half of the n values
  double worst_r2 = 1.0;
  std::size_t fitted = 0;
  for (const auto& c : res.curves) {
    std::vector<double> x, y;
    double lo = 1.0, hi = 0.0, hw = 0.0;
    for (std::size_t s = top; s < nn; ++s) {
      lo = std::min(lo, c.p_err[s]);
      hi = std::max(hi, c.p_err[s]);
      hw = std::max(hw, c.ci_halfwidth[s]);
      if (c.p_err[s] <= 0.0) continue;
      x.push_back(static_cast<double>(c.n_values[s]));
      y.push_back(std::log(c.p_err[s]));
    }
    const std::string tag = std::string(to_string(c.framework)) + " log2 beta = " + fmt(std::log2(c.beta));
    if (hi - lo <= 2.0 * hw) {
      rep.detail(tag + ": flat within CI over the top half (p_err " + fmt(lo, 3) + ".." + fmt(hi, 3) + "), not fitted");
      continue;
    }
    if (x.size() < 3) {
      rep.detail(tag + ": fewer than 3 nonzero points, not fitted");
      continue;
    }
    const double r2 = r_squared(x, y);
    ++fitted;
    worst_r2 = std::min(worst_r2, r2);
    rep.detail(tag + ": R^2 = " + fmt(r2, 4));
  }
  rep.check(fitted > 0 && worst_r2 >= 0.9,
            "log p_err linear in n over the top half: worst R^2 " + fmt(worst_r2, 4) + " over " + std::to_string(fitted) +
                " curves");

  double excess = -std::numeric_limits<double>::infinity();
  std::size_t states = 0;
  const JointDistribution joint = problem.joint();
  for (const auto& e : res.encoders) {
    if (e.framework != Framework::DualIB || !e.converged) continue;
    const ExponentBound b = mean_exponent_bound(e.state, joint);
    excess = std::max(excess, b.bound - b.dual_functional);
    ++states;
  }
  rep.check(states > 0 && excess <= 1e-9, "mean exponent bound <= F* at " + std::to_string(states) +
                                              " converged dual states: max excess " + fmt(excess, 3));
  return rep.passed();
}

// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

bool criterion9(Report& rep) {
  const fs::path root = fs::temp_directory_path() / "bottleneck_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string d1_path = (fs::path(ACCEPTANCE_DATA_DIR) / "appendixD1.json").string();
  const std::string m8_path = (fs::path(ACCEPTANCE_DATA_DIR) / "m8.json").string();
  const std::vector<std::vector<std::string>> commands{
      {"solve", "--problem", d1_path, "--beta", "7.5", "--seed", "3"},
      {"sweep", "--problem", d1_path, "--framework", "both", "--beta-grid", "log:0.25:64:400"},
      {"critical", "--problem", d1_path, "--beta-grid", "log:0.25:64:200"},
      {"expfam", "--problem", d1_path, "--beta-grid", "log:0.25:64:50"},
      {"error-exp", "--classes", m8_path, "--trials", "10000", "--seed", "7"},
      {"make-classes", "--count", "8", "--n-x", "16", "--seed", "7"}};
  for (const auto& cmd : commands) {
    std::map<std::string, std::string> first;
    bool same = true, ran = true;
    for (int pass = 0; pass < 2; ++pass) {
      const fs::path out = root / cmd[0];
      fs::remove_all(out);
      std::vector<std::string> args{"bottleneck_lab"};
      args.insert(args.end(), cmd.begin(), cmd.end());
      if (cmd[0] == "make-classes") {
        fs::create_directories(out);
        args.insert(args.end(), {"--output", (out / "classes.json").string()});
      } else {
        args.insert(args.end(), {"--output-dir", out.string()});
      }
      std::vector<const char*> argv;
      for (const auto& a : args) argv.push_back(a.c_str());
      std::ostringstream sink_out, sink_err;
      ran &= cli::run(static_cast<int>(argv.size()), argv.data(), sink_out, sink_err) == 0;
      for (const auto& entry : fs::directory_iterator(out)) {
        const std::string name = entry.path().filename().string();
        if (pass == 0) {
          first[name] = slurp(entry.path());
        } else {
          same &= first.count(name) == 1 && first[name] == slurp(entry.path());
        }
      }
    }
    std::string files;
    for (const auto& [name, body] : first) files += (files.empty() ? "" : ", ") + name;
    rep.check(ran && same && !first.empty(), cmd[0] + ": " + files);
  }
  return rep.passed();
}

struct Criterion {
  int id;
  std::string title;
  double budget_seconds;
  std::function<bool(Report&)> body;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "five-row table reproduction", 60.0, criterion1},
      {2, "identity suite", 5.0, criterion2},
      {3, "eigenstructure suite", 10.0, criterion3},
      {4, "critical-point cross-validation", 60.0, criterion4},
      {5, "information-plane properties", 30.0, criterion5},
      {6, "exponential-family equivalence", 30.0, criterion6},
      {7, "Chernoff suite", 5.0, criterion7},
      {8, "error-exponent experiment", 600.0, criterion8},
      {9, "determinism", 600.0, criterion9},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  bool all = true;
  for (const auto& c : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    Report rep;
    const auto start = std::chrono::steady_clock::now();
    bool ok = false;
    try {
      ok = c.body(rep);
    } catch (const std::exception& e) {
      rep.detail(std::string("exception: ") + e.what());
      ok = false;
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds <= c.budget_seconds;
    if (!in_time) rep.detail("over the " + fmt(c.budget_seconds) + " s budget");
    ok &= in_time;
    char line[160];
    std::snprintf(line, sizeof line, "%s criterion %d: %s (%.2f s)", ok ? "PASS" : "FAIL", c.id, c.title.c_str(),
                  seconds);
    std::cout << line << std::endl;
    all &= ok;
  }
  return all ? 0 : 1;
}
