#include "prasp/linsys.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace prasp {

namespace {

constexpr double kEpsStrict = 1e-9;  // relaxation of strict positivity

bool unbounded_lo(double v) { return v <= -kUnboundedRow / 2; }
bool unbounded_hi(double v) { return v >= kUnboundedRow / 2; }

// ------------------------------------------------- symmetric eigen machinery

// Cyclic Jacobi on a symmetric matrix; returns eigenvalues, fills V with
// eigenvectors as columns. Sizes here are tiny (rows of the system), so
// robustness beats speed.
std::vector<double> jacobi_eigen(std::vector<std::vector<double>> S,
                                 std::vector<std::vector<double>>& V) {
  size_t n = S.size();
  V.assign(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i) V[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (size_t p = 0; p < n; ++p)
      for (size_t q = p + 1; q < n; ++q) off += S[p][q] * S[p][q];
    if (off < 1e-26) break;
    for (size_t p = 0; p < n; ++p)
      for (size_t q = p + 1; q < n; ++q) {
        if (std::abs(S[p][q]) < 1e-300) continue;
        double tau = (S[q][q] - S[p][p]) / (2.0 * S[p][q]);
        double t = (tau >= 0 ? 1.0 : -1.0) /
                   (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = t * c;
        for (size_t k = 0; k < n; ++k) {
          double skp = S[k][p], skq = S[k][q];
          S[k][p] = c * skp - s * skq;
          S[k][q] = s * skp + c * skq;
        }
        for (size_t k = 0; k < n; ++k) {
          double spk = S[p][k], sqk = S[q][k];
          S[p][k] = c * spk - s * sqk;
          S[q][k] = s * spk + c * sqk;
        }
        for (size_t k = 0; k < n; ++k) {
          double vkp = V[k][p], vkq = V[k][q];
          V[k][p] = c * vkp - s * vkq;
          V[k][q] = s * vkp + c * vkq;
        }
      }
  }
  std::vector<double> eig(n);
  for (size_t i = 0; i < n; ++i) eig[i] = S[i][i];
  return eig;
}

// x = S^+ b for symmetric S.
std::vector<double> pinv_solve(const std::vector<std::vector<double>>& S,
                               const std::vector<double>& b) {
  size_t n = S.size();
  std::vector<std::vector<double>> V;
  std::vector<double> eig = jacobi_eigen(S, V);
  double maxEig = 0.0;
  for (double e : eig) maxEig = std::max(maxEig, std::abs(e));
  double tol = maxEig * 1e-11 + 1e-300;
  std::vector<double> x(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    if (std::abs(eig[i]) <= tol) continue;
    double proj = 0.0;
    for (size_t k = 0; k < n; ++k) proj += V[k][i] * b[k];
    proj /= eig[i];
    for (size_t k = 0; k < n; ++k) x[k] += proj * V[k][i];
  }
  return x;
}

// least-squares solution restricted to the passive columns
std::vector<double> ls_on(const std::vector<std::vector<double>>& A,
                          const std::vector<double>& b,
                          const std::vector<int>& cols) {
  size_t m = A.size(), p = cols.size();
  std::vector<std::vector<double>> G(p, std::vector<double>(p, 0.0));
  std::vector<double> rhs(p, 0.0);
  for (size_t i = 0; i < p; ++i) {
    for (size_t j = i; j < p; ++j) {
      double s = 0.0;
      for (size_t r = 0; r < m; ++r) s += A[r][cols[i]] * A[r][cols[j]];
      G[i][j] = G[j][i] = s;
    }
    for (size_t r = 0; r < m; ++r) rhs[i] += A[r][cols[i]] * b[r];
  }
  return pinv_solve(G, rhs);
}

// --------------------------------------------------------- NNLS row assembly

struct Assembled {
  std::vector<std::vector<double>> A;
  std::vector<double> b;
  size_t nCols = 0;
};

// All rows as equalities over worlds plus nonnegative slack columns;
// an interval [lo,hi] becomes coef - t = lo together with t + u = hi - lo.
Assembled assemble_equalities(const ConstraintSystem& sys, double normWeight) {
  Assembled out;
  out.nCols = sys.nWorlds;
  struct Pending {
    std::vector<double> world;
    std::vector<std::pair<size_t, double>> slack;
    double rhs;
    double weight;
  };
  std::vector<Pending> rows;
  for (const auto& r : sys.rows) {
    double w = r.kind == RowKind::Normalization ? normWeight : 1.0;
    bool loU = unbounded_lo(r.lo), hiU = unbounded_hi(r.hi);
    if (loU && hiU) continue;
    if (!loU && !hiU && r.lo == r.hi) {
      rows.push_back({r.coef, {}, r.lo, w});
    } else if (!loU && !hiU) {
      size_t t = out.nCols++, u = out.nCols++;
      rows.push_back({r.coef, {{t, -1.0}}, r.lo, w});
      rows.push_back({{}, {{t, 1.0}, {u, 1.0}}, r.hi - r.lo, 1.0});
    } else if (!loU) {
      size_t t = out.nCols++;
      rows.push_back({r.coef, {{t, -1.0}}, r.lo, w});
    } else {
      size_t t = out.nCols++;
      rows.push_back({r.coef, {{t, 1.0}}, r.hi, w});
    }
  }
  for (auto& pr : rows) {
    std::vector<double> full(out.nCols, 0.0);
    for (size_t i = 0; i < pr.world.size(); ++i) full[i] = pr.world[i] * pr.weight;
    for (auto& [idx, v] : pr.slack) full[idx] = v * pr.weight;
    out.A.push_back(std::move(full));
    out.b.push_back(pr.rhs * pr.weight);
  }
  return out;
}

}  // namespace

// ------------------------------------------------------------- construction

ConstraintSystem build_system(const std::vector<Bits>& worlds,
                              const GroundProgram& gp,
                              const std::vector<WeightedEntry>& weighted,
                              const std::vector<std::vector<int>>& mutualGroups,
                              const std::vector<std::vector<int>>& pairwiseGroups,
                              long limitIndepCombs) {
  if (worlds.empty())
    throw std::runtime_error(
        "the program has no possible worlds (no answer sets)");
  ConstraintSystem sys;
  sys.nWorlds = worlds.size();

  auto indicator = [&](const Formula& f) {
    std::vector<double> v(worlds.size(), 0.0);
    for (size_t i = 0; i < worlds.size(); ++i)
      v[i] = holds(f, gp, worlds[i]) ? 1.0 : 0.0;
    return v;
  };

  for (size_t i = 0; i < weighted.size(); ++i) {
    const WeightedEntry& e = weighted[i];
    if (!e.ann.cond) {
      ConstraintRow r;
      r.coef = indicator(e.formula);
      r.lo = e.ann.lo;
      r.hi = e.ann.hi;
      r.kind = RowKind::Weight;
      r.sourceId = int(i);
      sys.rows.push_back(std::move(r));
      continue;
    }
    std::vector<double> vc = indicator(*e.ann.cond);
    std::vector<double> vf = indicator(e.formula);
    std::vector<double> vfc(worlds.size());
    for (size_t k = 0; k < worlds.size(); ++k) vfc[k] = vf[k] * vc[k];

    if (e.ann.lo == e.ann.hi) {
      // Pr(f & c) - w Pr(c) = 0
      ConstraintRow r;
      r.coef.resize(worlds.size());
      for (size_t k = 0; k < worlds.size(); ++k)
        r.coef[k] = vfc[k] - e.ann.lo * vc[k];
      r.lo = r.hi = 0.0;
      r.kind = RowKind::Conditional;
      r.sourceId = int(i);
      sys.rows.push_back(std::move(r));
    } else {
      ConstraintRow lo;
      lo.coef.resize(worlds.size());
      for (size_t k = 0; k < worlds.size(); ++k)
        lo.coef[k] = vfc[k] - e.ann.lo * vc[k];
      lo.lo = 0.0;
      lo.hi = kUnboundedRow;
      lo.kind = RowKind::Conditional;
      lo.sourceId = int(i);
      sys.rows.push_back(std::move(lo));

      ConstraintRow hi;
      hi.coef.resize(worlds.size());
      for (size_t k = 0; k < worlds.size(); ++k)
        hi.coef[k] = vfc[k] - e.ann.hi * vc[k];
      hi.lo = -kUnboundedRow;
      hi.hi = 0.0;
      hi.kind = RowKind::Conditional;
      hi.sourceId = int(i);
      sys.rows.push_back(std::move(hi));
    }
    // conditions must be possible
    ConstraintRow pos;
    pos.coef = vc;
    pos.lo = kEpsStrict;
    pos.hi = kUnboundedRow;
    pos.kind = RowKind::Conditional;
    pos.sourceId = int(i);
    sys.rows.push_back(std::move(pos));
  }

  auto productRow = [&](const std::vector<int>& members) {
    ConstraintRow r;
    r.coef.assign(worlds.size(), 1.0);
    r.lo = r.hi = 1.0;
    for (int m : members) {
      std::vector<double> v = indicator(weighted[size_t(m)].formula);
      for (size_t k = 0; k < worlds.size(); ++k) r.coef[k] *= v[k];
      r.lo *= weighted[size_t(m)].ann.lo;
      r.hi *= weighted[size_t(m)].ann.hi;
    }
    r.kind = RowKind::Independence;
    return r;
  };

  for (const auto& group : mutualGroups) {
    long added = 0;
    size_t k = group.size();
    // smallest subsets first so a cap keeps the most informative rows
    for (size_t size = 2; size <= k; ++size) {
      std::vector<size_t> idx(size);
      std::iota(idx.begin(), idx.end(), 0);
      bool more = k >= size;
      while (more) {
        if (limitIndepCombs >= 0 && added >= limitIndepCombs) break;
        std::vector<int> members;
        for (size_t j : idx) members.push_back(group[j]);
        sys.rows.push_back(productRow(members));
        ++added;
        // next combination in lexicographic order
        more = false;
        for (size_t j = size; j-- > 0;) {
          if (idx[j] < k - (size - j)) {
            ++idx[j];
            for (size_t l = j + 1; l < size; ++l) idx[l] = idx[l - 1] + 1;
            more = true;
            break;
          }
        }
      }
      if (limitIndepCombs >= 0 && added >= limitIndepCombs) break;
    }
  }

  for (const auto& group : pairwiseGroups)
    for (size_t a = 0; a < group.size(); ++a)
      for (size_t b = a + 1; b < group.size(); ++b)
        sys.rows.push_back(productRow({group[a], group[b]}));

  ConstraintRow norm;
  norm.coef.assign(worlds.size(), 1.0);
  norm.lo = norm.hi = 1.0;
  norm.kind = RowKind::Normalization;
  sys.rows.push_back(std::move(norm));
  return sys;
}

double residual_of(const ConstraintSystem& sys, const std::vector<double>& probs) {
  double sum = 0.0;
  for (const auto& r : sys.rows) {
    double v = 0.0;
    for (size_t i = 0; i < r.coef.size(); ++i) v += r.coef[i] * probs[i];
    double d = 0.0;
    if (!unbounded_lo(r.lo) && v < r.lo) d = r.lo - v;
    if (!unbounded_hi(r.hi) && v > r.hi) d = v - r.hi;
    sum += d * d;
  }
  return std::sqrt(sum);
}

double entropy(const std::vector<double>& probs) {
  double h = 0.0;
  for (double p : probs)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

// --------------------------------------------------------------------- NNLS

NnlsResult nnls(const std::vector<std::vector<double>>& A,
                const std::vector<double>& b,
                const std::vector<int>* scanOrder) {
  size_t m = A.size(), n = m ? A[0].size() : 0;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (scanOrder) order = *scanOrder;

  std::vector<double> x(n, 0.0), resid = b, w(n, 0.0);
  std::vector<char> passive(n, 0);
  std::vector<int> pcols;

  auto refresh = [&]() {
    for (size_t r = 0; r < m; ++r) {
      double ax = 0.0;
      for (size_t c = 0; c < n; ++c)
        if (x[c] != 0.0) ax += A[r][c] * x[c];
      resid[r] = b[r] - ax;
    }
    for (size_t c = 0; c < n; ++c) {
      double s = 0.0;
      for (size_t r = 0; r < m; ++r) s += A[r][c] * resid[r];
      w[c] = s;
    }
  };
  refresh();

  size_t outerCap = 10 * n + 100;
  for (size_t outer = 0; outer < outerCap; ++outer) {
    int enter = -1;
    double best = 1e-10;
    for (int c : order)
      if (!passive[size_t(c)] && w[size_t(c)] > best) {
        best = w[size_t(c)];
        enter = c;
      }
    if (enter < 0) break;
    passive[size_t(enter)] = 1;
    pcols.push_back(enter);

    for (size_t inner = 0; inner < outerCap; ++inner) {
      std::vector<double> z = ls_on(A, b, pcols);
      bool allPos = true;
      for (double zi : z) allPos = allPos && zi > 1e-11;
      if (allPos) {
        for (size_t i = 0; i < pcols.size(); ++i) x[size_t(pcols[i])] = z[i];
        break;
      }
      double alpha = 1.0;
      for (size_t i = 0; i < pcols.size(); ++i)
        if (z[i] <= 1e-11) {
          double xi = x[size_t(pcols[i])];
          double a = xi / (xi - z[i] + 1e-300);
          alpha = std::min(alpha, a);
        }
      for (size_t i = 0; i < pcols.size(); ++i) {
        double xi = x[size_t(pcols[i])];
        x[size_t(pcols[i])] = xi + alpha * (z[i] - xi);
      }
      std::vector<int> kept;
      for (int c : pcols) {
        if (x[size_t(c)] > 1e-11) {
          kept.push_back(c);
        } else {
          x[size_t(c)] = 0.0;
          passive[size_t(c)] = 0;
        }
      }
      pcols = std::move(kept);
      if (pcols.empty()) break;
    }
    refresh();
  }

  NnlsResult res;
  res.x = std::move(x);
  double rr = 0.0;
  for (double r : resid) rr += r * r;
  res.residual = std::sqrt(rr);
  return res;
}

std::vector<double> min_norm_ls(const std::vector<std::vector<double>>& A,
                                const std::vector<double>& b) {
  size_t m = A.size(), n = m ? A[0].size() : 0;
  std::vector<std::vector<double>> G(m, std::vector<double>(m, 0.0));
  for (size_t i = 0; i < m; ++i)
    for (size_t j = i; j < m; ++j) {
      double s = 0.0;
      for (size_t c = 0; c < n; ++c) s += A[i][c] * A[j][c];
      G[i][j] = G[j][i] = s;
    }
  std::vector<double> y = pinv_solve(G, b);
  std::vector<double> x(n, 0.0);
  for (size_t c = 0; c < n; ++c)
    for (size_t i = 0; i < m; ++i) x[c] += A[i][c] * y[i];
  return x;
}

// -------------------------------------------------------- distribution pick

namespace {

WorldDistribution finalize(const ConstraintSystem& sys,
                           const std::vector<double>& x) {
  WorldDistribution d;
  d.probs.assign(x.begin(), x.begin() + long(sys.nWorlds));
  double sum = 0.0;
  for (double& p : d.probs) {
    if (p < 0.0) p = 0.0;
    sum += p;
  }
  if (sum <= 1e-12) {
    for (double& p : d.probs) p = 1.0 / double(sys.nWorlds);
  } else {
    for (double& p : d.probs) p /= sum;
  }
  d.residual = residual_of(sys, d.probs);
  return d;
}

}  // namespace

WorldDistribution pick_distribution(const ConstraintSystem& sys, PickMode mode,
                                    int nCandidates, SplitMix64& rng) {
  Assembled eq = assemble_equalities(sys, 10.0);

  if (mode == PickMode::IgnoreEntropy || nCandidates <= 1)
    return finalize(sys, nnls(eq.A, eq.b).x);

  std::vector<WorldDistribution> cands;
  std::vector<double> mn = min_norm_ls(eq.A, eq.b);
  bool ok = true;
  for (double v : mn) ok = ok && v >= -1e-9;
  if (ok) cands.push_back(finalize(sys, mn));

  cands.push_back(finalize(sys, nnls(eq.A, eq.b).x));
  for (int k = 1; k < nCandidates; ++k) {
    std::vector<int> order(eq.nCols);
    std::iota(order.begin(), order.end(), 0);
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[size_t(rng.below(i))]);
    cands.push_back(finalize(sys, nnls(eq.A, eq.b, &order).x));
  }

  double minRes = cands[0].residual;
  for (const auto& c : cands) minRes = std::min(minRes, c.residual);
  const WorldDistribution* best = nullptr;
  double bestH = -1.0;
  for (const auto& c : cands) {
    if (c.residual > minRes + 1e-9) continue;
    double h = entropy(c.probs);
    if (h > bestH + 1e-12) {
      bestH = h;
      best = &c;
    }
  }
  return *best;
}

// ------------------------------------------------------------------ simplex

namespace {

// min c.x s.t. Ax = b, x >= 0, b >= 0; entering bars artificial columns in
// phase 2. Bland's rule throughout.
struct Simplex {
  size_t m, n;                         // rows, structural columns
  std::vector<std::vector<double>> T;  // m x (n + m + 1), artificials appended
  std::vector<int> basis;
  long itersLeft = 100000;

  Simplex(const std::vector<std::vector<double>>& A,
          const std::vector<double>& b)
      : m(A.size()), n(m ? A[0].size() : 0) {
    T.assign(m, std::vector<double>(n + m + 1, 0.0));
    basis.resize(m);
    for (size_t i = 0; i < m; ++i) {
      double sign = b[i] < 0 ? -1.0 : 1.0;
      for (size_t j = 0; j < n; ++j) T[i][j] = sign * A[i][j];
      T[i][n + i] = 1.0;
      T[i][n + m] = sign * b[i];
      basis[i] = int(n + i);
    }
  }

  void pivot(size_t r, size_t c) {
    double pv = T[r][c];
    for (double& v : T[r]) v /= pv;
    for (size_t i = 0; i < m; ++i) {
      if (i == r || T[i][c] == 0.0) continue;
      double f = T[i][c];
      for (size_t j = 0; j <= n + m; ++j) T[i][j] -= f * T[r][j];
    }
    basis[r] = int(c);
  }

  // returns objective value; cost has size n + m (artificials included)
  double optimize(const std::vector<double>& cost, bool barArtificials) {
    while (true) {
      if (--itersLeft < 0)
        throw std::runtime_error("simplex iteration cap exceeded");
      // reduced costs via the basic cost row
      size_t limit = barArtificials ? n : n + m;
      int enter = -1;
      for (size_t j = 0; j < limit; ++j) {
        bool basic = false;
        for (int bi : basis) basic = basic || bi == int(j);
        if (basic) continue;
        double red = cost[j];
        for (size_t i = 0; i < m; ++i) red -= cost[size_t(basis[i])] * T[i][j];
        if (red < -1e-9) {
          enter = int(j);
          break;  // Bland: smallest index
        }
      }
      if (enter < 0) break;
      int leave = -1;
      double bestRatio = 0.0;
      for (size_t i = 0; i < m; ++i) {
        if (T[i][size_t(enter)] <= 1e-9) continue;
        double ratio = T[i][n + m] / T[i][size_t(enter)];
        if (leave < 0 || ratio < bestRatio - 1e-12 ||
            (ratio < bestRatio + 1e-12 && basis[i] < basis[size_t(leave)])) {
          leave = int(i);
          bestRatio = ratio;
        }
      }
      if (leave < 0) throw std::runtime_error("linear program is unbounded");
      pivot(size_t(leave), size_t(enter));
    }
    double v = 0.0;
    for (size_t i = 0; i < m; ++i) v += cost[size_t(basis[i])] * T[i][n + m];
    return v;
  }

  double solve(const std::vector<double>& c) {
    std::vector<double> phase1(n + m, 0.0);
    for (size_t j = n; j < n + m; ++j) phase1[j] = 1.0;
    double infeas = optimize(phase1, false);
    if (infeas > 1e-7) throw std::runtime_error("primal infeasible");
    std::vector<double> phase2(n + m, 0.0);
    for (size_t j = 0; j < n; ++j) phase2[j] = c[j];
    return optimize(phase2, true);
  }
};

// exact equality form of the system (unit weights) for the LP paths
Assembled lp_form(const ConstraintSystem& sys) {
  return assemble_equalities(sys, 1.0);
}

}  // namespace

std::pair<double, double> lp_bounds(const ConstraintSystem& sys,
                                    const std::vector<double>& indicator) {
  Assembled eq = lp_form(sys);
  std::vector<double> c(eq.nCols, 0.0);
  for (size_t i = 0; i < indicator.size() && i < eq.nCols; ++i)
    c[i] = indicator[i];
  Simplex slo(eq.A, eq.b);
  double lo = slo.solve(c);
  for (double& v : c) v = -v;
  Simplex shi(eq.A, eq.b);
  double hi = -shi.solve(c);
  lo = std::max(0.0, std::min(1.0, lo));
  hi = std::max(lo, std::max(0.0, std::min(1.0, hi)));
  return {lo, hi};
}

std::pair<double, double> lp_conditional_bounds(const ConstraintSystem& sys,
                                                const std::vector<double>& fcInd,
                                                const std::vector<double>& cInd) {
  // variables: y (scaled probabilities), t (the scale), slacks appended
  size_t nv = sys.nWorlds + 1;
  std::vector<std::vector<double>> A;
  std::vector<double> b;
  size_t cols = nv;
  struct Pend {
    std::vector<double> base;  // over nv
    std::vector<std::pair<size_t, double>> slack;
    double rhs;
  };
  std::vector<Pend> pend;
  auto baseRow = [&](const std::vector<double>& coef, double bound) {
    std::vector<double> v(nv, 0.0);
    for (size_t i = 0; i < sys.nWorlds; ++i) v[i] = coef[i];
    v[sys.nWorlds] = -bound;
    return v;
  };
  for (const auto& r : sys.rows) {
    bool loU = unbounded_lo(r.lo), hiU = unbounded_hi(r.hi);
    if (!loU && !hiU && r.lo == r.hi) {
      pend.push_back({baseRow(r.coef, r.lo), {}, 0.0});
      continue;
    }
    if (!loU) {
      size_t s = cols++;
      pend.push_back({baseRow(r.coef, r.lo), {{s, -1.0}}, 0.0});
    }
    if (!hiU) {
      size_t s = cols++;
      pend.push_back({baseRow(r.coef, r.hi), {{s, 1.0}}, 0.0});
    }
  }
  // denominator scaled to one
  {
    std::vector<double> v(nv, 0.0);
    for (size_t i = 0; i < sys.nWorlds; ++i) v[i] = cInd[i];
    pend.push_back({v, {}, 1.0});
  }
  for (auto& p : pend) {
    std::vector<double> full(cols, 0.0);
    for (size_t i = 0; i < nv; ++i) full[i] = p.base[i];
    for (auto& [idx, v] : p.slack) full[idx] = v;
    A.push_back(std::move(full));
    b.push_back(p.rhs);
  }
  std::vector<double> c(cols, 0.0);
  for (size_t i = 0; i < sys.nWorlds; ++i) c[i] = fcInd[i];
  Simplex slo(A, b);
  double lo = slo.solve(c);
  for (double& v : c) v = -v;
  Simplex shi(A, b);
  double hi = -shi.solve(c);
  lo = std::max(0.0, std::min(1.0, lo));
  hi = std::max(lo, std::max(0.0, std::min(1.0, hi)));
  return {lo, hi};
}

}  // namespace prasp
