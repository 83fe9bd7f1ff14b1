#include "prasp/sampling.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace prasp {

namespace {

// weighted entries that take part in flip-sampling: unconditional with
// numeric weights
std::vector<int> flippable(const SpanningProgram& span) {
  std::vector<int> idx;
  for (size_t i = 0; i < span.weighted.size(); ++i)
    if (!span.weighted[i].ann.cond) idx.push_back(int(i));
  return idx;
}

}  // namespace

SampleMultiset sample_uniform(const std::vector<Bits>& worlds, long n,
                              SplitMix64& rng) {
  if (worlds.empty())
    throw std::runtime_error("cannot sample: the program has no answer sets");
  SampleMultiset s;
  for (long i = 0; i < n; ++i)
    s.items.push_back(worlds[size_t(rng.below(worlds.size()))]);
  return s;
}

XorDraw xor_sample(const GroundProgram& gp, const std::vector<Bits>& worlds,
                   long q1, long q2, SplitMix64& rng) {
  if (worlds.empty())
    throw std::runtime_error("cannot sample: the program has no answer sets");
  size_t nAtoms = gp.atoms.size();
  if (q2 < 0) {
    q2 = 0;
    while ((size_t(1) << q2) < std::max<size_t>(nAtoms, 2)) ++q2;
  }
  if (q1 <= 0) q1 = long(worlds.size());

  for (int attempt = 0; attempt < 50; ++attempt) {
    // each constraint: random atom subset + random target parity
    std::vector<Bits> masks;
    std::vector<int> parity;
    for (long k = 0; k < q2; ++k) {
      Bits m(nAtoms);
      for (size_t a = 0; a < nAtoms; ++a)
        if (rng.next() & 1) m.set(a);
      masks.push_back(std::move(m));
      parity.push_back(int(rng.next() & 1));
    }
    std::vector<size_t> pool;
    for (size_t i = 0; i < worlds.size() && long(pool.size()) < q1; ++i) {
      bool ok = true;
      for (size_t k = 0; k < masks.size() && ok; ++k) {
        size_t cnt = 0;
        for (size_t w = 0; w < worlds[i].w.size(); ++w)
          cnt += size_t(std::popcount(worlds[i].w[w] & masks[k].w[w]));
        ok = int(cnt & 1) == parity[k];
      }
      if (ok) pool.push_back(i);
    }
    if (!pool.empty())
      return {worlds[pool[size_t(rng.below(pool.size()))]], false};
  }
  return {worlds[size_t(rng.below(worlds.size()))], true};
}

SampleMultiset flip_sample(const SpanningProgram& span,
                           const std::vector<Bits>& worlds, long n,
                           bool stratified, bool respectIndep,
                           SplitMix64& rng) {
  if (worlds.empty())
    throw std::runtime_error("cannot sample: the program has no answer sets");
  std::vector<int> idx = flippable(span);

  // per-formula rank vectors
  std::vector<std::vector<double>> rank(idx.size(), std::vector<double>(size_t(n)));
  for (size_t f = 0; f < idx.size(); ++f) {
    if (stratified) {
      for (long j = 0; j < n; ++j) rank[f][size_t(j)] = double(j + 1) / double(n);
      for (size_t j = size_t(n); j > 1; --j)
        std::swap(rank[f][j - 1], rank[f][size_t(rng.below(j))]);
    } else {
      for (long j = 0; j < n; ++j) rank[f][size_t(j)] = rng.uniform();
    }
  }

  SampleMultiset out;
  for (long j = 0; j < n; ++j) {
    // decide forced polarities
    std::vector<std::pair<int, bool>> forced;  // (weighted index, positive)
    int chosenGroup = -3;                      // -3 unset, -2 locked
    for (size_t f = 0; f < idx.size(); ++f) {
      const WeightedEntry& e = span.weighted[size_t(idx[f])];
      if (respectIndep) {
        int g = e.indepGroup;
        if (chosenGroup == -3) {
          chosenGroup = g >= 0 ? g : -2;
        } else if (chosenGroup == -2 || g != chosenGroup) {
          continue;
        }
      }
      double t = e.ann.lo + (e.ann.hi - e.ann.lo) * rng.uniform();
      forced.emplace_back(idx[f], rank[f][size_t(j)] <= t);
    }
    // uniform among worlds matching every forced polarity
    std::vector<size_t> pool;
    for (size_t w = 0; w < worlds.size(); ++w) {
      bool ok = true;
      for (auto& [fi, positive] : forced) {
        bool h = holds(span.weighted[size_t(fi)].formula, span.ground, worlds[w]);
        if (h != positive) {
          ok = false;
          break;
        }
      }
      if (ok) pool.push_back(w);
    }
    if (pool.empty())
      out.items.push_back(std::nullopt);
    else
      out.items.push_back(worlds[pool[size_t(rng.below(pool.size()))]]);
  }
  return out;
}

SampleMultiset initial_sample(const SamplerConfig& cfg,
                              const SpanningProgram& span,
                              const std::vector<Bits>& worlds,
                              SplitMix64& rng) {
  switch (cfg.method) {
    case 0:
      return {};
    case 1: {
      if (cfg.uniMethod == 2) {
        SampleMultiset s;
        for (long i = 0; i < cfg.n; ++i)
          s.items.push_back(
              xor_sample(span.ground, worlds, cfg.xorQ1, cfg.xorQ2, rng).world);
        return s;
      }
      return sample_uniform(worlds, cfg.n, rng);
    }
    case 2: {
      SampleMultiset s;
      size_t take = cfg.n <= 0 ? worlds.size()
                               : std::min(worlds.size(), size_t(cfg.n));
      for (size_t i = 0; i < take; ++i) s.items.push_back(worlds[i]);
      return s;
    }
    case 3: {
      std::vector<int> members;
      for (size_t i = 0; i < span.weighted.size(); ++i)
        if (span.weighted[i].indepGroup >= 0 && !span.weighted[i].ann.cond)
          members.push_back(int(i));
      if (members.empty())
        throw std::runtime_error(
            "initial sampling method 3 needs independence declarations; "
            "use methods 4-7 instead");
      std::vector<double> wgt(worlds.size(), 1.0);
      double total = 0.0;
      for (size_t w = 0; w < worlds.size(); ++w) {
        for (int m : members) {
          const WeightedEntry& e = span.weighted[size_t(m)];
          double p = (e.ann.lo + e.ann.hi) / 2.0;
          wgt[w] *= holds(e.formula, span.ground, worlds[w]) ? p : 1.0 - p;
        }
        total += wgt[w];
      }
      if (total <= 0.0)
        throw std::runtime_error(
            "initial sampling method 3: all worlds have zero product weight");
      SampleMultiset s;
      for (long i = 0; i < cfg.n; ++i) {
        double r = rng.uniform() * total;
        size_t w = 0;
        for (; w + 1 < worlds.size() && r >= wgt[w]; ++w) r -= wgt[w];
        s.items.push_back(worlds[w]);
      }
      return s;
    }
    case 4:
      return flip_sample(span, worlds, cfg.n, true, false, rng);
    case 5:
      return flip_sample(span, worlds, cfg.n, true, true, rng);
    case 6:
      return flip_sample(span, worlds, cfg.n, false, false, rng);
    case 7:
      return flip_sample(span, worlds, cfg.n, false, true, rng);
    default:
      throw std::runtime_error("unknown initial sampling method " +
                               std::to_string(cfg.method));
  }
}

}  // namespace prasp
