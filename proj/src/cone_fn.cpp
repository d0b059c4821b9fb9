#include "nashflow/cone_fn.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace nashflow {

namespace {

// Scales a ray to coprime integer coordinates so dedup and comparisons stay
// cheap as compositions deepen.
Ray normalize(Ray r) {
  if (r.c.sign() < 0 || r.u.sign() < 0 || (r.c.is_zero() && r.u.is_zero()))
    throw std::logic_error("cone_fn: ray outside the closed quadrant");
  mpz_class l;
  mpz_lcm(l.get_mpz_t(), r.c.den().get_mpz_t(), r.u.den().get_mpz_t());
  mpz_class a = r.c.num() * (l / r.c.den());
  mpz_class b = r.u.num() * (l / r.u.den());
  mpz_class g;
  mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return Ray{Rat(mpz_class(a / g)), Rat(mpz_class(b / g))};
}

bool ray_before(const Ray& a, const Ray& b) { return ray_cross(a, b).sign() > 0; }
bool ray_equal(const Ray& a, const Ray& b) { return ray_cross(a, b).is_zero(); }

// Linear form P*c + Q*u; pockets are intersections of {form >= 0}.
struct Form {
  Rat P, Q;
  Rat at(const Ray& d) const { return P * d.c + Q * d.u; }
};

// 1-D view of a ConeFn along the vertical line c = c0: consecutive pieces in
// u, each carrying its sector index and linear formula.
struct Piece {
  int sector;
  Rat u_lo;
  bool unbounded;  // last piece
  Rat u_hi;        // valid when !unbounded
  Rat alpha, beta;
  Rat value_at(const Rat& c0, const Rat& u) const { return alpha * c0 + beta * u; }
};

std::vector<Piece> pieces_at(const ConeFn& f, const Rat& c0) {
  const auto& secs = f.sectors();
  std::vector<Piece> out;
  if (c0.is_zero()) {
    const auto& s = secs.back();
    out.push_back({static_cast<int>(secs.size()) - 1, Rat(0), true, Rat(0), s.alpha, s.beta});
    return out;
  }
  for (std::size_t i = 0; i < secs.size(); ++i) {
    Rat lo = c0 * secs[i].lo.u / secs[i].lo.c;  // sector lo rays always have c > 0
    bool last = i + 1 == secs.size();
    Rat hi = last ? Rat(0) : c0 * secs[i + 1].lo.u / secs[i + 1].lo.c;
    if (!last && hi == lo) continue;  // degenerate at c0
    out.push_back({static_cast<int>(i), lo, last, hi, secs[i].alpha, secs[i].beta});
  }
  return out;
}

}  // namespace

int ConeFn::sector_of(const Ray& d) const {
  int best = 0;
  for (std::size_t i = 1; i < sectors_.size(); ++i)
    if (ray_cross(sectors_[i].lo, d).sign() >= 0) best = static_cast<int>(i);
  return best;
}

Rat ConeFn::eval(const Rat& c, const Rat& u) const {
  if (c.sign() < 0 || u.sign() < 0) throw std::invalid_argument("ConeFn::eval: negative input");
  if (c.is_zero() && u.is_zero()) return Rat(0);
  const Sector& s = sectors_[static_cast<std::size_t>(sector_of(Ray{c, u}))];
  return s.alpha * c + s.beta * u;
}

Rat ConeFn::max_uptake(const Rat& c, const Rat& ell) const {
  auto ps = pieces_at(*this, c);
  if (ps.front().value_at(c, ps.front().u_lo) > ell) return Rat(0);
  for (const auto& p : ps) {
    if (p.unbounded || p.value_at(c, p.u_hi) > ell) {
      if (p.beta.sign() > 0) return (ell - p.alpha * c) / p.beta;
      return p.u_hi;  // flat piece whose value <= ell, next piece starts above
    }
  }
  throw std::logic_error("ConeFn::max_uptake: function bounded in u");
}

Rat ConeFn::min_uptake(const Rat& c, const Rat& ell) const {
  auto ps = pieces_at(*this, c);
  if (ps.front().value_at(c, ps.front().u_lo) > ell)
    throw std::logic_error("ConeFn::min_uptake: level below entry offer");
  for (const auto& p : ps) {
    Rat at_lo = p.value_at(c, p.u_lo);
    if (at_lo == ell) return p.u_lo;
    if (p.unbounded || p.value_at(c, p.u_hi) >= ell) {
      if (p.beta.sign() > 0) return (ell - p.alpha * c) / p.beta;
    }
  }
  throw std::logic_error("ConeFn::min_uptake: level never attained");
}

void ConeFn::canonicalize() {
  std::vector<Sector> merged;
  for (auto& s : sectors_) {
    s.lo = normalize(s.lo);
    if (!merged.empty() && merged.back().alpha == s.alpha && merged.back().beta == s.beta) continue;
    if (!merged.empty() && ray_equal(merged.back().lo, s.lo)) {
      merged.back() = s;  // zero-width sector superseded
      continue;
    }
    merged.push_back(s);
  }
  sectors_ = std::move(merged);
  check();
}

void ConeFn::check() const {
  if (sectors_.empty()) throw std::logic_error("ConeFn: empty");
  if (!(sectors_.front().lo.c == Rat(1) && sectors_.front().lo.u.is_zero()))
    throw std::logic_error("ConeFn: first sector must start at (1,0)");
  for (std::size_t i = 0; i < sectors_.size(); ++i) {
    const auto& s = sectors_[i];
    if (s.alpha.sign() < 0 || s.beta.sign() < 0)
      throw std::logic_error("ConeFn: negative partial derivative");
    if (i + 1 < sectors_.size()) {
      const auto& t = sectors_[i + 1];
      if (!ray_before(s.lo, t.lo)) throw std::logic_error("ConeFn: rays out of order");
      Rat a = s.alpha * t.lo.c + s.beta * t.lo.u;
      Rat b = t.alpha * t.lo.c + t.beta * t.lo.u;
      if (a != b) throw std::logic_error("ConeFn: discontinuity at internal ray");
    }
  }
  if (sectors_.back().beta.sign() <= 0)
    throw std::logic_error("ConeFn: must grow with throughput near (0,1)");
}

ConeFn ConeFn::arc(const Rat& capacity, bool reset) {
  if (capacity.sign() <= 0) throw std::invalid_argument("ConeFn::arc: capacity must be positive");
  ConeFn f;
  Rat inv = Rat(1) / capacity;
  if (reset) {
    f.sectors_.push_back({Ray{Rat(1), Rat(0)}, Rat(0), inv});
  } else {
    f.sectors_.push_back({Ray{Rat(1), Rat(0)}, Rat(1), Rat(0)});
    f.sectors_.push_back({normalize(Ray{Rat(1), capacity}), Rat(0), inv});
  }
  f.check();
  return f;
}

ConeFn ConeFn::series(const ConeFn& first, const ConeFn& second) {
  ConeFn out;
  const Ray end{Rat(0), Rat(1)};
  for (std::size_t i = 0; i < first.sectors_.size(); ++i) {
    const Sector& s = first.sectors_[i];
    Ray hi = (i + 1 < first.sectors_.size()) ? first.sectors_[i + 1].lo : end;

    std::vector<Ray> cuts{s.lo};
    for (std::size_t k = 1; k < second.sectors_.size(); ++k) {
      const Ray& q = second.sectors_[k].lo;
      // Directions where the image (first(c,u), u) lies on ray q.
      Ray d{q.c - s.beta * q.u, s.alpha * q.u};
      if (d.c.sign() < 0 || d.u.sign() < 0 || (d.c.is_zero() && d.u.is_zero())) continue;
      d = normalize(d);
      if (ray_before(s.lo, d) && ray_before(d, hi)) cuts.push_back(d);
    }
    std::sort(cuts.begin() + 1, cuts.end(), ray_before);
    cuts.erase(std::unique(cuts.begin(), cuts.end(), ray_equal), cuts.end());

    for (std::size_t k = 0; k < cuts.size(); ++k) {
      Ray lo = cuts[k];
      Ray up = (k + 1 < cuts.size()) ? cuts[k + 1] : hi;
      Ray mid{lo.c + up.c, lo.u + up.u};
      Ray img{s.alpha * mid.c + s.beta * mid.u, mid.u};
      const Sector& t = second.sectors_[static_cast<std::size_t>(second.sector_of(img))];
      out.sectors_.push_back({lo, t.alpha * s.alpha, t.alpha * s.beta + t.beta});
    }
  }
  out.canonicalize();
  return out;
}

namespace {

// Diagnosis of the parallel composite at one direction: the exit level F and
// the combinatorial regime that produced it, as data for pocket inequalities.
struct BranchState {
  enum Kind { Idle, OnPiece, OnFlat } kind;
  int sector = -1;
  Rat alpha, beta;     // OnPiece
  Rat slope_lo, slope_hi;  // OnFlat: plateau ends as multiples of c
};

struct DirDiag {
  Rat value;
  bool pinned = false;
  Rat gamma;  // pinned level as a multiple of c
  Rat A, B;   // composite formula on the pocket: A*c + B*u
  std::vector<BranchState> states;
};

Rat branch_offer(const ConeFn& f, const Rat& c0) { return f.eval(c0, Rat(0)); }

DirDiag parallel_dir_eval(const std::vector<const ConeFn*>& br, const Rat& c0, const Rat& u0) {
  DirDiag diag;
  diag.states.assign(br.size(), BranchState{BranchState::Idle, -1, Rat(0), Rat(0), Rat(0), Rat(0)});
  if (u0.is_zero()) {
    Rat best = branch_offer(*br[0], c0);
    for (std::size_t i = 1; i < br.size(); ++i) best = min(best, branch_offer(*br[i], c0));
    diag.value = best;
    diag.pinned = true;
    diag.gamma = c0.is_zero() ? Rat(0) : best / c0;
    diag.A = diag.gamma;
    diag.B = Rat(0);
    return diag;
  }

  std::vector<std::vector<Piece>> pieces;
  pieces.reserve(br.size());
  for (const ConeFn* f : br) pieces.push_back(pieces_at(*f, c0));

  // Candidate levels: every piece boundary value of every branch.
  std::vector<Rat> levels;
  for (std::size_t i = 0; i < br.size(); ++i)
    for (const auto& p : pieces[i]) {
      levels.push_back(p.value_at(c0, p.u_lo));
      if (!p.unbounded) levels.push_back(p.value_at(c0, p.u_hi));
    }
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  auto uptake_sum = [&](const Rat& ell) {
    Rat s(0);
    for (const ConeFn* f : br) s += f->max_uptake(c0, ell);
    return s;
  };

  // The interior solve over the open level interval (lo_level, hi_level)
  // where every branch's participating piece is fixed.
  auto interior_solve = [&](const Rat& probe) -> DirDiag {
    DirDiag d;
    d.states.assign(br.size(), BranchState{BranchState::Idle, -1, Rat(0), Rat(0), Rat(0), Rat(0)});
    Rat inv_sum(0), ratio_sum(0);
    for (std::size_t i = 0; i < br.size(); ++i) {
      if (branch_offer(*br[i], c0) > probe) continue;
      for (const auto& p : pieces[i]) {
        Rat at_lo = p.value_at(c0, p.u_lo);
        Rat at_hi = p.unbounded ? probe + Rat(1) : p.value_at(c0, p.u_hi);
        if (at_lo <= probe && probe <= at_hi && p.beta.sign() > 0) {
          d.states[i] = {BranchState::OnPiece, p.sector, p.alpha, p.beta, Rat(0), Rat(0)};
          inv_sum += Rat(1) / p.beta;
          ratio_sum += p.alpha / p.beta;
          break;
        }
      }
    }
    if (inv_sum.is_zero()) throw std::logic_error("cone_fn parallel: no active branch in bracket");
    d.B = Rat(1) / inv_sum;
    d.A = d.B * ratio_sum;
    d.value = d.A * c0 + d.B * u0;
    return d;
  };

  auto pin_at = [&](const Rat& level) -> DirDiag {
    if (c0.is_zero()) throw std::logic_error("cone_fn parallel: pinned level with zero entry label");
    DirDiag d;
    d.states.assign(br.size(), BranchState{BranchState::Idle, -1, Rat(0), Rat(0), Rat(0), Rat(0)});
    for (std::size_t i = 0; i < br.size(); ++i) {
      if (branch_offer(*br[i], c0) > level) continue;
      Rat lo_u = br[i]->min_uptake(c0, level);
      Rat hi_u = br[i]->max_uptake(c0, level);
      if (lo_u == hi_u) {
        for (const auto& p : pieces[i]) {
          Rat at_lo = p.value_at(c0, p.u_lo);
          Rat at_hi = p.unbounded ? level + Rat(1) : p.value_at(c0, p.u_hi);
          if (at_lo <= level && level <= at_hi && p.beta.sign() > 0) {
            d.states[i] = {BranchState::OnPiece, p.sector, p.alpha, p.beta, Rat(0), Rat(0)};
            break;
          }
        }
        if (d.states[i].kind != BranchState::OnPiece)
          throw std::logic_error("cone_fn parallel: missing piece at pinned level");
      } else {
        // Plateau: find the flat sector carrying it.
        int flat = -1;
        for (const auto& p : pieces[i])
          if (p.beta.is_zero() && p.value_at(c0, p.u_lo) == level) { flat = p.sector; break; }
        if (flat < 0) throw std::logic_error("cone_fn parallel: plateau without flat sector");
        d.states[i] = {BranchState::OnFlat, flat, Rat(0), Rat(0), lo_u / c0, hi_u / c0};
      }
    }
    d.value = level;
    d.pinned = true;
    d.gamma = level / c0;
    d.A = d.gamma;
    d.B = Rat(0);
    return d;
  };

  const Rat* prev = nullptr;
  for (const Rat& L : levels) {
    if (uptake_sum(L) < u0) {
      prev = &L;
      continue;
    }
    if (prev) {
      DirDiag d = interior_solve((*prev + L) / Rat(2));
      if (d.value < L) {
        if (d.value <= *prev) throw std::logic_error("cone_fn parallel: solve below bracket");
        return d;
      }
    }
    return pin_at(L);
  }
  // Beyond every level: all branches on their last pieces.
  Rat top = levels.empty() ? Rat(0) : levels.back();
  return interior_solve(top + Rat(1));
}

// Pocket inequalities of a diagnosis, each as a linear form required >= 0.
std::vector<Form> pocket_forms(const std::vector<const ConeFn*>& br, const DirDiag& diag) {
  std::vector<Form> forms;
  const Rat &A = diag.A, &B = diag.B;
  auto sector_rays = [&](const ConeFn& f, int idx) {
    Ray lo = f.sectors()[static_cast<std::size_t>(idx)].lo;
    Ray hi = idx + 1 < static_cast<int>(f.sectors().size())
                 ? f.sectors()[static_cast<std::size_t>(idx) + 1].lo
                 : Ray{Rat(0), Rat(1)};
    return std::make_pair(lo, hi);
  };

  if (!diag.pinned) {
    for (std::size_t i = 0; i < br.size(); ++i) {
      const BranchState& st = diag.states[i];
      if (st.kind == BranchState::Idle) {
        Rat k = br[i]->eval(Rat(1), Rat(0));
        forms.push_back({k - A, -B});  // offer >= F
      } else {
        // U = (F - alpha*c)/beta inside the sector, and U >= 0.
        Rat P = (A - st.alpha) / st.beta, Q = B / st.beta;
        auto [lo, hi] = sector_rays(*br[i], st.sector);
        forms.push_back({P, Q});
        forms.push_back({lo.c * P - lo.u, lo.c * Q});
        forms.push_back({hi.u - hi.c * P, -(hi.c * Q)});
      }
    }
  } else {
    Rat sum_lo_P(0), sum_hi_P(0);
    bool any_flat = false;
    for (std::size_t i = 0; i < br.size(); ++i) {
      const BranchState& st = diag.states[i];
      if (st.kind == BranchState::Idle) {
        Rat k = br[i]->eval(Rat(1), Rat(0));
        forms.push_back({k - diag.gamma, Rat(0)});
      } else if (st.kind == BranchState::OnPiece) {
        Rat P = (diag.gamma - st.alpha) / st.beta;
        auto [lo, hi] = sector_rays(*br[i], st.sector);
        forms.push_back({P, Rat(0)});
        forms.push_back({lo.c * P - lo.u, Rat(0)});
        forms.push_back({hi.u - hi.c * P, Rat(0)});
        sum_lo_P += P;
        sum_hi_P += P;
      } else {
        any_flat = true;
        sum_lo_P += st.slope_lo;
        sum_hi_P += st.slope_hi;
      }
    }
    if (!any_flat) throw std::logic_error("cone_fn parallel: pinned diag without plateau");
    forms.push_back({-sum_lo_P, Rat(1)});  // u >= sum of plateau left ends
    forms.push_back({sum_hi_P, Rat(-1)});  // u <= sum of plateau right ends
  }
  return forms;
}

}  // namespace

ConeFn ConeFn::parallel(const std::vector<const ConeFn*>& branches) {
  if (branches.empty()) throw std::invalid_argument("ConeFn::parallel: no branches");
  if (branches.size() == 1) return *branches[0];

  std::vector<Ray> rays{Ray{Rat(1), Rat(0)}, Ray{Rat(0), Rat(1)}};
  for (const ConeFn* f : branches)
    for (const auto& s : f->sectors()) rays.push_back(s.lo);
  for (auto& r : rays) r = normalize(r);
  std::sort(rays.begin(), rays.end(), ray_before);
  rays.erase(std::unique(rays.begin(), rays.end(), ray_equal), rays.end());

  ConeFn out;
  std::size_t guard = 0;
  std::size_t i = 0;
  while (i + 1 < rays.size()) {
    if (++guard > 100000) throw std::logic_error("ConeFn::parallel: refinement did not converge");
    Ray r1 = rays[i], r2 = rays[i + 1];
    Ray mid = normalize(Ray{r1.c + r2.c, r1.u + r2.u});
    DirDiag diag = parallel_dir_eval(branches, mid.c, mid.u);
    auto forms = pocket_forms(branches, diag);

    std::vector<Ray> splits;
    bool ok = true;
    for (const auto& fm : forms) {
      for (const Ray& end : {r1, r2}) {
        if (fm.at(end).sign() >= 0) continue;
        ok = false;
        // The zero ray of the form, if it lies strictly inside the gap.
        const Ray cands[2] = {Ray{fm.Q, -fm.P}, Ray{-fm.Q, fm.P}};
        for (const Ray& cand : cands) {
          if (cand.c.sign() < 0 || cand.u.sign() < 0 || (cand.c.is_zero() && cand.u.is_zero()))
            continue;
          Ray n = normalize(cand);
          if (ray_before(r1, n) && ray_before(n, r2)) splits.push_back(n);
        }
      }
    }
    if (ok) {
      out.sectors_.push_back({r1, diag.A, diag.B});
      ++i;
      continue;
    }
    if (splits.empty()) splits.push_back(mid);
    std::sort(splits.begin(), splits.end(), ray_before);
    splits.erase(std::unique(splits.begin(), splits.end(), ray_equal), splits.end());
    rays.insert(rays.begin() + static_cast<std::ptrdiff_t>(i) + 1, splits.begin(), splits.end());
  }
  out.canonicalize();

  // The direction evaluator is the ground truth; spot-check the assembled
  // function at every internal ray and sector midpoint.
  for (std::size_t k = 0; k < out.sectors_.size(); ++k) {
    Ray lo = out.sectors_[k].lo;
    Ray hi = k + 1 < out.sectors_.size() ? out.sectors_[k + 1].lo : Ray{Rat(0), Rat(1)};
    Ray mid = normalize(Ray{lo.c + hi.c, lo.u + hi.u});
    for (const Ray& d : {lo, mid}) {
      Rat direct = parallel_dir_eval(branches, d.c, d.u).value;
      if (out.eval(d.c, d.u) != direct)
        throw std::logic_error("ConeFn::parallel: assembled function disagrees with direct evaluation");
    }
  }
  return out;
}

}  // namespace nashflow
