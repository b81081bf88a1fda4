#include "specdens/approximation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace specdens {

namespace {

long l1_norm(const std::vector<long>& v) {
  long s = 0;
  for (long x : v) s += std::labs(x);
  return s;
}

// all offset vectors o in Z^dims with |o|_1 <= K
void enumerate_ball(int dims, long K, std::vector<long>& cur,
                    std::vector<std::vector<long>>& out) {
  if (static_cast<int>(cur.size()) == dims) {
    out.push_back(cur);
    return;
  }
  long used = l1_norm(cur);
  for (long o = -(K - used); o <= K - used; o++) {
    cur.push_back(o);
    enumerate_ball(dims, K, cur, out);
    cur.pop_back();
  }
}

std::vector<std::vector<long>> ball_offsets(int dims, long K) {
  std::vector<std::vector<long>> out;
  std::vector<long> cur;
  enumerate_ball(dims, K, cur, out);
  return out;
}

bool scalar_is_real(const Cyclotomic& c) { return c == c.conj(); }

bool matrix_all_real(const RingMatrix<Cyclotomic>& A) {
  for (int k = 0; k < A.dim(); k++)
    for (int l = 0; l < A.dim(); l++)
      for (const auto& [g, c] : A.at(k, l).terms())
        if (!scalar_is_real(c)) return false;
  return true;
}

// left regular representation of a matrix over a finite group
FiniteRealization realize_regular(const RingMatrix<Cyclotomic>& img,
                                  RealizationKind kind, long stage_index) {
  const auto& G = img.group();
  if (!G->is_finite()) throw std::invalid_argument("stage group must be finite");
  long n = G->order();
  int d = img.dim();

  FiniteRealization r;
  r.kind = kind;
  r.stage_group = G;
  r.block_dim = d;
  r.dim = n * d;
  r.stage_index = stage_index;
  r.normalization = Rational(1);
  r.hermitian = is_hermitian(img);
  r.all_real = matrix_all_real(img);
  r.has_exact = true;

  for (int k = 0; k < d; k++)
    for (int l = 0; l < d; l++)
      for (const auto& [s, c] : img.at(k, l).terms()) {
        std::complex<double> cv = c.to_complex();
        for (long h = 0; h < n; h++) {
          long row = G->index_of(G->mul(s, G->element_at(h))) * d + k;
          long col = h * d + l;
          r.entries.push_back({row, col, cv});
          r.exact_entries.push_back({row, col, c});
        }
      }

  long e_idx = G->index_of(G->identity());
  for (int k = 0; k < d; k++) r.trace_indices.push_back(e_idx * d + k);
  return r;
}

}  // namespace

FolnerSet FolnerSet::box(int dims, long side, long index) {
  if (dims < 1 || side < 1) throw std::invalid_argument("bad box parameters");
  FolnerSet fs;
  fs.dims = dims;
  fs.index = index;
  std::vector<long> cur(dims, 0);
  for (;;) {
    fs.points.push_back(cur);
    int pos = dims - 1;
    while (pos >= 0 && ++cur[pos] == side) cur[pos--] = 0;
    if (pos < 0) break;
  }
  std::sort(fs.points.begin(), fs.points.end());
  return fs;
}

std::vector<std::vector<long>> neighborhood(const FolnerSet& fs, long K) {
  std::vector<std::vector<long>> out;
  if (K <= 0 || fs.points.empty()) return out;
  std::set<std::vector<long>> members(fs.points.begin(), fs.points.end());
  auto offsets = ball_offsets(fs.dims, K);

  std::set<std::vector<long>> seen;
  std::vector<long> cand(fs.dims);
  for (const auto& p : fs.points) {
    for (const auto& o : offsets) {
      for (int i = 0; i < fs.dims; i++) cand[i] = p[i] + o[i];
      if (!seen.insert(cand).second) continue;
      // cand is within K of X by construction; check the complement side
      bool near_complement = !members.count(cand);
      if (!near_complement) {
        for (const auto& o2 : offsets) {
          std::vector<long> q(fs.dims);
          for (int i = 0; i < fs.dims; i++) q[i] = cand[i] + o2[i];
          if (!members.count(q)) {
            near_complement = true;
            break;
          }
        }
      }
      if (near_complement) out.push_back(cand);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

double folner_defect(const FolnerSet& fs, long K) {
  if (fs.points.empty()) throw std::invalid_argument("empty Folner set");
  return static_cast<double>(neighborhood(fs, K).size()) /
         static_cast<double>(fs.points.size());
}

FiniteRealization build_inverse_limit_stage(const RingMatrix<Cyclotomic>& A,
                                            const QuotientMap& p) {
  if (!A.group()->same_descriptor(*p.source))
    throw std::invalid_argument("quotient map source does not match the matrix group");
  if (!p.target->is_finite())
    throw std::invalid_argument("inverse limit stages must be finite quotients");
  return realize_regular(A.mapped(p), RealizationKind::InverseLimit,
                         p.target->order());
}

DirectLimitStage make_direct_limit_stage(const RingMatrix<Cyclotomic>& A,
                                         const QuotientMap& p,
                                         unsigned long long seed) {
  if (!A.group()->same_descriptor(*p.target))
    throw std::invalid_argument("stage map must land in the matrix group");
  if (!p.source->is_finite())
    throw std::invalid_argument("stage group must be finite");

  std::map<GroupElement, std::vector<GroupElement>, ElementLess> preimages;
  for (long i = 0; i < p.source->element_count(); i++) {
    GroupElement x = p.source->element_at(i);
    preimages[p.apply(x)].push_back(x);
  }

  std::set<GroupElement, ElementLess> support;
  for (int k = 0; k < A.dim(); k++)
    for (int l = 0; l < A.dim(); l++)
      for (const auto& [g, c] : A.at(k, l).terms()) support.insert(g);

  std::mt19937_64 rng(seed);
  DirectLimitStage st;
  st.group = p.source;
  for (const auto& s : support) {
    GroupElement s_inv = A.group()->inverse(s);
    if (ElementLess{}(s_inv, s) || ElementLess{}(s, s_inv)) {
      auto it = st.lift.find(s_inv);
      if (it != st.lift.end()) {
        // reuse the inverse of the earlier choice; keeps adjoints aligned
        st.lift.emplace(s, p.source->inverse(it->second));
        st.choice_record += A.group()->format(s) + " -> " +
                            p.source->format(st.lift.at(s)) + " (inverse pair)\n";
        continue;
      }
    }
    auto pit = preimages.find(s);
    if (pit == preimages.end() || pit->second.empty())
      throw std::invalid_argument("support element " + A.group()->format(s) +
                                  " has no preimage at this stage");
    const auto& all = pit->second;
    std::vector<GroupElement> pool;
    bool self_inverse = !(ElementLess{}(s_inv, s) || ElementLess{}(s, s_inv));
    if (self_inverse) {
      for (const auto& x : all)
        if (p.source->is_identity(p.source->mul(x, x))) pool.push_back(x);
    }
    if (pool.empty()) pool = all;
    GroupElement choice = pool[rng() % pool.size()];
    st.lift.emplace(s, choice);
    st.choice_record += A.group()->format(s) + " -> " + p.source->format(choice) +
                        (pool.size() > 1 ? " (seeded pick of " +
                                               std::to_string(pool.size()) + ")\n"
                                         : "\n");
  }
  return st;
}

FiniteRealization build_direct_limit_stage(const RingMatrix<Cyclotomic>& A,
                                           const DirectLimitStage& st) {
  if (!st.group) throw std::invalid_argument("stage group missing");
  RingMatrix<Cyclotomic> lifted(st.group, A.dim());
  for (int k = 0; k < A.dim(); k++)
    for (int l = 0; l < A.dim(); l++)
      for (const auto& [g, c] : A.at(k, l).terms()) {
        auto it = st.lift.find(g);
        if (it == st.lift.end())
          throw std::invalid_argument("support element " + A.group()->format(g) +
                                      " not covered by the lift table");
        lifted.at(k, l).add_term(it->second, c);
      }
  auto r = realize_regular(lifted, RealizationKind::DirectLimit,
                           st.group->order());
  r.choice_record = st.choice_record;
  return r;
}

FiniteRealization build_folner_compression(const RingMatrix<Cyclotomic>& A,
                                           const FolnerSet& fs) {
  const auto& G = A.group();
  GroupPtr U;
  int rank = 0;
  if (G->kind() == GroupKind::FreeAbelian) {
    rank = G->rank();
  } else if (G->kind() == GroupKind::DirectProduct && G->factors().size() == 2 &&
             G->factors()[0]->is_finite() &&
             G->factors()[1]->kind() == GroupKind::FreeAbelian) {
    U = G->factors()[0];
    rank = G->factors()[1]->rank();
  } else {
    throw std::invalid_argument(
        "compression needs a group of the form U x Z^d with U finite");
  }
  if (fs.dims != rank) throw std::invalid_argument("window dimension mismatch");
  if (fs.points.empty()) throw std::invalid_argument("empty Folner set");

  long nu = U ? U->order() : 1;
  int d = A.dim();
  long nx = fs.size();

  FiniteRealization r;
  r.kind = RealizationKind::FolnerCompression;
  r.stage_group = G;
  r.subgroup = U;
  r.block_dim = d;
  r.dim = nx * nu * d;
  r.stage_index = fs.index;
  r.normalization = Rational(1, nx);
  r.hermitian = is_hermitian(A);
  r.all_real = matrix_all_real(A);
  r.has_exact = true;
  r.sites = fs.points;
  r.subgroup_order_ = nu;
  for (long i = 0; i < nx; i++) r.site_index_[fs.points[i]] = i;

  // split a group element into its U part and its Z^d coordinates
  auto split = [&](const GroupElement& g) {
    std::pair<GroupElement, std::vector<long>> out;
    if (U) {
      const auto& comps = std::get<std::vector<GroupElement>>(g.v);
      out.first = comps[0];
      const auto& w = std::get<std::vector<int64_t>>(comps[1].v);
      out.second.assign(w.begin(), w.end());
    } else {
      const auto& w = std::get<std::vector<int64_t>>(g.v);
      out.second.assign(w.begin(), w.end());
    }
    return out;
  };

  std::vector<long> x(rank);
  for (int k = 0; k < d; k++)
    for (int l = 0; l < d; l++)
      for (const auto& [s, c] : A.at(k, l).terms()) {
        auto [s_u, s_box] = split(s);
        std::complex<double> cv = c.to_complex();
        for (long ypos = 0; ypos < nx; ypos++) {
          for (int i = 0; i < rank; i++) x[i] = fs.points[ypos][i] + s_box[i];
          auto it = r.site_index_.find(x);
          if (it == r.site_index_.end()) continue;
          long xpos = it->second;
          for (long v = 0; v < nu; v++) {
            long u = U ? U->index_of(U->mul(s_u, U->element_at(v))) : 0;
            r.entries.push_back(
                {(xpos * nu + u) * d + k, (ypos * nu + v) * d + l, cv});
            r.exact_entries.push_back(
                {(xpos * nu + u) * d + k, (ypos * nu + v) * d + l, c});
          }
        }
      }

  long e_u = U ? U->index_of(U->identity()) : 0;
  for (long xpos = 0; xpos < nx; xpos++)
    for (int k = 0; k < d; k++)
      r.trace_indices.push_back((xpos * nu + e_u) * d + k);
  return r;
}

long FiniteRealization::translate(long basis_index, const GroupElement& h) const {
  int d = block_dim;
  long k = basis_index % d;
  long rest = basis_index / d;
  if (kind != RealizationKind::FolnerCompression) {
    long site = stage_group->index_of(stage_group->mul(h, stage_group->element_at(rest)));
    return site * d + k;
  }
  long nu = subgroup_order_;
  long u_idx = rest % nu;
  long xpos = rest / nu;
  std::vector<long> x;
  long new_u = 0;
  if (subgroup) {
    const auto& comps = std::get<std::vector<GroupElement>>(h.v);
    const auto& w = std::get<std::vector<int64_t>>(comps[1].v);
    x.assign(w.begin(), w.end());
    new_u = subgroup->index_of(subgroup->mul(comps[0], subgroup->element_at(u_idx)));
  } else {
    const auto& w = std::get<std::vector<int64_t>>(h.v);
    x.assign(w.begin(), w.end());
  }
  for (size_t i = 0; i < x.size(); i++) x[i] += sites[xpos][i];
  auto it = site_index_.find(x);
  if (it == site_index_.end()) return -1;
  return (it->second * nu + new_u) * d + k;
}

Eigen::MatrixXcd realization_power_columns(const FiniteRealization& r, long n,
                                           const std::vector<long>& cols) {
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(r.dim, static_cast<long>(cols.size()));
  for (size_t j = 0; j < cols.size(); j++) M(cols[j], static_cast<long>(j)) = 1.0;
  for (long step = 0; step < n; step++) {
    Eigen::MatrixXcd Y = Eigen::MatrixXcd::Zero(r.dim, M.cols());
    for (const auto& t : r.entries) Y.row(t.row) += t.value * M.row(t.col);
    M = std::move(Y);
  }
  return M;
}

namespace {

std::complex<double> standard_complex(const FiniteRealization& r,
                                      const Eigen::MatrixXcd& C) {
  std::complex<double> s = 0;
  for (size_t j = 0; j < r.trace_indices.size(); j++)
    s += C(r.trace_indices[j], static_cast<long>(j));
  return s * to_double(r.normalization);
}

}  // namespace

double stage_trace_standard(const FiniteRealization& r, const Eigen::MatrixXcd& C) {
  return standard_complex(r, C).real();
}

std::complex<double> stage_trace_delocalized(const FiniteRealization& r,
                                             const Eigen::MatrixXcd& C,
                                             const ConjugacyClassInfo& cls) {
  if (cls.status != ClassStatus::Finite)
    throw std::invalid_argument("delocalized trace needs a finite conjugacy class");
  std::complex<double> s = 0;
  for (size_t j = 0; j < r.trace_indices.size(); j++)
    for (const auto& h : cls.elements) {
      long idx = r.translate(r.trace_indices[j], h);
      if (idx >= 0) s += C(idx, static_cast<long>(j));
    }
  return s * to_double(r.normalization);
}

std::complex<double> stage_trace_deviated(const FiniteRealization& r,
                                          const Eigen::MatrixXcd& C,
                                          const ConjugacyClassInfo& cls,
                                          DeviatedPart part) {
  std::complex<double> base = standard_complex(r, C);
  std::complex<double> zc = stage_trace_delocalized(r, C, cls);
  std::complex<double> zi =
      stage_trace_delocalized(r, C, inverse_class(r.stage_group, cls));
  double m = static_cast<double>(cls.size());
  if (part == DeviatedPart::Re) return base + (zc + zi) / (2.0 * m);
  return base + (zc - zi) * std::complex<double>(0, -0.5) / m;
}

TelescopeReport telescope_check(const RingMatrix<Cyclotomic>& A,
                                const FiniteRealization& r, const FolnerSet& fs,
                                long n, const ConjugacyClassInfo& cls,
                                DeviatedPart part) {
  TelescopeReport rep;
  rep.power = n;

  auto An = A.power(n);
  const auto& G = A.group();
  bool product = G->kind() == GroupKind::DirectProduct;
  for (int k = 0; k < An.dim(); k++)
    for (int l = 0; l < An.dim(); l++)
      for (const auto& [g, c] : An.at(k, l).terms()) {
        const std::vector<int64_t>& w =
            product ? std::get<std::vector<int64_t>>(
                          std::get<std::vector<GroupElement>>(g.v)[1].v)
                    : std::get<std::vector<int64_t>>(g.v);
        long dist = 0;
        for (int64_t x : w) dist += std::llabs(x);
        rep.R = std::max(rep.R, dist);
      }

  std::complex<double> limit = trace_deviated(An, cls, part).to_complex();
  auto C = realization_power_columns(r, n, r.trace_indices);
  std::complex<double> stage = stage_trace_deviated(r, C, cls, part);
  rep.lhs = std::abs(stage - limit);

  double kap = kappa(A).kappa;
  rep.c_n = 2.0 * static_cast<double>(n) * std::pow(kap, static_cast<double>(n));
  rep.defect = rep.R > 0 ? folner_defect(fs, rep.R) : 0.0;
  rep.rhs = rep.c_n * rep.defect;
  rep.ok = rep.lhs <= rep.rhs + 1e-9;
  return rep;
}

}  // namespace specdens
