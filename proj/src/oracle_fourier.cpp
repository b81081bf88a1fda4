#include "specdens/oracle_fourier.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace specdens {

namespace {

struct Shape {
  GroupPtr U;      // null when trivial
  int torus_dim = 0;
  long u_order = 1;
};

Shape classify(const GroupPtr& G) {
  Shape s;
  if (G->kind() == GroupKind::FreeAbelian) {
    s.torus_dim = G->rank();
  } else if (G->kind() == GroupKind::FiniteTable) {
    s.U = G;
    s.u_order = G->order();
  } else if (G->kind() == GroupKind::DirectProduct && G->factors().size() == 2 &&
             G->factors()[0]->is_finite() &&
             G->factors()[1]->kind() == GroupKind::FreeAbelian) {
    s.U = G->factors()[0];
    s.u_order = s.U->order();
    s.torus_dim = G->factors()[1]->rank();
  } else {
    throw std::invalid_argument("oracle supports Z^d, U x Z^d, and finite groups only");
  }
  return s;
}

std::pair<GroupElement, std::vector<long>> split_element(const GroupPtr& G,
                                                         const Shape& s,
                                                         const GroupElement& g) {
  std::pair<GroupElement, std::vector<long>> out;
  if (G->kind() == GroupKind::FreeAbelian) {
    const auto& w = std::get<std::vector<int64_t>>(g.v);
    out.second.assign(w.begin(), w.end());
    out.first = GroupElement{};
  } else if (G->kind() == GroupKind::FiniteTable) {
    out.first = g;
  } else {
    const auto& comps = std::get<std::vector<GroupElement>>(g.v);
    out.first = comps[0];
    const auto& w = std::get<std::vector<int64_t>>(comps[1].v);
    out.second.assign(w.begin(), w.end());
  }
  return out;
}

// iterate theta over the uniform N-grid of the torus_dim torus
template <class F>
void for_grid(int torus_dim, long N, F&& fn) {
  std::vector<long> idx(torus_dim, 0);
  std::vector<double> theta(torus_dim, 0.0);
  for (;;) {
    for (int i = 0; i < torus_dim; i++) theta[i] = 2.0 * M_PI * idx[i] / N;
    fn(theta);
    int pos = torus_dim - 1;
    while (pos >= 0 && ++idx[pos] == N) idx[pos--] = 0;
    if (pos < 0) break;
  }
}

long grid_size(int torus_dim, long N) {
  long g = 1;
  for (int i = 0; i < torus_dim; i++) g *= N;
  return g;
}

struct DensitySweep {
  double value = 0;
  bool separated = true;
};

DensitySweep density_at(const SymbolFunction& sym, double lambda, long N,
                              double tau) {
  DensitySweep out;
  long count = 0;
  for_grid(sym.torus_dim, N, [&](const std::vector<double>& theta) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sym.eval(theta),
                                                       Eigen::EigenvaluesOnly);
    for (long j = 0; j < sym.m; j++) {
      double ev = es.eigenvalues()[j];
      if (ev <= lambda + tau) count++;
      else if (ev <= lambda + 10 * tau) out.separated = false;
    }
  });
  long denom = grid_size(sym.torus_dim, N) * (sym.m / sym.block_dim);
  out.value = static_cast<double>(count) / static_cast<double>(denom);
  return out;
}

struct SweepCoefficient {
  std::complex<double> value{0, 0};
  double near_mass = 0;
  bool separated = true;
};

SweepCoefficient coefficient_at(const SymbolFunction& sym, const GroupElement& g_u,
                                const std::vector<long>& g_w, long N, double tau) {
  SweepCoefficient out;
  int d = sym.block_dim;
  long u = sym.m / d;
  long near = 0;
  for_grid(sym.torus_dim, N, [&](const std::vector<double>& theta) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sym.eval(theta));
    Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(sym.m, sym.m);
    for (long j = 0; j < sym.m; j++) {
      double ev = es.eigenvalues()[j];
      if (ev <= tau)
        P += es.eigenvectors().col(j) * es.eigenvectors().col(j).adjoint();
      else if (ev <= 10 * tau) {
        near++;
        out.separated = false;
      }
    }
    std::complex<double> w = 0;
    for (long v = 0; v < u; v++) {
      long rv = sym.subgroup
                    ? sym.subgroup->index_of(
                          sym.subgroup->mul(g_u, sym.subgroup->element_at(v)))
                    : 0;
      for (int k = 0; k < d; k++) w += P(rv * d + k, v * d + k);
    }
    double phase = 0;
    for (size_t i = 0; i < g_w.size(); i++) phase += theta[i] * g_w[i];
    out.value += w * std::exp(std::complex<double>(0, phase));
  });
  long denom = grid_size(sym.torus_dim, N) * u;
  out.value /= static_cast<double>(denom);
  out.near_mass = static_cast<double>(near) / static_cast<double>(denom);
  return out;
}

struct SweepLndet {
  double value = 0;
  double excluded = 0;
  bool separated = true;
};

SweepLndet lndet_at(const SymbolFunction& sym, long N, double tau) {
  SweepLndet out;
  double acc = 0;
  long excluded = 0;
  for_grid(sym.torus_dim, N, [&](const std::vector<double>& theta) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sym.eval(theta),
                                                       Eigen::EigenvaluesOnly);
    for (long j = 0; j < sym.m; j++) {
      double ev = es.eigenvalues()[j];
      if (ev > tau) {
        acc += std::log(ev);
        if (ev <= 10 * tau) out.separated = false;
      } else {
        excluded++;
      }
    }
  });
  long denom = grid_size(sym.torus_dim, N) * (sym.m / sym.block_dim);
  out.value = acc / static_cast<double>(denom);
  out.excluded = static_cast<double>(excluded) / static_cast<double>(denom);
  return out;
}

}  // namespace

Eigen::MatrixXcd SymbolFunction::eval(const std::vector<double>& theta) const {
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(m, m);
  for (const auto& [w, B] : coeffs) {
    double ph = 0;
    for (size_t i = 0; i < w.size(); i++) ph -= theta[i] * w[i];
    M += std::exp(std::complex<double>(0, ph)) * B;
  }
  return M;
}

SymbolFunction build_symbol(const RingMatrix<Cyclotomic>& A) {
  const auto& G = A.group();
  Shape s = classify(G);
  SymbolFunction sym;
  sym.group = G;
  sym.subgroup = s.U;
  sym.torus_dim = s.torus_dim;
  sym.block_dim = A.dim();
  sym.m = s.u_order * A.dim();
  sym.hermitian = is_hermitian(A);

  int d = A.dim();
  for (int k = 0; k < d; k++)
    for (int l = 0; l < d; l++)
      for (const auto& [g, c] : A.at(k, l).terms()) {
        auto [g_u, g_w] = split_element(G, s, g);
        auto it = sym.coeffs.find(g_w);
        if (it == sym.coeffs.end())
          it = sym.coeffs.emplace(g_w, Eigen::MatrixXcd::Zero(sym.m, sym.m)).first;
        std::complex<double> cv = c.to_complex();
        for (long v = 0; v < s.u_order; v++) {
          long rv = s.U ? s.U->index_of(s.U->mul(g_u, s.U->element_at(v))) : 0;
          it->second(rv * d + k, v * d + l) += cv;
        }
      }
  return sym;
}

OracleEstimate oracle_density(const RingMatrix<Cyclotomic>& A, double lambda, long N) {
  auto sym = build_symbol(A);
  if (!sym.hermitian) throw std::invalid_argument("density needs a Hermitian matrix");
  double tau = default_tau(A);
  auto coarse = density_at(sym, lambda, N, tau);
  auto fine = density_at(sym, lambda, 2 * N, tau);
  OracleEstimate e;
  e.value = fine.value;
  e.error = std::abs(fine.value - coarse.value);
  e.separated = fine.separated && coarse.separated;
  e.tau = tau;
  return e;
}

OracleCoefficient oracle_kernel_coefficient(const RingMatrix<Cyclotomic>& A,
                                            const GroupElement& g, long N) {
  auto sym = build_symbol(A);
  if (!sym.hermitian)
    throw std::invalid_argument("kernel projection needs a Hermitian matrix");
  A.group()->check_element(g);
  Shape s = classify(A.group());
  auto [g_u, g_w] = split_element(A.group(), s, g);
  double tau = default_tau(A);
  auto coarse = coefficient_at(sym, g_u, g_w, N, tau);
  auto fine = coefficient_at(sym, g_u, g_w, 2 * N, tau);
  OracleCoefficient c;
  c.value = fine.value;
  c.error = std::abs(fine.value - coarse.value) + fine.near_mass;
  c.separated = fine.separated && coarse.separated;
  c.tau = tau;
  return c;
}

OracleEstimate oracle_lndet(const RingMatrix<Cyclotomic>& A, long N) {
  auto sym = build_symbol(A);
  if (!sym.hermitian) throw std::invalid_argument("lndet needs a Hermitian matrix");
  double tau = default_tau(A);
  auto coarse = lndet_at(sym, N, tau);
  auto fine = lndet_at(sym, 2 * N, tau);
  OracleEstimate e;
  e.value = fine.value;
  e.error = std::abs(fine.value - coarse.value);
  e.excluded = fine.excluded;
  e.separated = fine.separated && coarse.separated;
  e.tau = tau;
  return e;
}

std::vector<double> oracle_eigenvalue_multiset(const RingMatrix<Cyclotomic>& A, long N) {
  auto sym = build_symbol(A);
  if (!sym.hermitian) throw std::invalid_argument("multiset needs a Hermitian matrix");
  std::vector<double> out;
  for_grid(sym.torus_dim, N, [&](const std::vector<double>& theta) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sym.eval(theta),
                                                       Eigen::EigenvaluesOnly);
    for (long j = 0; j < sym.m; j++) out.push_back(es.eigenvalues()[j]);
  });
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace specdens
