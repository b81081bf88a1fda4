#pragma once

// Ground truth for matrices over Z^d, U x Z^d (U a finite table group), or a
// plain finite group: the operator becomes a matrix-valued trigonometric
// polynomial on the torus, and densities, kernel Fourier coefficients and
// log-determinants become quadratures over a uniform grid. The uniform grid
// is chosen so that an N-point evaluation samples exactly the eigenvalues of
// the mod-N quotient stage.

#include <complex>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "specdens/ring.hpp"

namespace specdens {

struct SymbolFunction {
  int torus_dim = 0;  // number of Z factors
  long m = 0;         // block size |U| * d
  int block_dim = 1;
  GroupPtr group;
  GroupPtr subgroup;  // U, or null when trivial
  bool hermitian = false;
  std::map<std::vector<long>, Eigen::MatrixXcd> coeffs;

  Eigen::MatrixXcd eval(const std::vector<double>& theta) const;
};

SymbolFunction build_symbol(const RingMatrix<Cyclotomic>& A);

struct OracleEstimate {
  double value = 0;
  double error = 0;     // |grid N vs grid 2N|
  double excluded = 0;  // spectral mass at or below tau (lndet only)
  bool separated = true;
  double tau = 0;
};

struct OracleCoefficient {
  std::complex<double> value;
  double error = 0;
  bool separated = true;
  double tau = 0;
};

// normalized eigenvalue-counting function: mass of spectrum <= lambda
OracleEstimate oracle_density(const RingMatrix<Cyclotomic>& A, double lambda, long N);

// Fourier coefficient of the kernel projection at the single element g
// (classes in these groups meet U x Z^d componentwise; averaging over a
// class is the caller's concern and trivial for the abelian factors).
OracleCoefficient oracle_kernel_coefficient(const RingMatrix<Cyclotomic>& A,
                                            const GroupElement& g, long N);

OracleEstimate oracle_lndet(const RingMatrix<Cyclotomic>& A, long N);

// all symbol eigenvalues over the N-grid, ascending; equals the spectrum of
// the mod-N quotient stage for U x Z matrices
std::vector<double> oracle_eigenvalue_multiset(const RingMatrix<Cyclotomic>& A, long N);

}  // namespace specdens
