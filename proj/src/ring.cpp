#include "specdens/ring.hpp"

#include <numeric>

#include "specdens/ring_io.hpp"

namespace specdens {

ConjugacyClassInfo inverse_class(const GroupPtr& g, const ConjugacyClassInfo& cls) {
  ConjugacyClassInfo inv;
  inv.status = cls.status;
  inv.representative = g->inverse(cls.representative);
  for (const auto& h : cls.elements) inv.elements.push_back(g->inverse(h));
  std::sort(inv.elements.begin(), inv.elements.end());
  return inv;
}

RingMatrix<std::complex<double>> to_float(const RingMatrix<Cyclotomic>& A) {
  RingMatrix<std::complex<double>> r(A.group(), A.dim());
  for (int k = 0; k < A.dim(); k++)
    for (int l = 0; l < A.dim(); l++)
      for (const auto& [x, c] : A.at(k, l).terms())
        r.at(k, l).add_term(x, c.to_complex());
  return r;
}

unsigned field_conductor(const RingMatrix<Cyclotomic>& A) {
  unsigned n = 1;
  for (int k = 0; k < A.dim(); k++)
    for (int l = 0; l < A.dim(); l++)
      for (const auto& [x, c] : A.at(k, l).terms())
        n = std::lcm(n, c.minimal_conductor());
  return n;
}

RingMatrix<Cyclotomic> galois_conjugate(const RingMatrix<Cyclotomic>& A, unsigned j) {
  unsigned n = field_conductor(A);
  if (n > 1 && std::gcd(j % n, n) != 1)
    throw std::invalid_argument("galois index not coprime to the conductor");
  RingMatrix<Cyclotomic> r(A.group(), A.dim());
  for (int k = 0; k < A.dim(); k++)
    for (int l = 0; l < A.dim(); l++)
      for (const auto& [x, c] : A.at(k, l).terms()) {
        // The stored representation may live at a larger conductor N than
        // the field conductor n. Lift j to an exponent J = j (mod n) with
        // gcd(J, N) = 1; the value lies in Q(zeta_n), where sigma_J acts as
        // sigma_j, so the choice of lift does not matter.
        unsigned N = std::lcm(n, c.conductor());
        unsigned J = j % N;
        while (std::gcd(J, N) != 1) J += n;
        r.at(k, l).add_term(x, c.lifted(N).galois(J));
      }
  return r;
}

DetBoundRhs determinant_lower_bound_rhs(const RingMatrix<Cyclotomic>& A) {
  DetBoundRhs out;
  out.conductor = field_conductor(A);
  out.num_embeddings = static_cast<int>(euler_phi(out.conductor));
  double sum = 0.0;
  for (unsigned j = 2; j < out.conductor; j++) {
    if (std::gcd(j, out.conductor) != 1) continue;
    sum += std::log(kappa(galois_conjugate(A, j)).kappa);
  }
  out.b0 = -A.dim() * sum;
  out.b1 = -2.0 * A.dim() * std::abs(sum);
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

nlohmann::json serialize_element(const RingElement<Cyclotomic>& a) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& [x, c] : a.terms())
    j.push_back({a.group()->format(x), c.str()});
  return j;
}

RingElement<Cyclotomic> parse_element(const nlohmann::json& j, const GroupPtr& g) {
  if (!j.is_array())
    throw std::invalid_argument("ring element must be a list of [word, coeff] pairs");
  RingElement<Cyclotomic> a(g);
  for (const auto& pair : j) {
    if (!pair.is_array() || pair.size() != 2)
      throw std::invalid_argument("ring element term must be a [word, coeff] pair");
    a.add_term(g->parse(pair[0].get<std::string>()),
               Cyclotomic::parse(pair[1].get<std::string>()));
  }
  return a;
}

nlohmann::json serialize_matrix(const RingMatrix<Cyclotomic>& A) {
  nlohmann::json rows = nlohmann::json::array();
  for (int k = 0; k < A.dim(); k++) {
    nlohmann::json row = nlohmann::json::array();
    for (int l = 0; l < A.dim(); l++) row.push_back(serialize_element(A.at(k, l)));
    rows.push_back(row);
  }
  return rows;
}

RingMatrix<Cyclotomic> parse_matrix(const nlohmann::json& j, const GroupPtr& g) {
  if (!j.is_array() || j.empty())
    throw std::invalid_argument("matrix must be a nonempty nested list");
  int d = static_cast<int>(j.size());
  RingMatrix<Cyclotomic> A(g, d);
  for (int k = 0; k < d; k++) {
    if (!j[k].is_array() || static_cast<int>(j[k].size()) != d)
      throw std::invalid_argument("matrix rows must all have length d");
    for (int l = 0; l < d; l++) A.at(k, l) = parse_element(j[k][l], g);
  }
  return A;
}

double default_tau(const RingMatrix<Cyclotomic>& A) {
  return std::max(1e-10 * kappa(A).kappa, 1e-12);
}

}  // namespace specdens
