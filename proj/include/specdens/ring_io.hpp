#pragma once

#include "json.hpp"
#include "specdens/ring.hpp"

namespace specdens {

// Serialization: an element is a list of [group-word, coefficient-string]
// pairs; a matrix is a d x d nested list of elements. Coefficient strings
// are the Cyclotomic grammar ("2", "-1/3", "1/2*z^3@8", sums thereof).

nlohmann::json serialize_element(const RingElement<Cyclotomic>& a);
RingElement<Cyclotomic> parse_element(const nlohmann::json& j, const GroupPtr& g);

nlohmann::json serialize_matrix(const RingMatrix<Cyclotomic>& A);
RingMatrix<Cyclotomic> parse_matrix(const nlohmann::json& j, const GroupPtr& g);

}  // namespace specdens
