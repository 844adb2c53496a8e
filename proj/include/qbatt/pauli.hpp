#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace qbatt {

enum class Pauli { X, Y, Z };

char pauli_letter(Pauli p);
Pauli pauli_from_letter(char c);

// One term of a k-local Hamiltonian: a real coefficient times a product of
// Pauli matrices, acting as the identity on every site not listed.
struct PauliTerm {
  double coefficient = 0.0;
  std::map<int, Pauli> letters;  // site index (0-based) -> letter

  int locality() const { return static_cast<int>(letters.size()); }
};

// Hermitian by construction: real coefficients times Hermitian strings.
struct PauliSum {
  int num_sites = 0;
  std::vector<PauliTerm> terms;

  // Largest number of sites any single term couples; 0 for the empty sum.
  int k_locality() const;
};

// Throws std::invalid_argument if a site index falls outside [0, num_sites)
// or num_sites exceeds kMaxSites.
void validate(const PauliSum& p);

// JSON wire format, also used by CLI configs and golden files:
//   {"num_sites": L, "terms": [{"coeff": c, "paulis": [[site, "X"], ...]}]}
nlohmann::json to_json(const PauliSum& p);
PauliSum pauli_sum_from_json(const nlohmann::json& j);

}  // namespace qbatt
