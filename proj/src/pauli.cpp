#include "qbatt/pauli.hpp"

#include <algorithm>
#include <stdexcept>

#include "qbatt/types.hpp"

namespace qbatt {

char pauli_letter(Pauli p) {
  switch (p) {
    case Pauli::X: return 'X';
    case Pauli::Y: return 'Y';
    case Pauli::Z: return 'Z';
  }
  throw std::logic_error("pauli_letter: bad enum value");
}

Pauli pauli_from_letter(char c) {
  switch (c) {
    case 'X': return Pauli::X;
    case 'Y': return Pauli::Y;
    case 'Z': return Pauli::Z;
    default: break;
  }
  throw std::invalid_argument(std::string("pauli_from_letter: expected X, Y or Z, got '") +
                              c + "'");
}

int PauliSum::k_locality() const {
  int k = 0;
  for (const auto& term : terms) k = std::max(k, term.locality());
  return k;
}

void validate(const PauliSum& p) {
  if (p.num_sites < 0)
    throw std::invalid_argument("PauliSum: negative num_sites");
  if (p.num_sites > kMaxSites)
    throw std::invalid_argument("PauliSum: num_sites " + std::to_string(p.num_sites) +
                                " exceeds the dimension limit of " +
                                std::to_string(kMaxSites) + " sites");
  for (const auto& term : p.terms) {
    for (const auto& [site, letter] : term.letters) {
      (void)letter;
      if (site < 0 || site >= p.num_sites)
        throw std::invalid_argument("PauliSum: site index " + std::to_string(site) +
                                    " out of range [0, " + std::to_string(p.num_sites) + ")");
    }
  }
}

nlohmann::json to_json(const PauliSum& p) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& term : p.terms) {
    nlohmann::json paulis = nlohmann::json::array();
    for (const auto& [site, letter] : term.letters)
      paulis.push_back({site, std::string(1, pauli_letter(letter))});
    terms.push_back({{"coeff", term.coefficient}, {"paulis", paulis}});
  }
  return {{"num_sites", p.num_sites}, {"terms", terms}};
}

PauliSum pauli_sum_from_json(const nlohmann::json& j) {
  PauliSum p;
  p.num_sites = j.at("num_sites").get<int>();
  for (const auto& jt : j.at("terms")) {
    PauliTerm term;
    term.coefficient = jt.at("coeff").get<double>();
    for (const auto& jp : jt.at("paulis")) {
      const int site = jp.at(0).get<int>();
      const std::string letter = jp.at(1).get<std::string>();
      if (letter.size() != 1)
        throw std::invalid_argument("PauliSum JSON: letter must be one character");
      if (term.letters.count(site))
        throw std::invalid_argument("PauliSum JSON: duplicate site in term");
      term.letters[site] = pauli_from_letter(letter[0]);
    }
    p.terms.push_back(std::move(term));
  }
  validate(p);
  return p;
}

}  // namespace qbatt
