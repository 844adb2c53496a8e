#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qbatt/pauli.hpp"
#include "qbatt/types.hpp"

using namespace qbatt;

TEST_CASE("pauli letters round trip") {
  for (Pauli p : {Pauli::X, Pauli::Y, Pauli::Z})
    CHECK(pauli_from_letter(pauli_letter(p)) == p);
  CHECK_THROWS_AS(pauli_from_letter('Q'), std::invalid_argument);
  CHECK_THROWS_AS(pauli_from_letter('x'), std::invalid_argument);
}

TEST_CASE("k_locality is the largest term support") {
  PauliSum p;
  p.num_sites = 4;
  CHECK(p.k_locality() == 0);
  p.terms.push_back({1.0, {{0, Pauli::X}}});
  CHECK(p.k_locality() == 1);
  p.terms.push_back({-0.5, {{1, Pauli::Y}, {3, Pauli::Z}}});
  CHECK(p.k_locality() == 2);
  p.terms.push_back({0.25, {{0, Pauli::X}, {1, Pauli::X}, {2, Pauli::X}, {3, Pauli::X}}});
  CHECK(p.k_locality() == 4);
}

TEST_CASE("validate rejects bad site indices and oversized lattices") {
  PauliSum p;
  p.num_sites = 2;
  p.terms.push_back({1.0, {{2, Pauli::X}}});
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
  p.terms[0].letters = {{-1, Pauli::X}};
  CHECK_THROWS_AS(validate(p), std::invalid_argument);
  p.terms[0].letters = {{1, Pauli::X}};
  CHECK_NOTHROW(validate(p));

  PauliSum big;
  big.num_sites = kMaxSites + 1;
  CHECK_THROWS_AS(validate(big), std::invalid_argument);
}

TEST_CASE("JSON wire format") {
  PauliSum p;
  p.num_sites = 2;
  p.terms.push_back({0.5, {{0, Pauli::X}, {1, Pauli::Y}}});

  SUBCASE("golden serialization") {
    CHECK(to_json(p).dump() ==
          R"({"num_sites":2,"terms":[{"coeff":0.5,"paulis":[[0,"X"],[1,"Y"]]}]})");
  }

  SUBCASE("round trip") {
    const PauliSum q = pauli_sum_from_json(to_json(p));
    REQUIRE(q.num_sites == p.num_sites);
    REQUIRE(q.terms.size() == p.terms.size());
    CHECK(q.terms[0].coefficient == p.terms[0].coefficient);
    CHECK(q.terms[0].letters == p.terms[0].letters);
  }

  SUBCASE("parse errors") {
    auto j = to_json(p);
    j["terms"][0]["paulis"][0][1] = "Q";
    CHECK_THROWS_AS(pauli_sum_from_json(j), std::invalid_argument);

    auto dup = to_json(p);
    dup["terms"][0]["paulis"] = nlohmann::json::array({{0, "X"}, {0, "Y"}});
    CHECK_THROWS_AS(pauli_sum_from_json(dup), std::invalid_argument);

    auto out_of_range = to_json(p);
    out_of_range["terms"][0]["paulis"] = nlohmann::json::array({{5, "X"}});
    CHECK_THROWS_AS(pauli_sum_from_json(out_of_range), std::invalid_argument);
  }
}
