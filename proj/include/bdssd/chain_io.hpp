#pragma once

// Chain-spec files:
//   {"type": "discrete" | "continuous", "d": int,
//    "birth": [b_0 .. b_{d-1}], "death": [m_1 .. m_d], "hold": [r_0 .. r_d]}
// "hold" is optional and only meaningful for discrete chains. Entries are JSON
// numbers or strings holding integers, decimals or fractions such as "3/4".

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "bdssd/chain.hpp"
#include "bdssd/spectral.hpp"

namespace bdssd {

/// A parsed chain in both arithmetic modes. Exactly one of the kernel or
/// generator pairs is set, according to `time`.
struct ChainSpec {
  TimeType time = TimeType::Discrete;
  int d = 0;
  std::optional<ExactKernel> exact_kernel;
  std::optional<DiscreteKernel> kernel;
  std::optional<ExactGenerator> exact_generator;
  std::optional<ContinuousGenerator> generator;
  ValidationReport report;
};

/// Throws ParseError (with line and field) on malformed input and
/// ValidationError when the chain has negative entries or bad row sums.
ChainSpec parse_chain_spec(std::string_view text, std::string_view source = "<input>");
ChainSpec load_chain_spec(const std::filesystem::path& path);

nlohmann::ordered_json to_json(const ValidationReport& report);

template <class T>
nlohmann::ordered_json number_json(const T& x) {
  if constexpr (Scalar<T>::exact)
    return x.get_str();
  else
    return x;
}

template <class T>
nlohmann::ordered_json chain_json(const BasicDiscreteKernel<T>& k) {
  nlohmann::ordered_json j;
  j["type"] = "discrete";
  j["d"] = k.d();
  auto birth = nlohmann::ordered_json::array(), death = nlohmann::ordered_json::array(),
       hold = nlohmann::ordered_json::array();
  for (int i = 0; i < k.d(); ++i) birth.push_back(number_json(k.p(i)));
  for (int i = 1; i <= k.d(); ++i) death.push_back(number_json(k.q(i)));
  for (int i = 0; i <= k.d(); ++i) hold.push_back(number_json(k.r(i)));
  j["birth"] = birth;
  j["death"] = death;
  j["hold"] = hold;
  return j;
}

template <class T>
nlohmann::ordered_json chain_json(const BasicContinuousGenerator<T>& g) {
  nlohmann::ordered_json j;
  j["type"] = "continuous";
  j["d"] = g.d();
  auto birth = nlohmann::ordered_json::array(), death = nlohmann::ordered_json::array();
  for (int i = 0; i < g.d(); ++i) birth.push_back(number_json(g.birth(i)));
  for (int i = 1; i <= g.d(); ++i) death.push_back(number_json(g.death(i)));
  j["birth"] = birth;
  j["death"] = death;
  return j;
}

template <class T>
nlohmann::ordered_json matrix_json(const Matrix<T>& m) {
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::ordered_json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(number_json(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

/// Doubles as JSON; non-finite values become null.
nlohmann::ordered_json real_json(double x);

}  // namespace bdssd
