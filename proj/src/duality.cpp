#include "bdssd/duality.hpp"

namespace bdssd {

DualPair<DiscreteKernel> spectral_dual_discrete(const DiscreteKernel& kernel) {
  require_ergodic(kernel);
  const QFamily fam = q_family_discrete(kernel);
  const auto& theta = fam.spectrum.values;
  const int d = kernel.d();
  std::vector<double> birth, death(static_cast<std::size_t>(d), 0.0), hold;
  for (int i = 0; i < d; ++i) birth.push_back(1.0 - theta[i]);
  for (int i = 0; i <= d; ++i) hold.push_back(theta[i]);
  DiscreteKernel dual(std::move(birth), std::move(death), std::move(hold));
  Matrix<double> link = fam.link();
  const double residual = intertwining_residual(link, kernel, dual);
  const bool sharp = is_sharp(link);
  return {kernel, std::move(dual), std::move(link), residual, sharp};
}

DualPair<ContinuousGenerator> spectral_dual_generator(const ContinuousGenerator& gen) {
  require_ergodic(gen);
  const QFamily fam = q_family_continuous(gen);
  const auto& nu = fam.spectrum.values;
  const int d = gen.d();
  std::vector<double> birth(nu.begin(), nu.begin() + d), death(static_cast<std::size_t>(d), 0.0);
  ContinuousGenerator dual(std::move(birth), std::move(death));
  Matrix<double> link = fam.link();
  const double residual = intertwining_residual(link, gen, dual);
  const bool sharp = is_sharp(link);
  return {gen, std::move(dual), std::move(link), residual, sharp};
}

}  // namespace bdssd
