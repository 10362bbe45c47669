#include "formation/random.hpp"

namespace formation {

Configuration random_configuration(int n, int d, Rng &rng) {
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  Eigen::VectorXd x(static_cast<Eigen::Index>(n) * d);
  for (Eigen::Index k = 0; k < x.size(); ++k)
    x(k) = coord(rng);
  return Configuration(d, std::move(x));
}

Configuration perturb(const Configuration &p, double scale, Rng &rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd x = p.coords();
  for (Eigen::Index k = 0; k < x.size(); ++k)
    x(k) += scale * gauss(rng);
  return Configuration(p.dim(), std::move(x));
}

} // namespace formation
