#include "decc/nelder_mead.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace decc {

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& objective,
                             const Eigen::VectorXd& x0, const Eigen::VectorXd& steps,
                             NelderMeadOptions options) {
  const Eigen::Index n = x0.size();
  if (steps.size() != n || n == 0) {
    throw std::invalid_argument("nelder_mead: step vector must match the start point");
  }
  std::vector<Eigen::VectorXd> simplex(static_cast<std::size_t>(n + 1), x0);
  std::vector<double> f(static_cast<std::size_t>(n + 1));
  for (Eigen::Index k = 0; k < n; ++k) simplex[static_cast<std::size_t>(k + 1)](k) += steps(k);
  for (std::size_t k = 0; k < simplex.size(); ++k) f[k] = objective(simplex[k]);

  std::vector<std::size_t> order(simplex.size());
  auto sort_simplex = [&]() {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
  };

  NelderMeadResult result;
  sort_simplex();
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[order.size() - 2];
    if (f[worst] - f[best] < options.f_tolerance) {
      result.converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k + 1 < order.size(); ++k) centroid += simplex[order[k]];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd reflected = centroid + (centroid - simplex[worst]);
    const double fr = objective(reflected);
    if (fr < f[best]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - simplex[worst]);
      const double fe = objective(expanded);
      if (fe < fr) {
        simplex[worst] = expanded;
        f[worst] = fe;
      } else {
        simplex[worst] = reflected;
        f[worst] = fr;
      }
    } else if (fr < f[second_worst]) {
      simplex[worst] = reflected;
      f[worst] = fr;
    } else {
      const bool outside = fr < f[worst];
      const Eigen::VectorXd contracted =
          outside ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid))
                  : Eigen::VectorXd(centroid + 0.5 * (simplex[worst] - centroid));
      const double fc = objective(contracted);
      if (fc < (outside ? fr : f[worst])) {
        simplex[worst] = contracted;
        f[worst] = fc;
      } else {
        for (std::size_t k = 1; k < order.size(); ++k) {
          auto& vertex = simplex[order[k]];
          vertex = simplex[best] + 0.5 * (vertex - simplex[best]);
          f[order[k]] = objective(vertex);
        }
      }
    }
    sort_simplex();
  }
  result.x = simplex[order.front()];
  result.value = f[order.front()];
  result.iterations = iter;
  return result;
}

}  // namespace decc
