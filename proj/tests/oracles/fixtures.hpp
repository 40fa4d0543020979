#ifndef LSEMINK_TESTS_FIXTURES_HPP
#define LSEMINK_TESTS_FIXTURES_HPP

#include "lsemink/objective.hpp"
#include "lsemink/rng.hpp"
#include "lsemink/solvers.hpp"

namespace lsemink::testing {

// N dense terms with normal J (m x n), normal b, random simplex targets and
// positive weights.
LseObjective random_objective(Rng& rng, Eigen::Index m, Eigen::Index n, std::size_t terms,
                              double alpha);

// One term whose target is the softmax at x0, so x0 is a minimizer.
LseObjective stationary_objective(Rng& rng, Eigen::Index m, Eigen::Index n, const Vector& x0);

// Every accepted record satisfies f_new <= f_old + gamma * slope with slope < 0.
bool armijo_holds(const SolveTrace& trace, double gamma, std::string* why = nullptr);
bool monotone(const SolveTrace& trace);

}  // namespace lsemink::testing

#endif  // LSEMINK_TESTS_FIXTURES_HPP
