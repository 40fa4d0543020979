#include "fixtures.hpp"

#include "oracles.hpp"

#include <sstream>

namespace lsemink::testing {

namespace {

Vector random_simplex(Rng& rng, Eigen::Index m) {
  Vector c(m);
  for (Eigen::Index i = 0; i < m; ++i) c[i] = 0.05 + rng.uniform();
  return c / c.sum();
}

}  // namespace

LseObjective random_objective(Rng& rng, Eigen::Index m, Eigen::Index n, std::size_t terms,
                              double alpha) {
  std::vector<LinearTerm> list;
  for (std::size_t k = 0; k < terms; ++k) {
    LinearTerm t;
    t.op = std::make_shared<DenseOperator>(rng.normal_matrix(m, n));
    t.offset = rng.normal_vector(m);
    t.target = random_simplex(rng, m);
    t.weight = 0.5 + rng.uniform();
    list.push_back(std::move(t));
  }
  return LseObjective(std::move(list), alpha);
}

LseObjective stationary_objective(Rng& rng, Eigen::Index m, Eigen::Index n, const Vector& x0) {
  LinearTerm t;
  const Matrix j = rng.normal_matrix(m, n);
  t.op = std::make_shared<DenseOperator>(j);
  t.offset = rng.normal_vector(m);
  t.target = oracle::softmax(j * x0 + t.offset);
  return LseObjective({t}, 0.0);
}

bool armijo_holds(const SolveTrace& trace, double gamma, std::string* why) {
  for (std::size_t i = 1; i < trace.records.size(); ++i) {
    const IterationRecord& prev = trace.records[i - 1];
    const IterationRecord& cur = trace.records[i];
    if (!(cur.slope < 0.0) || !(cur.f <= prev.f + gamma * cur.slope)) {
      if (why != nullptr) {
        std::ostringstream os;
        os.precision(17);
        os << trace.method << " record " << i << ": f " << prev.f << " -> " << cur.f
           << " slope " << cur.slope;
        *why = os.str();
      }
      return false;
    }
  }
  return true;
}

bool monotone(const SolveTrace& trace) {
  for (std::size_t i = 1; i < trace.records.size(); ++i) {
    if (trace.records[i].f > trace.records[i - 1].f) return false;
  }
  return true;
}

}  // namespace lsemink::testing
