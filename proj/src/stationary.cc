#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <vector>

#include "osmp/dtmc.h"
#include "osmp/error.h"

namespace osmp {

namespace {

using Graph = std::vector<std::vector<int>>;

// Tarjan over the subgraph reachable from start. comp[v] = -1 for vertices
// not reached.
std::vector<int> strongly_connected(const Graph& g, int start, int& n_comp) {
  const int n = static_cast<int>(g.size());
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1), stack;
  std::vector<bool> on_stack(n, false);
  int counter = 0;
  n_comp = 0;
  std::function<void(int)> visit = [&](int v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (int w : g[v]) {
      if (index[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      int w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp[w] = n_comp;
      } while (w != v);
      ++n_comp;
    }
  };
  visit(start);
  return comp;
}

double residual_of(const Eigen::RowVectorXd& pi, const Eigen::MatrixXd& p) {
  return (pi * p - pi).cwiseAbs().maxCoeff();
}

}  // namespace

Stationary stationary_distribution(const Eigen::MatrixXd& p, int start, const StationaryOptions& opt) {
  const int n = static_cast<int>(p.rows());
  if (n == 0 || p.cols() != n || start < 0 || start >= n) {
    throw Error(Errc::kInvalidState, "bad matrix or start state");
  }
  Graph g(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (p(i, j) > 0.0) g[i].push_back(j);
    }
  }
  int n_comp = 0;
  const auto comp = strongly_connected(g, start, n_comp);

  std::vector<bool> closed(n_comp, true);
  for (int v = 0; v < n; ++v) {
    if (comp[v] < 0) continue;
    for (int w : g[v]) {
      if (comp[w] != comp[v]) closed[comp[v]] = false;
    }
  }
  int target = comp[start];
  if (!closed[target]) {
    target = -1;
    for (int c = 0; c < n_comp; ++c) {
      if (!closed[c]) continue;
      if (target >= 0) throw Error(Errc::kAmbiguousClass, "several closed classes reachable from start");
      target = c;
    }
  }

  std::vector<int> members;
  for (int v = 0; v < n; ++v) {
    if (comp[v] == target) members.push_back(v);
  }
  const int m = static_cast<int>(members.size());

  // Direct solve of pi (P_C - I) = 0 with one equation swapped for sum(pi) = 1.
  Eigen::MatrixXd a(m, m);
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < m; ++c) a(r, c) = p(members[c], members[r]) - (r == c ? 1.0 : 0.0);
  }
  a.row(m - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  rhs[m - 1] = 1.0;
  Eigen::VectorXd sub = a.fullPivLu().solve(rhs);

  Eigen::RowVectorXd pi = Eigen::RowVectorXd::Zero(n);
  for (int r = 0; r < m; ++r) pi[members[r]] = std::max(0.0, sub[r]);
  pi /= pi.sum();

  Stationary out;
  double res = residual_of(pi, p);
  if (!(res < opt.tol) || !std::isfinite(res)) {
    pi = Eigen::RowVectorXd::Zero(n);
    for (int v : members) pi[v] = 1.0 / m;
    for (long it = 0; it < opt.max_iter; ++it) {
      Eigen::RowVectorXd next = pi * p;
      next /= next.sum();
      pi = next;
      ++out.iterations;
      if (out.iterations % 64 == 0 && residual_of(pi, p) < opt.tol) break;
    }
    res = residual_of(pi, p);
    if (!(res < opt.tol)) {
      throw Error(Errc::kNoConvergence, "stationary residual " + std::to_string(res));
    }
  }
  out.pi = pi.transpose();
  out.residual = res;
  out.class_size = m;
  return out;
}

Stationary stationary_distribution(const TransitionMatrix& m, const StationaryOptions& opt) {
  int start = opt.start;
  if (start < 0) start = m.index_of({Mode::Active, Mode::Active, 0});
  auto st = stationary_distribution(m.probs, start, opt);
  for (int i = 0; i < m.size(); ++i) {
    if (m.flagged[i]) st.flagged_mass += st.pi[i];
  }
  return st;
}

}  // namespace osmp
