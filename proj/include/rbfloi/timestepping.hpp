#pragma once

#include <deque>
#include <functional>
#include <map>
#include <span>
#include <tuple>
#include <vector>

#include "rbfloi/linalg.hpp"

namespace rbfloi {

using Fields = std::vector<Field>;

struct TimeState {
  double t = 0.0;
  long step = 0;
  Fields fields;
  // Previous solution levels, most recent first.
  std::deque<Fields> history;
  // Previous explicit right-hand sides (SBDF2), most recent first.
  std::deque<Fields> explicit_history;
};

using RhsFunction = std::function<Fields(double t, const Fields& state)>;
using ForcingFunction = std::function<Fields(double t)>;
using ExactFunction = std::function<Fields(double t)>;

struct Progress {
  long every = 0;  // 0 disables the callback
  std::function<void(long step, double t, std::span<const double> norms)> callback;

  void report(const TimeState& s) const;
};

// Throws ErrorKind::divergence naming the step when any entry is not finite.
void check_finite(const Fields& f, long step, double t);

TimeState rk4_advance(const RhsFunction& rhs, TimeState state, double dt, long steps,
                      const Progress& progress = {});

// Stiff linear operators D_f, one per field. Solves (lead I - dt D_f) x = b,
// factoring each distinct (field, lead, dt) once.
class ImplicitOperator {
 public:
  explicit ImplicitOperator(std::vector<SparseMatrix> per_field);

  int field_count() const { return static_cast<int>(ops_.size()); }
  const SparseMatrix& op(int field) const { return ops_.at(field); }
  Fields apply(const Fields& c) const;
  // Factors (lead I - dt D_f) now if it is not cached yet.
  void prepare(int field, double lead, double dt);
  Field solve(int field, double lead, double dt, const Field& b);
  int factorization_count() const;

 private:
  std::vector<SparseMatrix> ops_;
  SparseLUHandle& handle(int field, double lead, double dt);

  std::map<std::tuple<int, double, double>, SparseLUHandle> cache_;
};

// State at t0 + (levels - 1) dt with the exact solution at the earlier levels
// as history.
TimeState seed_exact(const ExactFunction& exact, double t0, double dt, int levels);

// Fills three history levels by BDF1, BDF2, then BDF3 at dt/4, leaving the
// state at t0 + 3 dt.
TimeState bdf4_bootstrap(ImplicitOperator& op, const ForcingFunction& forcing, TimeState state,
                         double dt);

// (25/12) c^{n+1} - 4 c^n + 3 c^{n-1} - (4/3) c^{n-2} + (1/4) c^{n-3}
//   = dt (D c^{n+1} + f^{n+1}). An empty forcing means f = 0.
TimeState bdf4_advance(ImplicitOperator& op, const ForcingFunction& forcing, TimeState state,
                       double dt, long steps, const Progress& progress = {});

// (3/2) c^{n+1} - 2 c^n + (1/2) c^{n-1} = dt (D c^{n+1} + 2 E^n - E^{n-1}).
// Without history the first step is IMEX Euler.
TimeState sbdf2_advance(ImplicitOperator& op, const RhsFunction& explicit_rhs, TimeState state,
                        double dt, long steps, const Progress& progress = {});

}  // namespace rbfloi
