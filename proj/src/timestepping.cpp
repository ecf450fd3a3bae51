#include "rbfloi/timestepping.hpp"

#include <array>
#include <sstream>

#include "rbfloi/errors.hpp"

namespace rbfloi {

namespace {

// Backward differentiation: lead * c^{n+1} = sum_q hist[q] * c^{n-q} + h (D c^{n+1} + f).
struct BdfCoefficients {
  double lead;
  std::array<double, 4> hist;
};

constexpr std::array<BdfCoefficients, 4> kBdf = {{
    {1.0, {1.0, 0.0, 0.0, 0.0}},
    {1.5, {2.0, -0.5, 0.0, 0.0}},
    {11.0 / 6.0, {3.0, -1.5, 1.0 / 3.0, 0.0}},
    {25.0 / 12.0, {4.0, -3.0, 4.0 / 3.0, -0.25}},
}};

// Axpy over every field.
void add_scaled(Fields& acc, double a, const Fields& x) {
  for (std::size_t f = 0; f < acc.size(); ++f) acc[f] += a * x[f];
}

Fields bdf_step(ImplicitOperator& op, const ForcingFunction& forcing, const TimeState& s, int order,
                double h) {
  const BdfCoefficients& k = kBdf.at(order - 1);
  Fields rhs = s.fields;
  for (auto& f : rhs) f *= k.hist[0];
  for (int q = 1; q < order; ++q) add_scaled(rhs, k.hist[q], s.history[q - 1]);
  if (forcing) add_scaled(rhs, h, forcing(s.t + h));
  Fields next(rhs.size());
  for (std::size_t f = 0; f < rhs.size(); ++f) {
    next[f] = op.solve(static_cast<int>(f), k.lead, h, rhs[f]);
  }
  return next;
}

void push_level(TimeState& s, Fields next, double h, std::size_t keep) {
  s.history.push_front(std::move(s.fields));
  while (s.history.size() > keep) s.history.pop_back();
  s.fields = std::move(next);
  s.t += h;
  ++s.step;
}

void require_fields(const ImplicitOperator& op, const TimeState& s) {
  if (static_cast<int>(s.fields.size()) != op.field_count()) {
    throw Error(ErrorKind::dimension, "state field count does not match the implicit operator");
  }
}

}  // namespace

void Progress::report(const TimeState& s) const {
  if (every <= 0 || !callback || s.step % every != 0) return;
  std::vector<double> norms;
  for (const auto& f : s.fields) norms.push_back(f.norm());
  callback(s.step, s.t, norms);
}

void check_finite(const Fields& f, long step, double t) {
  for (const auto& x : f) {
    if (!x.allFinite()) {
      std::ostringstream msg;
      msg << "non-finite value at step " << step << " (t = " << t << ")";
      throw Error(ErrorKind::divergence, msg.str());
    }
  }
}

TimeState rk4_advance(const RhsFunction& rhs, TimeState s, double dt, long steps,
                      const Progress& progress) {
  if (!(dt > 0.0)) throw Error(ErrorKind::config, "rk4: dt must be positive");
  for (long i = 0; i < steps; ++i) {
    const long step = s.step + 1;
    const Fields k1 = rhs(s.t, s.fields);
    check_finite(k1, step, s.t);
    Fields y = s.fields;
    add_scaled(y, 0.5 * dt, k1);
    const Fields k2 = rhs(s.t + 0.5 * dt, y);
    check_finite(k2, step, s.t);
    y = s.fields;
    add_scaled(y, 0.5 * dt, k2);
    const Fields k3 = rhs(s.t + 0.5 * dt, y);
    check_finite(k3, step, s.t);
    y = s.fields;
    add_scaled(y, dt, k3);
    const Fields k4 = rhs(s.t + dt, y);
    check_finite(k4, step, s.t);
    for (std::size_t f = 0; f < s.fields.size(); ++f) {
      s.fields[f] += (dt / 6.0) * (k1[f] + 2.0 * k2[f] + 2.0 * k3[f] + k4[f]);
    }
    check_finite(s.fields, step, s.t + dt);
    s.t += dt;
    s.step = step;
    progress.report(s);
  }
  return s;
}

// ---------------------------------------------------------------------------

ImplicitOperator::ImplicitOperator(std::vector<SparseMatrix> per_field) : ops_(std::move(per_field)) {
  if (ops_.empty()) throw Error(ErrorKind::config, "implicit operator needs at least one field");
  for (const auto& a : ops_) {
    if (a.rows() != a.cols() || a.rows() != ops_.front().rows()) {
      throw Error(ErrorKind::dimension, "implicit operators must be square and equally sized");
    }
  }
}

Fields ImplicitOperator::apply(const Fields& c) const {
  Fields out(c.size());
  for (std::size_t f = 0; f < c.size(); ++f) out[f] = spmv(ops_.at(f), c[f]);
  return out;
}

SparseLUHandle& ImplicitOperator::handle(int field, double lead, double dt) {
  auto key = std::make_tuple(field, lead, dt);
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    const SparseMatrix& d = ops_.at(field);
    SparseMatrix id(d.rows(), d.cols());
    id.setIdentity();
    const SparseMatrix a = lead * id - dt * d;
    it = cache_.emplace(key, SparseLUHandle(a)).first;
  }
  return it->second;
}

void ImplicitOperator::prepare(int field, double lead, double dt) { handle(field, lead, dt); }

Field ImplicitOperator::solve(int field, double lead, double dt, const Field& b) {
  return handle(field, lead, dt).solve(b);
}

int ImplicitOperator::factorization_count() const {
  int n = 0;
  for (const auto& [key, h] : cache_) n += h.factorization_count();
  return n;
}

// ---------------------------------------------------------------------------

TimeState seed_exact(const ExactFunction& exact, double t0, double dt, int levels) {
  if (levels < 1) throw Error(ErrorKind::config, "seed_exact: need at least one level");
  TimeState s;
  for (int q = 0; q < levels - 1; ++q) s.history.push_front(exact(t0 + q * dt));
  s.t = t0 + (levels - 1) * dt;
  s.fields = exact(s.t);
  return s;
}

TimeState bdf4_bootstrap(ImplicitOperator& op, const ForcingFunction& forcing, TimeState s,
                         double dt) {
  require_fields(op, s);
  const double h = 0.25 * dt;
  TimeState fine = s;
  fine.history.clear();
  std::deque<Fields> levels{s.fields};  // solution at multiples of dt, most recent first
  for (int q = 1; q <= 12; ++q) {
    Fields next = bdf_step(op, forcing, fine, std::min(q, 3), h);
    check_finite(next, s.step + q, fine.t + h);
    push_level(fine, std::move(next), h, 2);
    if (q % 4 == 0) levels.push_front(fine.fields);
  }
  s.fields = levels.front();
  levels.pop_front();
  s.history = std::move(levels);
  s.t += 3.0 * dt;
  s.step += 3;
  return s;
}

TimeState bdf4_advance(ImplicitOperator& op, const ForcingFunction& forcing, TimeState s,
                       double dt, long steps, const Progress& progress) {
  require_fields(op, s);
  if (!(dt > 0.0)) throw Error(ErrorKind::config, "bdf4: dt must be positive");
  if (s.history.size() < 3) {
    throw Error(ErrorKind::config, "bdf4: state needs three previous levels");
  }
  for (long i = 0; i < steps; ++i) {
    Fields next = bdf_step(op, forcing, s, 4, dt);
    check_finite(next, s.step + 1, s.t + dt);
    push_level(s, std::move(next), dt, 3);
    progress.report(s);
  }
  return s;
}

TimeState sbdf2_advance(ImplicitOperator& op, const RhsFunction& explicit_rhs, TimeState s,
                        double dt, long steps, const Progress& progress) {
  require_fields(op, s);
  if (!(dt > 0.0)) throw Error(ErrorKind::config, "sbdf2: dt must be positive");
  const std::size_t nf = s.fields.size();
  for (long i = 0; i < steps; ++i) {
    Fields e = explicit_rhs(s.t, s.fields);
    check_finite(e, s.step + 1, s.t);
    Fields next(nf);
    if (s.history.empty() || s.explicit_history.empty()) {
      for (std::size_t f = 0; f < nf; ++f) {
        next[f] = op.solve(static_cast<int>(f), 1.0, dt, s.fields[f] + dt * e[f]);
      }
    } else {
      const Fields& prev = s.history.front();
      const Fields& eprev = s.explicit_history.front();
      for (std::size_t f = 0; f < nf; ++f) {
        const Field rhs = 2.0 * s.fields[f] - 0.5 * prev[f] + dt * (2.0 * e[f] - eprev[f]);
        next[f] = op.solve(static_cast<int>(f), 1.5, dt, rhs);
      }
    }
    check_finite(next, s.step + 1, s.t + dt);
    s.explicit_history.push_front(std::move(e));
    while (s.explicit_history.size() > 1) s.explicit_history.pop_back();
    push_level(s, std::move(next), dt, 1);
    progress.report(s);
  }
  return s;
}

}  // namespace rbfloi
