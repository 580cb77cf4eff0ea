// SPDX-License-Identifier: Apache-2.0
#include "sliceopt/qubo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace sliceopt {

void QuboModel::add_coeff(int i, int j, double v) {
  if (v == 0.0) return;
  if (i > j) std::swap(i, j);
  coeffs[pack(i, j)] += v;
}

double QuboModel::coeff_at(int i, int j) const {
  if (i > j) std::swap(i, j);
  auto it = coeffs.find(pack(i, j));
  return it == coeffs.end() ? 0.0 : it->second;
}

double QuboModel::energy(std::span<const uint8_t> bits) const {
  if (bits.size() != static_cast<size_t>(num_bits))
    throw std::invalid_argument("energy: bit vector length mismatch");
  double e = 0.0;
  for (const auto& [key, v] : coeffs) {
    const int i = static_cast<int>(key >> 32);
    const int j = static_cast<int>(key & 0xffffffffu);
    if (bits[i] && bits[j]) e += v;
  }
  return e;
}

namespace {

// Greedy descending-weight encoding of an integer onto the slack bits; exact
// for any value in [0, range] because both weight systems are complete (each
// weight is at most one more than the sum of the smaller ones).
void encode_slack(const SlackGroup& group, int64_t value, std::vector<uint8_t>& bits) {
  for (const auto& sb : group.bits) bits[sb.bit] = 0;
  int64_t v = std::clamp<int64_t>(value, 0, group.range);
  for (auto it = group.bits.rbegin(); it != group.bits.rend(); ++it) {
    if (it->weight <= v) {
      bits[it->bit] = 1;
      v -= it->weight;
    }
  }
}

int64_t group_lhs(const SlackGroup& group, const std::vector<uint8_t>& bits) {
  int64_t lhs = 0;
  for (const auto& [bit, coeff] : group.terms)
    if (bits[bit]) lhs += coeff;
  return lhs;
}

// Residual at the best representable slack; the squared residual times the
// penalty weight is the group's penalty.
int64_t best_slack_residual(const SlackGroup& group, const std::vector<uint8_t>& bits) {
  const int64_t target = group.rhs - group_lhs(group, bits);
  return std::clamp<int64_t>(target, 0, group.range) - target;
}

}  // namespace

std::vector<uint8_t> QuboModel::with_consistent_slack(std::span<const uint8_t> decision_bits) const {
  if (decision_bits.size() != static_cast<size_t>(num_decision))
    throw std::invalid_argument("with_consistent_slack: decision bit length mismatch");
  std::vector<uint8_t> bits(num_bits, 0);
  std::copy(decision_bits.begin(), decision_bits.end(), bits.begin());

  // Indicators: exact minimization over the two settings of each bit (its
  // groups are unaffected by other indicators).
  std::vector<char> owned(slack_registry.size(), 0);
  for (const auto& aux : aux_registry) {
    for (int g : aux.groups) owned[g] = 1;
    double best = 0.0;
    int best_z = 0;
    for (int z = 0; z <= 1; ++z) {
      bits[aux.bit] = static_cast<uint8_t>(z);
      double cost = 0.0;
      for (int g : aux.groups) {
        const double r = static_cast<double>(best_slack_residual(slack_registry[g], bits));
        cost += r * r;
      }
      if (z == 0 || cost < best) {
        best = cost;
        best_z = z;
      }
    }
    bits[aux.bit] = static_cast<uint8_t>(best_z);
    for (int g : aux.groups) {
      const SlackGroup& group = slack_registry[g];
      encode_slack(group, group.rhs - group_lhs(group, bits), bits);
    }
  }

  for (size_t g = 0; g < slack_registry.size(); ++g) {
    if (owned[g]) continue;
    const SlackGroup& group = slack_registry[g];
    encode_slack(group, group.rhs - group_lhs(group, bits), bits);
  }
  return bits;
}

void QuboModel::write_coefficients(std::ostream& os) const {
  os << "# num_bits " << num_bits << "\n";
  os << "# offset " << offset << "\n";
  std::vector<uint64_t> keys;
  keys.reserve(coeffs.size());
  for (const auto& [key, v] : coeffs) keys.push_back(key);
  std::sort(keys.begin(), keys.end());
  for (uint64_t key : keys) {
    os << (key >> 32) << " " << (key & 0xffffffffu) << " " << coeffs.at(key) << "\n";
  }
}

double min_penalty_bound(const ConstrainedModel& model) {
  double total = 0.0;
  for (double c : model.objective) total += std::max(0.0, c);
  return total + 1.0;
}

int slack_bit_count(int64_t range) {
  if (range <= 0) return 0;
  int count = 0;
  while ((int64_t{1} << count) <= range) ++count;  // ceil(log2(range + 1))
  return count;
}

std::vector<int64_t> slack_weights(int64_t range) {
  std::vector<int64_t> weights;
  const int count = slack_bit_count(range);
  if (count == 0) return weights;
  for (int j = 0; j + 1 < count; ++j) weights.push_back(int64_t{1} << j);
  weights.push_back(range - ((int64_t{1} << (count - 1)) - 1));  // residual
  return weights;
}

std::vector<int64_t> slack_weights(int64_t range, SlackEncoding encoding) {
  if (encoding == SlackEncoding::Binary) return slack_weights(range);
  return std::vector<int64_t>(static_cast<size_t>(std::max<int64_t>(0, range)), 1);
}

namespace {

struct IntRow {
  std::vector<std::pair<int, int64_t>> terms;
  int64_t rhs = 0;
  double unit = 1.0;
};

// Canonical integerized <= form. C4/C5 carry real rate coefficients and are
// quantized conservatively (coefficients rounded down, floor rounded up), so
// a satisfied quantized row implies the original one. Every row is then
// divided by the gcd of its coefficients with the rhs floored, an exact
// reduction that keeps all penalties at comparable stiffness; for the
// frequency-flat rate rows this collapses them to unit cardinality form.
IntRow integerize(const LinearConstraint& c, double quantum) {
  IntRow row;
  if (c.family == ConstraintFamily::C4 || c.family == ConstraintFamily::C5) {
    if (c.sense != Sense::GreaterEqual)
      throw std::invalid_argument("to_qubo: rate constraints must have sense >=");
    row.unit = quantum;
    for (const auto& t : c.terms) {
      const int64_t a = static_cast<int64_t>(std::floor(t.coeff / quantum));
      if (a != 0) row.terms.push_back({t.var, -a});
    }
    row.rhs = -static_cast<int64_t>(std::ceil(c.rhs / quantum));
  } else {
    const double sign = c.sense == Sense::LessEqual ? 1.0 : -1.0;
    for (const auto& t : c.terms) {
      const double scaled = sign * t.coeff;
      const int64_t a = std::llround(scaled);
      if (std::abs(scaled - static_cast<double>(a)) > 1e-9)
        throw std::invalid_argument("to_qubo: non-integer coefficient in " + c.name);
      if (a != 0) row.terms.push_back({t.var, a});
    }
    const double scaled_rhs = sign * c.rhs;
    row.rhs = std::llround(scaled_rhs);
    if (std::abs(scaled_rhs - static_cast<double>(row.rhs)) > 1e-9)
      throw std::invalid_argument("to_qubo: non-integer rhs in " + c.name);
  }

  std::sort(row.terms.begin(), row.terms.end());
  std::vector<std::pair<int, int64_t>> merged;
  for (const auto& t : row.terms) {
    if (!merged.empty() && merged.back().first == t.first)
      merged.back().second += t.second;
    else
      merged.push_back(t);
  }
  row.terms = std::move(merged);

  if (!row.terms.empty()) {
    int64_t g = 0;
    for (const auto& [var, a] : row.terms) g = std::gcd(g, a);
    if (g > 1) {
      for (auto& [var, a] : row.terms) a /= g;
      row.rhs = row.rhs >= 0 ? row.rhs / g : -((-row.rhs + g - 1) / g);  // floor division
      row.unit *= static_cast<double>(g);
    }
  }
  return row;
}

struct Lowerer {
  QuboModel& q;
  double lambda;
  int next_bit;
  SlackEncoding encoding;

  // At-most-one rows take the slack-free pairwise form lambda * x_i x_j:
  // zero exactly when at most one variable is set, and adding to an empty
  // group is energy-neutral, so the annealer can move assignments without
  // the slack-lag barrier of the squared form.
  int emit_at_most_one(const IntRow& row, int constraint_index, ConstraintFamily family) {
    SlackGroup group;
    group.constraint = constraint_index;
    group.family = family;
    group.unit = row.unit;
    group.terms = row.terms;
    group.rhs = row.rhs;
    group.range = 0;
    for (size_t i = 0; i < row.terms.size(); ++i)
      for (size_t j = i + 1; j < row.terms.size(); ++j)
        q.add_coeff(row.terms[i].first, row.terms[j].first, lambda);
    q.slack_registry.push_back(std::move(group));
    return static_cast<int>(q.slack_registry.size()) - 1;
  }

  // Emits lambda * (sum_i a_i y_i + s - rhs)^2 expanded onto the upper
  // triangle with y^2 = y; the constant lambda * rhs^2 accumulates negated in
  // the offset so zero-penalty assignments land on -objective + offset.
  // min_feasible_lhs, when known from companion constraints, tightens the
  // slack range: the register only needs to reach residuals attainable by
  // model-feasible assignments, and everything beyond is penalized anyway.
  int emit(const IntRow& row, int constraint_index, ConstraintFamily family,
           int64_t min_feasible_lhs = std::numeric_limits<int64_t>::min()) {
    SlackGroup group;
    group.constraint = constraint_index;
    group.family = family;
    group.unit = row.unit;
    group.terms = row.terms;
    group.rhs = row.rhs;
    int64_t min_lhs = 0;
    for (const auto& [bit, a] : row.terms) min_lhs += std::min<int64_t>(0, a);
    min_lhs = std::max(min_lhs, min_feasible_lhs);
    group.range = std::max<int64_t>(0, row.rhs - min_lhs);
    for (int64_t w : slack_weights(group.range, encoding)) group.bits.push_back({next_bit++, w});

    std::vector<std::pair<int, int64_t>> all_terms = group.terms;
    for (const auto& sb : group.bits) all_terms.push_back({sb.bit, sb.weight});
    for (size_t i = 0; i < all_terms.size(); ++i) {
      const auto [bi, ai] = all_terms[i];
      const double a = static_cast<double>(ai);
      q.add_coeff(bi, bi, lambda * a * (a - 2.0 * static_cast<double>(row.rhs)));
      for (size_t j = i + 1; j < all_terms.size(); ++j) {
        const auto [bj, aj] = all_terms[j];
        q.add_coeff(bi, bj, lambda * 2.0 * a * static_cast<double>(aj));
      }
    }
    q.offset -= lambda * static_cast<double>(row.rhs) * static_cast<double>(row.rhs);

    q.slack_registry.push_back(std::move(group));
    return static_cast<int>(q.slack_registry.size()) - 1;
  }
};

}  // namespace

QuboModel to_qubo(const ConstrainedModel& model, const PenaltyConfig& cfg) {
  const double bound = min_penalty_bound(model);
  const double lambda = cfg.penalty_weight > 0.0 ? cfg.penalty_weight : bound;
  if (lambda < bound)
    throw std::invalid_argument("to_qubo: penalty weight below the separation bound");
  const double quantum = cfg.rate_quantum_bps;
  if (!(quantum > 0.0)) throw std::invalid_argument("to_qubo: rate quantum must be > 0");

  QuboModel q;
  q.num_decision = static_cast<int>(model.variables.size());
  q.decision_labels = model.variables;
  q.objective_coeffs = model.objective;
  q.penalty_weight = lambda;
  q.rate_quantum_bps = quantum;
  for (double c : model.objective) {
    const double a = std::abs(c);
    if (a > 0.0 && (q.min_abs_objective == 0.0 || a < q.min_abs_objective)) q.min_abs_objective = a;
  }

  Lowerer lower{q, lambda, q.num_decision, cfg.slack_encoding};

  // Structure harvested from companion rows for slack-range tightening:
  // per-user caps (C1) and the set of uniqueness-capped RBs (C2).
  std::unordered_map<int, int64_t> user_cap;
  std::unordered_map<int, char> rb_unique;
  for (const LinearConstraint& c : model.constraints) {
    if (c.terms.empty() || c.sense != Sense::LessEqual) continue;
    bool unit_coeffs = true;
    for (const auto& t : c.terms)
      if (t.coeff != 1.0) unit_coeffs = false;
    if (!unit_coeffs) continue;
    if (c.family == ConstraintFamily::C1) {
      const int user = model.variables[c.terms.front().var].user;
      bool uniform = true;
      for (const auto& t : c.terms)
        if (model.variables[t.var].user != user) uniform = false;
      const auto cap = static_cast<int64_t>(std::floor(c.rhs + 1e-9));
      if (uniform) {
        auto [it, fresh] = user_cap.emplace(user, cap);
        if (!fresh) it->second = std::min(it->second, cap);
      }
    } else if (c.family == ConstraintFamily::C2 && c.rhs == 1.0) {
      const int rb = model.variables[c.terms.front().var].rb;
      bool uniform = true;
      for (const auto& t : c.terms)
        if (model.variables[t.var].rb != rb) uniform = false;
      if (uniform) rb_unique[rb] = 1;
    }
  }

  // The per-pair borrowing rows of one gNodeB all compare the same native
  // pool sum against |K_m|, which under row-by-row lowering makes every
  // native bit as stiff as that row count. They are aggregated exactly into
  // an indicator z (1 iff any borrow bit of the gNodeB is 1):
  //   sum(borrows) - M z <= 0   and   |K_m| z - sum(native pairs) <= 0,
  // whose projection onto the decision bits equals the original conjunction.
  struct BorrowBlock {
    int first_constraint = -1;
    int64_t pool = 0;
    std::vector<int> borrow_bits;
    std::vector<std::pair<int, int64_t>> native_terms;
  };
  std::vector<std::pair<int, BorrowBlock>> blocks;  // keyed by gNodeB id, first-seen order

  for (size_t ci = 0; ci < model.constraints.size(); ++ci) {
    const LinearConstraint& c = model.constraints[ci];
    const IntRow row = integerize(c, quantum);

    if (c.family == ConstraintFamily::C3) {
      int positive = -1;
      for (const auto& [var, a] : row.terms)
        if (a > 0) positive = positive == -1 ? var : -2;
      if (positive >= 0) {
        const int gnb = model.variables[positive].gnb;
        auto it = std::find_if(blocks.begin(), blocks.end(),
                               [&](const auto& b) { return b.first == gnb; });
        if (it == blocks.end()) {
          BorrowBlock block;
          block.first_constraint = static_cast<int>(ci);
          for (const auto& [var, a] : row.terms) {
            if (a > 0)
              block.pool = a;
            else
              block.native_terms.push_back({var, a});
          }
          blocks.push_back({gnb, std::move(block)});
          it = blocks.end() - 1;
        }
        it->second.borrow_bits.push_back(positive);
        continue;
      }
      // Degenerate row (empty pool): no positive term survives; fall through.
    }

    if (c.family == ConstraintFamily::C2 && row.rhs == 1) {
      bool at_most_one = true;
      for (const auto& [var, a] : row.terms)
        if (a != 1) at_most_one = false;
      if (at_most_one) {
        lower.emit_at_most_one(row, static_cast<int>(ci), c.family);
        continue;
      }
    }

    int64_t min_feasible = std::numeric_limits<int64_t>::min();
    if ((c.family == ConstraintFamily::C4 || c.family == ConstraintFamily::C5) &&
        !row.terms.empty()) {
      // All-negative single-user row: at most cap variables can be 1.
      const int user = model.variables[row.terms.front().first].user;
      bool tightenable = user_cap.count(user) != 0;
      for (const auto& [var, a] : row.terms)
        if (a > 0 || model.variables[var].user != user) tightenable = false;
      if (tightenable) {
        std::vector<int64_t> coeffs;
        for (const auto& [var, a] : row.terms) coeffs.push_back(a);
        std::sort(coeffs.begin(), coeffs.end());  // most negative first
        int64_t sum = 0;
        for (int64_t i = 0; i < std::min<int64_t>(user_cap.at(user), coeffs.size()); ++i)
          sum += coeffs[i];
        min_feasible = sum;
      }
    }
    lower.emit(row, static_cast<int>(ci), c.family, min_feasible);
  }

  for (auto& [gnb, block] : blocks) {
    // Cap on simultaneous borrows of this gNodeB over feasible assignments:
    // distinct foreign RBs (C2) and the summed per-user caps (C1) both bound
    // it; the pair count always does.
    int64_t max_borrows = static_cast<int64_t>(block.borrow_bits.size());
    {
      bool all_unique = true;
      std::unordered_map<int, char> rbs;
      std::unordered_map<int, char> users;
      bool caps_known = true;
      int64_t cap_sum = 0;
      for (int b : block.borrow_bits) {
        const VarLabel& lab = model.variables[b];
        if (!rb_unique.count(lab.rb)) all_unique = false;
        rbs.emplace(lab.rb, 1);
        if (users.emplace(lab.user, 1).second) {
          if (user_cap.count(lab.user))
            cap_sum += user_cap.at(lab.user);
          else
            caps_known = false;
        }
      }
      if (all_unique) max_borrows = std::min<int64_t>(max_borrows, rbs.size());
      if (caps_known) max_borrows = std::min(max_borrows, cap_sum);
      max_borrows = std::max<int64_t>(max_borrows, 1);
    }
    // Native pool sum over feasible assignments: each unique RB counts once.
    int64_t max_native = static_cast<int64_t>(block.native_terms.size());
    {
      bool all_unique = true;
      std::unordered_map<int, char> rbs;
      for (const auto& [var, a] : block.native_terms) {
        if (!rb_unique.count(model.variables[var].rb)) all_unique = false;
        rbs.emplace(model.variables[var].rb, 1);
      }
      if (all_unique && !block.native_terms.empty())
        max_native = std::min<int64_t>(max_native, rbs.size());
    }

    const int z = lower.next_bit++;
    AuxIndicator aux;
    aux.bit = z;
    aux.any_of = block.borrow_bits;

    IntRow activation;  // sum(borrows) - M z <= 0
    for (int b : block.borrow_bits) activation.terms.push_back({b, 1});
    activation.terms.push_back({z, -max_borrows});
    std::sort(activation.terms.begin(), activation.terms.end());
    activation.rhs = 0;
    aux.groups.push_back(lower.emit(activation, block.first_constraint, ConstraintFamily::C3));

    IntRow exhaustion;  // |K_m| z - sum(native pairs) <= 0
    exhaustion.terms.push_back({z, block.pool});
    for (const auto& t : block.native_terms) exhaustion.terms.push_back(t);
    std::sort(exhaustion.terms.begin(), exhaustion.terms.end());
    exhaustion.rhs = 0;
    aux.groups.push_back(
        lower.emit(exhaustion, block.first_constraint, ConstraintFamily::C3, -max_native));

    q.aux_registry.push_back(std::move(aux));
  }

  // Annealers minimize: fold the maximization objective in as -c_i x_i.
  for (int i = 0; i < q.num_decision; ++i) q.add_coeff(i, i, -model.objective[i]);

  q.num_bits = lower.next_bit;
  return q;
}

Allocation decode_sample(std::span<const uint8_t> bits, const QuboModel& qubo) {
  if (bits.size() != static_cast<size_t>(qubo.num_bits))
    throw std::invalid_argument("decode_sample: bit vector length mismatch");
  Allocation alloc;
  for (int i = 0; i < qubo.num_decision; ++i)
    if (bits[i]) alloc.assigned.push_back(qubo.decision_labels[i]);
  return alloc;
}

}  // namespace sliceopt
