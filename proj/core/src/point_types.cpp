#include "typesize/point_types.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "typesize/composition.hpp"
#include "typesize/errors.hpp"

namespace typesize {

namespace {

constexpr double kHintTolerance = 1e-9;
constexpr double kRelationTolerance = 1e-12;
constexpr std::int64_t kMaxRelationDenominator = 10'000;

// Continued-fraction search for p/q (q <= kMaxRelationDenominator) within a
// relative 1e-12 of `ratio`.
bool near_small_rational(double ratio, std::int64_t& p_out, std::int64_t& q_out) {
  const double x = std::abs(ratio);
  double rest = x;
  std::int64_t p_prev = 1, q_prev = 0;
  std::int64_t p = static_cast<std::int64_t>(std::floor(rest));
  std::int64_t q = 1;
  for (int it = 0; it < 64; ++it) {
    if (std::abs(x - static_cast<double>(p) / static_cast<double>(q)) <= kRelationTolerance * x) {
      p_out = ratio < 0 ? -p : p;
      q_out = q;
      return true;
    }
    const double frac = rest - std::floor(rest);
    if (frac < 1e-300) return false;
    rest = 1.0 / frac;
    if (rest > 1e12) return false;
    const auto a = static_cast<std::int64_t>(std::floor(rest));
    const std::int64_t p_next = a * p + p_prev;
    const std::int64_t q_next = a * q + q_prev;
    if (q_next > kMaxRelationDenominator) return false;
    p_prev = p;
    q_prev = q;
    p = p_next;
    q = q_next;
  }
  return false;
}

void check_shape(const FamilySpec& spec, const ExactStatMap& map) {
  if (map.alphabet_size() != spec.alphabet_size()) {
    throw SchemaError("exact map has coefficient rows for " + std::to_string(map.alphabet_size()) +
                      " symbols, family has " + std::to_string(spec.alphabet_size()));
  }
  if (map.dim() != spec.dim()) {
    throw SchemaError("exact map declares " + std::to_string(map.dim()) +
                      " coordinates, family has d = " + std::to_string(spec.dim()));
  }
  for (std::size_t j = 0; j < map.dim(); ++j) {
    if (map.basis[j].empty()) throw SchemaError("coordinate " + std::to_string(j + 1) + " has an empty basis");
    for (std::size_t x = 0; x < map.alphabet_size(); ++x) {
      if (map.coeffs[x].size() != map.dim() || map.coeffs[x][j].size() != map.basis[j].size()) {
        std::ostringstream msg;
        msg << "coefficients of symbol " << x + 1 << " coordinate " << j + 1
            << " do not match the basis length " << map.basis[j].size();
        throw SchemaError(msg.str());
      }
    }
  }
}

void check_basis(const FamilySpec& spec, const ExactStatMap& map) {
  for (std::size_t j = 0; j < map.dim(); ++j) {
    const auto& basis = map.basis[j];
    if (basis[0].hint != 1.0) {
      throw SpecError("the first basis element of coordinate " + std::to_string(j + 1) +
                      " must be the constant 1");
    }
    for (std::size_t t = 0; t < basis.size(); ++t) {
      if (!std::isfinite(basis[t].hint) || basis[t].hint == 0.0) {
        throw SpecError("basis constant '" + basis[t].name + "' has a zero or non-finite value");
      }
      for (std::size_t u = 0; u < t; ++u) {
        std::int64_t p = 0, q = 1;
        if (near_small_rational(basis[t].hint / basis[u].hint, p, q)) {
          std::ostringstream msg;
          msg << "basis constants '" << basis[u].name << "' and '" << basis[t].name
              << "' of coordinate " << j + 1 << " are rationally related (ratio " << p << "/" << q
              << ")";
          throw SpecError(msg.str());
        }
      }
    }
    for (std::size_t x = 0; x < map.alphabet_size(); ++x) {
      double value = 0.0;
      for (std::size_t t = 0; t < basis.size(); ++t) value += map.coeffs[x][j][t].get_d() * basis[t].hint;
      const double expected = spec.tau()(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(j));
      if (std::abs(value - expected) > kHintTolerance * std::max(1.0, std::abs(expected))) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "exact decomposition of tau(" << x + 1 << ")[" << j + 1 << "] evaluates to " << value
            << ", table holds " << expected;
        throw SpecError(msg.str());
      }
    }
  }
}

std::int64_t to_int64(const BigInt& v) {
  if (!v.fits_slong_p()) throw ResourceError("lattice coordinate does not fit in 64 bits");
  return v.get_si();
}

}  // namespace

ExactStatMap rational_stat_map(const std::vector<std::vector<Rational>>& tau) {
  ExactStatMap map;
  if (tau.empty()) return map;
  const std::size_t d = tau.front().size();
  map.basis.assign(d, {BasisElement{"1", 1.0}});
  for (const auto& row : tau) {
    if (row.size() != d) throw SchemaError("tau rows must share one length");
    std::vector<std::vector<Rational>> coords;
    for (const auto& v : row) coords.push_back({v});
    map.coeffs.push_back(std::move(coords));
  }
  return map;
}

LatticeMap derive_lattice(const FamilySpec& spec, const ExactStatMap& map) {
  check_shape(spec, map);
  check_basis(spec, map);
  const std::size_t k = map.alphabet_size();

  // Integer rows over symbols 2..|X|, one per (coordinate, basis) pair.
  std::vector<std::vector<BigInt>> rows;
  for (std::size_t j = 0; j < map.dim(); ++j) {
    for (std::size_t t = 0; t < map.basis[j].size(); ++t) {
      std::vector<Rational> diff(k - 1);
      BigInt lcm = 1;
      for (std::size_t x = 1; x < k; ++x) {
        diff[x - 1] = map.coeffs[x][j][t] - map.coeffs[0][j][t];
        diff[x - 1].canonicalize();
        mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), diff[x - 1].get_den_mpz_t());
      }
      std::vector<BigInt> row(k - 1);
      for (std::size_t x = 0; x + 1 < k; ++x) {
        const Rational scaled = diff[x] * Rational(lcm);
        row[x] = scaled.get_num();
      }
      rows.push_back(std::move(row));
    }
  }

  // Row echelon form over Q; a row is kept when it is independent of the kept ones.
  LatticeMap out;
  std::vector<std::vector<Rational>> echelon;
  std::vector<std::size_t> pivots;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::vector<Rational> v(rows[r].begin(), rows[r].end());
    for (std::size_t e = 0; e < echelon.size(); ++e) {
      const Rational factor = v[pivots[e]] / echelon[e][pivots[e]];
      if (factor == 0) continue;
      for (std::size_t c = 0; c < v.size(); ++c) v[c] -= factor * echelon[e][c];
    }
    std::size_t pivot = v.size();
    for (std::size_t c = 0; c < v.size(); ++c) {
      if (v[c] != 0) {
        pivot = c;
        break;
      }
    }
    if (pivot == v.size()) continue;
    echelon.push_back(std::move(v));
    pivots.push_back(pivot);
    out.row_selection.push_back(r);
  }
  out.d_prime = out.row_selection.size();
  if (out.d_prime == 0) throw SpecError("exact decomposition has rank 0");

  out.L.assign(k, std::vector<std::int64_t>(out.d_prime, 0));
  for (std::size_t x = 1; x < k; ++x) {
    for (std::size_t i = 0; i < out.d_prime; ++i) out.L[x][i] = to_int64(rows[out.row_selection[i]][x - 1]);
  }
  if (out.d_prime < spec.dim()) {
    std::ostringstream msg;
    msg << "lattice dimension d' = " << out.d_prime << " is below the family dimension d = " << spec.dim();
    out.diagnostics.push_back(msg.str());
  }

  const auto dp = static_cast<Eigen::Index>(out.d_prime);
  const auto cols = static_cast<Eigen::Index>(k - 1);
  Eigen::MatrixXd lattice(dp, cols);
  Eigen::MatrixXd stats(static_cast<Eigen::Index>(spec.dim()), cols);
  for (Eigen::Index x = 0; x < cols; ++x) {
    for (Eigen::Index i = 0; i < dp; ++i) {
      lattice(i, x) = static_cast<double>(out.L[static_cast<std::size_t>(x + 1)][static_cast<std::size_t>(i)]);
    }
    stats.col(x) = (spec.tau().row(x + 1) - spec.tau().row(0)).transpose();
  }
  const Eigen::MatrixXd gram = lattice * lattice.transpose();
  out.reconstruction = gram.ldlt().solve(lattice * stats.transpose()).transpose();
  return out;
}

LatticePoint point_class_of(const LatticeMap& lmap, std::span<const Symbol> seq) {
  LatticePoint point;
  point.scaled.assign(lmap.d_prime, 0);
  point.n = static_cast<std::uint32_t>(seq.size());
  for (Symbol x : seq) {
    if (x < 1 || x > lmap.L.size()) throw DomainError("symbol out of range: " + std::to_string(x));
    for (std::size_t i = 0; i < lmap.d_prime; ++i) {
      if (__builtin_add_overflow(point.scaled[i], lmap.L[x - 1][i], &point.scaled[i])) {
        throw ResourceError("lattice point overflows 64-bit integers");
      }
    }
  }
  return point;
}

TypeIndex point_type_index(const FamilySpec& spec, const LatticeMap& lmap, std::uint32_t n,
                           const EnumerationBudget& budget) {
  return TypeIndex::point(spec, lmap.L, n, budget);
}

Eigen::VectorXd tau_of_lattice(const FamilySpec& spec, const LatticeMap& lmap,
                               const Eigen::VectorXd& ell) {
  if (static_cast<std::size_t>(ell.size()) != lmap.d_prime) {
    throw DomainError("lattice vector has the wrong dimension");
  }
  return spec.tau().row(0).transpose() + lmap.reconstruction * ell;
}

double f0_of(const FamilySpec& spec, const LatticeMap& lmap, std::uint32_t n,
             const Eigen::VectorXd& ell, double c) {
  if (n < 1) throw DomainError("blocklength must be at least 1");
  const Eigen::VectorXd tau = tau_of_lattice(spec, lmap, ell);
  MleOptions options;
  options.require_in_hull = false;
  const ParamVector theta = mle(spec, tau, options);
  const double log_ml = theta.values().dot(tau) - evaluate(spec, theta.values()).psi;
  const double nn = static_cast<double>(n);
  const double dp = static_cast<double>(lmap.d_prime);
  return -log_ml - dp / (2.0 * nn) * std::log2(2.0 * std::numbers::pi * nn) + c / nn;
}

double f0_of(const FamilySpec& spec, const LatticeMap& lmap, const LatticePoint& point, double c) {
  Eigen::VectorXd ell(static_cast<Eigen::Index>(point.scaled.size()));
  for (std::size_t i = 0; i < point.scaled.size(); ++i) {
    ell[static_cast<Eigen::Index>(i)] = static_cast<double>(point.scaled[i]) / static_cast<double>(point.n);
  }
  return f0_of(spec, lmap, point.n, ell, c);
}

}  // namespace typesize
