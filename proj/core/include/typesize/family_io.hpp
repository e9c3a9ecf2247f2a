#pragma once

// JSON family documents.
//
//   {
//     "alphabet_size": 3, "d": 1, "rho_max": 8,
//     "tau": [[0], [1], [1.4142135623730951]],
//     "exact": {                                   // optional
//       "basis": [[{"name": "1", "hint": 1}, {"name": "sqrt2", "hint": 1.4142135623730951}]],
//       "coeffs": [[["0", "0"]], [["1", "0"]], [["0", "1"]]]
//     }
//   }
//
// Markov documents replace "tau" with "tau2" (|X|^2 rows, pair (a, b) at row
// (a-1)|X| + (b-1)) and add "x0". Table entries are JSON numbers or exact
// strings ("3/4", "-0.125"). When every tau entry is exact (JSON integers or
// strings) and no "exact" block is given, the rational decomposition is
// derived automatically.

#include <filesystem>
#include <optional>
#include <string>

#include "typesize/container.hpp"
#include "typesize/expofam.hpp"
#include "typesize/markov.hpp"
#include "typesize/point_types.hpp"

namespace typesize {

enum class FamilyKind { iid, markov };

struct FamilyDocument {
  FamilyKind kind = FamilyKind::iid;
  std::optional<FamilySpec> family;          // iid
  std::optional<MarkovFamilySpec> markov;    // markov
  std::optional<ExactStatMap> exact;         // iid, declared or derived
  std::string canonical;
  SpecHash hash{};

  std::size_t dim() const;
};

/// Throws SchemaError on structural problems (missing field, wrong row
/// length, NaN/Inf, bad rational) and SpecError on invariant failures.
FamilyDocument parse_family_document(const std::string& text);

/// Throws IoError when the file cannot be read.
FamilyDocument load_family_document(const std::filesystem::path& path);

/// Exact rational from "p/q", a decimal ("-1.25", "3e-2") or an integer.
Rational parse_rational(const std::string& text);

SpecHash sha256(const std::string& bytes);
std::string to_hex(const SpecHash& hash);

}  // namespace typesize
