#pragma once

// The complete list of type classes at blocklength n. Shared by the
// quantized (cuboid) and point (lattice) partitions; the codec and the rate
// analysis work against this one representation.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "typesize/bigint.hpp"
#include "typesize/composition.hpp"
#include "typesize/expofam.hpp"
#include "typesize/grid.hpp"

namespace typesize {

enum class PartitionMode : std::uint8_t { quantized = 1, point = 2, markov = 3 };

const char* to_string(PartitionMode mode);
PartitionMode parse_partition_mode(const std::string& text);

struct EnumerationBudget {
  std::uint64_t compositions = 5'000'000;
};

struct TypeClass {
  std::size_t first = 0;  // first member in the index's composition table
  std::size_t count = 0;  // member compositions, colex order
  BigInt size;            // number of sequences in the class
};

class TypeIndex {
 public:
  /// Groups compositions by cuboid of their sufficient statistic.
  static TypeIndex quantized(const FamilySpec& spec, const Grid& grid,
                             const EnumerationBudget& budget = {});

  /// Groups compositions by the exact integer key sum_x counts[x] * lattice[x]
  /// (`lattice` holds one integer row per symbol).
  static TypeIndex point(const FamilySpec& spec, std::vector<std::vector<std::int64_t>> lattice,
                         std::uint32_t n, const EnumerationBudget& budget = {});

  PartitionMode mode() const { return mode_; }
  const FamilySpec& family() const { return spec_; }
  std::uint32_t n() const { return n_; }
  std::size_t alphabet_size() const { return spec_.alphabet_size(); }

  /// Set for the quantized partition only.
  const std::optional<Grid>& grid() const { return grid_; }
  const std::vector<std::vector<std::int64_t>>& lattice() const { return lattice_; }

  std::size_t key_dim() const { return key_dim_; }
  std::size_t class_count() const { return classes_.size(); }
  std::size_t composition_count() const { return members_.size() / alphabet_size(); }

  /// Classes are stored in ascending lexicographic key order.
  const TypeClass& type_class(std::size_t i) const { return classes_[i]; }
  std::span<const std::int64_t> key(std::size_t i) const;
  std::span<const std::uint32_t> member(std::size_t cls, std::size_t j) const;
  /// log2 of the member's multinomial coefficient.
  double member_log2_size(std::size_t cls, std::size_t j) const {
    return member_log2_sizes_[classes_[cls].first + j];
  }

  std::vector<std::int64_t> key_of_counts(std::span<const std::uint32_t> counts) const;
  std::optional<std::size_t> find_class(std::span<const std::int64_t> key) const;
  /// Class containing the composition; throws DomainError on a size mismatch.
  std::size_t class_of_counts(std::span<const std::uint32_t> counts) const;
  /// Position of `counts` among the class members.
  std::size_t member_position(std::size_t cls, std::span<const std::uint32_t> counts) const;

  /// Sum of all class sizes; equals |X|^n.
  BigInt total_size() const;

 private:
  TypeIndex(PartitionMode mode, FamilySpec spec, std::uint32_t n)
      : mode_(mode), spec_(std::move(spec)), n_(n) {}

  void build(const EnumerationBudget& budget);

  PartitionMode mode_;
  FamilySpec spec_;
  std::uint32_t n_;
  std::optional<Grid> grid_;
  std::vector<std::vector<std::int64_t>> lattice_;
  std::size_t key_dim_ = 0;
  std::vector<std::int64_t> keys_;      // class_count x key_dim
  std::vector<std::uint32_t> members_;  // compositions, grouped by class
  std::vector<double> member_log2_sizes_;
  std::vector<TypeClass> classes_;
};

/// Throws ResourceError naming the budget when the composition count exceeds it.
void check_composition_budget(std::size_t alphabet_size, std::uint32_t n,
                              const EnumerationBudget& budget);

/// Text table, one row per class: key, center (quantized) or key/n (point),
/// member count and exact decimal size.
void write_type_index_table(const TypeIndex& index, std::ostream& out);

}  // namespace typesize
