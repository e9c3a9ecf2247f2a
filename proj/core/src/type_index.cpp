#include "typesize/type_index.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "typesize/errors.hpp"

namespace typesize {

namespace {

bool key_less(std::span<const std::int64_t> a, std::span<const std::int64_t> b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

const char* to_string(PartitionMode mode) {
  switch (mode) {
    case PartitionMode::quantized:
      return "quantized";
    case PartitionMode::point:
      return "point";
    case PartitionMode::markov:
      return "markov";
  }
  return "unknown";
}

PartitionMode parse_partition_mode(const std::string& text) {
  if (text == "quantized") return PartitionMode::quantized;
  if (text == "point") return PartitionMode::point;
  if (text == "markov") return PartitionMode::markov;
  throw DomainError("unknown mode '" + text + "' (expected quantized, point or markov)");
}

void check_composition_budget(std::size_t alphabet_size, std::uint32_t n,
                              const EnumerationBudget& budget) {
  const BigInt count = composition_count(alphabet_size, n);
  if (count > BigInt(std::to_string(budget.compositions))) {
    std::ostringstream msg;
    msg << "blocklength n = " << n << " over |X| = " << alphabet_size << " has "
        << to_decimal(count) << " compositions, exceeding budget-compositions = "
        << budget.compositions;
    throw ResourceError(msg.str());
  }
}

TypeIndex TypeIndex::quantized(const FamilySpec& spec, const Grid& grid,
                               const EnumerationBudget& budget) {
  if (grid.dim() != spec.dim()) {
    throw DomainError("grid dimension does not match the family dimension");
  }
  TypeIndex index(PartitionMode::quantized, spec, grid.n);
  index.grid_ = grid;
  index.key_dim_ = spec.dim();
  index.build(budget);
  return index;
}

TypeIndex TypeIndex::point(const FamilySpec& spec, std::vector<std::vector<std::int64_t>> lattice,
                           std::uint32_t n, const EnumerationBudget& budget) {
  if (n < 1) throw DomainError("blocklength must be at least 1");
  if (lattice.size() != spec.alphabet_size() || lattice.empty()) {
    throw DomainError("lattice map must have one row per symbol");
  }
  const std::size_t width = lattice.front().size();
  for (const auto& row : lattice) {
    if (row.size() != width || width == 0) throw DomainError("lattice rows must share a positive width");
  }
  TypeIndex index(PartitionMode::point, spec, n);
  index.lattice_ = std::move(lattice);
  index.key_dim_ = width;
  index.build(budget);
  return index;
}

std::span<const std::int64_t> TypeIndex::key(std::size_t i) const {
  return {keys_.data() + i * key_dim_, key_dim_};
}

std::span<const std::uint32_t> TypeIndex::member(std::size_t cls, std::size_t j) const {
  const std::size_t k = alphabet_size();
  return {members_.data() + (classes_[cls].first + j) * k, k};
}

std::vector<std::int64_t> TypeIndex::key_of_counts(std::span<const std::uint32_t> counts) const {
  if (mode_ == PartitionMode::quantized) {
    return cuboid_index_of(*grid_, suffstat_of_counts(spec_, counts));
  }
  std::vector<std::int64_t> key(key_dim_, 0);
  for (std::size_t x = 0; x < counts.size(); ++x) {
    if (counts[x] == 0) continue;
    for (std::size_t j = 0; j < key_dim_; ++j) {
      std::int64_t term = 0;
      if (__builtin_mul_overflow(static_cast<std::int64_t>(counts[x]), lattice_[x][j], &term) ||
          __builtin_add_overflow(key[j], term, &key[j])) {
        throw ResourceError("lattice key overflows 64-bit integers");
      }
    }
  }
  return key;
}

std::optional<std::size_t> TypeIndex::find_class(std::span<const std::int64_t> key) const {
  if (key.size() != key_dim_) return std::nullopt;
  std::size_t lo = 0;
  std::size_t hi = classes_.size();
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (key_less(this->key(mid), key)) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  if (lo < classes_.size() && std::ranges::equal(this->key(lo), key)) return lo;
  return std::nullopt;
}

std::size_t TypeIndex::class_of_counts(std::span<const std::uint32_t> counts) const {
  if (counts.size() != alphabet_size()) throw DomainError("composition has the wrong alphabet size");
  const auto total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  if (total != n_) {
    std::ostringstream msg;
    msg << "sequence length " << total << " does not match index blocklength " << n_;
    throw DomainError(msg.str());
  }
  const auto found = find_class(key_of_counts(counts));
  if (!found) throw DomainError("composition does not belong to any class of the index");
  return *found;
}

std::size_t TypeIndex::member_position(std::size_t cls, std::span<const std::uint32_t> counts) const {
  std::size_t lo = 0;
  std::size_t hi = classes_[cls].count;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (colex_less(member(cls, mid), counts)) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  if (lo == classes_[cls].count || !std::ranges::equal(member(cls, lo), counts)) {
    throw DomainError("composition is not a member of the class");
  }
  return lo;
}

BigInt TypeIndex::total_size() const {
  BigInt total = 0;
  for (const auto& c : classes_) total += c.size;
  return total;
}

void TypeIndex::build(const EnumerationBudget& budget) {
  const std::size_t k = alphabet_size();
  check_composition_budget(k, n_, budget);

  std::vector<std::uint32_t> all;     // compositions in colex order
  std::vector<std::int64_t> all_keys;  // one key per composition
  for_each_composition(k, n_, [&](std::span<const std::uint32_t> counts) {
    all.insert(all.end(), counts.begin(), counts.end());
    const auto key = key_of_counts(counts);
    all_keys.insert(all_keys.end(), key.begin(), key.end());
  });
  const std::size_t total = all.size() / k;

  // Stable: members keep colex order inside each class.
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto key_at = [&](std::size_t i) {
    return std::span<const std::int64_t>(all_keys.data() + i * key_dim_, key_dim_);
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return key_less(key_at(a), key_at(b)); });

  members_.clear();
  members_.reserve(all.size());
  member_log2_sizes_.clear();
  member_log2_sizes_.reserve(total);
  BigInt coefficient;
  classes_.clear();
  keys_.clear();
  for (std::size_t pos = 0; pos < total; ++pos) {
    const std::size_t idx = order[pos];
    const std::span<const std::uint32_t> counts(all.data() + idx * k, k);
    if (classes_.empty() || !std::ranges::equal(key_at(idx), key(classes_.size() - 1))) {
      classes_.push_back(TypeClass{pos, 0, 0});
      const auto key_span = key_at(idx);
      keys_.insert(keys_.end(), key_span.begin(), key_span.end());
    }
    TypeClass& cls = classes_.back();
    ++cls.count;
    coefficient = multinomial(counts);
    cls.size += coefficient;
    member_log2_sizes_.push_back(log2(coefficient));
    members_.insert(members_.end(), counts.begin(), counts.end());
  }
}

void write_type_index_table(const TypeIndex& index, std::ostream& out) {
  out << "# typesize type-index v1\n";
  out << "# mode=" << to_string(index.mode()) << " n=" << index.n()
      << " classes=" << index.class_count();
  if (index.grid()) out << " s=" << index.grid()->s;
  out << "\n";
  out << "# key\tcoordinates\tmembers\tsize\n";
  const auto old_precision = out.precision(17);
  for (std::size_t i = 0; i < index.class_count(); ++i) {
    const auto key = index.key(i);
    for (std::size_t j = 0; j < key.size(); ++j) out << (j ? "," : "") << key[j];
    out << '\t';
    if (index.grid()) {
      const Eigen::VectorXd center =
          center_of_index(*index.grid(), std::vector<std::int64_t>(key.begin(), key.end()));
      for (Eigen::Index j = 0; j < center.size(); ++j) out << (j ? "," : "") << center[j];
    } else {
      for (std::size_t j = 0; j < key.size(); ++j) {
        out << (j ? "," : "") << static_cast<double>(key[j]) / static_cast<double>(index.n());
      }
    }
    out << '\t' << index.type_class(i).count << '\t' << to_decimal(index.type_class(i).size) << '\n';
  }
  out.precision(old_precision);
}

}  // namespace typesize
