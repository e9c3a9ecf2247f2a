#include "typesize/family_io.hpp"

#include <openssl/evp.h>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "typesize/errors.hpp"

namespace typesize {

namespace {

using nlohmann::json;

struct Entry {
  double value = 0.0;
  std::optional<Rational> exact;
};

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Entry read_entry(const json& node, const std::string& where) {
  Entry e;
  if (node.is_number_integer() || node.is_number_unsigned()) {
    e.exact = node.is_number_unsigned() ? Rational(std::to_string(node.get<std::uint64_t>()))
                                        : Rational(std::to_string(node.get<std::int64_t>()));
    e.value = e.exact->get_d();
  } else if (node.is_number_float()) {
    e.value = node.get<double>();
    if (!std::isfinite(e.value)) throw SchemaError(where + " is not finite");
  } else if (node.is_string()) {
    try {
      e.exact = parse_rational(node.get<std::string>());
    } catch (const SchemaError& err) {
      throw SchemaError(where + ": " + err.what());
    }
    e.value = e.exact->get_d();
  } else {
    throw SchemaError(where + " must be a number or an exact string");
  }
  if (!std::isfinite(e.value)) throw SchemaError(where + " is not finite");
  return e;
}

const json& require(const json& doc, const char* field) {
  const auto it = doc.find(field);
  if (it == doc.end()) throw SchemaError(std::string("missing field '") + field + "'");
  return *it;
}

std::uint64_t read_count(const json& doc, const char* field) {
  const json& node = require(doc, field);
  if (!node.is_number_unsigned() && !(node.is_number_integer() && node.get<std::int64_t>() >= 0)) {
    throw SchemaError(std::string("field '") + field + "' must be a nonnegative integer");
  }
  return node.get<std::uint64_t>();
}

double read_real(const json& doc, const char* field) {
  return read_entry(require(doc, field), std::string("field '") + field + "'").value;
}

// Rows of length d; returns doubles and, when every entry is exact, rationals.
Eigen::MatrixXd read_table(const json& node, const char* field, std::size_t rows, std::size_t d,
                           std::optional<std::vector<std::vector<Rational>>>& exact) {
  if (!node.is_array()) throw SchemaError(std::string("field '") + field + "' must be an array of rows");
  if (node.size() != rows) {
    std::ostringstream msg;
    msg << "field '" << field << "' has " << node.size() << " rows, expected " << rows;
    throw SchemaError(msg.str());
  }
  Eigen::MatrixXd table(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(d));
  std::vector<std::vector<Rational>> rationals(rows);
  bool all_exact = true;
  for (std::size_t r = 0; r < rows; ++r) {
    const json& row = node[r];
    if (!row.is_array() || row.size() != d) {
      std::ostringstream msg;
      msg << "row " << r + 1 << " of '" << field << "' must have length d = " << d;
      throw SchemaError(msg.str());
    }
    for (std::size_t j = 0; j < d; ++j) {
      std::ostringstream where;
      where << field << "[" << r + 1 << "][" << j + 1 << "]";
      const Entry e = read_entry(row[j], where.str());
      table(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = e.value;
      if (e.exact) {
        rationals[r].push_back(*e.exact);
      } else {
        all_exact = false;
      }
    }
  }
  if (all_exact) exact = std::move(rationals);
  return table;
}

ExactStatMap read_exact_block(const json& node, std::size_t k, std::size_t d) {
  if (!node.is_object()) throw SchemaError("field 'exact' must be an object");
  const json& basis = require(node, "basis");
  const json& coeffs = require(node, "coeffs");
  if (!basis.is_array() || basis.size() != d) throw SchemaError("exact.basis must list one basis per coordinate");
  ExactStatMap map;
  for (std::size_t j = 0; j < d; ++j) {
    if (!basis[j].is_array() || basis[j].empty()) {
      throw SchemaError("exact.basis[" + std::to_string(j + 1) + "] must be a nonempty array");
    }
    std::vector<BasisElement> elements;
    for (const json& b : basis[j]) {
      if (!b.is_object()) throw SchemaError("basis elements must be objects with 'name' and 'hint'");
      const json& name = require(b, "name");
      if (!name.is_string()) throw SchemaError("basis element name must be a string");
      elements.push_back(BasisElement{name.get<std::string>(), read_entry(require(b, "hint"), "basis hint").value});
    }
    map.basis.push_back(std::move(elements));
  }
  if (!coeffs.is_array() || coeffs.size() != k) throw SchemaError("exact.coeffs must have one entry per symbol");
  for (std::size_t x = 0; x < k; ++x) {
    if (!coeffs[x].is_array() || coeffs[x].size() != d) {
      throw SchemaError("exact.coeffs[" + std::to_string(x + 1) + "] must have d entries");
    }
    std::vector<std::vector<Rational>> per_coord;
    for (std::size_t j = 0; j < d; ++j) {
      const json& row = coeffs[x][j];
      if (!row.is_array() || row.size() != map.basis[j].size()) {
        std::ostringstream msg;
        msg << "exact.coeffs[" << x + 1 << "][" << j + 1 << "] must have " << map.basis[j].size() << " entries";
        throw SchemaError(msg.str());
      }
      std::vector<Rational> values;
      for (const json& c : row) {
        const Entry e = read_entry(c, "exact coefficient");
        if (!e.exact) throw SchemaError("exact coefficients must be integers or exact strings");
        values.push_back(*e.exact);
      }
      per_coord.push_back(std::move(values));
    }
    map.coeffs.push_back(std::move(per_coord));
  }
  return map;
}

std::string canonical_text(const FamilyDocument& doc, std::size_t k, std::size_t d, double rho_max,
                           const Eigen::MatrixXd& table) {
  std::ostringstream out;
  out << "typesize-family 1\n";
  out << "kind=" << (doc.kind == FamilyKind::iid ? "iid" : "markov") << "\n";
  out << "alphabet_size=" << k << "\nd=" << d << "\nrho_max=" << format_double(rho_max) << "\n";
  out << (doc.kind == FamilyKind::iid ? "tau=" : "tau2=");
  for (Eigen::Index r = 0; r < table.rows(); ++r) {
    out << (r ? ";" : "");
    for (Eigen::Index j = 0; j < table.cols(); ++j) out << (j ? "," : "") << format_double(table(r, j));
  }
  out << "\n";
  if (doc.markov) out << "x0=" << doc.markov->x0() << "\n";
  if (doc.exact) {
    out << "basis=";
    for (std::size_t j = 0; j < doc.exact->basis.size(); ++j) {
      out << (j ? ";" : "");
      for (std::size_t t = 0; t < doc.exact->basis[j].size(); ++t) {
        out << (t ? "," : "") << doc.exact->basis[j][t].name << ":" << format_double(doc.exact->basis[j][t].hint);
      }
    }
    out << "\ncoeffs=";
    for (std::size_t x = 0; x < doc.exact->coeffs.size(); ++x) {
      out << (x ? ";" : "");
      for (std::size_t j = 0; j < doc.exact->coeffs[x].size(); ++j) {
        out << (j ? "|" : "");
        for (std::size_t t = 0; t < doc.exact->coeffs[x][j].size(); ++t) {
          Rational v = doc.exact->coeffs[x][j][t];
          v.canonicalize();
          out << (t ? "," : "") << v.get_str();
        }
      }
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace

std::size_t FamilyDocument::dim() const { return family ? family->dim() : markov->dim(); }

Rational parse_rational(const std::string& raw) {
  std::string text;
  for (char c : raw) {
    if (!std::isspace(static_cast<unsigned char>(c))) text.push_back(c);
  }
  if (text.empty()) throw SchemaError("empty number");
  const auto slash = text.find('/');
  auto integer = [&](const std::string& part) {
    std::size_t i = (part[0] == '-' || part[0] == '+') ? 1 : 0;
    if (i == part.size()) throw SchemaError("malformed integer '" + part + "'");
    for (std::size_t c = i; c < part.size(); ++c) {
      if (!std::isdigit(static_cast<unsigned char>(part[c]))) throw SchemaError("malformed integer '" + part + "'");
    }
    return BigInt(part[0] == '+' ? part.substr(1) : part);
  };
  if (slash != std::string::npos) {
    const BigInt num = integer(text.substr(0, slash));
    const std::string den_text = text.substr(slash + 1);
    if (den_text.empty()) throw SchemaError("malformed rational '" + text + "'");
    const BigInt den = integer(den_text);
    if (den == 0) throw SchemaError("zero denominator in '" + text + "'");
    Rational q(num, den);
    q.canonicalize();
    return q;
  }
  std::size_t i = 0;
  bool negative = false;
  if (text[i] == '-' || text[i] == '+') negative = text[i++] == '-';
  std::string digits;
  long scale = 0;
  bool any_digit = false;
  bool seen_point = false;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      any_digit = true;
      if (seen_point) --scale;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!any_digit) throw SchemaError("malformed number '" + text + "'");
  if (i < text.size()) {
    if (text[i] != 'e' && text[i] != 'E') throw SchemaError("malformed number '" + text + "'");
    const std::string exponent = text.substr(i + 1);
    try {
      std::size_t used = 0;
      const long e = std::stol(exponent, &used);
      if (used != exponent.size() || std::abs(e) > 10000) throw SchemaError("bad exponent");
      scale += e;
    } catch (const std::logic_error&) {
      throw SchemaError("malformed exponent in '" + text + "'");
    }
  }
  BigInt num(digits);
  if (negative) num = -num;
  BigInt ten_power;
  mpz_ui_pow_ui(ten_power.get_mpz_t(), 10, static_cast<unsigned long>(std::abs(scale)));
  Rational q = scale >= 0 ? Rational(num * ten_power) : Rational(num, ten_power);
  q.canonicalize();
  return q;
}

FamilyDocument parse_family_document(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& err) {
    throw SchemaError(std::string("family document is not valid JSON: ") + err.what());
  }
  if (!doc.is_object()) throw SchemaError("family document must be a JSON object");
  static const char* const kKnown[] = {"kind", "alphabet_size", "d", "tau", "tau2", "rho_max", "exact", "x0"};
  for (const auto& [key, value] : doc.items()) {
    if (std::find(std::begin(kKnown), std::end(kKnown), key) == std::end(kKnown)) {
      throw SchemaError("unknown field '" + key + "'");
    }
  }

  FamilyDocument out;
  if (doc.contains("kind")) {
    const json& kind = doc["kind"];
    if (!kind.is_string() || (kind != "iid" && kind != "markov")) throw SchemaError("kind must be \"iid\" or \"markov\"");
    out.kind = kind == "iid" ? FamilyKind::iid : FamilyKind::markov;
  } else if (doc.contains("tau2")) {
    out.kind = FamilyKind::markov;
  }
  const std::uint64_t k = read_count(doc, "alphabet_size");
  const std::uint64_t d = read_count(doc, "d");
  if (k < 2) throw SchemaError("alphabet_size must be at least 2");
  if (d < 1) throw SchemaError("d must be at least 1");
  if (k > 1'000'000) throw SchemaError("alphabet_size is unreasonably large");
  const double rho_max = read_real(doc, "rho_max");

  Eigen::MatrixXd table;
  std::optional<std::vector<std::vector<Rational>>> exact_tau;
  if (out.kind == FamilyKind::iid) {
    if (doc.contains("tau2") || doc.contains("x0")) throw SchemaError("i.i.d. documents take 'tau', not 'tau2'/'x0'");
    table = read_table(require(doc, "tau"), "tau", k, d, exact_tau);
    out.family.emplace(table, rho_max);
    if (doc.contains("exact")) {
      out.exact = read_exact_block(doc["exact"], k, d);
    } else if (exact_tau) {
      out.exact = rational_stat_map(*exact_tau);
    }
  } else {
    if (doc.contains("tau") || doc.contains("exact")) throw SchemaError("Markov documents take 'tau2' and 'x0' only");
    table = read_table(require(doc, "tau2"), "tau2", k * k, d, exact_tau);
    const std::uint64_t x0 = read_count(doc, "x0");
    out.markov.emplace(k, table, rho_max, static_cast<Symbol>(x0));
  }
  out.canonical = canonical_text(out, k, d, rho_max, table);
  out.hash = sha256(out.canonical);
  return out;
}

FamilyDocument load_family_document(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read family spec '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("error while reading '" + path.string() + "'");
  return parse_family_document(buffer.str());
}

SpecHash sha256(const std::string& bytes) {
  SpecHash out{};
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), out.data(), &length, EVP_sha256(), nullptr) != 1 ||
      length != out.size()) {
    throw Error("SHA-256 computation failed");
  }
  return out;
}

std::string to_hex(const SpecHash& hash) {
  static const char* const kDigits = "0123456789abcdef";
  std::string out;
  for (std::uint8_t b : hash) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

}  // namespace typesize
