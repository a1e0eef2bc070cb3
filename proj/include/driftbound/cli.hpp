#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "driftbound/bounds.hpp"
#include "driftbound/filter.hpp"
#include "driftbound/oracle.hpp"
#include "driftbound/riccati.hpp"
#include "driftbound/wellposed.hpp"

namespace driftbound {

/// Exit codes of dispatch().
inline constexpr int kExitOk = 0;
inline constexpr int kExitNotGuaranteed = 1;  // `check` only
inline constexpr int kExitError = 2;

struct RunConfig {
  std::string subcommand;  // check | region | bound | riccati | filter | oracle
  std::filesystem::path params;
  Regime regime = Regime::F;
  std::optional<std::filesystem::path> output;
  std::optional<std::size_t> steps;
  std::size_t n = 100000;
  double dt = 1e-3;
  std::uint64_t seed = 42;
  std::optional<std::string> format;  // json | csv
  std::string axis1;
  std::string axis2;
  std::string target = "d";  // d | gauss | utility
  std::vector<double> pi;     // utility target; default all ones
  std::vector<double> m;      // d target; default m0
  std::optional<std::filesystem::path> gauss_spec;
  std::size_t threads = 0;
};

/// Runs one subcommand. The artifact goes to `config.output` (written to a
/// temporary file and renamed into place) or to `out`; diagnostics go to
/// `err`.
int dispatch(const RunConfig& config, std::ostream& out, std::ostream& err);

// Emitters. JSON objects keep insertion order; non-finite numbers are
// written as the string "inf" / "-inf" / "nan".
nlohmann::ordered_json verdict_json(const Verdict& verdict);
nlohmann::ordered_json bound_json(const BoundReport& report);
nlohmann::ordered_json estimate_json(const McEstimate& estimate);

/// t, A_11..A_dd, B_1..B_d, C for every grid point with a value.
void write_riccati_csv(std::ostream& os, const RiccatiSolution& sol, int dim);

/// t, Q_11..Q_dd, limit; `limit` is "left" / "right" on the two rows emitted
/// at an expert arrival and "regular" elsewhere.
void write_filter_csv(std::ostream& os, const CovariancePath& path, int dim);

/// <axis1>,<axis2>,status,reason,delta_psi,T_E,max_lambda; empty fields
/// where a value does not apply.
void write_region_csv(std::ostream& os, const RegionGrid& grid);
RegionGrid read_region_csv(std::istream& is);

/// Shortest round-trip representation; "inf", "-inf", "nan" otherwise.
std::string format_number(double x);

void write_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace driftbound
