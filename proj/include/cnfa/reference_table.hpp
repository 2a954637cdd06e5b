#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cells.hpp"
#include "error.hpp"

namespace cnfa
{

enum class record_source
{
  simulated,
  reference
};

/*! \brief One characterization point.
 *
 * SI units throughout. `status` is `ok`, `failed` (simulation error, see
 * `reason`) or `unavailable` (no netlist for the design; any values are the
 * published reference numbers). Missing values are NaN.
 */
struct characterization_record
{
  std::string cell;
  double vdd = 0.0;
  double cload = 0.0;
  double frequency = 0.0;
  double temperature = 0.0;
  double delay = std::numeric_limits<double>::quiet_NaN();
  double power = std::numeric_limits<double>::quiet_NaN();
  double pdp = std::numeric_limits<double>::quiet_NaN();
  record_source source = record_source::simulated;
  std::string status = "ok";
  std::string reason;

  bool ok() const noexcept { return status == "ok"; }
};

namespace detail
{

struct reference_row
{
  char const* design;
  std::array<double, 3> delay; // 1e-10 s
  std::array<double, 3> power; // 1e-7 W
  std::array<double, 3> pdp;   // 1e-17 J
};

inline constexpr std::array<double, 3> reference_vdd{ 0.5, 0.65, 0.8 };

inline constexpr std::array<reference_row, 9> reference_rows{ {
    { "CMOS-Bridge", { 4.9264, 1.926, 12.002 }, { 1.6830, 3.0314, 5.2361 }, { 8.2742, 5.8384, 6.2844 } },
    { "CCMOS", { 3.9300, 1.444, 9.4001 }, { 1.6369, 2.926, 5.0607 }, { 6.4329, 4.2253, 4.7571 } },
    { "TG-CMOS", { 2.3753, 0.88103, 5.4938 }, { 2.1678, 3.9688, 7.6154 }, { 5.1492, 3.4966, 4.1837 } },
    { "CNT-FA1", { 3.0340, 0.8747, 4.8074 }, { 1.5523, 4.4724, 3.1228 }, { 4.7097, 3.912, 15.013 } },
    { "CNT-FA2", { 2.1070, 0.79694, 5.8841 }, { 1.3761, 3.0466, 1.6917 }, { 2.8995, 2.4279, 9.9541 } },
    { "CN9P4G", { 0.40743, 0.29928, 0.27675 }, { 1.9720, 3.0276, 4.3138 }, { 0.80345, 0.9061, 1.1938 } },
    { "CN9P8GBUFF", { 0.43620, 0.32865, 0.27409 }, { 2.1721, 3.3545, 4.9056 }, { 0.94746, 1.1024, 1.3446 } },
    { "CN10PFS", { 0.45567, 0.34379, 0.28079 }, { 1.8339, 2.8507, 4.1671 }, { 0.83566, 0.98004, 1.1701 } },
    { "CN8P10G", { 0.27607, 0.27331, 0.86408 }, { 1.8620, 2.9572, 4.3012 }, { 0.51404, 0.80823, 3.7166 } },
} };

} // namespace detail

inline constexpr double reference_cload = 2.1e-15;
inline constexpr double reference_frequency = 250e6;
inline constexpr double reference_temperature = 25.0;

/*! \brief Designs of the published comparison table in their printed order. */
inline std::vector<std::string> reference_designs()
{
  std::vector<std::string> out;
  for ( auto const& r : detail::reference_rows )
    out.emplace_back( r.design );
  return out;
}

/*! \brief The 27 published rows (9 designs x 3 supplies), converted to SI. */
inline std::vector<characterization_record> load_reference_table()
{
  std::vector<characterization_record> out;
  for ( auto const& r : detail::reference_rows )
    for ( std::size_t v = 0; v < detail::reference_vdd.size(); ++v )
    {
      characterization_record c;
      c.cell = r.design;
      c.vdd = detail::reference_vdd[v];
      c.cload = reference_cload;
      c.frequency = reference_frequency;
      c.temperature = reference_temperature;
      c.delay = r.delay[v] * 1e-10;
      c.power = r.power[v] * 1e-7;
      c.pdp = r.pdp[v] * 1e-17;
      c.source = record_source::reference;
      out.push_back( std::move( c ) );
    }
  return out;
}

/*! \brief Reference row of a design at one of the published supplies. */
inline std::optional<characterization_record> find_reference( std::string const& design, double vdd )
{
  auto const key = normalized_cell_key( design );
  for ( auto const& r : load_reference_table() )
    if ( normalized_cell_key( r.cell ) == key && std::abs( r.vdd - vdd ) < 1e-9 )
      return r;
  return std::nullopt;
}

/*! \brief Fractional PDP improvement of `a` over `ref`: 1 - a / ref. */
inline double improvement( double pdp_a, double pdp_ref )
{
  if ( !( pdp_a > 0.0 ) || !( pdp_ref > 0.0 ) || !std::isfinite( pdp_a ) || !std::isfinite( pdp_ref ) )
    throw invalid_argument( "improvement: both PDP values must be positive" );
  return 1.0 - pdp_a / pdp_ref;
}

/*! \brief |pdp - delay * power| / pdp of a record. */
inline double pdp_mismatch( characterization_record const& r )
{
  return std::abs( r.pdp - r.delay * r.power ) / r.pdp;
}

/*! \brief Reference rows whose printed PDP disagrees with delay x power by more than `tolerance`. */
inline std::vector<characterization_record> inconsistent_reference_rows( double tolerance = 0.02 )
{
  std::vector<characterization_record> out;
  for ( auto const& r : load_reference_table() )
    if ( pdp_mismatch( r ) > tolerance )
      out.push_back( r );
  return out;
}

/*! \brief A published percentage claim: `cell` improves PDP over `reference` by `percent`. */
struct improvement_claim
{
  char const* cell;
  char const* reference;
  double vdd;
  double percent;
};

inline constexpr std::array<improvement_claim, 5> published_claims{ {
    { "CN8P10G", "CMOS-Bridge", 0.65, 86.1 },
    { "CN8P10G", "CCMOS", 0.65, 80.9 },
    { "CN8P10G", "TG-CMOS", 0.65, 76.9 },
    { "CN8P10G", "CNT-FA1", 0.65, 79.3 },
    { "CN8P10G", "CNT-FA2", 0.65, 66.7 },
} };

} // namespace cnfa
