#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "error.hpp"

namespace cnfa
{

namespace constants
{
constexpr double pi = 3.14159265358979323846;
constexpr double boltzmann = 1.380649e-23;      // J/K
constexpr double electron_charge = 1.602176634e-19; // C
constexpr double vacuum_permittivity = 8.8541878128e-12; // F/m
constexpr double zero_celsius = 273.15;          // K
} // namespace constants

namespace detail
{

inline std::string to_lower( std::string_view s )
{
  std::string out( s );
  std::transform( out.begin(), out.end(), out.begin(), []( unsigned char c ) { return static_cast<char>( std::tolower( c ) ); } );
  return out;
}

inline std::string_view trim( std::string_view s )
{
  auto const b = s.find_first_not_of( " \t\r\n" );
  if ( b == std::string_view::npos )
    return {};
  auto const e = s.find_last_not_of( " \t\r\n" );
  return s.substr( b, e - b + 1 );
}

inline std::vector<std::string> split( std::string_view s, char sep )
{
  std::vector<std::string> out;
  std::size_t start = 0;
  while ( true )
  {
    auto const pos = s.find( sep, start );
    auto const piece = trim( s.substr( start, pos == std::string_view::npos ? std::string_view::npos : pos - start ) );
    out.emplace_back( piece );
    if ( pos == std::string_view::npos )
      break;
    start = pos + 1;
  }
  return out;
}

inline bool is_known_unit( std::string_view u )
{
  static constexpr std::array<std::string_view, 17> units = {
      "", "f", "v", "s", "m", "a", "w", "j", "hz", "ohm", "ev", "f/m", "a/v2", "a/v^2", "1/v", "/v", "c" };
  return std::find( units.begin(), units.end(), u ) != units.end();
}

inline bool multiplier_of( char c, double& m )
{
  switch ( c )
  {
  case 'f': m = 1e-15; return true;
  case 'p': m = 1e-12; return true;
  case 'n': m = 1e-9; return true;
  case 'u': m = 1e-6; return true;
  case 'm': m = 1e-3; return true;
  case 'k': m = 1e3; return true;
  case 'g': m = 1e9; return true;
  case 't': m = 1e12; return true;
  default: return false;
  }
}

/* Parses the scale factor of a unit tail such as `fF`, `nm`, `MHz`, `meg`.
   Returns false if the tail is not a recognised suffix. */
inline bool scale_of_suffix( std::string_view tail, double& scale )
{
  std::string const rest = to_lower( tail );
  if ( rest == "mhz" ) { scale = 1e6; return true; }
  if ( rest == "ghz" ) { scale = 1e9; return true; }
  if ( rest == "khz" ) { scale = 1e3; return true; }
  if ( rest.rfind( "meg", 0 ) == 0 && is_known_unit( std::string_view( rest ).substr( 3 ) ) )
  {
    scale = 1e6;
    return true;
  }
  double m = 1.0;
  if ( !rest.empty() && multiplier_of( rest[0], m ) && is_known_unit( std::string_view( rest ).substr( 1 ) ) )
  {
    scale = m;
    return true;
  }
  if ( is_known_unit( rest ) )
  {
    scale = 1.0;
    return true;
  }
  return false;
}

} // namespace detail

/*! \brief Parses a number with an optional SPICE multiplier and unit suffix.
 *
 * Accepts `2.1fF`, `32nm`, `0.65V`, `250MHz`, `40pF/m`, `6eV`, `1meg`, `16`.
 * The multiplier set is `f p n u m k meg g t`; a bare `M` is milli, as in SPICE,
 * except in the explicit spellings `MHz`/`GHz`/`kHz`. Returns the value in SI.
 * Throws `cnfa::invalid_argument` on malformed text.
 */
inline double parse_quantity( std::string_view text )
{
  if ( text.empty() )
    throw invalid_argument( "empty numeric value" );
  double value = 0.0;
  auto const* first = text.data();
  auto const* last = text.data() + text.size();
  if ( *first == '+' )
    ++first;
  auto const [ptr, ec] = std::from_chars( first, last, value );
  if ( ec != std::errc{} || ptr == first )
    throw invalid_argument( "malformed number '" + std::string( text ) + "'" );
  double scale = 1.0;
  if ( !detail::scale_of_suffix( std::string_view( ptr, static_cast<std::size_t>( last - ptr ) ), scale ) )
    throw invalid_argument( "bad unit suffix '" + std::string( ptr, last ) + "'" );
  std::string_view const mantissa( first, static_cast<std::size_t>( ptr - first ) );
  if ( scale != 1.0 && mantissa.find_first_of( "eE" ) == std::string_view::npos )
  {
    // re-read with a decimal exponent so `32nm` is exactly the double nearest 32e-9
    auto const exponent = static_cast<int>( std::lround( std::log10( scale ) ) );
    std::string const exact = std::string( mantissa ) + "e" + std::to_string( exponent );
    std::from_chars( exact.data(), exact.data() + exact.size(), value );
  }
  else
    value *= scale;
  if ( !std::isfinite( value ) )
    throw invalid_argument( "non-finite value '" + std::string( text ) + "'" );
  return value;
}

/*! \brief Formats an SI value with an engineering multiplier and a unit, e.g. `2.1fF`.
 *
 * Output is re-parseable by `parse_quantity` and stable: twelve significant digits.
 */
inline std::string format_quantity( double value, std::string_view unit = {} )
{
  char buf[64];
  std::string u( unit );
  if ( value == 0.0 || !std::isfinite( value ) )
  {
    std::snprintf( buf, sizeof buf, "%.12g", value );
    return buf + u;
  }
  if ( detail::to_lower( unit ) == "hz" )
  {
    double const a = std::abs( value );
    char const* prefix = a >= 1e9 ? "G" : a >= 1e6 ? "M" : a >= 1e3 ? "k" : "";
    double const div = a >= 1e9 ? 1e9 : a >= 1e6 ? 1e6 : a >= 1e3 ? 1e3 : 1.0;
    std::snprintf( buf, sizeof buf, "%.12g%sHz", value / div, prefix );
    return buf;
  }
  struct step
  {
    double scale;
    char const* prefix;
  };
  static constexpr std::array<step, 9> steps = { { { 1e12, "t" }, { 1e9, "g" }, { 1e6, "meg" }, { 1e3, "k" }, { 1.0, "" },
                                                   { 1e-3, "m" }, { 1e-6, "u" }, { 1e-9, "n" }, { 1e-12, "p" } } };
  double const a = std::abs( value );
  step chosen{ 1e-15, "f" };
  for ( auto const& s : steps )
  {
    if ( a >= s.scale * ( 1.0 - 1e-12 ) )
    {
      chosen = s;
      break;
    }
  }
  double m = 1.0;
  if ( chosen.scale == 1.0 && !u.empty() && detail::multiplier_of( static_cast<char>( std::tolower( static_cast<unsigned char>( u[0] ) ) ), m ) )
  {
    // `1F` or `1m` would read back as a multiplier; emit the bare SI number.
    std::snprintf( buf, sizeof buf, "%.12g", value );
    return buf;
  }
  std::snprintf( buf, sizeof buf, "%.12g%s", value / chosen.scale, chosen.prefix );
  return buf + u;
}

} // namespace cnfa
