#pragma once

#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "device_physics.hpp"
#include "error.hpp"
#include "units.hpp"

namespace cnfa
{

/*! \brief One `key = value` entry of a parameter or plan file. */
struct key_value
{
  std::string key;
  std::string value;
  std::size_t line = 0;
};


/*! \brief Reads the line-oriented `key = value` format.
 *
 * Blank lines and lines starting with `#` or `*` are ignored; `#` and `;`
 * start trailing comments. Keys are case-sensitive. Duplicate keys are an error.
 */
inline std::vector<key_value> parse_key_values( std::string_view text )
{
  std::vector<key_value> entries;
  std::size_t line_no = 0;
  std::istringstream in{ std::string( text ) };
  std::string raw;
  while ( std::getline( in, raw ) )
  {
    ++line_no;
    std::string_view line = raw;
    if ( auto const c = line.find_first_of( "#;" ); c != std::string_view::npos )
      line = line.substr( 0, c );
    line = detail::trim( line );
    if ( line.empty() || line.front() == '*' )
      continue;
    auto const eq = line.find( '=' );
    if ( eq == std::string_view::npos )
      throw parse_error( line_no, 1, "missing '='", "key = value" );
    auto const key = detail::trim( line.substr( 0, eq ) );
    auto const value = detail::trim( line.substr( eq + 1 ) );
    if ( key.empty() )
      throw parse_error( line_no, 1, "empty key" );
    if ( value.empty() )
      throw parse_error( line_no, eq + 2, "empty value for '" + std::string( key ) + "'" );
    for ( auto const& e : entries )
      if ( e.key == key )
        throw parse_error( line_no, 1, "duplicate key '" + std::string( key ) + "'" );
    entries.push_back( { std::string( key ), std::string( value ), line_no } );
  }
  return entries;
}

/*! \brief Device model parameters loaded from a file. */
struct model_set
{
  cnfet_model_params cnfet;
  mos_model_params mos;

  friend bool operator==( model_set const&, model_set const& ) = default;
};

namespace detail
{

inline double quantity_at( key_value const& kv )
{
  try
  {
    return parse_quantity( kv.value );
  }
  catch ( invalid_argument const& e )
  {
    throw parse_error( kv.line, 1, std::string( e.what() ) + " for '" + kv.key + "'" );
  }
}

template<class Fn>
void for_each_model_field( model_set& m, Fn&& fn )
{
  auto& c = m.cnfet;
  fn( "Lch", c.lch, "m" );
  fn( "Lgeff", c.lgeff, "m" );
  fn( "Lss", c.lss, "m" );
  fn( "Ldd", c.ldd, "m" );
  fn( "Kgate", c.kgate, "" );
  fn( "Tox", c.tox, "m" );
  fn( "Csub", c.csub, "F/m" );
  fn( "Efi", c.efi, "eV" );
  fn( "pitch", c.pitch, "m" );
  fn( "Wmin", c.wmin, "m" );
  fn( "k_drive", c.k_drive, "" );
  fn( "lambda_clm", c.lambda_clm, "" );
  fn( "I_off", c.i_off, "" );
  fn( "n_sub", c.n_sub, "" );
  fn( "temp_exp", c.temp_exp, "" );
  auto& p = m.mos;
  fn( "mos.vth", p.vth, "V" );
  fn( "mos.k_prime", p.k_prime, "" );
  fn( "mos.p_mobility_ratio", p.p_mobility_ratio, "" );
  fn( "mos.lambda_clm", p.lambda_clm, "" );
  fn( "mos.I_off", p.i_off, "" );
  fn( "mos.n_sub", p.n_sub, "" );
  fn( "mos.temp_exp", p.temp_exp, "" );
  fn( "mos.cox", p.cox, "" );
  fn( "mos.cj", p.cj, "" );
  fn( "mos.w_n", p.default_w_n, "m" );
  fn( "mos.l", p.default_l, "m" );
}

} // namespace detail

/*! \brief Parses a device parameter file; unspecified keys keep their defaults. */
inline model_set parse_model_params( std::string_view text )
{
  model_set m;
  for ( auto const& kv : parse_key_values( text ) )
  {
    bool found = false;
    if ( kv.key == "tube_count" )
    {
      double const v = detail::quantity_at( kv );
      if ( v < 1.0 || v != static_cast<double>( static_cast<int>( v ) ) )
        throw parse_error( kv.line, 1, "tube_count must be a positive integer" );
      m.cnfet.tube_count = static_cast<int>( v );
      found = true;
    }
    detail::for_each_model_field( m, [&]( char const* name, double& field, char const* ) {
      if ( kv.key == name )
      {
        field = detail::quantity_at( kv );
        found = true;
      }
    } );
    if ( !found )
      throw parse_error( kv.line, 1, "unknown parameter '" + kv.key + "'" );
  }
  try
  {
    m.cnfet.validate();
    m.mos.validate();
  }
  catch ( invalid_argument const& e )
  {
    throw parse_error( 0, 0, e.what() );
  }
  return m;
}

/*! \brief Writes every parameter, one per line, in the file format. */
inline std::string emit_model_params( model_set const& models )
{
  model_set m = models;
  std::ostringstream out;
  out << "# CNFET / MOS model parameters (SI, unit suffixes)\n";
  bool tube_written = false;
  detail::for_each_model_field( m, [&]( char const* name, double& field, char const* unit ) {
    if ( !tube_written && std::string_view( name ) == "k_drive" )
    {
      out << "tube_count = " << m.cnfet.tube_count << "\n";
      tube_written = true;
    }
    out << name << " = " << format_quantity( field, unit ) << "\n";
  } );
  return out.str();
}

} // namespace cnfa
