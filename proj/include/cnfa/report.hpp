#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "reference_table.hpp"
#include "units.hpp"

namespace cnfa
{

enum class report_format
{
  csv,
  table2,
  plotdata
};

enum class report_quantity
{
  delay,
  power,
  pdp
};

inline report_format report_format_from( std::string_view s )
{
  if ( s == "csv" ) return report_format::csv;
  if ( s == "table2" ) return report_format::table2;
  if ( s == "plotdata" ) return report_format::plotdata;
  throw invalid_argument( "unknown report format '" + std::string( s ) + "'" );
}

namespace detail
{

inline std::string number( double v, char const* fmt = "%.10g" )
{
  if ( std::isnan( v ) )
    return {};
  char buf[64];
  std::snprintf( buf, sizeof buf, fmt, v );
  return buf;
}

inline std::string csv_field( std::string const& s )
{
  if ( s.find_first_of( ",\"\n" ) == std::string::npos )
    return s;
  std::string out = "\"";
  for ( char c : s )
  {
    if ( c == '"' )
      out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

inline std::vector<std::string> csv_split( std::string_view line, std::size_t line_no )
{
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for ( std::size_t i = 0; i < line.size(); ++i )
  {
    char const c = line[i];
    if ( quoted )
    {
      if ( c == '"' && i + 1 < line.size() && line[i + 1] == '"' )
      {
        cur += '"';
        ++i;
      }
      else if ( c == '"' )
        quoted = false;
      else
        cur += c;
    }
    else if ( c == '"' )
      quoted = true;
    else if ( c == ',' )
    {
      out.push_back( std::move( cur ) );
      cur.clear();
    }
    else
      cur += c;
  }
  if ( quoted )
    throw parse_error( line_no, line.size(), "unterminated quoted field" );
  out.push_back( std::move( cur ) );
  return out;
}

inline double quantity_of( characterization_record const& r, report_quantity q )
{
  switch ( q )
  {
  case report_quantity::delay: return r.delay;
  case report_quantity::power: return r.power;
  case report_quantity::pdp: return r.pdp;
  }
  return r.pdp;
}

inline constexpr char const* csv_header =
    "cell,vdd_v,cload_f,frequency_hz,temperature_c,delay_s,power_w,pdp_j,source,status,reason";

} // namespace detail

inline std::string emit_csv( std::vector<characterization_record> const& records )
{
  std::ostringstream s;
  s << detail::csv_header << "\n";
  for ( auto const& r : records )
    s << detail::csv_field( r.cell ) << ',' << detail::number( r.vdd ) << ',' << detail::number( r.cload ) << ','
      << detail::number( r.frequency ) << ',' << detail::number( r.temperature ) << ',' << detail::number( r.delay ) << ','
      << detail::number( r.power ) << ',' << detail::number( r.pdp ) << ','
      << ( r.source == record_source::simulated ? "simulated" : "reference" ) << ',' << r.status << ','
      << detail::csv_field( r.reason ) << "\n";
  return s.str();
}

/*! \brief Reads records written by `emit_csv`. */
inline std::vector<characterization_record> parse_csv_records( std::string_view text )
{
  std::istringstream in{ std::string( text ) };
  std::string line;
  std::size_t line_no = 0;
  std::vector<characterization_record> out;
  while ( std::getline( in, line ) )
  {
    ++line_no;
    if ( !line.empty() && line.back() == '\r' )
      line.pop_back();
    if ( line_no == 1u )
    {
      if ( line != detail::csv_header )
        throw parse_error( 1, 1, "unexpected CSV header", detail::csv_header );
      continue;
    }
    if ( line.empty() )
      continue;
    auto const f = detail::csv_split( line, line_no );
    if ( f.size() != 11u )
      throw parse_error( line_no, 1, "expected 11 fields, found " + std::to_string( f.size() ) );
    auto num = [&]( std::size_t i ) {
      if ( f[i].empty() )
        return std::numeric_limits<double>::quiet_NaN();
      try
      {
        return parse_quantity( f[i] );
      }
      catch ( invalid_argument const& e )
      {
        throw parse_error( line_no, i + 1, e.what() );
      }
    };
    characterization_record r;
    r.cell = f[0];
    r.vdd = num( 1 );
    r.cload = num( 2 );
    r.frequency = num( 3 );
    r.temperature = num( 4 );
    r.delay = num( 5 );
    r.power = num( 6 );
    r.pdp = num( 7 );
    if ( f[8] == "simulated" )
      r.source = record_source::simulated;
    else if ( f[8] == "reference" )
      r.source = record_source::reference;
    else
      throw parse_error( line_no, 9, "bad source '" + f[8] + "'", "simulated or reference" );
    if ( f[9] != "ok" && f[9] != "failed" && f[9] != "unavailable" )
      throw parse_error( line_no, 10, "bad status '" + f[9] + "'", "ok, failed or unavailable" );
    r.status = f[9];
    r.reason = f[10];
    out.push_back( std::move( r ) );
  }
  if ( line_no == 0u )
    throw parse_error( 1, 1, "empty CSV" );
  return out;
}

/*! \brief Quantity-major blocks (Delay, Power, PDP) with one row per design and one column per supply.
 *
 * Values use the printed scalings E-10 s, E-7 W and E-17 J. All records must
 * share one load, frequency and temperature.
 */
inline std::string emit_table2( std::vector<characterization_record> const& records )
{
  auto const& first = records.front();
  for ( auto const& r : records )
    if ( r.cload != first.cload || r.frequency != first.frequency || r.temperature != first.temperature )
      throw invalid_argument( "table2 layout needs a single load/frequency/temperature point" );

  std::vector<std::string> designs;
  std::set<double> supplies;
  std::map<std::pair<std::string, double>, characterization_record const*> cells;
  for ( auto const& r : records )
  {
    if ( std::find( designs.begin(), designs.end(), r.cell ) == designs.end() )
      designs.push_back( r.cell );
    supplies.insert( r.vdd );
    if ( !cells.emplace( std::pair{ r.cell, r.vdd }, &r ).second )
      throw invalid_argument( "table2 layout: duplicate record for " + r.cell + " at " + format_quantity( r.vdd, "V" ) );
  }

  std::ostringstream s;
  s << "# frequency=" << format_quantity( first.frequency, "Hz" ) << " cload=" << format_quantity( first.cload, "F" )
    << " temperature=" << first.temperature << "C\n";
  s << "quantity,design";
  for ( double v : supplies )
    s << ",vdd=" << format_quantity( v, "V" );
  s << "\n";
  struct block
  {
    char const* title;
    report_quantity q;
    double scale;
  };
  for ( auto const& b : { block{ "Delay (E-10 s)", report_quantity::delay, 1e-10 },
                          block{ "Power (E-7 W)", report_quantity::power, 1e-7 },
                          block{ "PDP (E-17 J)", report_quantity::pdp, 1e-17 } } )
    for ( auto const& d : designs )
    {
      s << b.title << ',' << detail::csv_field( d );
      for ( double v : supplies )
      {
        s << ',';
        auto const it = cells.find( { d, v } );
        if ( it == cells.end() )
          s << '-';
        else if ( it->second->status == "failed" )
          s << "fail";
        else
        {
          double const x = detail::quantity_of( *it->second, b.q );
          s << ( std::isnan( x ) ? std::string( "-" ) : detail::number( x / b.scale, "%.5g" ) );
        }
      }
      s << "\n";
    }
  return s.str();
}

/*! \brief One plot series file: the swept axis as x, one column per cell.
 *
 * Exactly one of vdd, load, frequency and temperature may vary across the
 * records. Lines starting with `#` are headers.
 */
inline std::string emit_plotdata( std::vector<characterization_record> const& records, report_quantity q )
{
  struct axis
  {
    char const* name;
    double scale;
    double characterization_record::*field;
  };
  axis const axes[] = { { "vdd_V", 1.0, &characterization_record::vdd },
                        { "cload_fF", 1e-15, &characterization_record::cload },
                        { "freq_MHz", 1e6, &characterization_record::frequency },
                        { "temp_C", 1.0, &characterization_record::temperature } };
  axis const* swept = nullptr;
  for ( auto const& a : axes )
  {
    std::set<double> values;
    for ( auto const& r : records )
      values.insert( r.*a.field );
    if ( values.size() > 1u )
    {
      if ( swept )
        throw invalid_argument( "plotdata needs exactly one swept axis" );
      swept = &a;
    }
  }
  if ( !swept )
    swept = &axes[0];

  std::vector<std::string> cells;
  std::set<double> xs;
  std::map<std::pair<double, std::string>, double> value;
  for ( auto const& r : records )
  {
    if ( std::find( cells.begin(), cells.end(), r.cell ) == cells.end() )
      cells.push_back( r.cell );
    xs.insert( r.*swept->field );
    value[{ r.*swept->field, r.cell }] = r.ok() || r.status == "unavailable" ? detail::quantity_of( r, q )
                                                                            : std::numeric_limits<double>::quiet_NaN();
  }
  char const* const qname = q == report_quantity::delay ? "delay_s" : q == report_quantity::power ? "power_W" : "pdp_J";
  std::ostringstream s;
  s << "# x=" << swept->name << " y=" << qname << "\n# " << swept->name;
  for ( auto const& c : cells )
    s << ' ' << c;
  s << "\n";
  for ( double x : xs )
  {
    s << detail::number( x / swept->scale, "%.6g" );
    for ( auto const& c : cells )
    {
      auto const it = value.find( { x, c } );
      s << ' ' << ( it == value.end() || std::isnan( it->second ) ? std::string( "nan" ) : detail::number( it->second, "%.6g" ) );
    }
    s << "\n";
  }
  return s.str();
}

/*! \brief Renders records in the requested format; `q` selects the plotted quantity. */
inline std::string emit_report( std::vector<characterization_record> const& records, report_format f,
                                report_quantity q = report_quantity::pdp )
{
  if ( records.empty() )
    throw invalid_argument( "emit_report: no records" );
  switch ( f )
  {
  case report_format::csv: return emit_csv( records );
  case report_format::table2: return emit_table2( records );
  case report_format::plotdata: return emit_plotdata( records, q );
  }
  throw invalid_argument( "unknown report format" );
}

} // namespace cnfa
